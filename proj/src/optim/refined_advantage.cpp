#include "optim/refined_advantage.hpp"

#include <cmath>
#include <limits>

#include "common/errors.hpp"
#include "optim/advantages.hpp"
#include "optim/grpo.hpp"
#include "optim/sdpo.hpp"

namespace rapo {

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

RefinedAdvantageReport refined_advantage_check(const SequencePolicy& policy,
                                               const PolicyParams& student,
                                               const PolicyParams& teacher, const Rollout& worst,
                                               const TokenSeq& feedback, double eta,
                                               TokenId separator, double seq_advantage) {
  const Observation obs = worst.context.observation();
  const TokenSeq action = worst.action_tokens();
  if (action.empty()) throw InputError("empty rollout");
  const auto teacher_dists =
      teacher_distributions(policy, teacher, obs, feedback, action, separator);

  SdpoConfig full;
  full.top_k = policy.vocab_size();
  full.loss_cap = std::numeric_limits<double>::infinity();
  full.eta = eta;
  const std::vector<Rollout> single{worst};
  const SdpoResult sd = sdpo_topk_loss(policy, student, teacher_dists, worst, full);

  RefinedAdvantageReport rep;
  rep.sd_gradient = sd.grad;
  rep.max_abs_sd_gradient = sd.grad.size() ? sd.grad.cwiseAbs().maxCoeff() : 0.0;

  const int V = student.vocab_size();
  const double inv_len = 1.0 / static_cast<double>(action.size());
  Matrix expected = Matrix::Zero(student.weights.rows(), student.weights.cols());
  Matrix sampled = expected;
  Matrix macro_refined = expected;
  const std::span<const TokenId> all(action);
  for (std::size_t t = 0; t < action.size(); ++t) {
    const Vector f = policy.features(obs, all.first(t));
    const TokenDistribution p = policy.step(student, obs, all.first(t));
    const TokenDistribution& q = teacher_dists[t];
    // Gradient of the tail-free loss = E_a[grad log pi(a) * log(pi(a)/q(a))].
    Vector dz = Vector::Zero(V);
    for (int a = 0; a < V; ++a) {
      const double pa = p.probabilities[a];
      if (pa <= 0.0) continue;
      const double token_adv = q.log_probabilities[a] - p.log_probabilities[a];
      dz += pa * (-token_adv) * softmax_score(p, a);
    }
    expected.noalias() += inv_len * dz * f.transpose();

    const TokenId tok = action[t];
    const double token_adv = q.log_probabilities[tok] - p.log_probabilities[tok];
    rep.token_advantages.push_back(token_adv);
    const Vector score = softmax_score(p, tok);
    sampled.noalias() += inv_len * (-token_adv) * score * f.transpose();
    macro_refined.noalias() += inv_len * seq_advantage * score * f.transpose();
  }
  rep.identity_discrepancy = max_abs_diff(sd.grad, expected);
  rep.sampled_discrepancy = max_abs_diff(sd.grad, sampled);

  GrpoConfig g;
  g.group_size = 1;
  g.beta = 0.0;
  AdvantageSet adv;
  adv.sequence = {seq_advantage};
  const SurrogateResult macro = grpo_surrogate(policy, student, student, student, single, adv, g);
  rep.macro_direction = -macro.grad;
  rep.combined_direction = rep.macro_direction - eta * sd.grad;
  rep.macro_gap = max_abs_diff(rep.combined_direction, rep.macro_direction);

  const Matrix refined = macro_refined - eta * expected;
  rep.combined_discrepancy = max_abs_diff(rep.combined_direction, refined);
  return rep;
}

}  // namespace rapo
