#include "optim/sdpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/errors.hpp"

namespace rapo {

TokenDistribution teacher_distribution(const SequencePolicy& policy, const PolicyParams& teacher,
                                       const Observation& context, const TokenSeq& feedback,
                                       std::span<const TokenId> prefix, TokenId separator) {
  const Observation conditioned{condition_with_feedback(context.tokens, feedback, separator),
                                context.flags};
  return policy.step(teacher, conditioned, prefix);
}

std::vector<TokenDistribution> teacher_distributions(const SequencePolicy& policy,
                                                     const PolicyParams& teacher,
                                                     const Observation& context,
                                                     const TokenSeq& feedback,
                                                     const TokenSeq& action, TokenId separator) {
  const Observation conditioned{condition_with_feedback(context.tokens, feedback, separator),
                                context.flags};
  std::vector<TokenDistribution> out;
  out.reserve(action.size());
  const std::span<const TokenId> all(action);
  for (std::size_t t = 0; t < action.size(); ++t)
    out.push_back(policy.step(teacher, conditioned, all.first(t)));
  return out;
}

std::vector<TokenId> top_k_tokens(const TokenDistribution& source, int k) {
  std::vector<TokenId> ids;
  for (int i = 0; i < source.size(); ++i)
    if (source.probabilities[i] > 0.0 || std::isfinite(source.log_probabilities[i]))
      ids.push_back(i);
  std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
    return source.probabilities[a] > source.probabilities[b];
  });
  if (static_cast<int>(ids.size()) > k) ids.resize(static_cast<std::size_t>(k));
  return ids;
}

namespace {

constexpr double kTailSlack = 1e-9;

double xlogx_over(double p, double q) {
  if (p <= 0.0) return 0.0;
  if (q <= 0.0) throw NumericError("teacher assigns zero mass where the student does not");
  return p * std::log(p / q);
}

}  // namespace

TopKTerms topk_divergence(const TokenDistribution& p, const TokenDistribution& q,
                          std::span<const TokenId> top) {
  if (p.size() != q.size()) throw ConfigError("student/teacher vocabulary mismatch");
  std::vector<std::uint8_t> in_head(static_cast<std::size_t>(p.size()), 0);
  TopKTerms out;
  double p_head = 0.0;
  double q_head = 0.0;
  for (TokenId a : top) {
    in_head[static_cast<std::size_t>(a)] = 1;
    p_head += p.probabilities[a];
    q_head += q.probabilities[a];
    out.head += xlogx_over(p.probabilities[a], q.probabilities[a]);
  }
  if (1.0 - p_head < -kTailSlack || 1.0 - q_head < -kTailSlack)
    throw NumericError("top-K head mass exceeds 1");
  // The tail mass is accumulated over the complement rather than taken as
  // 1 - head, so an empty tail is exactly zero.
  for (int a = 0; a < p.size(); ++a) {
    if (in_head[static_cast<std::size_t>(a)]) continue;
    out.p_tail += p.probabilities[a];
    out.q_tail += q.probabilities[a];
  }
  out.tail = xlogx_over(out.p_tail, out.q_tail);
  return out;
}

SdpoResult sdpo_topk_loss(const SequencePolicy& policy, const PolicyParams& student,
                          std::span<const TokenDistribution> teacher_per_position,
                          const Rollout& worst, const SdpoConfig& cfg) {
  const Observation obs = worst.context.observation();
  const TokenSeq action = worst.action_tokens();
  if (teacher_per_position.size() != action.size())
    throw InputError("need one teacher distribution per rollout position");
  SdpoResult res;
  res.grad = Matrix::Zero(student.weights.rows(), student.weights.cols());
  const double inv_len = 1.0 / static_cast<double>(action.size());
  const std::span<const TokenId> all(action);

  for (std::size_t t = 0; t < action.size(); ++t) {
    const Vector f = policy.features(obs, all.first(t));
    const TokenDistribution p =
        distribution(student, f, policy.grammar().mask_at(static_cast<int>(t)));
    const TokenDistribution& q = teacher_per_position[t];
    const auto top = top_k_tokens(cfg.topk_source == TopKSource::teacher ? q : p, cfg.top_k);
    const TopKTerms terms = topk_divergence(p, q, top);
    const double loss_t = terms.head + terms.tail;
    res.raw_loss += inv_len * loss_t;

    // dL/dz_j = p_j (l_j - L), l_j the log-ratio of j's bucket.
    std::vector<std::uint8_t> in_head(static_cast<std::size_t>(p.size()), 0);
    for (TokenId a : top) in_head[static_cast<std::size_t>(a)] = 1;
    const double tail_log_ratio =
        terms.p_tail > 0.0 ? std::log(terms.p_tail / terms.q_tail) : 0.0;
    Vector dz = Vector::Zero(p.size());
    for (int j = 0; j < p.size(); ++j) {
      const double pj = p.probabilities[j];
      if (pj <= 0.0) continue;
      const double lj = in_head[static_cast<std::size_t>(j)]
                            ? p.log_probabilities[j] - q.log_probabilities[j]
                            : tail_log_ratio;
      dz[j] = pj * (lj - loss_t);
    }
    res.grad.noalias() += inv_len * dz * f.transpose();
  }

  res.loss = res.raw_loss;
  if (res.raw_loss > cfg.loss_cap) {
    res.loss = cfg.loss_cap;
    res.capped = true;
    res.grad.setZero();
  }
  return res;
}

}  // namespace rapo
