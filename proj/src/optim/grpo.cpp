#include "optim/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/errors.hpp"

namespace rapo {

double kl_exact(const TokenDistribution& p, const TokenDistribution& q) {
  if (p.size() != q.size()) throw ConfigError("kl_exact size mismatch");
  double kl = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    const double pk = p.probabilities[k];
    if (pk <= 0.0) continue;
    if (q.probabilities[k] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += pk * (p.log_probabilities[k] - q.log_probabilities[k]);
  }
  return kl;
}

Vector kl_logit_gradient(const TokenDistribution& p, const TokenDistribution& q) {
  const double kl = kl_exact(p, q);
  Vector g = Vector::Zero(p.size());
  for (int k = 0; k < p.size(); ++k) {
    const double pk = p.probabilities[k];
    if (pk <= 0.0) continue;
    g[k] = pk * (p.log_probabilities[k] - q.log_probabilities[k] - kl);
  }
  return g;
}

std::vector<double> importance_ratios(const SequencePolicy& policy, const PolicyParams& current,
                                      const PolicyParams& old, const Rollout& rollout) {
  const Observation obs = rollout.context.observation();
  const TokenSeq action = rollout.action_tokens();
  const auto lp_new = per_position_log_probs(policy, current, obs, action);
  const auto lp_old = per_position_log_probs(policy, old, obs, action);
  std::vector<double> out(action.size());
  for (std::size_t t = 0; t < action.size(); ++t) {
    const double log_rho = lp_new[t] - lp_old[t];
    if (!std::isfinite(log_rho)) throw NumericError("non-finite log ratio");
    out[t] = std::exp(log_rho);
  }
  return out;
}

SurrogateResult grpo_surrogate(const SequencePolicy& policy, const PolicyParams& current,
                               const PolicyParams& old, const PolicyParams& ref,
                               std::span<const Rollout> group, const AdvantageSet& adv,
                               const GrpoConfig& cfg) {
  if (group.empty()) throw InputError("empty rollout group");
  if (adv.sequence.size() != group.size()) throw InputError("advantages do not match group");
  SurrogateResult res;
  res.grad = Matrix::Zero(current.weights.rows(), current.weights.cols());
  const double inv_g = 1.0 / static_cast<double>(group.size());
  const double lo = 1.0 - cfg.eps_low;
  const double hi = 1.0 + cfg.eps_high;

  for (std::size_t i = 0; i < group.size(); ++i) {
    const Rollout& r = group[i];
    const Observation obs = r.context.observation();
    const TokenSeq action = r.action_tokens();
    const std::size_t first = cfg.response_only_credit ? 1 : 0;
    if (action.size() <= first) continue;
    const double inv_len = 1.0 / static_cast<double>(action.size() - first);
    const double a = adv.sequence[i];
    const std::span<const TokenId> all(action);

    for (std::size_t t = first; t < action.size(); ++t) {
      const Vector f = policy.features(obs, all.first(t));
      const TokenMask& mask = policy.grammar().mask_at(static_cast<int>(t));
      const TokenDistribution p_new = distribution(current, f, mask);
      const TokenDistribution p_old = distribution(old, f, mask);
      const TokenDistribution p_ref = distribution(ref, f, mask);
      const TokenId tok = action[t];
      if (p_new.probabilities[tok] <= 0.0 && p_old.probabilities[tok] <= 0.0)
        throw InputError("rollout token not admissible at its position");

      double log_rho = p_new.log_probabilities[tok] - p_old.log_probabilities[tok];
      bool overflow = false;
      if (!(std::abs(log_rho) <= kMaxLogRatio)) {
        log_rho = std::clamp(log_rho, -kMaxLogRatio, kMaxLogRatio);
        overflow = true;
        ++res.ratio_overflows;
      }
      const double rho = std::exp(log_rho);
      const double unclipped = rho * a;
      const double clipped = std::clamp(rho, lo, hi) * a;
      ++res.total_tokens;
      const double w = inv_g * inv_len;
      if (clipped < unclipped) {
        ++res.clipped_tokens;
        res.policy_loss -= w * clipped;
      } else {
        res.policy_loss -= w * unclipped;
        if (!overflow && a != 0.0)
          res.grad.noalias() -= (w * a * rho) * softmax_score(p_new, tok) * f.transpose();
      }

      const double kl = kl_exact(p_new, p_ref);
      if (!std::isfinite(kl)) throw NumericError("KL to reference overflowed");
      res.kl += w * kl;
      if (cfg.beta != 0.0)
        res.grad.noalias() += (w * cfg.beta) * kl_logit_gradient(p_new, p_ref) * f.transpose();
    }
  }
  res.loss = res.policy_loss + cfg.beta * res.kl;
  return res;
}

}  // namespace rapo
