#include "optim/rapo_step.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "common/parallel.hpp"
#include "optim/advantages.hpp"
#include "optim/grpo.hpp"
#include "optim/sdpo.hpp"

namespace rapo {

nlohmann::ordered_json StepMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["mean_reward"] = mean_reward;
  j["entropy"] = entropy;
  j["mean_length"] = mean_length;
  j["grpo_loss"] = grpo_loss;
  j["sdpo_loss"] = sdpo_loss;
  j["clip_fraction"] = clip_fraction;
  j["kl_ref"] = kl_ref;
  j["degenerate_groups"] = degenerate_groups;
  j["cap_hits"] = cap_hits;
  return j;
}

namespace {

struct GroupTerms {
  bool degenerate = false;
  double grpo_loss = 0.0;
  double sdpo_loss = 0.0;
  double kl = 0.0;
  double abs_adv = 0.0;
  bool capped = false;
  int clipped = 0;
  int tokens = 0;
  int overflows = 0;
  Matrix grad;
  // Rollout statistics that do not depend on the update.
  double reward_sum = 0.0;
  double length_sum = 0.0;
  double entropy_sum = 0.0;
  int entropy_tokens = 0;
};

GroupTerms group_terms(const SequencePolicy& policy, const PolicySnapshots& params,
                       const std::vector<Rollout>& group, const GroupEvaluation& eval,
                       TokenId separator, const StepOptions& opts) {
  GroupTerms out;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const Rollout& r = group[i];
    out.reward_sum += eval.base_quality[i];
    out.length_sum += r.length;
    const Observation obs = r.context.observation();
    const TokenSeq action = r.action_tokens();
    const std::span<const TokenId> all(action);
    for (std::size_t t = 0; t < action.size(); ++t) {
      out.entropy_sum += policy.step(params.student, obs, all.first(t)).entropy();
      ++out.entropy_tokens;
    }
  }

  const AdvantageSet adv = group_advantages(eval.scores, opts.grpo);
  if (adv.degenerate) {
    out.degenerate = true;
    return out;
  }
  for (double a : adv.sequence) out.abs_adv += std::abs(a);

  SurrogateResult s =
      grpo_surrogate(policy, params.student, params.old, params.ref, group, adv, opts.grpo);
  out.grpo_loss = s.loss;
  out.kl = s.kl;
  out.clipped = s.clipped_tokens;
  out.tokens = s.total_tokens;
  out.overflows = s.ratio_overflows;
  out.grad = std::move(s.grad);

  if (opts.sd_enabled && opts.sdpo.eta != 0.0) {
    const int worst = select_worst(eval);
    const Rollout& w = group[static_cast<std::size_t>(worst)];
    const TokenSeq feedback = build_feedback(w, eval, worst, separator);
    const auto teacher = teacher_distributions(policy, params.teacher, w.context.observation(),
                                               feedback, w.action_tokens(), separator);
    const SdpoResult sd = sdpo_topk_loss(policy, params.student, teacher, w, opts.sdpo);
    out.sdpo_loss = sd.loss;
    out.capped = sd.capped;
    out.grad.noalias() += opts.sdpo.eta * sd.grad;
  }
  return out;
}

}  // namespace

Objective rapo_objective(const SequencePolicy& policy, const PolicySnapshots& params,
                         std::span<const std::vector<Rollout>> groups,
                         std::span<const GroupEvaluation> evals, TokenId separator,
                         const StepOptions& opts) {
  if (groups.size() != evals.size()) throw InputError("groups and evaluations differ in count");
  if (groups.empty()) throw InputError("empty batch");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<int>(groups[g].size()) != opts.grpo.group_size)
      throw InputError("group " + std::to_string(g) + " has the wrong size");
    if (evals[g].size() != opts.grpo.group_size)
      throw InputError("evaluation " + std::to_string(g) + " has the wrong size");
  }

  std::vector<GroupTerms> terms(groups.size());
  parallel_for(groups.size(), opts.threads, [&](std::size_t g) {
    terms[g] = group_terms(policy, params, groups[g], evals[g], separator, opts);
  });

  Objective obj;
  obj.grad = Matrix::Zero(params.student.weights.rows(), params.student.weights.cols());
  StepMetrics& m = obj.metrics;
  m.step = params.student.step;
  const double inv_b = 1.0 / static_cast<double>(groups.size());
  double reward = 0.0, length = 0.0, entropy = 0.0, abs_adv = 0.0;
  int rollouts = 0, entropy_tokens = 0, adv_count = 0, clipped = 0, tokens = 0;
  for (const GroupTerms& t : terms) {
    reward += t.reward_sum;
    length += t.length_sum;
    entropy += t.entropy_sum;
    entropy_tokens += t.entropy_tokens;
    rollouts += opts.grpo.group_size;
    if (t.degenerate) {
      ++m.degenerate_groups;
      continue;
    }
    abs_adv += t.abs_adv;
    adv_count += opts.grpo.group_size;
    m.grpo_loss += inv_b * t.grpo_loss;
    m.sdpo_loss += inv_b * t.sdpo_loss;
    m.kl_ref += inv_b * t.kl;
    clipped += t.clipped;
    tokens += t.tokens;
    m.ratio_overflows += t.overflows;
    if (t.capped) ++m.cap_hits;
    obj.grad.noalias() += inv_b * t.grad;
  }
  m.mean_reward = reward / rollouts;
  m.mean_length = length / rollouts;
  m.entropy = entropy_tokens ? entropy / entropy_tokens : 0.0;
  m.mean_abs_advantage = adv_count ? abs_adv / adv_count : 0.0;
  m.clip_fraction = tokens ? static_cast<double>(clipped) / tokens : 0.0;
  m.cap_active = m.cap_hits > 0;
  obj.loss = m.grpo_loss + opts.sdpo.eta * m.sdpo_loss;
  if (!obj.grad.allFinite()) throw NumericError("non-finite gradient");
  return obj;
}

StepResult rapo_step(const SequencePolicy& policy, const PolicySnapshots& params,
                     std::span<const std::vector<Rollout>> groups,
                     std::span<const GroupEvaluation> evals, TokenId separator,
                     const StepOptions& opts) {
  if (!(opts.lr >= 0.0) || !std::isfinite(opts.lr)) throw ConfigError("lr must be finite and >= 0");
  Objective obj = rapo_objective(policy, params, groups, evals, separator, opts);
  StepResult res;
  res.student = params.student;
  if (opts.lr != 0.0) res.student.weights.noalias() -= opts.lr * obj.grad;
  res.student.step = params.student.step + 1;
  if (!res.student.all_finite()) throw NumericError("parameters became non-finite");
  res.teacher = ema_mix(params.teacher, res.student, opts.sdpo.ema_coefficient);
  res.metrics = obj.metrics;
  res.metrics.step = res.student.step;
  res.loss = obj.loss;
  return res;
}

}  // namespace rapo
