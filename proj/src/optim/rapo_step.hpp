#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "env/environment.hpp"
#include "optim/config.hpp"
#include "policy/policy.hpp"
#include "reward/reward.hpp"

namespace rapo {

struct StepMetrics {
  std::int64_t step = 0;
  double mean_reward = 0.0;
  double mean_abs_advantage = 0.0;
  double entropy = 0.0;
  double mean_length = 0.0;
  double grpo_loss = 0.0;
  double sdpo_loss = 0.0;
  double clip_fraction = 0.0;
  double kl_ref = 0.0;
  int degenerate_groups = 0;
  int cap_hits = 0;
  int ratio_overflows = 0;
  bool cap_active = false;

  // The fixed JSONL field set:
  // {step, mean_reward, entropy, mean_length, grpo_loss, sdpo_loss,
  //  clip_fraction, kl_ref, degenerate_groups, cap_hits}
  nlohmann::ordered_json to_json() const;
};

struct StepOptions {
  GrpoConfig grpo;
  SdpoConfig sdpo;
  bool sd_enabled = true;
  double lr = 0.05;
  int threads = 1;
};

struct PolicySnapshots {
  PolicyParams student;
  PolicyParams old;
  PolicyParams ref;
  PolicyParams teacher;
};

struct Objective {
  double loss = 0.0;  // grpo + eta * sdpo, averaged over groups
  Matrix grad;
  StepMetrics metrics;
};

// Loss and gradient of the hybrid objective on one batch without updating
// anything. Degenerate groups contribute neither term; the average is over
// all groups in the batch. SD runs on each group's worst candidate only and
// is not evaluated at all when eta == 0 or SD is disabled.
Objective rapo_objective(const SequencePolicy& policy, const PolicySnapshots& params,
                         std::span<const std::vector<Rollout>> groups,
                         std::span<const GroupEvaluation> evals, TokenId separator,
                         const StepOptions& opts);

struct StepResult {
  PolicyParams student;
  PolicyParams teacher;
  StepMetrics metrics;
  double loss = 0.0;
};

// One plain gradient-descent step followed by the EMA teacher update.
StepResult rapo_step(const SequencePolicy& policy, const PolicySnapshots& params,
                     std::span<const std::vector<Rollout>> groups,
                     std::span<const GroupEvaluation> evals, TokenId separator,
                     const StepOptions& opts);

}  // namespace rapo
