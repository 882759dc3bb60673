#include "harness/probes.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "common/errors.hpp"

#include "harness/evaluation.hpp"
#include "harness/training.hpp"
#include "optim/advantages.hpp"
#include "optim/grpo.hpp"
#include "optim/sdpo.hpp"
#include "reward/reward.hpp"

namespace rapo {

nlohmann::ordered_json GradcheckProbe::to_json() const {
  nlohmann::ordered_json j;
  j["grpo"] = grpo.to_json();
  j["sdpo"] = sdpo.to_json();
  j["pass"] = pass();
  return j;
}

namespace {

constexpr double kSnapshotNoise = 0.01;
constexpr int kProbeActionLen = 4;

PolicyParams jitter(const PolicyParams& p, SeedStream& s, ParamTag tag) {
  PolicyParams out = p;
  out.tag = tag;
  for (Eigen::Index k = 0; k < out.weights.size(); ++k)
    out.weights.data()[k] += s.uniform(-kSnapshotNoise, kSnapshotNoise);
  return out;
}

}  // namespace

GradcheckProbe gradcheck_probe(const TrainConfig& cfg, const PolicyParams& at, std::uint64_t seed) {
  const World world(cfg);
  if (at.vocab_size() != world.policy.vocab_size() || at.dimension() != world.policy.dimension())
    throw ConfigError("parameters do not match the configured policy shape");
  SeedStream s = SeedStream::derive(seed, {0x6C});
  const PolicyParams old = jitter(at, s, ParamTag::student);
  const PolicyParams ref = jitter(at, s, ParamTag::reference);
  const PolicyParams teacher = jitter(at, s, ParamTag::ema_teacher);

  TrainConfig local = cfg;
  local.master_seed = seed;
  const DialogueContext ctx = training_context(world, local, 0, 0);
  std::vector<Rollout> group;
  for (int i = 0; i < cfg.grpo.group_size; ++i) {
    SeedStream sampler = s.child(10 + static_cast<std::uint64_t>(i));
    const TokenSeq tokens = sample_sequence(world.policy, old, ctx.observation(),
                                            std::min(kProbeActionLen, cfg.max_action_len), sampler);
    group.push_back(world.env.rollout(ctx, world.env.split_action(tokens),
                                      s.child(20 + static_cast<std::uint64_t>(i))));
  }
  const GroupEvaluation ev = grm_evaluate(world.env, cfg.length(), group);
  AdvantageSet adv = group_advantages(ev.scores, cfg.grpo);
  if (adv.degenerate)
    for (std::size_t i = 0; i < adv.sequence.size(); ++i) adv.sequence[i] = i % 2 ? 1.0 : -1.0;

  GradcheckProbe probe;
  auto grpo_loss = [&](const PolicyParams& p) {
    return grpo_surrogate(world.policy, p, old, ref, group, adv, cfg.grpo).loss;
  };
  const Matrix g_grpo = grpo_surrogate(world.policy, at, old, ref, group, adv, cfg.grpo).grad;
  probe.grpo = finite_diff(grpo_loss, g_grpo, at, kDefaultFdStep, kProbeCoordinates, seed,
                           kProbeTolerance);

  const int worst = select_worst(ev);
  const Rollout& w = group[static_cast<std::size_t>(worst)];
  const TokenSeq feedback = build_feedback(w, ev, worst, world.vocab.separator());
  const auto teach = teacher_distributions(world.policy, teacher, w.context.observation(), feedback,
                                           w.action_tokens(), world.vocab.separator());
  SdpoConfig sd = cfg.sdpo;
  sd.loss_cap = std::numeric_limits<double>::infinity();
  auto sd_loss = [&](const PolicyParams& p) {
    return sdpo_topk_loss(world.policy, p, teach, w, sd).loss;
  };
  const Matrix g_sd = sdpo_topk_loss(world.policy, at, teach, w, sd).grad;
  probe.sdpo =
      finite_diff(sd_loss, g_sd, at, kDefaultFdStep, kProbeCoordinates, seed + 1, kProbeTolerance);
  return probe;
}

}  // namespace rapo
