#include "harness/training.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "common/errors.hpp"
#include "common/hashing.hpp"
#include "common/parallel.hpp"
#include "env/corpus.hpp"
#include "harness/metrics.hpp"
#include "optim/rapo_step.hpp"
#include "policy/params_io.hpp"
#include "reward/reward.hpp"

namespace rapo {

nlohmann::ordered_json RunRecord::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["corpus_hash"] = corpus_hash;
  j["metrics"] = metrics_path;
  j["evaluations"] = evaluations_path;
  j["prompts"] = prompts_path;
  j["params"] = params_path;
  j["steps"] = steps;
  j["initial_evaluation"] = initial_evaluation.to_json();
  j["final_evaluation"] = final_evaluation.to_json();
  return j;
}

namespace {

// Stream-path tags; each randomness consumer owns one.
constexpr std::uint64_t kTagContext = 1;
constexpr std::uint64_t kTagSample = 2;
constexpr std::uint64_t kTagReact = 3;

bool pivotal(const UserState& pre, const UserState& post, double tau) {
  return std::abs(post.distress - pre.distress) >= tau || std::abs(post.trust - pre.trust) >= tau;
}

nlohmann::ordered_json token_names(const Vocabulary& v, const TokenSeq& seq) {
  auto arr = nlohmann::ordered_json::array();
  for (TokenId t : seq) arr.push_back(v.name(t));
  return arr;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct PromptBatch {
  DialogueContext context;
  std::vector<Rollout> group;
  GroupEvaluation evaluation;
};

PromptBatch collect(const World& world, const TrainConfig& cfg, const PolicyParams& student,
                    std::int64_t step, int prompt) {
  PromptBatch b;
  b.context = training_context(world, cfg, step, prompt);
  const Observation obs = b.context.observation();
  const auto us = static_cast<std::uint64_t>(step);
  const auto up = static_cast<std::uint64_t>(prompt);
  for (int i = 0; i < cfg.grpo.group_size; ++i) {
    const auto ui = static_cast<std::uint64_t>(i);
    SeedStream sampler = SeedStream::derive(cfg.master_seed, {kTagSample, us, up, ui});
    const TokenSeq tokens =
        sample_sequence(world.policy, student, obs, cfg.max_action_len, sampler);
    b.group.push_back(world.env.rollout(
        b.context, world.env.split_action(tokens),
        SeedStream::derive(cfg.master_seed, {kTagReact, us, up, ui})));
  }
  b.evaluation = cfg.reward_mode == RewardMode::grm
                     ? grm_evaluate(world.env, cfg.length(), b.group)
                     : rubric_group_evaluation(world.env, cfg.length(), b.group);
  return b;
}

}  // namespace

DialogueContext training_context(const World& world, const TrainConfig& cfg, std::int64_t step,
                                 int prompt) {
  const Environment& env = world.env;
  const BehaviorMix mix = BehaviorMix::uniform();
  DialogueContext ctx;
  for (int draw = 0; draw < kMaxContextDraws; ++draw) {
    SeedStream s = SeedStream::derive(
        cfg.master_seed, {kTagContext, static_cast<std::uint64_t>(step),
                          static_cast<std::uint64_t>(prompt), static_cast<std::uint64_t>(draw)});
    ctx = env.reset(s.child(0));
    const int warmup = static_cast<int>(s.below(static_cast<std::size_t>(cfg.warmup_max_turns) + 1));
    for (int t = 0; t < warmup; ++t) {
      const SupporterAction a = scripted_action(env, mix.pick(s), ctx, s);
      env.advance(ctx, env.rollout(ctx, a, s.child(100 + static_cast<std::uint64_t>(t))));
    }
    if (cfg.tau <= 0.0) break;
    const SupporterAction probe = scripted_action(env, mix.pick(s), ctx, s);
    const UserState post = env.transition(ctx.state, ctx.persona, probe);
    if (pivotal(ctx.state, post, cfg.tau)) break;
  }
  return ctx;
}

RunRecord run_training(const TrainConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const World world(cfg);
  const Vocabulary& vocab = world.vocab;
  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.metrics_path = "metrics.jsonl";
  rec.evaluations_path = "evaluations.jsonl";
  rec.prompts_path = "prompts.jsonl";
  rec.params_path = "params.json";

  JsonlAppender metrics(out_dir / rec.metrics_path);
  JsonlAppender evaluations(out_dir / rec.evaluations_path);
  JsonlAppender prompts(out_dir / rec.prompts_path);

  PolicySnapshots snap{world.initial_params(ParamTag::student),
                       world.initial_params(ParamTag::student),
                       world.initial_params(ParamTag::reference),
                       world.initial_params(ParamTag::ema_teacher)};
  const std::uint64_t eval_seed = SeedStream::derive(cfg.eval.seed, {cfg.master_seed}).key();
  rec.initial_evaluation = evaluate_policy(world, snap.student, cfg.eval.episodes, cfg.eval.turns,
                                           eval_seed, cfg.max_action_len);

  StepOptions opts{cfg.grpo, cfg.sdpo, cfg.sd_enabled, cfg.lr, cfg.threads};
  const auto batch_size = static_cast<std::size_t>(cfg.prompts_per_step);
  for (int step = 0; step < cfg.steps; ++step) {
    try {
      std::vector<PromptBatch> batch(batch_size);
      parallel_for(batch_size, cfg.threads, [&](std::size_t b) {
        batch[b] = collect(world, cfg, snap.student, step, static_cast<int>(b));
      });
      std::vector<std::vector<Rollout>> groups;
      std::vector<GroupEvaluation> evals;
      for (auto& b : batch) {
        groups.push_back(std::move(b.group));
        evals.push_back(std::move(b.evaluation));
      }

      // Single inner epoch: the behaviour policy is the current student.
      snap.old = snap.student;
      snap.old.tag = ParamTag::student;
      StepResult r = rapo_step(world.policy, snap, groups, evals, vocab.separator(), opts);
      snap.student = std::move(r.student);
      snap.teacher = std::move(r.teacher);
      metrics.append(r.metrics.to_json());

      for (std::size_t b = 0; b < batch_size; ++b) {
        const GroupEvaluation& ev = evals[b];
        const auto group_id = static_cast<std::int64_t>(step) * cfg.prompts_per_step +
                              static_cast<std::int64_t>(b);
        nlohmann::ordered_json e;
        e["group_id"] = group_id;
        e["ranks"] = ev.ranks;
        e["scores"] = ev.scores;
        auto crit = nlohmann::ordered_json::array();
        for (const TokenSeq& c : ev.critiques) crit.push_back(token_names(vocab, c));
        e["critiques"] = crit;
        e["worst_index"] = select_worst(ev);
        evaluations.append(e);

        nlohmann::ordered_json p;
        p["group_id"] = group_id;
        p["context_tokens"] = token_names(vocab, batch[b].context.history);
        p["flags"] = batch[b].context.flags;
        prompts.append(p);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(step) + ": " + e.what());
    }
  }

  save_params(snap.student, out_dir / rec.params_path);
  rec.steps = cfg.steps;
  rec.corpus_hash = git_blob_hash(read_file(out_dir / rec.prompts_path));
  rec.final_evaluation = evaluate_policy(world, snap.student, cfg.eval.episodes, cfg.eval.turns,
                                         eval_seed, cfg.max_action_len);
  std::ofstream out(out_dir / "run_record.json", std::ios::binary);
  if (!out) throw IoError("cannot write run_record.json");
  out << rec.to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed for run_record.json");
  return rec;
}

}  // namespace rapo
