#include "env/corpus.hpp"

#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace rapo {

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::template_heavy: return "template_heavy";
    case Behavior::question_first: return "question_first";
    case Behavior::advice_rusher: return "advice_rusher";
  }
  return "template_heavy";
}

Behavior behavior_from_string(std::string_view name) {
  for (Behavior b : {Behavior::template_heavy, Behavior::question_first, Behavior::advice_rusher})
    if (to_string(b) == name) return b;
  throw ConfigError("unknown behavior '" + std::string(name) + "'");
}

BehaviorMix::BehaviorMix(std::vector<std::pair<Behavior, double>> weights)
    : weights_(std::move(weights)) {
  double total = 0.0;
  for (const auto& [b, w] : weights_) {
    if (!(w >= 0.0)) throw ConfigError("behavior weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("behavior mix needs a positive total weight");
}

BehaviorMix BehaviorMix::parse(std::string_view spec) {
  std::vector<std::pair<Behavior, double>> weights;
  std::string s(spec);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const Behavior b = behavior_from_string(item.substr(0, eq));
    double w = 1.0;
    if (eq != std::string::npos) {
      try {
        std::size_t used = 0;
        w = std::stod(item.substr(eq + 1), &used);
        if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("bad behavior weight in '" + item + "'");
      }
    }
    weights.emplace_back(b, w);
  }
  return BehaviorMix(std::move(weights));
}

BehaviorMix BehaviorMix::uniform() {
  return BehaviorMix({{Behavior::template_heavy, 1.0},
                      {Behavior::question_first, 1.0},
                      {Behavior::advice_rusher, 1.0}});
}

Behavior BehaviorMix::pick(SeedStream& stream) const {
  double total = 0.0;
  for (const auto& [b, w] : weights_) total += w;
  double u = stream.uniform() * total;
  for (const auto& [b, w] : weights_) {
    if (u < w) return b;
    u -= w;
  }
  return weights_.back().first;
}

std::string BehaviorMix::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (i) os << ',';
    os << rapo::to_string(weights_[i].first) << '=' << weights_[i].second;
  }
  return os.str();
}

SupporterAction scripted_action(const Environment& env, Behavior behavior,
                                const DialogueContext& context, SeedStream& stream) {
  const TokenId other[3][3] = {
      {env.question(), env.validate(), env.suggest()},
      {env.validate(), env.suggest(), env.template_empathy()},
      {env.question(), env.validate(), env.template_empathy()},
  };
  TokenId strategy = env.question();
  const double u = stream.uniform();
  switch (behavior) {
    case Behavior::template_heavy:
      strategy = u < 0.7 ? env.template_empathy() : other[0][stream.below(3)];
      break;
    case Behavior::question_first:
      if (context.state.turn_index < 2)
        strategy = env.question();
      else
        strategy = u < 0.5 ? env.validate() : (u < 0.8 ? env.suggest() : env.question());
      break;
    case Behavior::advice_rusher:
      strategy = u < 0.7 ? env.suggest() : other[2][stream.below(3)];
      break;
  }
  const TokenId own_topic = env.topic(context.persona.problem_kind);
  SupporterAction a{strategy, {}};
  if (strategy == env.validate()) {
    a.response.push_back(stream.uniform() < 0.8
                             ? own_topic
                             : env.topic(static_cast<ProblemKind>(stream.below(kNumProblemKinds))));
  } else if (strategy == env.question()) {
    a.response.push_back(own_topic);
  } else {
    a.response.push_back(env.filler());
  }
  a.response.push_back(env.vocab().terminator());
  return a;
}

CorpusRecord make_corpus_record(const Environment& env, std::int64_t dialogue_id,
                                const Rollout& r) {
  const auto& vocab = env.vocab();
  CorpusRecord rec;
  rec["dialogue_id"] = dialogue_id;
  rec["turn_index"] = r.context.state.turn_index;
  rec["context_tokens"] = vocab.names(r.context.history);
  rec["strategy"] = vocab.name(r.strategy);
  rec["response_tokens"] = vocab.names(r.response);
  rec["reaction_tokens"] = vocab.names(r.reaction);
  rec["delta_distress"] = r.post_state.distress - r.context.state.distress;
  rec["delta_trust"] = r.post_state.trust - r.context.state.trust;
  CorpusRecord persona;
  persona["openness"] = r.context.persona.openness;
  persona["volatility"] = r.context.persona.volatility;
  persona["problem_kind"] = std::string(to_string(r.context.persona.problem_kind));
  persona["advice_receptivity_threshold"] = r.context.persona.advice_receptivity_threshold;
  rec["persona"] = std::move(persona);
  return rec;
}

CorpusSummary generate_corpus(const Environment& env, std::int64_t n_dialogues, std::uint64_t seed,
                              const BehaviorMix& mix, const std::filesystem::path& out_path) {
  if (n_dialogues < 1) throw InputError("n_dialogues must be >= 1");
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus to " + out_path.string());
  CorpusSummary summary;
  double fatigue_sum = 0.0;
  for (std::int64_t d = 0; d < n_dialogues; ++d) {
    SeedStream stream = SeedStream::derive(seed, {0xC0, static_cast<std::uint64_t>(d)});
    DialogueContext ctx = env.reset(stream.child(0));
    const Behavior behavior = mix.pick(stream);
    const int turns = kMinCorpusTurns +
                      static_cast<int>(stream.below(kMaxCorpusTurns - kMinCorpusTurns + 1));
    for (int t = 0; t < turns; ++t) {
      const SupporterAction a = scripted_action(env, behavior, ctx, stream);
      const Rollout r = env.rollout(ctx, a, stream.child(1000 + static_cast<std::uint64_t>(t)));
      out << make_corpus_record(env, d, r).dump() << '\n';
      env.advance(ctx, r);
      ++summary.turns;
    }
    fatigue_sum += ctx.state.template_fatigue;
    ++summary.dialogues;
  }
  out.flush();
  if (!out) throw IoError("write failed for " + out_path.string());
  summary.mean_final_fatigue = fatigue_sum / static_cast<double>(summary.dialogues);
  return summary;
}

}  // namespace rapo
