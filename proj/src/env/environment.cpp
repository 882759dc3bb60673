#include "env/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace rapo {

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::work: return "work";
    case ProblemKind::family: return "family";
    case ProblemKind::health: return "health";
  }
  return "work";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  if (name == "work") return ProblemKind::work;
  if (name == "family") return ProblemKind::family;
  if (name == "health") return ProblemKind::health;
  throw FormatError("unknown problem kind '" + std::string(name) + "'");
}

TokenSeq SupporterAction::tokens() const {
  TokenSeq out;
  out.reserve(response.size() + 1);
  out.push_back(strategy);
  out.insert(out.end(), response.begin(), response.end());
  return out;
}

void EnvConstants::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(initial_distress_min) || !in01(initial_distress_max) ||
      initial_distress_min > initial_distress_max)
    throw ConfigError("initial distress range must lie in [0, 1]");
  if (!in01(initial_trust_min) || !in01(initial_trust_max) || initial_trust_min > initial_trust_max)
    throw ConfigError("initial trust range must lie in [0, 1]");
  if (!in01(threshold_min) || !in01(threshold_max) || threshold_min > threshold_max)
    throw ConfigError("advice threshold range must lie in [0, 1]");
  if (outcome_weight_distress < 0.0 || outcome_weight_trust < 0.0 ||
      outcome_weight_distress + outcome_weight_trust > 1.0 + 1e-12)
    throw ConfigError("outcome weights must be nonnegative and sum to at most 1");
  if (noise_band < 0.0) throw ConfigError("noise_band must be >= 0");
  if (disengage_fatigue < 1) throw ConfigError("disengage_fatigue must be >= 1");
}

Environment::Environment(Vocabulary vocab, EnvConstants constants)
    : vocab_(std::move(vocab)), constants_(constants) {
  constants_.validate();
  auto need = [this](const char* name, TokenRole role) {
    const TokenId t = vocab_.find(name).value_or(-1);
    if (t < 0 || vocab_.role(t) != role)
      throw ConfigError(std::string("environment needs ") + std::string(to_string(role)) +
                        " token '" + name + "'");
    return t;
  };
  question_ = need("QUESTION", TokenRole::strategy);
  validate_ = need("VALIDATE", TokenRole::strategy);
  suggest_ = need("SUGGEST", TokenRole::strategy);
  template_ = need("TEMPLATE_EMPATHY", TokenRole::strategy);
  filler_ = need("FILLER", TokenRole::content);
  topics_ = {need("TOPIC_WORK", TokenRole::content), need("TOPIC_FAMILY", TokenRole::content),
             need("TOPIC_HEALTH", TokenRole::content)};
  relief_ = need("RELIEF", TokenRole::reaction);
  open_up_ = need("OPEN_UP", TokenRole::reaction);
  disengage_ = need("DISENGAGE", TokenRole::reaction);
  pushback_ = need("PUSHBACK", TokenRole::reaction);
  neutral_ = need("NEUTRAL", TokenRole::reaction);
  vents_ = {need("VENT_WORK", TokenRole::reaction), need("VENT_FAMILY", TokenRole::reaction),
            need("VENT_HEALTH", TokenRole::reaction)};
}

std::vector<std::uint8_t> Environment::observable_flags(const Persona& persona) const {
  std::vector<std::uint8_t> flags(kNumFlags, 0);
  flags[0] = persona.volatility > constants_.volatile_flag_cutoff ? 1 : 0;
  flags[1 + static_cast<std::size_t>(persona.problem_kind)] = 1;
  return flags;
}

DialogueContext Environment::reset(SeedStream stream) const {
  const auto& c = constants_;
  DialogueContext ctx;
  ctx.persona.openness = stream.uniform();
  ctx.persona.volatility = stream.uniform();
  ctx.persona.problem_kind = static_cast<ProblemKind>(stream.below(kNumProblemKinds));
  ctx.persona.advice_receptivity_threshold = stream.uniform(c.threshold_min, c.threshold_max);
  ctx.state.distress = stream.uniform(c.initial_distress_min, c.initial_distress_max);
  ctx.state.trust = stream.uniform(c.initial_trust_min, c.initial_trust_max);
  ctx.flags = observable_flags(ctx.persona);
  ctx.history = {vent(ctx.persona.problem_kind)};
  return ctx;
}

UserState Environment::transition(const UserState& state, const Persona& persona,
                                  const SupporterAction& action, TransitionTrace* trace) const {
  if (!vocab_.contains(action.strategy) || vocab_.role(action.strategy) != TokenRole::strategy)
    throw InputError("action does not start with a strategy token");
  const auto& c = constants_;
  TransitionTrace tr;
  UserState next = state;
  const TokenId s = action.strategy;
  if (s == question_) {
    next.trust += c.question_trust_gain * persona.openness;
  } else if (s == validate_) {
    const TokenId wanted = topic(persona.problem_kind);
    if (std::find(action.response.begin(), action.response.end(), wanted) != action.response.end()) {
      next.distress -= c.validate_relief;
      tr.validated = true;
    }
  } else if (s == suggest_) {
    if (state.trust < persona.advice_receptivity_threshold) {
      next.distress += c.premature_advice_distress * persona.volatility;
      tr.premature_advice = true;
    } else {
      next.distress -= c.advice_relief;
    }
  } else if (s == template_) {
    tr.template_used = true;
    if (state.template_fatigue == 0) {
      next.trust += c.template_trust_gain;
    } else {
      next.trust -= c.template_fatigue_penalty * state.template_fatigue;
      tr.template_penalty = true;
    }
    next.template_fatigue += 1;
  }
  next.distress = std::clamp(next.distress, 0.0, 1.0);
  next.trust = std::clamp(next.trust, 0.0, 1.0);
  next.turn_index += 1;
  if (trace) *trace = tr;
  return next;
}

Environment::Reaction Environment::user_react(const DialogueContext& context,
                                              const SupporterAction& action,
                                              SeedStream stream) const {
  const auto& c = constants_;
  Reaction r;
  r.post_state = transition(context.state, context.persona, action, &r.trace);
  const double d_distress = r.post_state.distress - context.state.distress;
  const double d_trust = r.post_state.trust - context.state.trust;

  // Inside the noise band around a threshold the outcome is a fair coin.
  auto near = [&](double delta, double threshold) {
    return c.reaction_noise && std::abs(delta - threshold) < c.noise_band;
  };
  const bool relief = near(d_distress, -c.relief_threshold)
                          ? stream.uniform() < 0.5
                          : d_distress <= -c.relief_threshold + kDeltaTolerance;
  const bool open_up = near(d_trust, c.open_up_threshold)
                           ? stream.uniform() < 0.5
                           : d_trust >= c.open_up_threshold - kDeltaTolerance;
  if (relief) r.tokens.push_back(relief_);
  if (open_up) r.tokens.push_back(open_up_);
  if (r.trace.premature_advice) r.tokens.push_back(pushback_);
  if (r.trace.template_used && r.post_state.template_fatigue >= c.disengage_fatigue)
    r.tokens.push_back(disengage_);
  if (r.tokens.size() > 3) r.tokens.resize(3);
  if (r.tokens.empty()) r.tokens.push_back(neutral_);
  return r;
}

double Environment::true_outcome(const UserState& pre, const UserState& post) const {
  return constants_.outcome_weight_distress * (pre.distress - post.distress) +
         constants_.outcome_weight_trust * (post.trust - pre.trust);
}

Rollout Environment::rollout(const DialogueContext& context, const SupporterAction& action,
                             SeedStream stream) const {
  Reaction r = user_react(context, action, stream);
  Rollout out;
  out.context = context;
  out.strategy = action.strategy;
  out.response = action.response;
  out.reaction = std::move(r.tokens);
  out.post_state = r.post_state;
  out.length = action.length();
  out.trace = r.trace;
  return out;
}

void Environment::advance(DialogueContext& context, const Rollout& rollout) const {
  context.history.push_back(rollout.strategy);
  context.history.insert(context.history.end(), rollout.response.begin(), rollout.response.end());
  context.history.insert(context.history.end(), rollout.reaction.begin(), rollout.reaction.end());
  context.state = rollout.post_state;
}

SupporterAction Environment::split_action(const TokenSeq& tokens) const {
  if (tokens.empty()) throw InputError("empty action");
  return SupporterAction{tokens.front(), TokenSeq(tokens.begin() + 1, tokens.end())};
}

}  // namespace rapo
