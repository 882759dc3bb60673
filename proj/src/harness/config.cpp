#include "harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <type_traits>

#include "common/errors.hpp"
#include "common/hashing.hpp"

namespace rapo {

std::string_view to_string(RewardMode m) { return m == RewardMode::grm ? "grm" : "rubric"; }

RewardMode reward_mode_from_string(std::string_view name) {
  if (name == "grm") return RewardMode::grm;
  if (name == "rubric") return RewardMode::rubric;
  throw ConfigError("unknown reward_mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  env.validate();
  if (vocabulary != "standard") throw ConfigError("only the 'standard' vocabulary is available");
  if (feature_map.window < 1) throw ConfigError("feature_map.window must be >= 1");
  if (feature_map.position_buckets < 1) throw ConfigError("feature_map.position_buckets must be >= 1");
  grpo.validate();
  sdpo.validate();
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (prompts_per_step < 1) throw ConfigError("prompts_per_step must be >= 1");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  length().validate();
  if (max_action_len < 1) throw ConfigError("max_action_len must be >= 1");
  if (warmup_max_turns < 0) throw ConfigError("warmup_max_turns must be >= 0");
  if (!(feedback_prior >= 0.0) || !std::isfinite(feedback_prior))
    throw ConfigError("feedback_prior must be finite and >= 0");
  if (eval.episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  if (eval.turns < 1) throw ConfigError("eval.turns must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

FeatureMapSpec TrainConfig::feature_spec() const {
  return FeatureMapSpec{feature_map.window, feature_map.position_buckets, Environment::kNumFlags,
                        feature_map.bias};
}

nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json env;
  const EnvConstants& e = c.env;
  env["question_trust_gain"] = e.question_trust_gain;
  env["validate_relief"] = e.validate_relief;
  env["premature_advice_distress"] = e.premature_advice_distress;
  env["advice_relief"] = e.advice_relief;
  env["template_trust_gain"] = e.template_trust_gain;
  env["template_fatigue_penalty"] = e.template_fatigue_penalty;
  env["outcome_weight_distress"] = e.outcome_weight_distress;
  env["outcome_weight_trust"] = e.outcome_weight_trust;
  env["relief_threshold"] = e.relief_threshold;
  env["open_up_threshold"] = e.open_up_threshold;
  env["disengage_fatigue"] = e.disengage_fatigue;
  env["reaction_noise"] = e.reaction_noise;
  env["noise_band"] = e.noise_band;
  env["initial_distress_min"] = e.initial_distress_min;
  env["initial_distress_max"] = e.initial_distress_max;
  env["initial_trust_min"] = e.initial_trust_min;
  env["initial_trust_max"] = e.initial_trust_max;
  env["threshold_min"] = e.threshold_min;
  env["threshold_max"] = e.threshold_max;
  env["volatile_flag_cutoff"] = e.volatile_flag_cutoff;

  nlohmann::ordered_json j;
  j["env"] = env;
  j["vocabulary"] = c.vocabulary;
  j["feature_map"] = {{"window", c.feature_map.window},
                      {"position_buckets", c.feature_map.position_buckets},
                      {"bias", c.feature_map.bias}};
  j["grpo"] = {{"group_size", c.grpo.group_size},
               {"eps_low", c.grpo.eps_low},
               {"eps_high", c.grpo.eps_high},
               {"beta", c.grpo.beta},
               {"std_floor", c.grpo.std_floor},
               {"response_only_credit", c.grpo.response_only_credit}};
  j["sdpo"] = {{"eta", c.sdpo.eta},
               {"top_k", c.sdpo.top_k},
               {"loss_cap", c.sdpo.loss_cap},
               {"ema_coefficient", c.sdpo.ema_coefficient},
               {"topk_source", std::string(to_string(c.sdpo.topk_source))}};
  j["reward_mode"] = std::string(to_string(c.reward_mode));
  j["sd_enabled"] = c.sd_enabled;
  j["steps"] = c.steps;
  j["lr"] = c.lr;
  j["master_seed"] = c.master_seed;
  j["prompts_per_step"] = c.prompts_per_step;
  j["tau"] = c.tau;
  j["l_max"] = c.l_max;
  j["l_cache"] = c.l_cache;
  j["max_action_len"] = c.max_action_len;
  j["warmup_max_turns"] = c.warmup_max_turns;
  j["feedback_prior"] = c.feedback_prior;
  j["eval"] = {{"episodes", c.eval.episodes}, {"turns", c.eval.turns}, {"seed", c.eval.seed}};
  j["threads"] = c.threads;
  return j;
}

namespace {

// Reads keys out of one JSON object, rejecting anything it was not asked for.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>)
          if (it->is_number_integer() && !it->is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("");
      } else {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  Reader sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const nlohmann::json empty = nlohmann::json::object();
    return Reader(it == j_.end() ? empty : *it, where_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key " + where_ + "." + it.key());
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  Reader r(j, "config");
  {
    Reader e = r.sub("env");
    EnvConstants& x = c.env;
    e.get("question_trust_gain", x.question_trust_gain);
    e.get("validate_relief", x.validate_relief);
    e.get("premature_advice_distress", x.premature_advice_distress);
    e.get("advice_relief", x.advice_relief);
    e.get("template_trust_gain", x.template_trust_gain);
    e.get("template_fatigue_penalty", x.template_fatigue_penalty);
    e.get("outcome_weight_distress", x.outcome_weight_distress);
    e.get("outcome_weight_trust", x.outcome_weight_trust);
    e.get("relief_threshold", x.relief_threshold);
    e.get("open_up_threshold", x.open_up_threshold);
    e.get("disengage_fatigue", x.disengage_fatigue);
    e.get("reaction_noise", x.reaction_noise);
    e.get("noise_band", x.noise_band);
    e.get("initial_distress_min", x.initial_distress_min);
    e.get("initial_distress_max", x.initial_distress_max);
    e.get("initial_trust_min", x.initial_trust_min);
    e.get("initial_trust_max", x.initial_trust_max);
    e.get("threshold_min", x.threshold_min);
    e.get("threshold_max", x.threshold_max);
    e.get("volatile_flag_cutoff", x.volatile_flag_cutoff);
    e.finish();
  }
  r.get("vocabulary", c.vocabulary);
  {
    Reader f = r.sub("feature_map");
    f.get("window", c.feature_map.window);
    f.get("position_buckets", c.feature_map.position_buckets);
    f.get("bias", c.feature_map.bias);
    f.finish();
  }
  {
    Reader g = r.sub("grpo");
    g.get("group_size", c.grpo.group_size);
    g.get("eps_low", c.grpo.eps_low);
    g.get("eps_high", c.grpo.eps_high);
    g.get("beta", c.grpo.beta);
    g.get("std_floor", c.grpo.std_floor);
    g.get("response_only_credit", c.grpo.response_only_credit);
    g.finish();
  }
  {
    Reader s = r.sub("sdpo");
    s.get("eta", c.sdpo.eta);
    s.get("top_k", c.sdpo.top_k);
    s.get("loss_cap", c.sdpo.loss_cap);
    s.get("ema_coefficient", c.sdpo.ema_coefficient);
    std::string src(to_string(c.sdpo.topk_source));
    s.get("topk_source", src);
    c.sdpo.topk_source = topk_source_from_string(src);
    s.finish();
  }
  std::string mode(to_string(c.reward_mode));
  r.get("reward_mode", mode);
  c.reward_mode = reward_mode_from_string(mode);
  r.get("sd_enabled", c.sd_enabled);
  r.get("steps", c.steps);
  r.get("lr", c.lr);
  r.get("master_seed", c.master_seed);
  r.get("prompts_per_step", c.prompts_per_step);
  r.get("tau", c.tau);
  r.get("l_max", c.l_max);
  r.get("l_cache", c.l_cache);
  r.get("max_action_len", c.max_action_len);
  r.get("warmup_max_turns", c.warmup_max_turns);
  r.get("feedback_prior", c.feedback_prior);
  {
    Reader e = r.sub("eval");
    e.get("episodes", c.eval.episodes);
    e.get("turns", c.eval.turns);
    e.get("seed", c.eval.seed);
    e.finish();
  }
  r.get("threads", c.threads);
  r.finish();
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string canonical_config_text(const TrainConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const TrainConfig& cfg) {
  return sha256_hex(config_to_json(cfg).dump());
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"rapo", "wo_urm", "wo_sd", "wo_urm_sd"};
  return names;
}

namespace {

// Shared by every arm; arms differ only in reward mode and sd_enabled.
TrainConfig toy_base() {
  TrainConfig c;
  c.steps = 300;
  c.lr = 0.05;
  c.prompts_per_step = 8;
  c.tau = 0.1;
  c.l_max = 6;
  c.l_cache = 2;
  c.max_action_len = 6;
  c.feedback_prior = 3.0;
  c.sdpo.eta = 1.0;
  return c;
}

}  // namespace

TrainConfig preset(std::string_view name) {
  TrainConfig c = toy_base();
  if (name == "rapo") {
    c.reward_mode = RewardMode::grm;
    c.sd_enabled = true;
  } else if (name == "wo_urm") {
    c.reward_mode = RewardMode::rubric;
    c.sd_enabled = true;
  } else if (name == "wo_sd") {
    c.reward_mode = RewardMode::grm;
    c.sd_enabled = false;
  } else if (name == "wo_urm_sd") {
    c.reward_mode = RewardMode::rubric;
    c.sd_enabled = false;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  c.validate();
  return c;
}

}  // namespace rapo
