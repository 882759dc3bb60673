// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rapo/rapo.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code(rapo_status s) {
  switch (s) {
    case RAPO_OK: return kExitOk;
    case RAPO_ERR_CONFIG:
    case RAPO_ERR_INPUT:
    case RAPO_ERR_FORMAT: return kExitValidation;
    default: return kExitRuntime;
  }
}

int report(rapo_status s, const char* what) {
  if (s != RAPO_OK) std::cerr << "rapo " << what << ": " << rapo_last_error() << '\n';
  return exit_code(s);
}

nlohmann::ordered_json eval_json(const rapo_eval_summary& e) {
  nlohmann::ordered_json j;
  j["episodes"] = e.episodes;
  j["turns"] = e.turns;
  j["mean_true_outcome"] = e.mean_true_outcome;
  j["mean_turn_outcome"] = e.mean_turn_outcome;
  j["mean_end_distress"] = e.mean_end_distress;
  j["mean_entropy"] = e.mean_entropy;
  j["mean_length"] = e.mean_length;
  j["template_rate"] = e.template_rate;
  return j;
}

// Owns a config handle for the duration of one command.
struct Config {
  rapo_config* h = nullptr;
  ~Config() { rapo_config_destroy(h); }
};

struct Params {
  rapo_params* h = nullptr;
  ~Params() { rapo_params_destroy(h); }
};

rapo_status open_config(const std::string& path, const std::string& preset,
                        std::optional<std::uint64_t> seed, Config& cfg) {
  rapo_status s = path.empty() ? rapo_config_preset(preset.c_str(), &cfg.h)
                               : rapo_config_load(path.c_str(), &cfg.h);
  if (s == RAPO_OK && seed) s = rapo_config_set_seed(cfg.h, *seed);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-aware policy optimization laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset_name = "rapo", out, in, params_path, mix;
  std::optional<std::uint64_t> seed;
  std::int64_t n_dialogues = 100;
  std::uint64_t corpus_seed = 1;
  double tau = 0.1;
  int episodes = 0, turns = 0;
  std::vector<std::string> metrics, labels;

  auto* gen = app.add_subcommand("gen-corpus", "Write a scripted-dialogue corpus as JSONL");
  gen->add_option("--out", out, "Output JSONL path")->required();
  gen->add_option("--n", n_dialogues, "Number of dialogues")->check(CLI::PositiveNumber);
  gen->add_option("--seed", corpus_seed, "Corpus seed");
  gen->add_option("--mix", mix, "Behavior mix, e.g. template_heavy=1,advice_rusher=0.5");
  gen->add_option("--config", config_path, "Config supplying environment constants");

  auto* sel = app.add_subcommand("select", "Keep pivotal corpus turns");
  sel->add_option("--in", in, "Input corpus JSONL")->required();
  sel->add_option("--out", out, "Filtered corpus JSONL")->required();
  sel->add_option("--tau", tau, "Selection threshold");

  auto* train = app.add_subcommand("train", "Run training and write metrics, params and curves");
  train->add_option("--config", config_path, "Training config JSON")->required();
  train->add_option("--seed", seed, "Override master_seed");
  train->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a parameter file");
  ev->add_option("--config", config_path, "Training config JSON")->required();
  ev->add_option("--params", params_path, "Parameter JSON; zeros when omitted");
  ev->add_option("--seed", seed, "Evaluation seed (default: the config's eval.seed)");
  ev->add_option("--episodes", episodes, "Episodes (default: config)");
  ev->add_option("--turns", turns, "Turns per episode (default: config)");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
  gc->add_option("--config", config_path, "Training config JSON (default: the rapo preset)");
  gc->add_option("--preset", preset_name, "Preset used when --config is absent");
  gc->add_option("--params", params_path, "Parameter JSON; zeros when omitted");
  gc->add_option("--seed", seed, "Probe seed");

  auto* plot = app.add_subcommand("plot", "Emit CSV and SVG curves from metrics files");
  plot->add_option("--metrics", metrics, "metrics.jsonl (repeatable)")->required();
  plot->add_option("--label", labels, "Label per metrics file");
  plot->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (gen->parsed()) {
    Config cfg;
    if (!config_path.empty()) {
      if (const auto s = rapo_config_load(config_path.c_str(), &cfg.h); s != RAPO_OK)
        return report(s, "gen-corpus");
    }
    return report(rapo_generate_corpus(cfg.h, out.c_str(), n_dialogues, corpus_seed, mix.c_str()),
                  "gen-corpus");
  }

  if (sel->parsed()) {
    rapo_selection_report r{};
    const auto s = rapo_select_corpus(in.c_str(), out.c_str(), tau, &r);
    if (s != RAPO_OK) return report(s, "select");
    nlohmann::ordered_json j;
    j["total"] = r.total;
    j["kept"] = r.kept;
    j["kept_fraction"] = r.kept_fraction;
    j["reasons"] = {{"PIVOTAL_DISTRESS", r.pivotal_distress},
                    {"PIVOTAL_TRUST", r.pivotal_trust},
                    {"LOW_SIGNAL", r.low_signal}};
    j["tau"] = r.tau;
    j["malformed"] = r.malformed;
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }

  if (train->parsed()) {
    Config cfg;
    if (const auto s = open_config(config_path, preset_name, seed, cfg); s != RAPO_OK)
      return report(s, "train");
    rapo_train_summary sum{};
    if (const auto s = rapo_train(cfg.h, out.c_str(), &sum); s != RAPO_OK) return report(s, "train");
    const std::string m = out + "/metrics.jsonl";
    const char* paths[] = {m.c_str()};
    const char* names[] = {"curves"};
    if (const auto s = rapo_emit_curves(paths, names, 1, out.c_str()); s != RAPO_OK)
      return report(s, "train");
    nlohmann::ordered_json j;
    j["steps"] = sum.steps;
    j["initial_evaluation"] = eval_json(sum.initial_evaluation);
    j["final_evaluation"] = eval_json(sum.final_evaluation);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }

  if (ev->parsed()) {
    Config cfg;
    if (const auto s = open_config(config_path, preset_name, std::nullopt, cfg); s != RAPO_OK)
      return report(s, "eval");
    Params params;
    const auto s = params_path.empty() ? rapo_params_zeros(cfg.h, &params.h)
                                       : rapo_params_load(params_path.c_str(), &params.h);
    if (s != RAPO_OK) return report(s, "eval");
    std::uint64_t eval_seed = 0;
    if (seed) {
      eval_seed = *seed;
    } else {
      const char* text = nullptr;
      if (const auto t = rapo_config_to_json(cfg.h, &text); t != RAPO_OK) return report(t, "eval");
      eval_seed = nlohmann::json::parse(text).at("eval").at("seed").get<std::uint64_t>();
    }
    rapo_eval_summary e{};
    if (const auto t = rapo_evaluate(cfg.h, params.h, episodes, turns, eval_seed, &e); t != RAPO_OK)
      return report(t, "eval");
    std::cout << eval_json(e).dump(2) << '\n';
    return kExitOk;
  }

  if (gc->parsed()) {
    Config cfg;
    if (const auto s = open_config(config_path, preset_name, std::nullopt, cfg); s != RAPO_OK)
      return report(s, "gradcheck");
    Params params;
    if (!params_path.empty()) {
      if (const auto s = rapo_params_load(params_path.c_str(), &params.h); s != RAPO_OK)
        return report(s, "gradcheck");
    }
    const char* json = nullptr;
    const auto s = rapo_gradcheck(cfg.h, params.h, seed.value_or(1), &json);
    if (json) std::cout << json << '\n';
    return report(s, "gradcheck");
  }

  if (plot->parsed()) {
    if (!labels.empty() && labels.size() != metrics.size()) {
      std::cerr << "rapo plot: give one --label per --metrics or none\n";
      return kExitValidation;
    }
    std::vector<const char*> paths, names;
    for (const auto& m : metrics) paths.push_back(m.c_str());
    for (const auto& l : labels) names.push_back(l.c_str());
    return report(rapo_emit_curves(paths.data(), labels.empty() ? nullptr : names.data(),
                                   paths.size(), out.c_str()),
                  "plot");
  }
  return kExitValidation;
}
