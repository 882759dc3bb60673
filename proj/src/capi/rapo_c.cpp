#include "rapo/rapo.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "env/corpus.hpp"
#include "harness/config.hpp"
#include "harness/curves.hpp"
#include "harness/evaluation.hpp"
#include "harness/probes.hpp"
#include "harness/training.hpp"
#include "hindsight/hindsight.hpp"
#include "policy/params_io.hpp"

struct rapo_config {
  rapo::TrainConfig cfg;
  std::string json;
  std::string hash;
};

struct rapo_params {
  rapo::PolicyParams params;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_report;

rapo_status status_of(rapo::ErrorKind kind) {
  switch (kind) {
    case rapo::ErrorKind::config: return RAPO_ERR_CONFIG;
    case rapo::ErrorKind::input: return RAPO_ERR_INPUT;
    case rapo::ErrorKind::numeric: return RAPO_ERR_NUMERIC;
    case rapo::ErrorKind::format: return RAPO_ERR_FORMAT;
    case rapo::ErrorKind::io: return RAPO_ERR_IO;
  }
  return RAPO_ERR_INTERNAL;
}

rapo_status fail(rapo_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Every entry point funnels through here so no exception crosses the C
// boundary.
template <class Fn>
rapo_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const rapo::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RAPO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RAPO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RAPO_ERR_INTERNAL, "unknown error");
  }
}

#define RAPO_REQUIRE(cond, what) \
  if (!(cond)) return fail(RAPO_ERR_INPUT, what)

void fill(const rapo::EvalSummary& s, rapo_eval_summary* out) {
  out->episodes = s.episodes;
  out->turns = s.turns;
  out->mean_true_outcome = s.mean_true_outcome;
  out->mean_turn_outcome = s.mean_turn_outcome;
  out->mean_end_distress = s.mean_end_distress;
  out->mean_entropy = s.mean_entropy;
  out->mean_length = s.mean_length;
  out->template_rate = s.template_rate;
}

rapo_status wrap_config(rapo::TrainConfig cfg, rapo_config** out) {
  *out = new rapo_config{std::move(cfg), {}, {}};
  return RAPO_OK;
}

}  // namespace

extern "C" {

const char* rapo_last_error(void) { return g_last_error.c_str(); }

const char* rapo_version(void) { return "0.1.0"; }

rapo_status rapo_config_load(const char* path, rapo_config** out) {
  return guarded([&] {
    RAPO_REQUIRE(path && out, "path and out must be non-null");
    return wrap_config(rapo::load_config(path), out);
  });
}

rapo_status rapo_config_parse(const char* json, rapo_config** out) {
  return guarded([&] {
    RAPO_REQUIRE(json && out, "json and out must be non-null");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw rapo::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return wrap_config(rapo::config_from_json(j), out);
  });
}

rapo_status rapo_config_preset(const char* name, rapo_config** out) {
  return guarded([&] {
    RAPO_REQUIRE(name && out, "name and out must be non-null");
    return wrap_config(rapo::preset(name), out);
  });
}

rapo_status rapo_config_set_seed(rapo_config* cfg, uint64_t seed) {
  return guarded([&] {
    RAPO_REQUIRE(cfg, "cfg must be non-null");
    cfg->cfg.master_seed = seed;
    return RAPO_OK;
  });
}

rapo_status rapo_config_to_json(rapo_config* cfg, const char** json) {
  return guarded([&] {
    RAPO_REQUIRE(cfg && json, "cfg and json must be non-null");
    cfg->json = rapo::canonical_config_text(cfg->cfg);
    *json = cfg->json.c_str();
    return RAPO_OK;
  });
}

rapo_status rapo_config_hash(rapo_config* cfg, const char** hex) {
  return guarded([&] {
    RAPO_REQUIRE(cfg && hex, "cfg and hex must be non-null");
    cfg->hash = rapo::config_hash(cfg->cfg);
    *hex = cfg->hash.c_str();
    return RAPO_OK;
  });
}

void rapo_config_destroy(rapo_config* cfg) { delete cfg; }

rapo_status rapo_train(const rapo_config* cfg, const char* out_dir, rapo_train_summary* summary) {
  return guarded([&] {
    RAPO_REQUIRE(cfg && out_dir, "cfg and out_dir must be non-null");
    const rapo::RunRecord rec = rapo::run_training(cfg->cfg, out_dir);
    if (summary) {
      summary->steps = rec.steps;
      fill(rec.initial_evaluation, &summary->initial_evaluation);
      fill(rec.final_evaluation, &summary->final_evaluation);
    }
    return RAPO_OK;
  });
}

rapo_status rapo_params_load(const char* path, rapo_params** out) {
  return guarded([&] {
    RAPO_REQUIRE(path && out, "path and out must be non-null");
    *out = new rapo_params{rapo::load_params(path)};
    return RAPO_OK;
  });
}

rapo_status rapo_params_zeros(const rapo_config* cfg, rapo_params** out) {
  return guarded([&] {
    RAPO_REQUIRE(cfg && out, "cfg and out must be non-null");
    const rapo::World world(cfg->cfg);
    *out = new rapo_params{world.zero_params(rapo::ParamTag::student)};
    return RAPO_OK;
  });
}

rapo_status rapo_params_save(const rapo_params* params, const char* path) {
  return guarded([&] {
    RAPO_REQUIRE(params && path, "params and path must be non-null");
    rapo::save_params(params->params, path);
    return RAPO_OK;
  });
}

rapo_status rapo_params_shape(const rapo_params* params, int32_t* vocab_size, int32_t* dimension) {
  return guarded([&] {
    RAPO_REQUIRE(params, "params must be non-null");
    if (vocab_size) *vocab_size = params->params.vocab_size();
    if (dimension) *dimension = params->params.dimension();
    return RAPO_OK;
  });
}

void rapo_params_destroy(rapo_params* params) { delete params; }

rapo_status rapo_evaluate(const rapo_config* cfg, const rapo_params* params, int32_t episodes,
                          int32_t turns, uint64_t seed, rapo_eval_summary* out) {
  return guarded([&] {
    RAPO_REQUIRE(cfg && params && out, "cfg, params and out must be non-null");
    const rapo::World world(cfg->cfg);
    const auto& p = params->params;
    if (p.vocab_size() != world.policy.vocab_size() || p.dimension() != world.policy.dimension())
      throw rapo::ConfigError("parameters do not match the configured policy shape");
    fill(rapo::evaluate_policy(world, p, episodes > 0 ? episodes : cfg->cfg.eval.episodes,
                               turns > 0 ? turns : cfg->cfg.eval.turns, seed,
                               cfg->cfg.max_action_len),
         out);
    return RAPO_OK;
  });
}

rapo_status rapo_generate_corpus(const rapo_config* cfg, const char* path, int64_t n_dialogues,
                                 uint64_t seed, const char* mix) {
  return guarded([&] {
    RAPO_REQUIRE(path, "path must be non-null");
    const rapo::TrainConfig tc = cfg ? cfg->cfg : rapo::TrainConfig{};
    const rapo::Environment env(rapo::Vocabulary::standard(), tc.env);
    const rapo::BehaviorMix bm =
        mix && *mix ? rapo::BehaviorMix::parse(mix) : rapo::BehaviorMix::uniform();
    rapo::generate_corpus(env, n_dialogues, seed, bm, path);
    return RAPO_OK;
  });
}

rapo_status rapo_select_corpus(const char* in_path, const char* out_path, double tau,
                               rapo_selection_report* report) {
  return guarded([&] {
    RAPO_REQUIRE(in_path && out_path, "in_path and out_path must be non-null");
    const rapo::SelectionReport r = rapo::select_corpus(in_path, out_path, tau);
    if (report) {
      report->total = r.total;
      report->kept = r.kept;
      report->malformed = r.malformed;
      report->pivotal_distress = r.pivotal_distress;
      report->pivotal_trust = r.pivotal_trust;
      report->low_signal = r.low_signal;
      report->tau = r.tau;
      report->kept_fraction = r.kept_fraction();
    }
    return RAPO_OK;
  });
}

rapo_status rapo_gradcheck(const rapo_config* cfg, const rapo_params* params, uint64_t seed,
                           const char** report_json) {
  return guarded([&] {
    RAPO_REQUIRE(cfg, "cfg must be non-null");
    const rapo::World world(cfg->cfg);
    const rapo::PolicyParams at =
        params ? params->params : world.zero_params(rapo::ParamTag::student);
    const rapo::GradcheckProbe probe = rapo::gradcheck_probe(cfg->cfg, at, seed);
    g_report = probe.to_json().dump(2);
    if (report_json) *report_json = g_report.c_str();
    if (!probe.pass()) return fail(RAPO_ERR_CHECK_FAILED, "gradient check failed");
    return RAPO_OK;
  });
}

rapo_status rapo_emit_curves(const char* const* metrics_paths, const char* const* labels,
                             size_t n_runs, const char* out_dir) {
  return guarded([&] {
    RAPO_REQUIRE(metrics_paths && out_dir && n_runs > 0,
                 "metrics_paths, out_dir and at least one run are required");
    std::vector<rapo::CurveInput> runs;
    for (size_t i = 0; i < n_runs; ++i) {
      RAPO_REQUIRE(metrics_paths[i], "metrics path must be non-null");
      std::string label;
      if (labels && labels[i])
        label = labels[i];
      else
        label = n_runs == 1 ? "curves" : "run" + std::to_string(i);
      runs.push_back(rapo::CurveInput{label, metrics_paths[i]});
    }
    rapo::emit_curves(runs, out_dir);
    return RAPO_OK;
  });
}

}  // extern "C"
