#include "optim/advantages.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace rapo {

std::string_view to_string(TopKSource s) { return s == TopKSource::teacher ? "teacher" : "student"; }

TopKSource topk_source_from_string(std::string_view name) {
  if (name == "teacher") return TopKSource::teacher;
  if (name == "student") return TopKSource::student;
  throw ConfigError("unknown topk_source '" + std::string(name) + "'");
}

void GrpoConfig::validate() const {
  if (group_size < 2) throw ConfigError("group_size must be >= 2");
  if (!(eps_low > 0.0 && eps_low < 1.0)) throw ConfigError("eps_low must lie in (0, 1)");
  if (!(eps_high > 0.0 && eps_high < 1.0)) throw ConfigError("eps_high must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(std_floor > 0.0)) throw ConfigError("std_floor must be > 0");
}

void SdpoConfig::validate() const {
  if (!(eta >= 0.0)) throw ConfigError("eta must be >= 0");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (!(loss_cap > 0.0)) throw ConfigError("loss_cap must be > 0");
  if (!(ema_coefficient >= 0.0 && ema_coefficient <= 1.0))
    throw ConfigError("ema_coefficient must lie in [0, 1]");
}

AdvantageSet group_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  if (static_cast<int>(rewards.size()) != cfg.group_size)
    throw InputError("expected " + std::to_string(cfg.group_size) + " rewards, got " +
                     std::to_string(rewards.size()));
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  AdvantageSet adv;
  adv.sequence.assign(rewards.size(), 0.0);
  if (!(sd >= cfg.std_floor)) {
    adv.degenerate = true;
    return adv;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) adv.sequence[i] = (rewards[i] - mean) / sd;
  return adv;
}

}  // namespace rapo
