#pragma once

#include <span>
#include <vector>

#include "optim/config.hpp"

namespace rapo {

struct AdvantageSet {
  std::vector<double> sequence;
  // Set when the group's reward std fell below std_floor; sequence is all
  // zeros and the group is skipped by the optimizer.
  bool degenerate = false;
  // Optional per-position advantages (token-level log-ratio), one list per
  // distilled candidate.
  std::vector<std::vector<double>> token;
};

// (r_i - mean) / std with the population std.
AdvantageSet group_advantages(std::span<const double> rewards, const GrpoConfig& cfg);

}  // namespace rapo
