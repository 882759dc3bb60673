#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rapo {

struct CurveInput {
  std::string label;
  std::filesystem::path metrics;
};

struct CurveOutputs {
  std::vector<std::filesystem::path> csv;
  std::vector<std::filesystem::path> svg;  // empty when every run is empty
};

inline constexpr int kChartWidth = 900;
inline constexpr int kChartHeight = 300;

// Writes <label>.csv (step,entropy,reward,length) per run and, when any run
// has data, entropy.svg, reward.svg and length.svg with one polyline per
// non-empty run.
CurveOutputs emit_curves(const std::vector<CurveInput>& runs, const std::filesystem::path& out_dir);

}  // namespace rapo
