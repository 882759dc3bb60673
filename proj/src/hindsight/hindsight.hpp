#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace rapo {

enum class SelectionReason { pivotal_distress, pivotal_trust, low_signal };
std::string_view to_string(SelectionReason reason);

struct SelectionResult {
  std::int64_t dialogue_id = 0;
  int turn_index = 0;
  bool selected = false;
  SelectionReason reason = SelectionReason::low_signal;
  double magnitude = 0.0;
};

// A turn is pivotal when |delta_distress| >= tau or |delta_trust| >= tau.
// The reason names the larger shift (distress on ties).
SelectionResult hindsight_judge(const nlohmann::json& record, double tau);

struct SelectionReport {
  std::int64_t total = 0;
  std::int64_t kept = 0;
  std::int64_t malformed = 0;
  std::int64_t pivotal_distress = 0;
  std::int64_t pivotal_trust = 0;
  std::int64_t low_signal = 0;
  double tau = 0.0;

  double kept_fraction() const { return total ? static_cast<double>(kept) / total : 0.0; }
  nlohmann::ordered_json to_json() const;
};

// Malformed lines are skipped and counted; more than this fraction of
// malformed lines is a hard format error.
inline constexpr double kMaxMalformedFraction = 0.01;

// Streams `in`, writing selected lines byte-for-byte to `out` in input order.
SelectionReport select_corpus(const std::filesystem::path& in, const std::filesystem::path& out,
                              double tau);

}  // namespace rapo
