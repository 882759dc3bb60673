#include "hindsight/hindsight.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "common/errors.hpp"

namespace rapo {

std::string_view to_string(SelectionReason reason) {
  switch (reason) {
    case SelectionReason::pivotal_distress: return "PIVOTAL_DISTRESS";
    case SelectionReason::pivotal_trust: return "PIVOTAL_TRUST";
    case SelectionReason::low_signal: return "LOW_SIGNAL";
  }
  return "LOW_SIGNAL";
}

namespace {

double required_number(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_number())
    throw FormatError(std::string("corpus record lacks numeric field '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw FormatError(std::string("non-finite '") + key + "'");
  return v;
}

}  // namespace

SelectionResult hindsight_judge(const nlohmann::json& record, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (!record.is_object()) throw FormatError("corpus record is not an object");
  SelectionResult r;
  const double dd = std::abs(required_number(record, "delta_distress"));
  const double dt = std::abs(required_number(record, "delta_trust"));
  if (auto it = record.find("dialogue_id"); it != record.end() && it->is_number_integer())
    r.dialogue_id = it->get<std::int64_t>();
  if (auto it = record.find("turn_index"); it != record.end() && it->is_number_integer())
    r.turn_index = it->get<int>();
  r.magnitude = std::max(dd, dt);
  const bool distress = dd >= tau;
  const bool trust = dt >= tau;
  r.selected = distress || trust;
  if (!r.selected)
    r.reason = SelectionReason::low_signal;
  else if (distress && (!trust || dd >= dt))
    r.reason = SelectionReason::pivotal_distress;
  else
    r.reason = SelectionReason::pivotal_trust;
  return r;
}

nlohmann::ordered_json SelectionReport::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["kept"] = kept;
  j["kept_fraction"] = kept_fraction();
  j["reasons"] = {{"PIVOTAL_DISTRESS", pivotal_distress},
                  {"PIVOTAL_TRUST", pivotal_trust},
                  {"LOW_SIGNAL", low_signal}};
  j["tau"] = tau;
  j["malformed"] = malformed;
  return j;
}

SelectionReport select_corpus(const std::filesystem::path& in_path,
                              const std::filesystem::path& out_path, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw IoError("cannot read corpus " + in_path.string());
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + out_path.string());

  SelectionReport report;
  report.tau = tau;
  std::int64_t lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++lines;
    SelectionResult r;
    try {
      r = hindsight_judge(nlohmann::json::parse(line), tau);
    } catch (const nlohmann::json::exception&) {
      ++report.malformed;
      continue;
    } catch (const FormatError&) {
      ++report.malformed;
      continue;
    }
    ++report.total;
    switch (r.reason) {
      case SelectionReason::pivotal_distress: ++report.pivotal_distress; break;
      case SelectionReason::pivotal_trust: ++report.pivotal_trust; break;
      case SelectionReason::low_signal: ++report.low_signal; break;
    }
    if (r.selected) {
      ++report.kept;
      out << line << '\n';
    }
  }
  if (lines > 0 &&
      static_cast<double>(report.malformed) > kMaxMalformedFraction * static_cast<double>(lines))
    throw FormatError(std::to_string(report.malformed) + " of " + std::to_string(lines) +
                      " corpus lines are malformed");
  out.flush();
  if (!out) throw IoError("write failed for " + out_path.string());
  return report;
}

}  // namespace rapo
