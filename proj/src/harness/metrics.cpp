#include "harness/metrics.hpp"

#include "common/errors.hpp"

namespace rapo {

JsonlAppender::JsonlAppender(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void JsonlAppender::append(const nlohmann::ordered_json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

std::vector<CurvePoint> read_curve(const std::filesystem::path& metrics_path) {
  std::ifstream in(metrics_path);
  if (!in) throw IoError("cannot open " + metrics_path.string());
  std::vector<CurvePoint> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(CurvePoint{j.at("step").get<long>(), j.at("entropy").get<double>(),
                               j.at("mean_reward").get<double>(),
                               j.at("mean_length").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(metrics_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rapo
