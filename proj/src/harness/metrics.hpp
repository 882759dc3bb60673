#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace rapo {

// Line-oriented JSONL writer. Every line is flushed as soon as it is
// written, so an interrupted run leaves a parseable prefix.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path);
  void append(const nlohmann::ordered_json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct CurvePoint {
  long step = 0;
  double entropy = 0.0;
  double reward = 0.0;
  double length = 0.0;
};

// Reads {step, entropy, mean_reward, mean_length} from a metrics JSONL file.
std::vector<CurvePoint> read_curve(const std::filesystem::path& metrics_path);

}  // namespace rapo
