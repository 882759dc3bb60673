#include "policy/params_io.hpp"

#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace rapo {

nlohmann::json params_to_json(const PolicyParams& params) {
  nlohmann::json j;
  j["V"] = params.vocab_size();
  j["D"] = params.dimension();
  j["tag"] = std::string(to_string(params.tag));
  j["step"] = params.step;
  std::vector<double> flat(params.weights.data(), params.weights.data() + params.weights.size());
  j["weights"] = std::move(flat);
  return j;
}

PolicyParams params_from_json(const nlohmann::json& j) {
  try {
    const int v = j.at("V").get<int>();
    const int d = j.at("D").get<int>();
    if (v <= 0 || d <= 0) throw FormatError("parameter shape must be positive");
    const auto flat = j.at("weights").get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(v) * static_cast<std::size_t>(d))
      throw FormatError("weights array has " + std::to_string(flat.size()) + " entries, expected V*D");
    PolicyParams p = PolicyParams::zeros(v, d, param_tag_from_string(j.at("tag").get<std::string>()));
    std::copy(flat.begin(), flat.end(), p.weights.data());
    p.step = j.at("step").get<std::int64_t>();
    if (!p.all_finite()) throw FormatError("weights contain non-finite entries");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed parameter file: ") + e.what());
  }
}

void save_params(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << params_to_json(params).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed parameter file " + path.string() + ": " + e.what());
  }
  return params_from_json(j);
}

}  // namespace rapo
