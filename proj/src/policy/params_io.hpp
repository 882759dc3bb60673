#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "policy/policy.hpp"

namespace rapo {

// {"V", "D", "tag", "step", "weights": [row-major V*D]}
nlohmann::json params_to_json(const PolicyParams& params);
PolicyParams params_from_json(const nlohmann::json& j);

void save_params(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_params(const std::filesystem::path& path);

}  // namespace rapo
