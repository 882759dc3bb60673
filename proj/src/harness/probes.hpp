#pragma once

#include <cstdint>

#include <json.hpp>

#include "harness/config.hpp"
#include "oracle/gradcheck.hpp"
#include "policy/policy.hpp"

namespace rapo {

struct GradcheckProbe {
  GradCheckReport grpo;
  GradCheckReport sdpo;
  bool pass() const { return grpo.pass && sdpo.pass; }
  nlohmann::ordered_json to_json() const;
};

inline constexpr double kProbeTolerance = 1e-4;
inline constexpr int kProbeCoordinates = 200;

// Finite-difference check of both loss gradients on rollouts sampled from
// `at`, with old/ref/teacher snapshots offset by small seeded noise so the
// importance ratios stay strictly inside the clip band.
GradcheckProbe gradcheck_probe(const TrainConfig& cfg, const PolicyParams& at, std::uint64_t seed);

}  // namespace rapo
