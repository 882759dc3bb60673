#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <json.hpp>

#include "policy/policy.hpp"

namespace rapo {

struct GradCheckReport {
  double max_rel_error = 0.0;
  int worst_row = -1;
  int worst_col = -1;
  int n_probes = 0;
  double tolerance = 0.0;
  bool pass = false;
  std::string failure;  // set when a probe produced a non-finite loss

  nlohmann::ordered_json to_json() const;
};

using LossFn = std::function<double(const PolicyParams&)>;

inline constexpr double kDefaultFdStep = 1e-5;

// Central differences on `probes` distinct coordinates drawn from `seed`
// (every coordinate when probes >= V*D), compared against `analytic` with
// relative error |a - b| / max(|a|, |b|, 1e-8).
GradCheckReport finite_diff(const LossFn& loss, const Matrix& analytic, const PolicyParams& at,
                            double h, int probes, std::uint64_t seed, double tolerance);

// Full central-difference gradient, every coordinate.
Matrix numeric_gradient(const LossFn& loss, const PolicyParams& at, double h);

}  // namespace rapo
