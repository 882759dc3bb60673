#include "oracle/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numeric>
#include <vector>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace rapo {

nlohmann::ordered_json GradCheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["max_rel_error"] = max_rel_error;
  j["worst_coordinate"] = {worst_row, worst_col};
  j["n_probes"] = n_probes;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  if (!failure.empty()) j["failure"] = failure;
  return j;
}

namespace {

void check_step(double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ConfigError("finite-difference step must lie in [1e-7, 1e-3]");
}

double central(const LossFn& loss, PolicyParams& work, int row, int col, double h) {
  const double saved = work.weights(row, col);
  work.weights(row, col) = saved + h;
  const double up = loss(work);
  work.weights(row, col) = saved - h;
  const double down = loss(work);
  work.weights(row, col) = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

GradCheckReport finite_diff(const LossFn& loss, const Matrix& analytic, const PolicyParams& at,
                            double h, int probes, std::uint64_t seed, double tolerance) {
  check_step(h);
  if (probes < 1) throw ConfigError("probes must be >= 1");
  if (analytic.rows() != at.weights.rows() || analytic.cols() != at.weights.cols())
    throw ConfigError("analytic gradient shape does not match parameters");

  const std::size_t total = static_cast<std::size_t>(at.weights.size());
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  const std::size_t n = std::min<std::size_t>(total, static_cast<std::size_t>(probes));
  if (n < total) {
    SeedStream stream(seed);
    for (std::size_t i = 0; i < n; ++i)
      std::swap(coords[i], coords[i + stream.below(total - i)]);
    coords.resize(n);
  }

  GradCheckReport rep;
  rep.tolerance = tolerance;
  PolicyParams work = at;
  const int cols = static_cast<int>(at.weights.cols());
  for (std::size_t c : coords) {
    const int row = static_cast<int>(c) / cols;
    const int col = static_cast<int>(c) % cols;
    const double numeric = central(loss, work, row, col, h);
    ++rep.n_probes;
    if (!std::isfinite(numeric)) {
      rep.failure = "non-finite loss at (" + std::to_string(row) + ", " + std::to_string(col) + ")";
      rep.worst_row = row;
      rep.worst_col = col;
      rep.max_rel_error = std::numeric_limits<double>::infinity();
      rep.pass = false;
      return rep;
    }
    const double a = analytic(row, col);
    const double err =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (err > rep.max_rel_error || rep.worst_row < 0) {
      rep.max_rel_error = std::max(rep.max_rel_error, err);
      rep.worst_row = row;
      rep.worst_col = col;
    }
  }
  rep.pass = rep.max_rel_error < tolerance;
  return rep;
}

Matrix numeric_gradient(const LossFn& loss, const PolicyParams& at, double h) {
  check_step(h);
  PolicyParams work = at;
  Matrix g(at.weights.rows(), at.weights.cols());
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) g(r, c) = central(loss, work, r, c, h);
  return g;
}

}  // namespace rapo
