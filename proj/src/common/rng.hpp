#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace rapo {

// Counter-based random stream. The n-th draw is a pure function of
// (key, n), so a stream handed to a worker produces the same values no
// matter how workers are scheduled. Draws never go through std::
// distributions, whose output is implementation-defined.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t key) : key_(key) {}

  // Key derived from a master seed and a path of indices, e.g.
  // (master, step, prompt, group member).
  static SeedStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  SeedStream child(std::uint64_t tag) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace rapo
