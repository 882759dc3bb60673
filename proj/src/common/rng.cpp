#include "common/rng.hpp"

namespace rapo {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeedStream SeedStream::derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = mix64(master ^ 0x5241504f5f524e47ULL);
  for (std::uint64_t p : path) key = mix64(key ^ mix64(p + 0x632be59bd9b4e019ULL));
  return SeedStream(key);
}

SeedStream SeedStream::child(std::uint64_t tag) const {
  return SeedStream(mix64(key_ ^ mix64(tag ^ 0xd6e8feb86659fd93ULL)));
}

std::uint64_t SeedStream::next_u64() {
  const std::uint64_t n = counter_++;
  return mix64(key_ + n * 0x9e3779b97f4a7c15ULL);
}

double SeedStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t SeedStream::below(std::size_t n) {
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

}  // namespace rapo
