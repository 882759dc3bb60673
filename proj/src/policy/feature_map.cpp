#include "policy/feature_map.hpp"

#include <string>

#include "common/errors.hpp"

namespace rapo {

FeatureMap::FeatureMap(int vocab_size, FeatureMapSpec spec) : vocab_size_(vocab_size), spec_(spec) {
  if (vocab_size_ <= 0) throw ConfigError("feature map needs a nonempty vocabulary");
  if (spec_.window < 1) throw ConfigError("feature window must be >= 1");
  if (spec_.position_buckets < 1) throw ConfigError("position_buckets must be >= 1");
  if (spec_.num_flags < 0) throw ConfigError("num_flags must be >= 0");
  dim_ = vocab_size_ + spec_.position_buckets + spec_.num_flags + (spec_.bias ? 1 : 0);
}

Vector FeatureMap::features(std::span<const TokenId> head, std::span<const TokenId> tail,
                            int position, std::span<const std::uint8_t> flags) const {
  if (static_cast<int>(flags.size()) != spec_.num_flags)
    throw ConfigError("expected " + std::to_string(spec_.num_flags) + " persona flags, got " +
                      std::to_string(flags.size()));
  if (position < 0) throw InputError("negative position");
  Vector f = Vector::Zero(dim_);
  const std::size_t total = head.size() + tail.size();
  const std::size_t w = static_cast<std::size_t>(spec_.window);
  for (std::size_t i = total > w ? total - w : 0; i < total; ++i) {
    const TokenId t = i < head.size() ? head[i] : tail[i - head.size()];
    if (t < 0 || t >= vocab_size_)
      throw InputError("token id " + std::to_string(t) + " outside vocabulary");
    f[t] += 1.0;
  }
  int offset = vocab_size_;
  f[offset + position % spec_.position_buckets] = 1.0;
  offset += spec_.position_buckets;
  for (std::size_t i = 0; i < flags.size(); ++i) f[offset + static_cast<int>(i)] = flags[i] ? 1.0 : 0.0;
  offset += spec_.num_flags;
  if (spec_.bias) f[offset] = 1.0;
  return f;
}

}  // namespace rapo
