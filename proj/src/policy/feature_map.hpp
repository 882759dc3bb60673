#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "policy/vocabulary.hpp"

namespace rapo {

using Vector = Eigen::VectorXd;

struct FeatureMapSpec {
  int window = 4;            // tokens of history visible to the policy
  int position_buckets = 4;  // onehot(position mod buckets)
  int num_flags = 4;         // observable persona flags
  bool bias = true;
};

// Bag-of-tokens over the last `window` tokens, then onehot(position mod
// buckets), then persona flags, then an optional constant 1.
class FeatureMap {
 public:
  FeatureMap(int vocab_size, FeatureMapSpec spec);

  int dimension() const { return dim_; }
  int vocab_size() const { return vocab_size_; }
  const FeatureMapSpec& spec() const { return spec_; }

  // `head` followed by `tail` is the visible token stream (context then the
  // action prefix); only its last `window` tokens matter.
  Vector features(std::span<const TokenId> head, std::span<const TokenId> tail, int position,
                  std::span<const std::uint8_t> flags) const;

  Vector features(std::span<const TokenId> tokens, int position,
                  std::span<const std::uint8_t> flags) const {
    return features(tokens, {}, position, flags);
  }

 private:
  int vocab_size_;
  FeatureMapSpec spec_;
  int dim_;
};

}  // namespace rapo
