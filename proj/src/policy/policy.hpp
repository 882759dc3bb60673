#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "common/rng.hpp"
#include "policy/feature_map.hpp"
#include "policy/vocabulary.hpp"

namespace rapo {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ParamTag { student, reference, ema_teacher };
std::string_view to_string(ParamTag tag);
ParamTag param_tag_from_string(std::string_view name);

// Weights of the linear-softmax policy, V x D.
struct PolicyParams {
  Matrix weights;
  ParamTag tag = ParamTag::student;
  std::int64_t step = 0;

  static PolicyParams zeros(int vocab_size, int dimension, ParamTag tag = ParamTag::student);
  int vocab_size() const { return static_cast<int>(weights.rows()); }
  int dimension() const { return static_cast<int>(weights.cols()); }
  bool all_finite() const { return weights.allFinite(); }
};

struct TokenDistribution {
  Vector probabilities;
  Vector log_probabilities;  // -inf on masked tokens

  int size() const { return static_cast<int>(probabilities.size()); }
  double entropy() const;
};

// 1 = admissible. An empty mask admits every token.
using TokenMask = std::vector<std::uint8_t>;

Vector logits(const PolicyParams& params, const Vector& features);
TokenDistribution distribution_from_logits(const Vector& logits, const TokenMask& mask = {});
TokenDistribution distribution(const PolicyParams& params, const Vector& features,
                               const TokenMask& mask = {});

// Which tokens the policy may emit at each position of an action.
struct ActionGrammar {
  TokenMask first;  // position 0
  TokenMask rest;   // positions >= 1
  std::optional<TokenId> terminator;

  static ActionGrammar unrestricted(int vocab_size, std::optional<TokenId> terminator = {});
  // Strategy token first, then content tokens until the terminator.
  static ActionGrammar chain_of_supporting(const Vocabulary& vocab);

  const TokenMask& mask_at(int position) const { return position == 0 ? first : rest; }
  int admissible_count(int position, int vocab_size) const;
};

struct Observation {
  TokenSeq tokens;
  std::vector<std::uint8_t> flags;
};

// Structure of the autoregressive policy (features and grammar). Parameters
// are passed separately so one structure serves student, reference and
// teacher snapshots.
class SequencePolicy {
 public:
  SequencePolicy(FeatureMap feature_map, ActionGrammar grammar);

  int vocab_size() const { return feature_map_.vocab_size(); }
  int dimension() const { return feature_map_.dimension(); }
  const FeatureMap& feature_map() const { return feature_map_; }
  const ActionGrammar& grammar() const { return grammar_; }

  Vector features(const Observation& obs, std::span<const TokenId> prefix) const;
  // Distribution for action position prefix.size().
  TokenDistribution step(const PolicyParams& params, const Observation& obs,
                         std::span<const TokenId> prefix) const;

 private:
  FeatureMap feature_map_;
  ActionGrammar grammar_;
};

// Per-position log pi(action[t] | obs, action[<t]).
std::vector<double> per_position_log_probs(const SequencePolicy& policy, const PolicyParams& params,
                                           const Observation& obs, const TokenSeq& action);
double sequence_log_prob(const SequencePolicy& policy, const PolicyParams& params,
                         const Observation& obs, const TokenSeq& action);
// Gradient of sequence_log_prob with respect to the weights.
Matrix grad_sequence_log_prob(const SequencePolicy& policy, const PolicyParams& params,
                              const Observation& obs, const TokenSeq& action);

TokenId sample_token(const TokenDistribution& dist, SeedStream& stream);
TokenSeq sample_sequence(const SequencePolicy& policy, const PolicyParams& params,
                         const Observation& obs, int max_len, SeedStream& stream);

// context ++ [separator] ++ feedback. Applying it twice inserts two separators.
TokenSeq condition_with_feedback(const TokenSeq& context, const TokenSeq& feedback,
                                 TokenId separator);

// coefficient * teacher + (1 - coefficient) * student, tagged ema_teacher.
PolicyParams ema_mix(const PolicyParams& teacher, const PolicyParams& student, double coefficient);

// (onehot(token) - p) as a dense vector; the score of a softmax at its logits.
Vector softmax_score(const TokenDistribution& dist, TokenId token);

}  // namespace rapo
