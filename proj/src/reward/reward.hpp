#pragma once

#include <span>
#include <vector>

#include "env/environment.hpp"

namespace rapo {

struct LengthControl {
  int l_max = 200;
  int l_cache = 80;
  void validate() const;
  bool in_penalty_zone(int length) const { return length > l_max - l_cache; }
};

// Soft overlong punishment: 0 up to l_max - l_cache, linear down to -1 at
// l_max, -1 beyond.
double length_penalty(int length, int l_max, int l_cache);

// Per-candidate judgement over a whole group. Ranks are a permutation of
// 1..G and scores are pairwise distinct, rank 1 holding the highest score.
struct GroupEvaluation {
  std::vector<int> ranks;
  std::vector<double> scores;
  std::vector<TokenSeq> critiques;
  std::vector<double> base_quality;

  int size() const { return static_cast<int>(ranks.size()); }
};

// Score separation for tied qualities.
inline constexpr double kScoreEpsilon = 1e-6;
inline constexpr double kScoreLow = 0.05;
inline constexpr double kScoreHigh = 0.95;

// Ranks by descending quality (lower index first on ties) and maps qualities
// min-max into [kScoreLow, kScoreHigh], subtracting (rank - 1) * epsilon.
GroupEvaluation evaluation_from_qualities(std::span<const double> qualities,
                                          std::vector<TokenSeq> critiques);

// Oracle generative reward model: quality = true_outcome + length_penalty,
// critique codes from the rulebook branches that fired.
class GrmJudge {
 public:
  GrmJudge(const Environment& env, LengthControl length);

  GroupEvaluation evaluate(std::span<const Rollout> group) const;
  TokenSeq critique(const Rollout& rollout) const;
  double base_quality(const Rollout& rollout) const;

 private:
  const Environment& env_;
  LengthControl length_;
  TokenId premature_, template_, ignored_, good_pacing_, too_long_;
};

GroupEvaluation grm_evaluate(const Environment& env, const LengthControl& length,
                             std::span<const Rollout> group);

// Surface rubric: +1 per empathy-marker token, +0.5 for a strategy token,
// normalized by the group maximum. Reactions are never read.
std::vector<double> rubric_evaluate(const Environment& env, std::span<const Rollout> group);

// Rubric scores turned into a GroupEvaluation (ranking and surface critiques)
// so the worst candidate and its feedback are defined in rubric mode too.
GroupEvaluation rubric_group_evaluation(const Environment& env, const LengthControl& length,
                                        std::span<const Rollout> group);

int select_worst(const GroupEvaluation& evaluation);

// reaction ++ [SEP] ++ critique of the worst candidate.
TokenSeq build_feedback(const Rollout& worst, const GroupEvaluation& evaluation, int worst_index,
                        TokenId separator);

}  // namespace rapo
