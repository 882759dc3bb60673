#include "reward/reward.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "common/errors.hpp"

namespace rapo {

void LengthControl::validate() const {
  if (l_cache < 0 || l_max < 1 || l_cache >= l_max)
    throw ConfigError("length control needs 0 <= l_cache < l_max");
}

double length_penalty(int length, int l_max, int l_cache) {
  LengthControl{l_max, l_cache}.validate();
  const int free_len = l_max - l_cache;
  if (length <= free_len) return 0.0;
  if (length <= l_max) return static_cast<double>(free_len - length) / static_cast<double>(l_cache);
  return -1.0;
}

GroupEvaluation evaluation_from_qualities(std::span<const double> q,
                                          std::vector<TokenSeq> critiques) {
  const int g = static_cast<int>(q.size());
  if (static_cast<int>(critiques.size()) != g) throw InputError("critique count mismatch");
  std::vector<int> order(static_cast<std::size_t>(g));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] > q[b]; });
  GroupEvaluation ev;
  ev.ranks.assign(static_cast<std::size_t>(g), 0);
  for (int r = 0; r < g; ++r) ev.ranks[static_cast<std::size_t>(order[r])] = r + 1;
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  const double span = *hi - *lo;
  ev.scores.resize(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) {
    const double unit = span > 0.0 ? (q[i] - *lo) / span : 0.5;
    ev.scores[i] = kScoreLow + (kScoreHigh - kScoreLow) * unit - (ev.ranks[i] - 1) * kScoreEpsilon;
  }
  ev.critiques = std::move(critiques);
  ev.base_quality.assign(q.begin(), q.end());
  return ev;
}

namespace {

void check_group(std::span<const Rollout> group) {
  if (group.size() < 2) throw InputError("group evaluation needs at least 2 candidates");
  const auto& ref = group.front().context;
  for (const Rollout& r : group)
    if (r.context.history != ref.history || !(r.context.state == ref.state))
      throw InputError("group candidates must share one context");
}

}  // namespace

GrmJudge::GrmJudge(const Environment& env, LengthControl length) : env_(env), length_(length) {
  length_.validate();
  const auto& v = env_.vocab();
  premature_ = v.id("CRIT_PREMATURE_ADVICE");
  template_ = v.id("CRIT_TEMPLATE");
  ignored_ = v.id("CRIT_IGNORED_EMOTION");
  good_pacing_ = v.id("CRIT_GOOD_PACING");
  too_long_ = v.id("CRIT_TOO_LONG");
}

double GrmJudge::base_quality(const Rollout& r) const {
  return env_.true_outcome(r.context.state, r.post_state) +
         length_penalty(r.length, length_.l_max, length_.l_cache);
}

TokenSeq GrmJudge::critique(const Rollout& r) const {
  TokenSeq codes;
  const double d_distress = r.post_state.distress - r.context.state.distress;
  const bool relieved = d_distress <= -env_.constants().relief_threshold + kDeltaTolerance;
  if (r.trace.premature_advice) codes.push_back(premature_);
  if (r.trace.template_penalty) codes.push_back(template_);
  if (!relieved && !r.trace.premature_advice && !r.trace.template_penalty)
    codes.push_back(ignored_);
  if (length_.in_penalty_zone(r.length)) codes.push_back(too_long_);
  if (relieved) codes.push_back(good_pacing_);
  return codes;
}

GroupEvaluation GrmJudge::evaluate(std::span<const Rollout> group) const {
  check_group(group);
  std::vector<double> q;
  std::vector<TokenSeq> crit;
  for (const Rollout& r : group) {
    q.push_back(base_quality(r));
    crit.push_back(critique(r));
  }
  return evaluation_from_qualities(q, std::move(crit));
}

GroupEvaluation grm_evaluate(const Environment& env, const LengthControl& length,
                             std::span<const Rollout> group) {
  return GrmJudge(env, length).evaluate(group);
}

namespace {

double rubric_count(const Environment& env, const Rollout& r) {
  double count = 0.0;
  auto marker = [&](TokenId t) { return t == env.template_empathy() || t == env.validate(); };
  if (env.vocab().contains(r.strategy) && env.vocab().role(r.strategy) == TokenRole::strategy)
    count += 0.5;
  if (marker(r.strategy)) count += 1.0;
  for (TokenId t : r.response)
    if (marker(t)) count += 1.0;
  return count;
}

}  // namespace

std::vector<double> rubric_evaluate(const Environment& env, std::span<const Rollout> group) {
  if (group.empty()) throw InputError("rubric evaluation needs at least 1 candidate");
  std::vector<double> counts;
  for (const Rollout& r : group) counts.push_back(rubric_count(env, r));
  const double top = *std::max_element(counts.begin(), counts.end());
  for (double& c : counts) c = top > 0.0 ? c / top : 0.0;
  return counts;
}

GroupEvaluation rubric_group_evaluation(const Environment& env, const LengthControl& length,
                                        std::span<const Rollout> group) {
  check_group(group);
  length.validate();
  const auto& v = env.vocab();
  const std::vector<double> scores = rubric_evaluate(env, group);
  std::vector<TokenSeq> crit;
  for (std::size_t i = 0; i < group.size(); ++i) {
    TokenSeq codes;
    const bool has_marker = rubric_count(env, group[i]) > 0.5;
    codes.push_back(has_marker ? v.id("CRIT_GOOD_PACING") : v.id("CRIT_IGNORED_EMOTION"));
    if (length.in_penalty_zone(group[i].length)) codes.push_back(v.id("CRIT_TOO_LONG"));
    crit.push_back(std::move(codes));
  }
  return evaluation_from_qualities(scores, std::move(crit));
}

int select_worst(const GroupEvaluation& ev) {
  const int g = ev.size();
  for (int i = 0; i < g; ++i)
    if (ev.ranks[static_cast<std::size_t>(i)] == g) return i;
  throw InputError("evaluation ranks are not a permutation");
}

TokenSeq build_feedback(const Rollout& worst, const GroupEvaluation& ev, int worst_index,
                        TokenId separator) {
  if (worst.reaction.empty()) throw InputError("worst candidate has no reaction");
  if (worst_index < 0 || worst_index >= ev.size()) throw InputError("worst index out of range");
  const TokenSeq& crit = ev.critiques[static_cast<std::size_t>(worst_index)];
  TokenSeq fb = worst.reaction;
  fb.push_back(separator);
  fb.insert(fb.end(), crit.begin(), crit.end());
  return fb;
}

}  // namespace rapo
