#include "policy/policy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "common/errors.hpp"

namespace rapo {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool admissible(const TokenMask& mask, int k) {
  return mask.empty() || mask[static_cast<std::size_t>(k)] != 0;
}
}  // namespace

std::string_view to_string(ParamTag tag) {
  switch (tag) {
    case ParamTag::student: return "student";
    case ParamTag::reference: return "reference";
    case ParamTag::ema_teacher: return "ema_teacher";
  }
  return "student";
}

ParamTag param_tag_from_string(std::string_view name) {
  if (name == "student") return ParamTag::student;
  if (name == "reference") return ParamTag::reference;
  if (name == "ema_teacher") return ParamTag::ema_teacher;
  throw FormatError("unknown parameter tag '" + std::string(name) + "'");
}

PolicyParams PolicyParams::zeros(int vocab_size, int dimension, ParamTag tag) {
  return PolicyParams{Matrix::Zero(vocab_size, dimension), tag, 0};
}

double TokenDistribution::entropy() const {
  double h = 0.0;
  for (Eigen::Index k = 0; k < probabilities.size(); ++k)
    if (probabilities[k] > 0.0) h -= probabilities[k] * log_probabilities[k];
  return h;
}

Vector logits(const PolicyParams& params, const Vector& features) {
  if (features.size() != params.weights.cols())
    throw ConfigError("feature dimension " + std::to_string(features.size()) +
                      " does not match parameter dimension " +
                      std::to_string(params.weights.cols()));
  return params.weights * features;
}

TokenDistribution distribution_from_logits(const Vector& z, const TokenMask& mask) {
  const int v = static_cast<int>(z.size());
  if (!mask.empty() && static_cast<int>(mask.size()) != v)
    throw ConfigError("token mask size does not match vocabulary");
  double m = kNegInf;
  for (int k = 0; k < v; ++k) {
    if (!admissible(mask, k)) continue;
    if (!std::isfinite(z[k])) throw NumericError("non-finite logit at token " + std::to_string(k));
    m = std::max(m, z[k]);
  }
  if (m == kNegInf) throw ConfigError("token mask admits no token");
  double sum = 0.0;
  for (int k = 0; k < v; ++k)
    if (admissible(mask, k)) sum += std::exp(z[k] - m);
  const double log_z = m + std::log(sum);
  TokenDistribution d{Vector::Zero(v), Vector::Constant(v, kNegInf)};
  for (int k = 0; k < v; ++k) {
    if (!admissible(mask, k)) continue;
    d.log_probabilities[k] = z[k] - log_z;
    d.probabilities[k] = std::exp(d.log_probabilities[k]);
  }
  return d;
}

TokenDistribution distribution(const PolicyParams& params, const Vector& features,
                               const TokenMask& mask) {
  return distribution_from_logits(logits(params, features), mask);
}

ActionGrammar ActionGrammar::unrestricted(int vocab_size, std::optional<TokenId> terminator) {
  return ActionGrammar{TokenMask(static_cast<std::size_t>(vocab_size), 1),
                       TokenMask(static_cast<std::size_t>(vocab_size), 1), terminator};
}

ActionGrammar ActionGrammar::chain_of_supporting(const Vocabulary& vocab) {
  const auto n = static_cast<std::size_t>(vocab.size());
  ActionGrammar g{TokenMask(n, 0), TokenMask(n, 0), vocab.terminator()};
  const TokenRange s = vocab.range(TokenRole::strategy);
  const TokenRange c = vocab.range(TokenRole::content);
  for (TokenId t = s.begin; t < s.end; ++t) g.first[static_cast<std::size_t>(t)] = 1;
  for (TokenId t = c.begin; t < c.end; ++t) g.rest[static_cast<std::size_t>(t)] = 1;
  return g;
}

int ActionGrammar::admissible_count(int position, int vocab_size) const {
  const TokenMask& m = mask_at(position);
  if (m.empty()) return vocab_size;
  int n = 0;
  for (auto b : m) n += b ? 1 : 0;
  return n;
}

SequencePolicy::SequencePolicy(FeatureMap feature_map, ActionGrammar grammar)
    : feature_map_(std::move(feature_map)), grammar_(std::move(grammar)) {
  const auto v = static_cast<std::size_t>(feature_map_.vocab_size());
  for (const TokenMask* m : {&grammar_.first, &grammar_.rest})
    if (!m->empty() && m->size() != v) throw ConfigError("grammar mask size does not match vocabulary");
}

Vector SequencePolicy::features(const Observation& obs, std::span<const TokenId> prefix) const {
  return feature_map_.features(obs.tokens, prefix, static_cast<int>(prefix.size()), obs.flags);
}

TokenDistribution SequencePolicy::step(const PolicyParams& params, const Observation& obs,
                                       std::span<const TokenId> prefix) const {
  const int pos = static_cast<int>(prefix.size());
  return distribution(params, features(obs, prefix), grammar_.mask_at(pos));
}

namespace {

void check_action(const SequencePolicy& policy, const TokenSeq& action) {
  if (action.empty()) throw InputError("action must be nonempty");
  for (TokenId t : action)
    if (t < 0 || t >= policy.vocab_size())
      throw InputError("token id " + std::to_string(t) + " outside vocabulary");
}

}  // namespace

std::vector<double> per_position_log_probs(const SequencePolicy& policy, const PolicyParams& params,
                                           const Observation& obs, const TokenSeq& action) {
  check_action(policy, action);
  std::vector<double> out;
  out.reserve(action.size());
  std::span<const TokenId> all(action);
  for (std::size_t t = 0; t < action.size(); ++t) {
    const TokenDistribution d = policy.step(params, obs, all.first(t));
    const double lp = d.log_probabilities[action[t]];
    if (lp == kNegInf)
      throw InputError("token " + std::to_string(action[t]) + " not admissible at position " +
                       std::to_string(t));
    out.push_back(lp);
  }
  return out;
}

double sequence_log_prob(const SequencePolicy& policy, const PolicyParams& params,
                         const Observation& obs, const TokenSeq& action) {
  double total = 0.0;
  for (double lp : per_position_log_probs(policy, params, obs, action)) total += lp;
  return total;
}

Vector softmax_score(const TokenDistribution& dist, TokenId token) {
  Vector s = -dist.probabilities;
  s[token] += 1.0;
  return s;
}

Matrix grad_sequence_log_prob(const SequencePolicy& policy, const PolicyParams& params,
                              const Observation& obs, const TokenSeq& action) {
  check_action(policy, action);
  Matrix g = Matrix::Zero(params.weights.rows(), params.weights.cols());
  std::span<const TokenId> all(action);
  for (std::size_t t = 0; t < action.size(); ++t) {
    const Vector f = policy.features(obs, all.first(t));
    const TokenDistribution d =
        distribution(params, f, policy.grammar().mask_at(static_cast<int>(t)));
    if (d.probabilities[action[t]] == 0.0)
      throw InputError("token " + std::to_string(action[t]) + " not admissible at position " +
                       std::to_string(t));
    g.noalias() += softmax_score(d, action[t]) * f.transpose();
  }
  return g;
}

TokenId sample_token(const TokenDistribution& dist, SeedStream& stream) {
  const double u = stream.uniform();
  double acc = 0.0;
  TokenId last = -1;
  for (int k = 0; k < dist.size(); ++k) {
    if (dist.probabilities[k] <= 0.0) continue;
    acc += dist.probabilities[k];
    last = k;
    if (u < acc) return k;
  }
  // u landed in the rounding gap above the accumulated mass.
  return last;
}

TokenSeq sample_sequence(const SequencePolicy& policy, const PolicyParams& params,
                         const Observation& obs, int max_len, SeedStream& stream) {
  if (max_len < 1) throw InputError("max_len must be >= 1");
  TokenSeq out;
  out.reserve(static_cast<std::size_t>(max_len));
  const auto& term = policy.grammar().terminator;
  while (static_cast<int>(out.size()) < max_len) {
    const TokenId t = sample_token(policy.step(params, obs, out), stream);
    out.push_back(t);
    if (term && t == *term) break;
  }
  return out;
}

TokenSeq condition_with_feedback(const TokenSeq& context, const TokenSeq& feedback,
                                 TokenId separator) {
  if (feedback.empty()) throw InputError("feedback must be nonempty");
  TokenSeq out;
  out.reserve(context.size() + 1 + feedback.size());
  out.insert(out.end(), context.begin(), context.end());
  out.push_back(separator);
  out.insert(out.end(), feedback.begin(), feedback.end());
  return out;
}

PolicyParams ema_mix(const PolicyParams& teacher, const PolicyParams& student, double coefficient) {
  if (teacher.weights.rows() != student.weights.rows() ||
      teacher.weights.cols() != student.weights.cols())
    throw ConfigError("ema_mix shape mismatch");
  if (!(coefficient >= 0.0 && coefficient <= 1.0))
    throw ConfigError("ema coefficient must lie in [0, 1]");
  PolicyParams out;
  out.weights = coefficient * teacher.weights + (1.0 - coefficient) * student.weights;
  out.tag = ParamTag::ema_teacher;
  out.step = student.step;
  return out;
}

}  // namespace rapo
