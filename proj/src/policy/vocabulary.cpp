#include "policy/vocabulary.hpp"

#include <array>

#include "common/errors.hpp"

namespace rapo {

namespace {
constexpr std::array<std::pair<TokenRole, std::string_view>, 5> kRoleNames{{
    {TokenRole::strategy, "strategy"},
    {TokenRole::content, "content"},
    {TokenRole::reaction, "reaction"},
    {TokenRole::critique, "critique"},
    {TokenRole::separator, "separator"},
}};
}  // namespace

std::string_view to_string(TokenRole role) {
  for (const auto& [r, n] : kRoleNames)
    if (r == role) return n;
  return "unknown";
}

TokenRole token_role_from_string(std::string_view name) {
  for (const auto& [r, n] : kRoleNames)
    if (n == name) return r;
  throw ConfigError("unknown token role '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(std::vector<TokenSpec> tokens, std::string terminator)
    : tokens_(std::move(tokens)) {
  if (tokens_.size() < 8) throw ConfigError("vocabulary needs at least 8 tokens");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    const auto& spec = tokens_[i];
    if (spec.name.empty()) throw ConfigError("empty token name");
    if (!index_.emplace(spec.name, id).second)
      throw ConfigError("duplicate token name '" + spec.name + "'");
    auto it = ranges_.find(spec.role);
    if (it == ranges_.end()) {
      ranges_.emplace(spec.role, TokenRange{id, id + 1});
    } else if (it->second.end == id) {
      it->second.end = id + 1;
    } else {
      throw ConfigError("tokens with role '" + std::string(to_string(spec.role)) +
                        "' must be contiguous");
    }
  }
  const TokenRange sep = range(TokenRole::separator);
  if (sep.size() != 1) throw ConfigError("vocabulary needs exactly one separator token");
  separator_ = sep.begin;
  for (TokenRole r : {TokenRole::strategy, TokenRole::content})
    if (range(r).empty())
      throw ConfigError("vocabulary needs at least one " + std::string(to_string(r)) + " token");
  auto t = find(terminator);
  if (!t || role(*t) != TokenRole::content)
    throw ConfigError("terminator '" + terminator + "' must name a content token");
  terminator_ = *t;
}

Vocabulary Vocabulary::standard() {
  using R = TokenRole;
  return Vocabulary(
      {
          {"QUESTION", R::strategy},
          {"VALIDATE", R::strategy},
          {"SUGGEST", R::strategy},
          {"TEMPLATE_EMPATHY", R::strategy},
          {"TOPIC_WORK", R::content},
          {"TOPIC_FAMILY", R::content},
          {"TOPIC_HEALTH", R::content},
          {"FILLER", R::content},
          {"EOT", R::content},
          {"RELIEF", R::reaction},
          {"OPEN_UP", R::reaction},
          {"DISENGAGE", R::reaction},
          {"PUSHBACK", R::reaction},
          {"NEUTRAL", R::reaction},
          {"VENT_WORK", R::reaction},
          {"VENT_FAMILY", R::reaction},
          {"VENT_HEALTH", R::reaction},
          {"CRIT_PREMATURE_ADVICE", R::critique},
          {"CRIT_TEMPLATE", R::critique},
          {"CRIT_IGNORED_EMOTION", R::critique},
          {"CRIT_GOOD_PACING", R::critique},
          {"CRIT_TOO_LONG", R::critique},
          {"SEP", R::separator},
      },
      "EOT");
}

const std::string& Vocabulary::name(TokenId id) const {
  if (!contains(id)) throw InputError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)].name;
}

TokenRole Vocabulary::role(TokenId id) const {
  if (!contains(id)) throw InputError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)].role;
}

std::optional<TokenId> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view name) const {
  auto t = find(name);
  if (!t) throw InputError("unknown token '" + std::string(name) + "'");
  return *t;
}

TokenRange Vocabulary::range(TokenRole role) const {
  auto it = ranges_.find(role);
  return it == ranges_.end() ? TokenRange{} : it->second;
}

std::vector<std::string> Vocabulary::names(const TokenSeq& seq) const {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (TokenId t : seq) out.push_back(name(t));
  return out;
}

TokenSeq Vocabulary::ids(const std::vector<std::string>& names) const {
  TokenSeq out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(id(n));
  return out;
}

}  // namespace rapo
