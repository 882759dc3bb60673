#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rapo {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

enum class TokenRole { strategy, content, reaction, critique, separator };

std::string_view to_string(TokenRole role);
TokenRole token_role_from_string(std::string_view name);

struct TokenSpec {
  std::string name;
  TokenRole role;
};

// Half-open id range [begin, end).
struct TokenRange {
  TokenId begin = 0;
  TokenId end = 0;
  bool contains(TokenId t) const { return t >= begin && t < end; }
  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

// Ordered symbolic alphabet. Tokens of one role occupy a contiguous id range;
// exactly one separator exists. The end-of-turn terminator is a content token.
class Vocabulary {
 public:
  Vocabulary(std::vector<TokenSpec> tokens, std::string terminator);

  // Alphabet used by the dialogue environment: four strategies, topic and
  // filler content, user-side tokens (reactions and openings), critique codes.
  static Vocabulary standard();

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& name(TokenId id) const;
  TokenRole role(TokenId id) const;
  TokenId id(std::string_view name) const;
  std::optional<TokenId> find(std::string_view name) const;
  bool contains(TokenId id) const { return id >= 0 && id < size(); }

  TokenRange range(TokenRole role) const;
  TokenId separator() const { return separator_; }
  TokenId terminator() const { return terminator_; }
  const std::string& terminator_name() const { return name(terminator_); }
  const std::vector<TokenSpec>& tokens() const { return tokens_; }

  std::vector<std::string> names(const TokenSeq& seq) const;
  TokenSeq ids(const std::vector<std::string>& names) const;

 private:
  std::vector<TokenSpec> tokens_;
  std::map<std::string, TokenId, std::less<>> index_;
  std::map<TokenRole, TokenRange> ranges_;
  TokenId separator_ = -1;
  TokenId terminator_ = -1;
};

}  // namespace rapo
