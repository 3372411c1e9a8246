// Copyright 2026 The Verifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Weighted-EBNF grammars: parsing the grammar file format, generating
// random sentences, lexing and parsing text against a grammar, and
// mutating derivation trees.
//
// File format (UTF-8, line-oriented, `#` starts a comment):
//
//   start program ;
//   program : ( decl )+ ;
//   decl    : 3* "class" IDENT "{" "}" | "enum" IDENT "{" "}" ;
//   token IDENT : /[a-zA-Z_][a-zA-Z0-9_]*/ ;
//
// An alternative is a sequence of quoted literals, rule names, token names
// and parenthesized groups, optionally suffixed with `?`, `*` or `+`. A
// leading `<int>*` gives the alternative a weight (default 1). Token
// patterns support character classes, ranges and the `*`, `+`, `?`
// quantifiers.

#ifndef VERIFUZZ_GRAMMAR_H_
#define VERIFUZZ_GRAMMAR_H_

#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace verifuzz::grammar {

inline constexpr int kDefaultMaxDepth = 12;
// Character-class tokens are never sampled longer than this.
inline constexpr int kMaxTokenLength = 12;
// Upper bound on repetitions drawn for a `*` or `+` group.
inline constexpr int kMaxRepeat = 8;

enum class Repeat { kOnce, kOptional, kStar, kPlus };

struct Alternative;

struct Symbol {
  enum class Kind { kLiteral, kToken, kRule, kGroup };

  Kind kind = Kind::kLiteral;
  // Literal text, token name or rule name. Empty for groups.
  std::string text;
  Repeat repeat = Repeat::kOnce;
  // Group body; empty for every other kind.
  std::vector<Alternative> alternatives;
  // Line of the grammar file the symbol appeared on.
  int line = 0;
};

struct Alternative {
  std::vector<Symbol> symbols;
  uint32_t weight = 1;
};

// One element of a token pattern: a byte set repeated [min, max] times.
struct PatternItem {
  std::bitset<256> chars;
  int min = 1;
  int max = 1;  // -1 means unbounded.
};

struct TokenDef {
  std::string name;
  std::string pattern;  // Source text between the slashes.
  std::vector<PatternItem> items;
};

// Immutable after ParseGrammar(); safe to share across threads.
struct Grammar {
  std::string start;
  std::map<std::string, std::vector<Alternative>> rules;
  // Token definitions in declaration order; earlier wins lexing ties.
  std::vector<TokenDef> tokens;

  // Derived data filled by ParseGrammar().
  std::set<std::string> literals;
  // Shortest completion depth of each rule.
  std::map<std::string, int> completion_depth;

  const TokenDef* FindToken(std::string_view name) const;
  // Maximum shortest-completion depth over all rules: the bound on how far
  // a generated tree may exceed the requested depth.
  int Overshoot() const;
};

absl::StatusOr<Grammar> ParseGrammar(std::string_view text);
absl::StatusOr<Grammar> LoadGrammarFile(const std::string& path);

struct SourcePos {
  int line = 0;
  int col = 0;
};

struct DerivationTree {
  enum class Kind { kRule, kToken, kLiteral };

  Kind kind = Kind::kRule;
  // Rule name or token name; empty for literals.
  std::string name;
  // Leaf text; empty for rule nodes.
  std::string text;
  std::vector<DerivationTree> children;
  int depth = 0;
  // Set for leaves produced by Parse(); zero for generated trees.
  SourcePos pos;

  bool IsLeaf() const { return kind != Kind::kRule; }
};

// Recomputes `depth` bottom-up: leaves are 0, rule nodes 1 + max child.
void RecomputeDepth(DerivationTree& tree);

// Leaf texts joined by single spaces.
std::string Serialize(const DerivationTree& tree);

// Deterministic in (grammar, seed, max_depth). Fails only when the start
// rule has no finite derivation.
absl::StatusOr<DerivationTree> Generate(const Grammar& grammar, uint64_t seed,
                                        int max_depth = kDefaultMaxDepth);

// Same as Generate() but rooted at `rule`, treating the root as sitting at
// nesting level `level`.
absl::StatusOr<DerivationTree> GenerateRule(const Grammar& grammar,
                                            const std::string& rule,
                                            uint64_t seed, int max_depth,
                                            int level);

// Replaces exactly one rule subtree of `tree`, either by splicing a subtree
// with the same rule name from `pool` or by regenerating it.
DerivationTree MutateTree(const Grammar& grammar, const DerivationTree& tree,
                          std::span<const DerivationTree> pool, uint64_t seed,
                          int max_depth = kDefaultMaxDepth);

struct Token {
  // True when the token is one of the grammar's quoted literals.
  bool is_literal = false;
  // Literal text or token name.
  std::string kind;
  std::string text;
  SourcePos pos;
};

// Splits `text` into literal and pattern tokens by longest match. Literals
// win ties against patterns; earlier token definitions win among patterns.
absl::StatusOr<std::vector<Token>> Lex(const Grammar& grammar,
                                       std::string_view text);

// Like Lex() but never fails: unmatched bytes become single-byte tokens.
std::vector<std::string> TokenizeLenient(const Grammar& grammar,
                                         std::string_view text);

// Earley parser compiled from a grammar. Groups are desugared into
// synthetic rules that are flattened away again in the returned tree, so a
// parse yields the same tree shape Generate() produces. Thread-safe.
class Parser {
 public:
  explicit Parser(const Grammar& grammar);
  ~Parser();
  Parser(Parser&&) noexcept;
  Parser& operator=(Parser&&) noexcept;

  absl::StatusOr<DerivationTree> Parse(std::string_view text) const;
  absl::StatusOr<DerivationTree> ParseTokens(
      std::span<const Token> tokens) const;

  // Implementation detail, public only for the parser's internal helpers.
  struct Compiled;

 private:
  const Grammar* grammar_;
  std::unique_ptr<const Compiled> compiled_;
};

// One-shot convenience wrapper around Parser.
absl::StatusOr<DerivationTree> Parse(const Grammar& grammar,
                                     std::string_view text);

// Quoted literals of the grammar, for use as a mutation dictionary.
std::vector<std::string> ExtractDictionary(const Grammar& grammar);

}  // namespace verifuzz::grammar

#endif  // VERIFUZZ_GRAMMAR_H_
