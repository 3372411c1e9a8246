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

#include "verifuzz/grammar.h"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "verifuzz/rng.h"

namespace verifuzz::grammar {
namespace {

constexpr int kInfiniteDepth = std::numeric_limits<int>::max() / 4;

// ---------------------------------------------------------------------------
// Grammar file lexer.

struct GToken {
  enum class Kind { kName, kString, kRegex, kInt, kPunct, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  int64_t value = 0;
  int line = 0;
};

absl::Status SyntaxError(int line, const std::string& what) {
  return absl::InvalidArgumentError(
      absl::StrCat("line ", line, ": syntax error: ", what));
}

absl::StatusOr<std::vector<GToken>> LexGrammarFile(std::string_view text) {
  std::vector<GToken> out;
  int line = 1;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    GToken tok;
    tok.line = line;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_')) {
        ++j;
      }
      tok.kind = GToken::Kind::kName;
      tok.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      size_t j = i + 1;
      while (j < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      tok.kind = GToken::Kind::kInt;
      tok.text = std::string(text.substr(i, j - i));
      // Saturate instead of overflowing; anything this large is rejected as
      // a weight anyway.
      tok.value = tok.text.size() > 12 ? std::numeric_limits<int64_t>::max()
                                       : std::stoll(tok.text);
      if (tok.text[0] == '-' && tok.text.size() > 12) tok.value = -1;
      i = j;
    } else if (c == '"') {
      size_t j = i + 1;
      std::string value;
      bool closed = false;
      while (j < text.size()) {
        char d = text[j];
        if (d == '\n') break;
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\' && j + 1 < text.size() &&
            (text[j + 1] == '"' || text[j + 1] == '\\')) {
          value.push_back(text[j + 1]);
          j += 2;
          continue;
        }
        value.push_back(d);
        ++j;
      }
      if (!closed) return SyntaxError(line, "unterminated string literal");
      tok.kind = GToken::Kind::kString;
      tok.text = std::move(value);
      i = j;
    } else if (c == '/') {
      size_t j = i + 1;
      std::string value;
      bool closed = false;
      while (j < text.size()) {
        char d = text[j];
        if (d == '\n') break;
        if (d == '/') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\' && j + 1 < text.size() && text[j + 1] == '/') {
          value.push_back('/');
          j += 2;
          continue;
        }
        value.push_back(d);
        ++j;
      }
      if (!closed) return SyntaxError(line, "unterminated token pattern");
      tok.kind = GToken::Kind::kRegex;
      tok.text = std::move(value);
      i = j;
    } else if (std::string_view(":;|()?*+").find(c) != std::string_view::npos) {
      tok.kind = GToken::Kind::kPunct;
      tok.text = std::string(1, c);
      ++i;
    } else {
      return SyntaxError(
          line, absl::StrCat("unexpected character '", std::string(1, c), "'"));
    }
    out.push_back(std::move(tok));
  }
  GToken end;
  end.kind = GToken::Kind::kEnd;
  end.line = line;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Token patterns.

absl::StatusOr<std::vector<PatternItem>> ParsePattern(std::string_view src,
                                                      int line) {
  std::vector<PatternItem> items;
  size_t i = 0;
  auto read_char = [&](char* out) -> bool {
    if (i >= src.size()) return false;
    if (src[i] == '\\' && i + 1 < src.size()) {
      char e = src[i + 1];
      switch (e) {
        case 'n':
          *out = '\n';
          break;
        case 't':
          *out = '\t';
          break;
        default:
          *out = e;
          break;
      }
      i += 2;
      return true;
    }
    *out = src[i++];
    return true;
  };
  while (i < src.size()) {
    PatternItem item;
    char c = src[i];
    if (c == '*' || c == '+' || c == '?') {
      return SyntaxError(line, "quantifier without operand in token pattern");
    }
    if (c == '[') {
      ++i;
      bool negate = false;
      if (i < src.size() && src[i] == '^') {
        negate = true;
        ++i;
      }
      bool closed = false;
      bool first = true;
      while (i < src.size()) {
        if (src[i] == ']' && !first) {
          closed = true;
          ++i;
          break;
        }
        first = false;
        char lo;
        read_char(&lo);
        char hi = lo;
        if (i + 1 < src.size() && src[i] == '-' && src[i + 1] != ']') {
          ++i;
          read_char(&hi);
        }
        if (static_cast<unsigned char>(hi) < static_cast<unsigned char>(lo)) {
          return SyntaxError(line, "reversed range in character class");
        }
        for (int b = static_cast<unsigned char>(lo);
             b <= static_cast<unsigned char>(hi); ++b) {
          item.chars.set(b);
        }
      }
      if (!closed) return SyntaxError(line, "unterminated character class");
      if (negate) item.chars.flip();
    } else {
      char lit;
      read_char(&lit);
      item.chars.set(static_cast<unsigned char>(lit));
    }
    if (item.chars.none()) {
      return SyntaxError(line, "empty character class");
    }
    if (i < src.size()) {
      switch (src[i]) {
        case '*':
          item.min = 0;
          item.max = -1;
          ++i;
          break;
        case '+':
          item.min = 1;
          item.max = -1;
          ++i;
          break;
        case '?':
          item.min = 0;
          item.max = 1;
          ++i;
          break;
        default:
          break;
      }
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) return SyntaxError(line, "empty token pattern");
  return items;
}

// Shortest-completion depth contributed by one symbol / alternative of an
// already analysed grammar.
int SymbolCompletion(const Grammar& g, const Symbol& s);

int AltCompletion(const Grammar& g, const Alternative& alt) {
  int d = 0;
  for (const Symbol& s : alt.symbols) d = std::max(d, SymbolCompletion(g, s));
  return d;
}

int SymbolCompletion(const Grammar& g, const Symbol& s) {
  switch (s.kind) {
    case Symbol::Kind::kLiteral:
    case Symbol::Kind::kToken:
      return 0;
    case Symbol::Kind::kRule: {
      auto it = g.completion_depth.find(s.text);
      return it == g.completion_depth.end() ? kInfiniteDepth : it->second;
    }
    case Symbol::Kind::kGroup: {
      if (s.repeat == Repeat::kOptional || s.repeat == Repeat::kStar) return 0;
      int best = kInfiniteDepth;
      for (const Alternative& alt : s.alternatives) {
        best = std::min(best, AltCompletion(g, alt));
      }
      return best;
    }
  }
  return kInfiniteDepth;
}

// ---------------------------------------------------------------------------
// Grammar file parser.

class FileParser {
 public:
  explicit FileParser(std::vector<GToken> toks) : toks_(std::move(toks)) {}

  absl::StatusOr<Grammar> Run() {
    Grammar g;
    std::map<std::string, int> rule_lines;
    std::map<std::string, int> token_lines;
    int start_line = 0;
    while (Peek().kind != GToken::Kind::kEnd) {
      const GToken& t = Peek();
      if (t.kind != GToken::Kind::kName) {
        return SyntaxError(
            t.line, absl::StrCat("expected a rule name, got '", t.text, "'"));
      }
      if (t.text == "start" && Peek(1).kind == GToken::Kind::kName) {
        if (start_line != 0) {
          return absl::InvalidArgumentError(
              absl::StrCat("line ", t.line, ": duplicate start declaration"));
        }
        start_line = t.line;
        Advance();
        g.start = Advance().text;
        if (!ExpectPunct(";")) return Expected(";");
        continue;
      }
      if (t.text == "token" && Peek(1).kind == GToken::Kind::kName) {
        int line = t.line;
        Advance();
        TokenDef def;
        def.name = Advance().text;
        if (!ExpectPunct(":")) return Expected(":");
        if (Peek().kind != GToken::Kind::kRegex) {
          return SyntaxError(Peek().line, "expected /pattern/");
        }
        def.pattern = Advance().text;
        auto items = ParsePattern(def.pattern, line);
        if (!items.ok()) return items.status();
        def.items = *std::move(items);
        if (!ExpectPunct(";")) return Expected(";");
        if (token_lines.count(def.name) || rule_lines.count(def.name)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "line ", line, ": duplicate definition of ", def.name));
        }
        token_lines[def.name] = line;
        g.tokens.push_back(std::move(def));
        continue;
      }
      int line = t.line;
      std::string name = Advance().text;
      if (!ExpectPunct(":")) return Expected(":");
      auto alts = ParseAlternatives();
      if (!alts.ok()) return alts.status();
      if (!ExpectPunct(";")) return Expected(";");
      if (rule_lines.count(name) || token_lines.count(name)) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line, ": duplicate rule ", name));
      }
      rule_lines[name] = line;
      g.rules[name] = *std::move(alts);
    }
    if (start_line == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", Peek().line, ": missing start declaration"));
    }
    if (!g.rules.count(g.start)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", start_line, ": start rule ", g.start, " is not defined"));
    }
    for (auto& [name, alts] : g.rules) {
      for (auto& alt : alts) {
        if (auto st = Bind(g, alt); !st.ok()) return st;
      }
    }
    if (auto st = ComputeCompletionDepths(g, rule_lines); !st.ok()) return st;
    return g;
  }

 private:
  const GToken& Peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const GToken& Advance() {
    const GToken& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool IsPunct(std::string_view p) const {
    return Peek().kind == GToken::Kind::kPunct && Peek().text == p;
  }
  bool ExpectPunct(std::string_view p) {
    if (!IsPunct(p)) return false;
    Advance();
    return true;
  }
  absl::Status Expected(const std::string& what) const {
    const GToken& t = Peek();
    return SyntaxError(t.line,
                       absl::StrCat("expected '", what, "', got ",
                                    t.kind == GToken::Kind::kEnd
                                        ? std::string("end of file")
                                        : absl::StrCat("'", t.text, "'")));
  }

  absl::StatusOr<std::vector<Alternative>> ParseAlternatives() {
    std::vector<Alternative> alts;
    while (true) {
      auto alt = ParseAlternative();
      if (!alt.ok()) return alt.status();
      alts.push_back(*std::move(alt));
      if (!IsPunct("|")) break;
      Advance();
    }
    return alts;
  }

  absl::StatusOr<Alternative> ParseAlternative() {
    Alternative alt;
    if (Peek().kind == GToken::Kind::kInt) {
      const GToken& w = Advance();
      if (!ExpectPunct("*")) return Expected("*");
      if (w.value <= 0 || w.value > std::numeric_limits<uint32_t>::max()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", w.line,
                         ": weight must be a positive integer, got ", w.text));
      }
      alt.weight = static_cast<uint32_t>(w.value);
    }
    while (true) {
      const GToken& t = Peek();
      if (t.kind == GToken::Kind::kString) {
        if (t.text.empty()) {
          return SyntaxError(t.line, "empty literal");
        }
        Symbol s;
        s.kind = Symbol::Kind::kLiteral;
        s.text = t.text;
        s.line = t.line;
        alt.symbols.push_back(std::move(s));
        Advance();
      } else if (t.kind == GToken::Kind::kName) {
        Symbol s;
        s.kind = Symbol::Kind::kRule;  // Rebound to kToken in Bind().
        s.text = t.text;
        s.line = t.line;
        alt.symbols.push_back(std::move(s));
        Advance();
      } else if (IsPunct("(")) {
        Symbol s;
        s.kind = Symbol::Kind::kGroup;
        s.line = t.line;
        Advance();
        auto alts = ParseAlternatives();
        if (!alts.ok()) return alts.status();
        if (!ExpectPunct(")")) return Expected(")");
        s.alternatives = *std::move(alts);
        if (IsPunct("?")) {
          s.repeat = Repeat::kOptional;
          Advance();
        } else if (IsPunct("*")) {
          s.repeat = Repeat::kStar;
          Advance();
        } else if (IsPunct("+")) {
          s.repeat = Repeat::kPlus;
          Advance();
        }
        alt.symbols.push_back(std::move(s));
      } else if (t.kind == GToken::Kind::kInt) {
        return SyntaxError(t.line,
                           "weights are only allowed at the start of an "
                           "alternative");
      } else {
        break;
      }
    }
    return alt;
  }

  absl::Status Bind(Grammar& g, Alternative& alt) {
    for (Symbol& s : alt.symbols) {
      switch (s.kind) {
        case Symbol::Kind::kLiteral:
          g.literals.insert(s.text);
          break;
        case Symbol::Kind::kRule:
        case Symbol::Kind::kToken:
          if (g.FindToken(s.text) != nullptr) {
            s.kind = Symbol::Kind::kToken;
          } else if (g.rules.count(s.text)) {
            s.kind = Symbol::Kind::kRule;
          } else {
            return absl::InvalidArgumentError(absl::StrCat(
                "line ", s.line, ": undefined nonterminal ", s.text));
          }
          break;
        case Symbol::Kind::kGroup:
          for (Alternative& inner : s.alternatives) {
            if (auto st = Bind(g, inner); !st.ok()) return st;
          }
          break;
      }
    }
    return absl::OkStatus();
  }

  static absl::Status ComputeCompletionDepths(
      Grammar& g, const std::map<std::string, int>& rule_lines) {
    for (const auto& [name, alts] : g.rules) {
      g.completion_depth[name] = kInfiniteDepth;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [name, alts] : g.rules) {
        int best = kInfiniteDepth;
        for (const Alternative& alt : alts) {
          best = std::min(best, AltCompletion(g, alt));
        }
        int d = best >= kInfiniteDepth ? kInfiniteDepth : best + 1;
        if (d < g.completion_depth[name]) {
          g.completion_depth[name] = d;
          changed = true;
        }
      }
    }
    for (const auto& [name, d] : g.completion_depth) {
      if (d >= kInfiniteDepth) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", rule_lines.at(name), ": rule ", name,
                         " has no finite derivation"));
      }
    }
    return absl::OkStatus();
  }

  std::vector<GToken> toks_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Generation.

bool LexesAsSingleToken(const Grammar& g, const std::string& text,
                        const TokenDef& def) {
  if (g.literals.count(text)) return false;
  auto toks = Lex(g, text);
  return toks.ok() && toks->size() == 1 && !(*toks)[0].is_literal &&
         (*toks)[0].kind == def.name;
}

class Generator {
 public:
  Generator(const Grammar& g, uint64_t seed, int max_depth)
      : g_(g), rng_(seed), max_depth_(max_depth) {}

  DerivationTree ExpandRule(const std::string& name, int level, bool shortest) {
    shortest = shortest || level > max_depth_;
    DerivationTree node;
    node.kind = DerivationTree::Kind::kRule;
    node.name = name;
    const auto& alts = g_.rules.at(name);
    const Alternative& alt = alts[Choose(alts, shortest)];
    ExpandSequence(alt, level, shortest, node.children);
    int d = 0;
    for (const auto& c : node.children) d = std::max(d, c.depth);
    node.depth = d + 1;
    return node;
  }

 private:
  size_t Choose(const std::vector<Alternative>& alts, bool shortest) {
    if (alts.size() == 1) return 0;
    if (shortest) {
      size_t best = 0;
      int best_depth = kInfiniteDepth + 1;
      for (size_t i = 0; i < alts.size(); ++i) {
        int d = AltCompletion(g_, alts[i]);
        if (d < best_depth) {
          best = i;
          best_depth = d;
        }
      }
      return best;
    }
    weights_.clear();
    for (const auto& a : alts) weights_.push_back(a.weight);
    return rng_.Weighted(weights_);
  }

  void ExpandSequence(const Alternative& alt, int level, bool shortest,
                      std::vector<DerivationTree>& out) {
    for (const Symbol& s : alt.symbols) ExpandSymbol(s, level, shortest, out);
  }

  void ExpandSymbol(const Symbol& s, int level, bool shortest,
                    std::vector<DerivationTree>& out) {
    switch (s.kind) {
      case Symbol::Kind::kLiteral: {
        DerivationTree leaf;
        leaf.kind = DerivationTree::Kind::kLiteral;
        leaf.text = s.text;
        out.push_back(std::move(leaf));
        return;
      }
      case Symbol::Kind::kToken: {
        DerivationTree leaf;
        leaf.kind = DerivationTree::Kind::kToken;
        leaf.name = s.text;
        leaf.text = SampleToken(*g_.FindToken(s.text));
        out.push_back(std::move(leaf));
        return;
      }
      case Symbol::Kind::kRule:
        out.push_back(ExpandRule(s.text, level + 1, shortest));
        return;
      case Symbol::Kind::kGroup: {
        int reps = 1;
        switch (s.repeat) {
          case Repeat::kOnce:
            break;
          case Repeat::kOptional:
            reps = shortest ? 0 : (rng_.Coin() ? 1 : 0);
            break;
          case Repeat::kStar:
            reps = shortest ? 0 : rng_.Geometric(kMaxRepeat);
            break;
          case Repeat::kPlus:
            reps = shortest ? 1 : 1 + rng_.Geometric(kMaxRepeat - 1);
            break;
        }
        for (int r = 0; r < reps; ++r) {
          const Alternative& alt =
              s.alternatives[Choose(s.alternatives, shortest)];
          ExpandSequence(alt, level, shortest, out);
        }
        return;
      }
    }
  }

  std::string SampleToken(const TokenDef& def) {
    auto& seen = emitted_[def.name];
    if (!seen.empty() && rng_.Chance(1, 20)) {
      return seen[rng_.Below(seen.size())];
    }
    std::string text;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      text.clear();
      for (const PatternItem& item : def.items) {
        int count = item.min;
        if (item.max != item.min) {
          int room = item.max < 0 ? kMaxTokenLength : item.max - item.min;
          count += rng_.Geometric(room);
        }
        int budget = kMaxTokenLength - static_cast<int>(text.size());
        count = std::max(item.min, std::min(count, budget));
        for (int k = 0; k < count; ++k) text.push_back(RandomMember(item));
      }
      if (LexesAsSingleToken(g_, text, def)) break;
    }
    seen.push_back(text);
    return text;
  }

  char RandomMember(const PatternItem& item) {
    // Index of the k-th set bit.
    uint64_t k = rng_.Below(item.chars.count());
    for (int b = 0; b < 256; ++b) {
      if (item.chars.test(b) && k-- == 0) return static_cast<char>(b);
    }
    return '?';
  }

  const Grammar& g_;
  Rng rng_;
  int max_depth_;
  std::vector<uint32_t> weights_;
  std::map<std::string, std::vector<std::string>> emitted_;
};

void CollectLeaves(const DerivationTree& t,
                   std::vector<const std::string*>& out) {
  if (t.IsLeaf()) {
    out.push_back(&t.text);
    return;
  }
  for (const auto& c : t.children) CollectLeaves(c, out);
}

// Index path from the root to a rule node plus its nesting level.
struct Site {
  std::vector<size_t> path;
  const DerivationTree* node = nullptr;
};

void CollectRuleSites(const DerivationTree& t, std::vector<size_t>& path,
                      std::vector<Site>& out) {
  if (t.IsLeaf()) return;
  out.push_back(Site{path, &t});
  for (size_t i = 0; i < t.children.size(); ++i) {
    path.push_back(i);
    CollectRuleSites(t.children[i], path, out);
    path.pop_back();
  }
}

}  // namespace

const TokenDef* Grammar::FindToken(std::string_view name) const {
  for (const TokenDef& t : tokens) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

int Grammar::Overshoot() const {
  int d = 0;
  for (const auto& [name, depth] : completion_depth) d = std::max(d, depth);
  return d;
}

absl::StatusOr<Grammar> ParseGrammar(std::string_view text) {
  auto toks = LexGrammarFile(text);
  if (!toks.ok()) return toks.status();
  return FileParser(*std::move(toks)).Run();
}

absl::StatusOr<Grammar> LoadGrammarFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  auto g = ParseGrammar(ss.str());
  if (!g.ok()) {
    return absl::Status(g.status().code(),
                        absl::StrCat(path, ": ", g.status().message()));
  }
  return g;
}

void RecomputeDepth(DerivationTree& tree) {
  if (tree.IsLeaf()) {
    tree.depth = 0;
    return;
  }
  int d = 0;
  for (auto& c : tree.children) {
    RecomputeDepth(c);
    d = std::max(d, c.depth);
  }
  tree.depth = d + 1;
}

std::string Serialize(const DerivationTree& tree) {
  std::vector<const std::string*> leaves;
  CollectLeaves(tree, leaves);
  std::string out;
  for (size_t i = 0; i < leaves.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += *leaves[i];
  }
  return out;
}

absl::StatusOr<DerivationTree> GenerateRule(const Grammar& grammar,
                                            const std::string& rule,
                                            uint64_t seed, int max_depth,
                                            int level) {
  if (max_depth < 1) {
    return absl::InvalidArgumentError("max_depth must be at least 1");
  }
  auto it = grammar.completion_depth.find(rule);
  if (!grammar.rules.count(rule) || it == grammar.completion_depth.end()) {
    return absl::InvalidArgumentError(absl::StrCat("unknown rule ", rule));
  }
  if (it->second >= kInfiniteDepth) {
    return absl::FailedPreconditionError(
        absl::StrCat("rule ", rule, " has no finite derivation"));
  }
  Generator gen(grammar, seed, max_depth);
  return gen.ExpandRule(rule, level, /*shortest=*/false);
}

absl::StatusOr<DerivationTree> Generate(const Grammar& grammar, uint64_t seed,
                                        int max_depth) {
  return GenerateRule(grammar, grammar.start, seed, max_depth, /*level=*/1);
}

DerivationTree MutateTree(const Grammar& grammar, const DerivationTree& tree,
                          std::span<const DerivationTree> pool, uint64_t seed,
                          int max_depth) {
  Rng rng(seed);
  std::vector<Site> sites;
  std::vector<size_t> path;
  CollectRuleSites(tree, path, sites);
  if (sites.empty()) return tree;

  std::map<std::string, std::vector<const DerivationTree*>> donors;
  for (const DerivationTree& p : pool) {
    std::vector<Site> ps;
    std::vector<size_t> pp;
    CollectRuleSites(p, pp, ps);
    for (const Site& s : ps) donors[s.node->name].push_back(s.node);
  }
  std::vector<size_t> compatible;
  for (size_t i = 0; i < sites.size(); ++i) {
    if (donors.count(sites[i].node->name)) compatible.push_back(i);
  }

  DerivationTree out = tree;
  auto locate = [&out](const std::vector<size_t>& p) {
    DerivationTree* node = &out;
    for (size_t i : p) node = &node->children[i];
    return node;
  };

  if (!compatible.empty() && rng.Coin()) {
    const Site& site = sites[compatible[rng.Below(compatible.size())]];
    const auto& candidates = donors[site.node->name];
    *locate(site.path) = *candidates[rng.Below(candidates.size())];
  } else {
    const Site& site = sites[rng.Below(sites.size())];
    int level = static_cast<int>(site.path.size()) + 1;
    auto fresh =
        GenerateRule(grammar, site.node->name, rng.Next(), max_depth, level);
    if (fresh.ok()) *locate(site.path) = *std::move(fresh);
  }
  RecomputeDepth(out);
  return out;
}

std::vector<std::string> ExtractDictionary(const Grammar& grammar) {
  return std::vector<std::string>(grammar.literals.begin(),
                                  grammar.literals.end());
}

}  // namespace verifuzz::grammar
