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

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "verifuzz/grammar.h"

namespace verifuzz::grammar {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string Printable(std::string_view s) {
  std::string out;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x20 || u >= 0x7f || c == '\'') {
      out += absl::StrFormat("\\x%02x", u);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Length of the longest prefix of `s` matched by `items`; 0 when none.
size_t LongestMatch(const std::vector<PatternItem>& items, std::string_view s) {
  using State = std::pair<int, int>;
  const int n = static_cast<int>(items.size());
  auto closure = [&](std::vector<State>& states) {
    for (size_t k = 0; k < states.size(); ++k) {
      auto [i, c] = states[k];
      if (i < n && c >= items[i].min) {
        State next{i + 1, 0};
        if (std::find(states.begin(), states.end(), next) == states.end()) {
          states.push_back(next);
        }
      }
    }
  };
  auto accepting = [&](const std::vector<State>& states) {
    return std::find(states.begin(), states.end(), State{n, 0}) != states.end();
  };
  std::vector<State> cur{{0, 0}};
  closure(cur);
  size_t best = 0;
  std::vector<State> next;
  for (size_t pos = 0; pos < s.size() && !cur.empty(); ++pos) {
    unsigned char ch = static_cast<unsigned char>(s[pos]);
    next.clear();
    for (auto [i, c] : cur) {
      if (i >= n || !items[i].chars.test(ch)) continue;
      const PatternItem& it = items[i];
      if (it.max >= 0 && c >= it.max) continue;
      int nc = c + 1;
      if (it.max < 0) nc = std::min(nc, std::max(it.min, 0));
      State st{i, nc};
      if (std::find(next.begin(), next.end(), st) == next.end()) {
        next.push_back(st);
      }
    }
    closure(next);
    std::swap(cur, next);
    if (accepting(cur)) best = pos + 1;
  }
  return best;
}

}  // namespace

absl::StatusOr<std::vector<Token>> Lex(const Grammar& grammar,
                                       std::string_view text) {
  std::vector<Token> out;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](size_t count) {
    for (size_t k = 0; k < count; ++k) {
      if (text[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  };
  while (true) {
    while (pos < text.size() && IsSpace(text[pos])) advance(1);
    if (pos >= text.size()) break;
    std::string_view rest = text.substr(pos);
    size_t best_len = 0;
    bool best_literal = false;
    std::string best_kind;
    for (const std::string& lit : grammar.literals) {
      if (lit.size() > best_len && rest.substr(0, lit.size()) == lit) {
        best_len = lit.size();
        best_literal = true;
        best_kind = lit;
      }
    }
    for (const TokenDef& def : grammar.tokens) {
      size_t m = LongestMatch(def.items, rest);
      if (m > best_len) {
        best_len = m;
        best_literal = false;
        best_kind = def.name;
      }
    }
    if (best_len == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("unexpected character '", Printable(rest.substr(0, 1)),
                       "' at ", line, ":", col));
    }
    Token tok;
    tok.is_literal = best_literal;
    tok.kind = std::move(best_kind);
    tok.text = std::string(rest.substr(0, best_len));
    tok.pos = SourcePos{line, col};
    out.push_back(std::move(tok));
    advance(best_len);
  }
  return out;
}

std::vector<std::string> TokenizeLenient(const Grammar& grammar,
                                         std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < text.size()) {
    if (IsSpace(text[pos])) {
      ++pos;
      continue;
    }
    std::string_view rest = text.substr(pos);
    size_t best = 0;
    for (const std::string& lit : grammar.literals) {
      if (lit.size() > best && rest.substr(0, lit.size()) == lit) {
        best = lit.size();
      }
    }
    for (const TokenDef& def : grammar.tokens) {
      best = std::max(best, LongestMatch(def.items, rest));
    }
    if (best == 0) best = 1;
    out.emplace_back(rest.substr(0, best));
    pos += best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Earley parser.

struct Parser::Compiled {
  // Symbols: non-negative values are nonterminals, negative values encode
  // terminal index t as -(t + 1).
  struct Production {
    int lhs = 0;
    std::vector<int> rhs;
  };
  struct Terminal {
    bool is_literal = false;
    std::string kind;
  };

  std::vector<std::string> names;
  std::vector<bool> synthetic;
  std::vector<bool> nullable;
  std::vector<Production> productions;
  std::vector<std::vector<int>> by_lhs;
  std::vector<Terminal> terminals;
  std::map<std::pair<bool, std::string>, int> terminal_index;
  std::map<std::string, int> rule_index;
  int start = 0;

  int AddNonterminal(std::string name, bool is_synthetic) {
    names.push_back(std::move(name));
    synthetic.push_back(is_synthetic);
    by_lhs.emplace_back();
    return static_cast<int>(names.size()) - 1;
  }

  void AddProduction(int lhs, std::vector<int> rhs) {
    by_lhs[lhs].push_back(static_cast<int>(productions.size()));
    productions.push_back(Production{lhs, std::move(rhs)});
  }

  int TerminalSymbol(bool is_literal, const std::string& kind) {
    auto key = std::make_pair(is_literal, kind);
    auto it = terminal_index.find(key);
    int t;
    if (it == terminal_index.end()) {
      t = static_cast<int>(terminals.size());
      terminals.push_back(Terminal{is_literal, kind});
      terminal_index.emplace(key, t);
    } else {
      t = it->second;
    }
    return -(t + 1);
  }

  std::vector<int> Lower(const Alternative& alt) {
    std::vector<int> rhs;
    for (const Symbol& s : alt.symbols) {
      switch (s.kind) {
        case Symbol::Kind::kLiteral:
          rhs.push_back(TerminalSymbol(true, s.text));
          break;
        case Symbol::Kind::kToken:
          rhs.push_back(TerminalSymbol(false, s.text));
          break;
        case Symbol::Kind::kRule:
          rhs.push_back(rule_index.at(s.text));
          break;
        case Symbol::Kind::kGroup:
          rhs.push_back(LowerGroup(s));
          break;
      }
    }
    return rhs;
  }

  int LowerGroup(const Symbol& s) {
    int body = AddNonterminal("<group>", true);
    for (const Alternative& alt : s.alternatives) {
      AddProduction(body, Lower(alt));
    }
    switch (s.repeat) {
      case Repeat::kOnce:
        return body;
      case Repeat::kOptional: {
        int g = AddNonterminal("<opt>", true);
        AddProduction(g, {});
        AddProduction(g, {body});
        return g;
      }
      case Repeat::kStar: {
        int g = AddNonterminal("<star>", true);
        AddProduction(g, {});
        AddProduction(g, {g, body});
        return g;
      }
      case Repeat::kPlus: {
        int g = AddNonterminal("<plus>", true);
        AddProduction(g, {body});
        AddProduction(g, {g, body});
        return g;
      }
    }
    return body;
  }

  void ComputeNullable() {
    nullable.assign(names.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Production& p : productions) {
        if (nullable[p.lhs]) continue;
        bool all = std::all_of(p.rhs.begin(), p.rhs.end(), [&](int sym) {
          return sym >= 0 && nullable[sym];
        });
        if (all) {
          nullable[p.lhs] = true;
          changed = true;
        }
      }
    }
  }
};

namespace {

struct Item {
  int prod;
  int dot;
  int origin;
};

uint64_t ItemKey(int prod, int dot, int origin) {
  return (static_cast<uint64_t>(prod) << 40) |
         (static_cast<uint64_t>(dot) << 32) | static_cast<uint32_t>(origin);
}

struct EarleySet {
  std::vector<Item> items;
  std::unordered_set<uint64_t> seen;
  std::unordered_map<int, std::vector<int>> waiting;  // nonterminal -> items
  std::vector<bool> predicted;

  bool Has(int prod, int dot, int origin) const {
    return seen.count(ItemKey(prod, dot, origin)) > 0;
  }
};

class EarleyRun {
 public:
  EarleyRun(const Parser::Compiled& c, std::span<const Token> tokens)
      : c_(c), tokens_(tokens) {
    token_terminal_.reserve(tokens.size());
    for (const Token& t : tokens) {
      auto it = c.terminal_index.find({t.is_literal, t.kind});
      token_terminal_.push_back(it == c.terminal_index.end() ? -1 : it->second);
    }
  }

  absl::StatusOr<DerivationTree> Run() {
    const size_t n = tokens_.size();
    sets_.resize(n + 1);
    for (auto& s : sets_) s.predicted.assign(c_.names.size(), false);
    // The augmented production is the last one: <root> -> start.
    root_prod_ = static_cast<int>(c_.productions.size()) - 1;
    Add(0, root_prod_, 0, 0);
    for (size_t i = 0; i <= n; ++i) {
      Process(i);
      if (i == n) break;
      Scan(i);
      if (sets_[i + 1].items.empty()) {
        const Token& t = tokens_[i];
        return absl::InvalidArgumentError(absl::StrCat(
            "unexpected token '", t.text, "' at ", t.pos.line, ":", t.pos.col));
      }
    }
    const int root_len =
        static_cast<int>(c_.productions[root_prod_].rhs.size());
    if (!sets_[n].Has(root_prod_, root_len, 0)) {
      SourcePos end{1, 1};
      if (!tokens_.empty()) {
        const Token& last = tokens_.back();
        end = SourcePos{last.pos.line,
                        last.pos.col + static_cast<int>(last.text.size())};
      }
      return absl::InvalidArgumentError(
          absl::StrCat("unexpected end of input at ", end.line, ":", end.col));
    }
    std::vector<DerivationTree> out;
    if (!Build(c_.start, 0, static_cast<int>(n), out) || out.size() != 1) {
      return absl::InternalError("failed to reconstruct derivation tree");
    }
    RecomputeDepth(out[0]);
    return std::move(out[0]);
  }

 private:
  void Add(size_t set, int prod, int dot, int origin) {
    EarleySet& s = sets_[set];
    if (!s.seen.insert(ItemKey(prod, dot, origin)).second) return;
    s.items.push_back(Item{prod, dot, origin});
  }

  void Process(size_t i) {
    EarleySet& s = sets_[i];
    for (size_t k = 0; k < s.items.size(); ++k) {
      const Item item = s.items[k];
      const auto& rhs = c_.productions[item.prod].rhs;
      if (item.dot == static_cast<int>(rhs.size())) {
        // Complete.
        const int lhs = c_.productions[item.prod].lhs;
        EarleySet& from = sets_[item.origin];
        auto it = from.waiting.find(lhs);
        if (it == from.waiting.end()) continue;
        // Copy: `from` may be `s`, whose waiting list can grow below.
        const std::vector<int> waiters = it->second;
        for (int w : waiters) {
          const Item wi = from.items[w];
          Add(i, wi.prod, wi.dot + 1, wi.origin);
        }
        continue;
      }
      const int sym = rhs[item.dot];
      if (sym < 0) continue;  // Terminal; handled by Scan().
      s.waiting[sym].push_back(static_cast<int>(k));
      if (!s.predicted[sym]) {
        s.predicted[sym] = true;
        for (int p : c_.by_lhs[sym]) Add(i, p, 0, static_cast<int>(i));
      }
      if (c_.nullable[sym]) Add(i, item.prod, item.dot + 1, item.origin);
    }
  }

  void Scan(size_t i) {
    const int t = token_terminal_[i];
    if (t < 0) return;
    const int sym = -(t + 1);
    for (const Item& item : sets_[i].items) {
      const auto& rhs = c_.productions[item.prod].rhs;
      if (item.dot < static_cast<int>(rhs.size()) && rhs[item.dot] == sym) {
        Add(i + 1, item.prod, item.dot + 1, item.origin);
      }
    }
  }

  bool Completed(int set, int nt, int origin) const {
    for (int p : c_.by_lhs[nt]) {
      if (sets_[set].Has(p, static_cast<int>(c_.productions[p].rhs.size()),
                         origin)) {
        return true;
      }
    }
    return false;
  }

  // Appends the tree(s) for nonterminal `nt` spanning [start, end) to `out`.
  // Synthetic nonterminals contribute their children directly.
  bool Build(int nt, int start, int end, std::vector<DerivationTree>& out) {
    const uint64_t key = SpanKey(nt, start, end);
    if (failed_build_.count(key)) return false;
    if (active_.count(key)) {
      ++cycle_blocks_;
      return false;
    }
    const uint64_t blocks_before = cycle_blocks_;
    active_.insert(key);
    for (int p : c_.by_lhs[nt]) {
      const int len = static_cast<int>(c_.productions[p].rhs.size());
      if (!sets_[end].Has(p, len, start)) continue;
      std::vector<DerivationTree> children;
      if (!Match(p, len, start, end, children)) continue;
      active_.erase(key);
      if (c_.synthetic[nt]) {
        for (auto& ch : children) out.push_back(std::move(ch));
      } else {
        DerivationTree node;
        node.kind = DerivationTree::Kind::kRule;
        node.name = c_.names[nt];
        node.children = std::move(children);
        out.push_back(std::move(node));
      }
      return true;
    }
    active_.erase(key);
    // A failure caused by the cycle guard depends on the caller's context.
    if (cycle_blocks_ == blocks_before) failed_build_.insert(key);
    return false;
  }

  static uint64_t SpanKey(int nt, int start, int end) {
    return (static_cast<uint64_t>(nt) << 42) |
           (static_cast<uint64_t>(start) << 21) | static_cast<uint64_t>(end);
  }

  // Matches rhs[0, k) of production `p` against [start, end).
  bool Match(int p, int k, int start, int end,
             std::vector<DerivationTree>& children) {
    if (k == 0) return start == end;
    const int sym = c_.productions[p].rhs[k - 1];
    if (sym < 0) {
      if (end <= start) return false;
      if (token_terminal_[end - 1] != -(sym + 1)) return false;
      if (!sets_[end - 1].Has(p, k - 1, start)) return false;
      if (!Match(p, k - 1, start, end - 1, children)) return false;
      const Token& t = tokens_[end - 1];
      DerivationTree leaf;
      leaf.kind = t.is_literal ? DerivationTree::Kind::kLiteral
                               : DerivationTree::Kind::kToken;
      if (!t.is_literal) leaf.name = t.kind;
      leaf.text = t.text;
      leaf.pos = t.pos;
      children.push_back(std::move(leaf));
      return true;
    }
    for (int mid = end; mid >= start; --mid) {
      if (!sets_[mid].Has(p, k - 1, start)) continue;
      if (!Completed(end, sym, mid)) continue;
      const size_t mark = children.size();
      if (Match(p, k - 1, start, mid, children) &&
          Build(sym, mid, end, children)) {
        return true;
      }
      children.resize(mark);
    }
    return false;
  }

  const Parser::Compiled& c_;
  std::span<const Token> tokens_;
  std::vector<int> token_terminal_;
  std::vector<EarleySet> sets_;
  int root_prod_ = 0;
  std::unordered_set<uint64_t> active_;
  std::unordered_set<uint64_t> failed_build_;
  uint64_t cycle_blocks_ = 0;
};

}  // namespace

Parser::Parser(const Grammar& grammar)
    : grammar_(&grammar), compiled_(nullptr) {
  auto c = std::make_unique<Compiled>();
  for (const auto& [name, alts] : grammar.rules) {
    c->rule_index[name] = c->AddNonterminal(name, false);
  }
  for (const auto& [name, alts] : grammar.rules) {
    const int lhs = c->rule_index.at(name);
    for (const Alternative& alt : alts) c->AddProduction(lhs, c->Lower(alt));
  }
  c->start = c->rule_index.at(grammar.start);
  const int root = c->AddNonterminal("<root>", true);
  c->AddProduction(root, {c->start});
  c->ComputeNullable();
  compiled_ = std::move(c);
}

Parser::~Parser() = default;
Parser::Parser(Parser&&) noexcept = default;
Parser& Parser::operator=(Parser&&) noexcept = default;

absl::StatusOr<DerivationTree> Parser::Parse(std::string_view text) const {
  auto tokens = Lex(*grammar_, text);
  if (!tokens.ok()) return tokens.status();
  return ParseTokens(*tokens);
}

absl::StatusOr<DerivationTree> Parser::ParseTokens(
    std::span<const Token> tokens) const {
  // Span keys pack token offsets into 21 bits.
  if (tokens.size() >= (size_t{1} << 21)) {
    return absl::ResourceExhaustedError("input has too many tokens");
  }
  return EarleyRun(*compiled_, tokens).Run();
}

absl::StatusOr<DerivationTree> Parse(const Grammar& grammar,
                                     std::string_view text) {
  return Parser(grammar).Parse(text);
}

}  // namespace verifuzz::grammar
