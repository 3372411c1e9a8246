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

#include "verifuzz/mutator.h"

#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "verifuzz/grammar.h"
#include "verifuzz/rng.h"
#include "verifuzz/toy/verifier.h"

namespace verifuzz::mutator {
namespace {

const std::vector<std::string>& Dictionary() {
  static const auto* dictionary = new std::vector<std::string>(
      grammar::ExtractDictionary(toy::MiniPvlGrammar()));
  return *dictionary;
}

TEST(MutateBytesTest, EmptyInputBecomesDictionaryWordOrFewBytes) {
  int words = 0;
  int bytes = 0;
  for (uint64_t seed = 0; seed < 500; ++seed) {
    std::string out = MutateBytes("", Dictionary(), seed);
    bool is_word = std::find(Dictionary().begin(), Dictionary().end(), out) !=
                   Dictionary().end();
    if (is_word) {
      ++words;
    } else {
      ++bytes;
      EXPECT_GE(out.size(), 1u);
      EXPECT_LE(out.size(), 4u);
    }
  }
  EXPECT_GT(words, 0);
  EXPECT_GT(bytes, 0);
  // Without a dictionary only raw bytes are possible.
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::string out = MutateBytes("", {}, seed);
    EXPECT_GE(out.size(), 1u);
    EXPECT_LE(out.size(), 4u);
  }
}

TEST(MutateBytesTest, ZeroOpsIsIdentity) {
  EXPECT_EQ(MutateBytes("class C {}", Dictionary(), 17, 0), "class C {}");
  EXPECT_EQ(MutateBytes("", Dictionary(), 17, 0), "");
}

TEST(MutateBytesTest, Deterministic) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    EXPECT_EQ(MutateBytes("void m() { int x = 1; }", Dictionary(), seed),
              MutateBytes("void m() { int x = 1; }", Dictionary(), seed));
  }
}

TEST(MutateBytesTest, ChangesInputAndRespectsLengthBound) {
  Rng rng(5);
  int changed = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string input(rng.Below(300), '\0');
    for (char& c : input) c = static_cast<char>(rng.Below(256));
    std::string out = MutateBytes(input, Dictionary(), rng.Next());
    EXPECT_LE(out.size(), MaxMutatedLength(input.size()));
    if (out != input) ++changed;
  }
  EXPECT_GT(changed, 4500);
}

TEST(MutateBytesTest, ForcedOpCountsStayBounded) {
  for (int ops = 1; ops <= 40; ++ops) {
    std::string out = MutateBytes("ab", Dictionary(), ops, ops);
    EXPECT_LE(out.size(), MaxMutatedLength(2));
  }
}

TEST(CorpusTest, AddIfNovelRules) {
  Corpus corpus(Dictionary());
  EXPECT_TRUE(corpus.AddIfNovel("class A { }", 3, 0.5));
  EXPECT_FALSE(corpus.AddIfNovel("class A { }", 5, 1.0));
  EXPECT_FALSE(corpus.AddIfNovel("class B { }", 0, 1.0));
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_TRUE(corpus.entries()[0].coverage_novel);
  EXPECT_EQ(corpus.entries()[0].discovered_at, 0.5);
  EXPECT_TRUE(corpus.Contains("class A { }"));
  EXPECT_FALSE(corpus.Contains("class B { }"));

  EXPECT_TRUE(corpus.AddSeed("class B { }", 2.0));
  EXPECT_FALSE(corpus.AddSeed("class B { }", 2.0));
  EXPECT_FALSE(corpus.entries()[1].coverage_novel);
  EXPECT_EQ(corpus.dictionary(), Dictionary());
}

TEST(CorpusTest, SizeIsMonotone) {
  Corpus corpus;
  Rng rng(1);
  size_t last = 0;
  for (int i = 0; i < 1000; ++i) {
    corpus.AddIfNovel(std::to_string(rng.Below(200)), rng.Below(3), i);
    EXPECT_GE(corpus.size(), last);
    last = corpus.size();
  }
}

// Mutating valid mini-PVL sentences mostly breaks them: the fraction that
// still parses stays below the grammar strategy's 100%.
TEST(MutateBytesTest, ValidityRateBelowGrammarStrategy) {
  const grammar::Grammar& g = toy::MiniPvlGrammar();
  int parsed = 0;
  constexpr int kMutations = 10000;
  for (int i = 0; i < kMutations; ++i) {
    auto tree = grammar::Generate(g, i % 500, 12);
    std::string seed_text = grammar::Serialize(*tree);
    std::string mutant = MutateBytes(seed_text, Dictionary(), i);
    toy::Phase phase = toy::PhaseReached(mutant);
    if (static_cast<int>(phase) >= static_cast<int>(toy::Phase::kResolve)) {
      ++parsed;
    }
  }
  double rate = static_cast<double>(parsed) / kMutations;
  RecordProperty("parse_rate", std::to_string(rate));
  std::printf("mutant parse rate: %.4f\n", rate);
  EXPECT_LT(rate, 1.0);
}

}  // namespace
}  // namespace verifuzz::mutator
