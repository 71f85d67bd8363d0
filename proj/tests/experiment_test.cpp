// Copyright 2026 The pernorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "pernorm/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

namespace pernorm {
namespace {

// Short Urdu-looking lines; roughly a third carry Arabic yeh, which the ur
// reading grammar rewrites.
std::vector<CorpusLine> SmallCorpus(std::size_t n, std::uint64_t seed) {
  const std::vector<char32_t> letters = {0x0627, 0x0628, 0x062A, 0x0631, 0x0633,
                                         0x0645, 0x0646, 0x0648, 0x06CC, 0x06A9};
  std::mt19937_64 rng(seed);
  std::vector<CorpusLine> lines;
  for (std::size_t i = 0; i < n; ++i) {
    Text line;
    const bool variant = rng() % 3 == 0;
    for (int w = 0; w < 4 + static_cast<int>(rng() % 4); ++w) {
      if (w) line.push_back(U' ');
      for (int c = 0; c < 2 + static_cast<int>(rng() % 4); ++c) {
        line.push_back(letters[rng() % letters.size()]);
      }
    }
    if (variant) line += Text{U' ', 0x0628, 0x064A, 0x062A};
    lines.push_back({i + 1, line});
  }
  return lines;
}

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.k = 4;
  c.orders = {2, 3};
  c.seed = 7;
  c.discount_fallback = true;
  return c;
}

TEST(SplitMix64Test, ReferenceValues) {
  // First outputs of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(SplitMix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(SplitMix64(0x9E3779B97F4A7C15ULL), 0x6E789E6AA1B965F4ULL);
}

TEST(UniformBelowTest, RangeAndBalance) {
  std::mt19937_64 rng(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto x = UniformBelow(rng, 7);
    ASSERT_LT(x, 7u);
    ++hist[x];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(UniformBelow(rng, 1), 0u);
}

TEST(FisherYatesTest, IsAPermutation) {
  std::mt19937_64 rng(11);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  FisherYates(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(TestSizeTest, Examples) {
  EXPECT_EQ(TestSize(10, 0.8), 2u);
  EXPECT_EQ(TestSize(1000, 0.8), 200u);
  EXPECT_EQ(TestSize(5, 0.8), 1u);
  EXPECT_EQ(TestSize(3, 0.5), 2u);
  EXPECT_EQ(TestSize(1, 0.99), 1u);
}

TEST(MakeFoldsTest, PartitionAndConfinement) {
  const std::vector<std::size_t> changed = {1, 4, 7};
  const auto folds = MakeFolds(10, changed, 5, 0.8, 42);
  ASSERT_EQ(folds.size(), 5u);
  for (const Fold& f : folds) {
    EXPECT_EQ(f.test.size(), 2u);
    EXPECT_EQ(f.train.size(), 8u);
    EXPECT_TRUE(std::is_sorted(f.test.begin(), f.test.end()));
    EXPECT_TRUE(std::is_sorted(f.train.begin(), f.train.end()));
    std::set<std::size_t> all(f.train.begin(), f.train.end());
    for (std::size_t t : f.test) {
      EXPECT_TRUE(all.insert(t).second) << "line " << t << " on both sides";
      EXPECT_EQ(std::count(changed.begin(), changed.end(), t), 0);
    }
    EXPECT_EQ(all.size(), 10u);
    for (std::size_t d : changed) {
      EXPECT_TRUE(std::binary_search(f.train.begin(), f.train.end(), d));
    }
  }
}

TEST(MakeFoldsTest, DeterministicPerSeed) {
  const auto a = MakeFolds(200, {3, 5, 8}, 6, 0.8, 99);
  const auto b = MakeFolds(200, {3, 5, 8}, 6, 0.8, 99);
  const auto c = MakeFolds(200, {3, 5, 8}, 6, 0.8, 100);
  bool differs = false;
  for (int f = 0; f < 6; ++f) {
    EXPECT_EQ(a[f].test, b[f].test);
    EXPECT_EQ(a[f].train, b[f].train);
    differs = differs || a[f].test != c[f].test;
  }
  EXPECT_TRUE(differs);
  // Folds are drawn independently.
  EXPECT_NE(a[0].test, a[1].test);
}

TEST(MakeFoldsTest, MatchesIndependentShuffle) {
  const std::vector<std::size_t> changed = {0, 2};
  const auto folds = MakeFolds(12, changed, 3, 0.75, 5);
  for (int f = 0; f < 3; ++f) {
    // Shuffle the eligible positions with a hand-written Fisher-Yates over
    // the same stream.
    std::mt19937_64 rng(SplitMix64(SplitMix64(5) ^ static_cast<std::uint64_t>(f)));
    std::vector<std::size_t> pool = {1, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    for (std::size_t i = pool.size(); i > 1; --i) {
      const std::uint64_t bound = i;
      const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
      std::uint64_t x = rng();
      while (x >= limit) x = rng();
      std::swap(pool[i - 1], pool[x % bound]);
    }
    std::vector<std::size_t> expect(pool.begin(), pool.begin() + 3);
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(folds[f].test, expect) << "fold " << f;
  }
}

TEST(MakeFoldsTest, InfeasibleSplit) {
  std::vector<std::size_t> changed = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_THROW(MakeFolds(10, changed, 2, 0.8, 1), InfeasibleSplitError);
  changed.pop_back();
  EXPECT_NO_THROW(MakeFolds(10, changed, 2, 0.8, 1));
  EXPECT_THROW(MakeFolds(10, {10}, 2, 0.8, 1), PreconditionError);
}

TEST(ParseConfigTest, AllKeys) {
  const auto c = ParseConfig(
      "# comment\n"
      "k = 20\n"
      "split=0.75\n"
      "unit = word\n"
      "orders = 2, 3\n"
      "seed = 12345678901234\n"
      "language = sd\n"
      "mode = visual\n"
      "beta = 0.8\n"
      "discount_fallback = true\n");
  EXPECT_EQ(c.k, 20);
  EXPECT_DOUBLE_EQ(c.split, 0.75);
  EXPECT_EQ(c.unit, Unit::kWord);
  EXPECT_EQ(c.orders, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.seed, 12345678901234ULL);
  EXPECT_EQ(c.language, "sd");
  EXPECT_EQ(c.mode, Mode::kVisual);
  EXPECT_EQ(c.beta, 0.8);
  EXPECT_TRUE(c.discount_fallback);
}

TEST(ParseConfigTest, Defaults) {
  const auto c = ParseConfig("");
  EXPECT_EQ(c.k, 100);
  EXPECT_DOUBLE_EQ(c.split, 0.8);
  EXPECT_EQ(c.unit, Unit::kChar);
  EXPECT_EQ(c.orders, (std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_EQ(ParseConfig("unit=word").orders, (std::vector<int>{2, 3, 4, 5}));
}

TEST(ParseConfigTest, Errors) {
  EXPECT_THROW(ParseConfig("colour = blue"), ConfigError);
  EXPECT_THROW(ParseConfig("k"), ConfigError);
  EXPECT_THROW(ParseConfig("k = 1"), ConfigError);
  EXPECT_THROW(ParseConfig("k = ten"), ConfigError);
  EXPECT_THROW(ParseConfig("split = 1.0"), ConfigError);
  EXPECT_THROW(ParseConfig("orders = 3,1"), ConfigError);
  EXPECT_THROW(ParseConfig("unit = byte"), ConfigError);
  EXPECT_THROW(ParseConfig("language = xx"), ConfigError);
  EXPECT_THROW(ParseConfig("beta = 1.5"), ConfigError);
  EXPECT_THROW(ParseConfig("discount_fallback = maybe"), ConfigError);
}

TEST(RunExperimentTest, RequiresSeed) {
  auto c = SmallConfig();
  c.seed.reset();
  EXPECT_THROW(RunExperiment(SmallCorpus(10, 1), BundledGrammar("ur"), c), ConfigError);
}

TEST(RunExperimentTest, ModelCount) {
  auto c = SmallConfig();
  c.k = 2;
  c.orders = {2};
  const auto r = RunExperiment(SmallCorpus(10, 1), BundledGrammar("ur"), c);
  EXPECT_EQ(r.models_trained, 4u);  // 2 folds x 1 order x 2 conditions
  EXPECT_EQ(r.folds.size(), 2u);
  ASSERT_EQ(r.summaries.size(), 1u);
  for (const auto& o : r.folds) {
    EXPECT_EQ(o.test_lines, 2u);
    EXPECT_EQ(o.train_lines, 8u);
  }
}

TEST(RunExperimentTest, NoChangesGivesZeroDelta) {
  // Nothing in this corpus is touched by nfc, so B and T coincide.
  auto c = SmallConfig();
  c.mode = Mode::kNfc;
  const auto lines = SmallCorpus(40, 2);
  const auto r = RunExperiment(lines, BundledGrammar("ur"), c);
  EXPECT_EQ(r.changed_lines, 0u);
  for (const auto& o : r.folds) EXPECT_EQ(o.h_baseline, o.h_test);
  for (const auto& s : r.summaries) {
    EXPECT_EQ(s.delta_mu, 0.0);
    EXPECT_EQ(s.pct, 0.0);
  }
}

TEST(RunExperimentTest, SummaryMatchesFolds) {
  const auto lines = SmallCorpus(60, 3);
  const auto r = RunExperiment(lines, BundledGrammar("ur"), SmallConfig());
  EXPECT_GT(r.changed_lines, 0u);
  for (const auto& s : r.summaries) {
    double sum_diff = 0, sum_b = 0;
    int n = 0;
    for (const auto& o : r.folds) {
      if (o.order != s.order) continue;
      sum_diff += o.h_test - o.h_baseline;
      sum_b += o.h_baseline;
      ++n;
    }
    ASSERT_EQ(n, 4);
    EXPECT_NEAR(s.delta_mu, sum_diff / n, 1e-12);
    EXPECT_NEAR(s.pct, 100.0 * (sum_diff / n) / (sum_b / n), 1e-9);
    ASSERT_TRUE(s.welch.has_value());
    EXPECT_EQ(s.welch->statistic < 0, s.delta_mu < 0);
  }
}

TEST(RunExperimentTest, TestTokensEqualAcrossConditions) {
  const auto lines = SmallCorpus(60, 4);
  const auto r = RunExperiment(lines, BundledGrammar("ur"), SmallConfig());
  std::size_t changed = 0;
  for (const auto& l : lines) changed += Normalize(BundledGrammar("ur"), Mode::kReading, l.text) != l.text;
  EXPECT_EQ(r.changed_lines, changed);
  for (const auto& o : r.folds) {
    EXPECT_EQ(o.train_lines + o.test_lines, lines.size());
    EXPECT_GT(o.test_tokens, 0u);
  }
}

TEST(RunExperimentTest, IndependentOfJobs) {
  const auto lines = SmallCorpus(60, 5);
  std::ostringstream a, b;
  WriteResultsTsv(a, RunExperiment(lines, BundledGrammar("ur"), SmallConfig(), 1));
  WriteResultsTsv(b, RunExperiment(lines, BundledGrammar("ur"), SmallConfig(), 3));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "order\tΔmu\tpct\tws_t\tws_p\tws_ci_lo\tws_ci_hi\tmw_u\tmw_p\tbm_t\tbm_p");
}

TEST(RunExperimentTest, BlankLinesDropped) {
  auto lines = SmallCorpus(30, 6);
  auto with_blanks = lines;
  with_blanks.insert(with_blanks.begin() + 3, CorpusLine{999, U"  "});
  with_blanks.push_back({1000, U""});
  const auto a = RunExperiment(lines, BundledGrammar("ur"), SmallConfig());
  const auto b = RunExperiment(with_blanks, BundledGrammar("ur"), SmallConfig());
  EXPECT_EQ(b.lines, 30u);
  std::ostringstream sa, sb;
  WriteFoldsTsv(sa, a);
  WriteFoldsTsv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(RunExperimentTest, DegenerateCountsNameTheFold) {
  auto c = SmallConfig();
  c.discount_fallback = false;
  try {
    RunExperiment(SmallCorpus(12, 8), BundledGrammar("ur"), c);
    FAIL() << "expected degenerate counts";
  } catch (const DegenerateCountsError& e) {
    EXPECT_NE(std::string(e.what()).find("fold"), std::string::npos);
  }
}

TEST(SummarizeTest, SignConvention) {
  std::vector<FoldOutcome> outcomes;
  for (int f = 0; f < 5; ++f) {
    FoldOutcome o;
    o.fold = f;
    o.order = 3;
    o.h_baseline = 3.0 + 0.01 * f;
    o.h_test = 2.9 + 0.013 * f;
    outcomes.push_back(o);
  }
  const auto s = Summarize(3, outcomes);
  EXPECT_LT(s.delta_mu, 0);
  EXPECT_LT(s.welch->statistic, 0);
  EXPECT_LT(s.brunner_munzel->statistic, 0);
  EXPECT_EQ(s.mann_whitney->statistic, 0);
}

}  // namespace
}  // namespace pernorm
