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

#include "pernorm/rewrite_engine.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles/nfc_oracle.hpp"
#include "test_util.hpp"

namespace pernorm {
namespace {

using testing::DataPath;
using testing::Hex;

RewriteRule Rule(LayerKind layer, PositionClass pos, Text in, Text out) {
  return RewriteRule{layer, pos, std::move(in), std::move(out)};
}

TEST(CanonicalNormalizeTest, ComposesAlefMadda) {
  EXPECT_EQ(CanonicalNormalize(Text{0x0627, 0x0653}), Text{0x0622});
}

TEST(CanonicalNormalizeTest, ReordersShaddaKasra) {
  EXPECT_EQ(CanonicalNormalize(Text{0x0651, 0x0650}), (Text{0x0650, 0x0651}));
  EXPECT_EQ(CanonicalNormalize(Text{0x0628, 0x0651, 0x0650}),
            (Text{0x0628, 0x0650, 0x0651}));
}

TEST(CanonicalNormalizeTest, ComposesAcrossSuperscriptAlef) {
  // U+0670 (ccc 35) sorts before U+0653 (ccc 230) and does not block it.
  EXPECT_EQ(CanonicalNormalize(Text{0x0627, 0x0670, 0x0653}), (Text{0x0622, 0x0670}));
}

TEST(CanonicalNormalizeTest, EmptyAndNonArabic) {
  EXPECT_EQ(CanonicalNormalize(Text{}), Text{});
  EXPECT_EQ(CanonicalNormalize(U"hello, world"), U"hello, world");
  // Outside the bundled data: passes through, even a Latin combining mark.
  EXPECT_EQ(CanonicalNormalize(U"é"), U"é");
}

TEST(CanonicalNormalizeTest, DecomposesBeforeReordering) {
  // U+06C2 is heh goal + hamza above; a kasra after it moves before the hamza.
  EXPECT_EQ(CanonicalNormalize(Text{0x06C2, 0x0650}), (Text{0x06C2, 0x0650}));
  EXPECT_EQ(CanonicalNormalize(Text{0x06C1, 0x0650, 0x0654}), (Text{0x06C2, 0x0650}));
  // Hamza below (220) does not block hamza above (230) from the base.
  EXPECT_EQ(CanonicalNormalize(Text{0x0648, 0x0655, 0x0654}), (Text{0x0624, 0x0655}));
  // A second hamza above is blocked by the first.
  EXPECT_EQ(CanonicalNormalize(Text{0x064A, 0x0654, 0x0654}), (Text{0x0626, 0x0654}));
}

TEST(CanonicalNormalizeTest, LeadingMarkIsNotAStarter) {
  EXPECT_EQ(CanonicalNormalize(Text{0x0653, 0x0627, 0x0653}), (Text{0x0653, 0x0622}));
}

class NfcOracleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    oracle_ = new oracle::ReferenceNfc(DataPath("UnicodeData-arabic.txt"),
                                       DataPath("CompositionExclusions-arabic.txt"));
  }
  static void TearDownTestSuite() { delete oracle_; }
  static oracle::ReferenceNfc* oracle_;
};
oracle::ReferenceNfc* NfcOracleTest::oracle_ = nullptr;

TEST_F(NfcOracleTest, OracleSanity) {
  EXPECT_GT(oracle_->record_count(), 1000u);
  EXPECT_EQ((*oracle_)(Text{0x0627, 0x0653}), Text{0x0622});
  EXPECT_EQ((*oracle_)(Text{0x0651, 0x0650}), (Text{0x0650, 0x0651}));
}

TEST_F(NfcOracleTest, AllLengthThreeOverArabicAndSpaceSample) {
  // Exhaustive over a mark-heavy slice, which is where NFC does anything.
  std::vector<char32_t> alphabet = {0x0020, 0x0627, 0x0648, 0x064A, 0x06C1,
                                    0x06D2, 0x06D5, 0x0649};
  for (char32_t c = 0x064B; c <= 0x065F; ++c) alphabet.push_back(c);
  alphabet.push_back(0x0670);
  for (char32_t a : alphabet)
    for (char32_t b : alphabet)
      for (char32_t c : alphabet) {
        const Text s{a, b, c};
        ASSERT_EQ(CanonicalNormalize(s), (*oracle_)(s)) << Hex(s);
      }
}

TEST_F(NfcOracleTest, RandomStrings) {
  std::mt19937_64 rng(7);
  std::vector<char32_t> pool;
  for (char32_t c = 0x0600; c <= 0x06FF; ++c) pool.push_back(c);
  for (int i = 0; i < 20000; ++i) {
    Text s;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) s.push_back(pool[rng() % pool.size()]);
    ASSERT_EQ(CanonicalNormalize(s), (*oracle_)(s)) << Hex(s);
  }
}

// Third route: NFC samples produced by a different implementation.
TEST(NfcReferenceSamplesTest, MatchesFrozenSamples) {
  std::ifstream in(DataPath("nfc_reference.tsv"));
  ASSERT_TRUE(in);
  auto parse = [](const std::string& hex) {
    Text t;
    std::stringstream ss(hex);
    std::string h;
    while (ss >> h) t.push_back(static_cast<char32_t>(std::stoul(h, nullptr, 16)));
    return t;
  };
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const Text input = parse(line.substr(0, tab));
    const Text expected = parse(line.substr(tab + 1));
    ASSERT_EQ(CanonicalNormalize(input), expected) << Hex(input);
    ++checked;
  }
  EXPECT_EQ(checked, 4000);
}

TEST(SegmentWordsTest, MixedScript) {
  const Text s = U"سلام abc";
  const auto segs = SegmentWords(s);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0], (Segment{0, 4, SegmentKind::kWord}));
  EXPECT_EQ(segs[1], (Segment{4, 8, SegmentKind::kSeparator}));
}

TEST(SegmentWordsTest, EmptyAndLatin) {
  EXPECT_TRUE(SegmentWords(U"").empty());
  const auto segs = SegmentWords(U"abc");
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0], (Segment{0, 3, SegmentKind::kSeparator}));
}

TEST(SegmentWordsTest, MarksAndTatweelStayInWord) {
  const Text s{0x0628, 0x0640, 0x064E, U' ', 0x0651};
  const auto segs = SegmentWords(s);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], (Segment{0, 3, SegmentKind::kWord}));
  EXPECT_EQ(segs[2], (Segment{4, 5, SegmentKind::kWord}));
}

TEST(SegmentWordsTest, SpansReconstructInput) {
  std::mt19937_64 rng(11);
  const std::vector<char32_t> pool = {U'a', U' ', U'.', 0x0627, 0x0628, 0x064E, 0x0640, 0xFEFB};
  for (int i = 0; i < 2000; ++i) {
    Text s;
    for (int k = static_cast<int>(rng() % 12); k > 0; --k) s.push_back(pool[rng() % pool.size()]);
    Text rebuilt;
    std::size_t expected_begin = 0;
    SegmentKind last = SegmentKind::kSeparator;
    bool first = true;
    for (const auto& seg : SegmentWords(s)) {
      ASSERT_EQ(seg.begin, expected_begin);
      ASSERT_GT(seg.size(), 0u);
      if (!first) ASSERT_NE(seg.kind, last);
      first = false;
      last = seg.kind;
      rebuilt += s.substr(seg.begin, seg.size());
      expected_begin = seg.end;
    }
    ASSERT_EQ(rebuilt, s);
  }
}

class UrduVisualLayerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    using P = PositionClass;
    const auto L = LayerKind::kVisualLang;
    layer_.Add(Rule(L, P::kPositionIndependent, {0x0631, 0x0615}, {0x0691}));
    layer_.Add(Rule(L, P::kNonFinal, {0x0643}, {0x06A9}));
    layer_.Add(Rule(L, P::kWordFinal, {0x0649}, {0x06CC}));
    layer_.Add(Rule(L, P::kIsolated, {0x0647}, {0x06C1}));
  }
  RuleLayer layer_{LayerKind::kVisualLang};
};

TEST_F(UrduVisualLayerTest, WordFinalAlefMaksura) {
  EXPECT_EQ(ApplyLayer(Text{0x0639, 0x0644, 0x0649}, layer_),
            (Text{0x0639, 0x0644, 0x06CC}));
  // Not word-final: untouched.
  EXPECT_EQ(ApplyLayer(Text{0x0639, 0x0649, 0x0644}, layer_),
            (Text{0x0639, 0x0649, 0x0644}));
  // A lone alef maksura is isolated, not word-final.
  EXPECT_EQ(ApplyLayer(Text{0x0649}, layer_), Text{0x0649});
}

TEST_F(UrduVisualLayerTest, IsolatedHeh) {
  EXPECT_EQ(ApplyLayer(Text{0x0647}, layer_), Text{0x06C1});
  EXPECT_EQ(ApplyLayer(Text{0x0627, U' ', 0x0647, U'.'}, layer_),
            (Text{0x0627, U' ', 0x06C1, U'.'}));
  // Heh inside a longer word is left alone.
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0647}, layer_), (Text{0x0627, 0x0647}));
}

TEST_F(UrduVisualLayerTest, NonFinalKaf) {
  EXPECT_EQ(ApplyLayer(Text{0x0643, 0x062A, 0x0627, 0x0628}, layer_),
            (Text{0x06A9, 0x062A, 0x0627, 0x0628}));
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0643, 0x0627}, layer_),
            (Text{0x0627, 0x06A9, 0x0627}));
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0643}, layer_), (Text{0x0627, 0x0643}));
  EXPECT_EQ(ApplyLayer(Text{0x0643}, layer_), Text{0x0643});
}

TEST_F(UrduVisualLayerTest, RehWithSmallHighTah) {
  EXPECT_EQ(ApplyLayer(Text{0x0628, 0x0631, 0x0615}, layer_), (Text{0x0628, 0x0691}));
  EXPECT_EQ(ApplyLayer(Text{0x0631, 0x0615}, layer_), Text{0x0691});
}

TEST_F(UrduVisualLayerTest, NonWordSpansUntouched) {
  EXPECT_EQ(ApplyLayer(U"kكx", layer_), U"kكx");
}

TEST(RuleLayerTest, EmptyLayerIsIdentity) {
  RuleLayer empty(LayerKind::kVisualLang);
  for (const Text& s : {Text{}, Text{0x0651, 0x0650}, Text(U"abc ك")}) {
    EXPECT_EQ(ApplyLayer(s, empty), s);
  }
  EXPECT_EQ(ApplyPipeline(U"آ", {}), U"آ");
}

TEST(RuleLayerTest, LongestMatchWins) {
  RuleLayer layer(LayerKind::kVisualCommon);
  const auto P = PositionClass::kPositionIndependent;
  layer.Add(Rule(LayerKind::kVisualCommon, P, {0x0627}, {0x0628}));
  layer.Add(Rule(LayerKind::kVisualCommon, P, {0x0627, 0x0644}, {0x062A}));
  layer.Add(Rule(LayerKind::kVisualCommon, P, {0x0644}, {0x062B}));
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0644}, layer), Text{0x062A});
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0627, 0x0644}, layer), (Text{0x0628, 0x062A}));
}

TEST(RuleLayerTest, LongerRuleFailingPositionFallsBackToShorter) {
  RuleLayer layer(LayerKind::kVisualLang);
  const auto P = PositionClass::kNonFinal;
  layer.Add(Rule(LayerKind::kVisualLang, P, {0x0627}, {0x0628}));
  layer.Add(Rule(LayerKind::kVisualLang, P, {0x0627, 0x0644}, {0x062A}));
  // "alef lam" ends the word, so only the single-letter rule is non-final.
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0644}, layer), (Text{0x0628, 0x0644}));
}

TEST(RuleLayerTest, NoRescanWithinPass) {
  RuleLayer layer(LayerKind::kVisualCommon);
  const auto P = PositionClass::kPositionIndependent;
  layer.Add(Rule(LayerKind::kVisualCommon, P, {0x0627}, {0x0628, 0x0627}));
  EXPECT_EQ(ApplyLayer(Text{0x0627}, layer), (Text{0x0628, 0x0627}));
}

TEST(RuleLayerTest, DeletionShrinksCurrentWord) {
  RuleLayer layer(LayerKind::kReadingLang);
  layer.Add(Rule(LayerKind::kReadingLang, PositionClass::kNonFinal, {0x0640}, {}));
  RuleLayer iso(LayerKind::kReadingLang);
  iso.Add(Rule(LayerKind::kReadingLang, PositionClass::kIsolated, {0x0647}, {0x06C1}));
  // tatweel + heh: the tatweel goes first, then heh is the whole word.
  const Text once = ApplyLayer(Text{0x0640, 0x0647}, layer);
  EXPECT_EQ(once, Text{0x0647});
  EXPECT_EQ(ApplyLayer(once, iso), Text{0x06C1});
}

TEST(RuleLayerTest, IsolatedRunsBeforeWordFinal) {
  RuleLayer layer(LayerKind::kVisualLang);
  layer.Add(Rule(LayerKind::kVisualLang, PositionClass::kIsolated, {0x0647}, {0x06C1}));
  layer.Add(Rule(LayerKind::kVisualLang, PositionClass::kWordFinal, {0x0647}, {0x06D5}));
  EXPECT_EQ(ApplyLayer(Text{0x0647}, layer), Text{0x06C1});
  EXPECT_EQ(ApplyLayer(Text{0x0627, 0x0647}, layer), (Text{0x0627, 0x06D5}));
}

TEST(RuleLayerTest, RejectsInvalidRules) {
  RuleLayer layer(LayerKind::kVisualLang);
  const auto P = PositionClass::kWordFinal;
  EXPECT_THROW(layer.Add(Rule(LayerKind::kVisualLang, P, {}, {0x0628})), GrammarError);
  EXPECT_THROW(layer.Add(Rule(LayerKind::kVisualLang, P, {0x0628}, {0x0628})), GrammarError);
  EXPECT_THROW(layer.Add(Rule(LayerKind::kReadingLang, P, {0x0628}, {0x0627})), GrammarError);
  layer.Add(Rule(LayerKind::kVisualLang, P, {0x0649}, {0x06CC}));
  EXPECT_THROW(layer.Add(Rule(LayerKind::kVisualLang, P, {0x0649}, {0x064A})),
               DuplicateRuleError);
  // Same input in another position bucket is fine.
  layer.Add(Rule(LayerKind::kVisualLang, PositionClass::kNonFinal, {0x0649}, {0x064A}));
  // Reading rules may be identities.
  RuleLayer reading(LayerKind::kReadingLang);
  reading.Add(Rule(LayerKind::kReadingLang, P, {0x0628}, {0x0628}));
}

TEST(RuleLayerTest, RecomposeClosesOutput) {
  RuleLayer layer(LayerKind::kReadingLang, /*recompose=*/true);
  layer.Add(Rule(LayerKind::kReadingLang, PositionClass::kPositionIndependent, {0x06CC},
                 {0x064A}));
  EXPECT_EQ(ApplyLayer(Text{0x0628, 0x06CC, 0x0654}, layer), (Text{0x0628, 0x0626}));
}

TEST(ApplyPipelineTest, SequentialAndDeterministic) {
  RuleLayer nfc(LayerKind::kNfc);
  RuleLayer a(LayerKind::kVisualCommon);
  a.Add(Rule(LayerKind::kVisualCommon, PositionClass::kPositionIndependent, {0x0622},
             {0x0628}));
  RuleLayer b(LayerKind::kReadingLang);
  b.Add(Rule(LayerKind::kReadingLang, PositionClass::kPositionIndependent, {0x0628},
             {0x062A}));
  const Text in{0x0627, 0x0653};
  // nfc feeds a, a feeds b; each runs once.
  EXPECT_EQ(ApplyPipeline(in, {&nfc, &a, &b}), Text{0x062A});
  EXPECT_EQ(ApplyPipeline(in, {&nfc, &a}), Text{0x0628});
  EXPECT_EQ(ApplyPipeline(in, {&a, &nfc}), Text{0x0622});
  EXPECT_EQ(ApplyPipeline(in, {&nfc, &a, &b}), ApplyPipeline(in, {&nfc, &a, &b}));
}

TEST(PassthroughTest, NonArabicIsFixedPoint) {
  RuleLayer layer(LayerKind::kVisualCommon, true);
  layer.Add(Rule(LayerKind::kVisualCommon, PositionClass::kPositionIndependent, {U'a'},
                 {U'b'}));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    Text s;
    for (int k = static_cast<int>(rng() % 10); k > 0; --k) {
      s.push_back(static_cast<char32_t>(0x20 + rng() % 0x5F));
    }
    EXPECT_EQ(CanonicalNormalize(s), s);
    EXPECT_EQ(ApplyLayer(s, layer), s);
  }
}

}  // namespace
}  // namespace pernorm
