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

// Context-dependent string rewriting: NFC over the bundled Arabic data and a
// positional longest-match rule applicator. A rule layer is applied as a
// fixed sequence of deterministic left-to-right passes, one per position
// class, which realizes the same input/output relation as composing the
// per-position rewrite transducers.

#ifndef PERNORM_REWRITE_ENGINE_HPP_
#define PERNORM_REWRITE_ENGINE_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pernorm/error.hpp"
#include "pernorm/unicode_data.hpp"
#include "pernorm/utf8.hpp"

namespace pernorm {

// NFC restricted to the bundled data: full canonical decomposition, stable
// reordering of each run of non-zero combining classes, then canonical
// composition with the usual blocking rule.
inline Text CanonicalNormalize(TextView text) {
  Text s;
  s.reserve(text.size());
  for (char32_t cp : text) {
    // Arabic decompositions nest at most once (e.g. U+06C2 -> U+06C1 U+0654)
    // but walk the chain generally.
    char32_t stack[8];
    int depth = 0;
    stack[depth++] = cp;
    while (depth) {
      char32_t c = stack[--depth];
      if (auto d = unicode::CanonicalDecomposition(c)) {
        stack[depth++] = d->second;
        stack[depth++] = d->first;
      } else {
        s.push_back(c);
      }
    }
  }

  for (std::size_t i = 0; i < s.size();) {
    if (unicode::CombiningClass(s[i]) == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && unicode::CombiningClass(s[j]) != 0) ++j;
    std::stable_sort(s.begin() + static_cast<std::ptrdiff_t>(i),
                     s.begin() + static_cast<std::ptrdiff_t>(j),
                     [](char32_t a, char32_t b) {
                       return unicode::CombiningClass(a) <
                              unicode::CombiningClass(b);
                     });
    i = j;
  }

  if (s.size() < 2) return s;
  std::size_t starter = 0;
  int last_class = unicode::CombiningClass(s[0]) == 0 ? 0 : 256;
  bool have_starter = last_class == 0;
  std::size_t out = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char32_t ch = s[i];
    const int ch_class = unicode::CombiningClass(ch);
    if (have_starter && (last_class < ch_class || last_class == 0)) {
      if (auto composite = unicode::Compose(s[starter], ch)) {
        s[starter] = *composite;
        continue;
      }
    }
    if (ch_class == 0) {
      starter = out;
      have_starter = true;
    }
    last_class = ch_class;
    s[out++] = ch;
  }
  s.resize(out);
  return s;
}

enum class SegmentKind { kWord, kSeparator };

struct Segment {
  std::size_t begin;
  std::size_t end;
  SegmentKind kind;

  std::size_t size() const { return end - begin; }
  bool operator==(const Segment&) const = default;
};

// Words are maximal runs of Arabic-block codepoints (marks and tatweel
// included); each maximal run of anything else is one separator.
inline std::vector<Segment> SegmentWords(TextView text) {
  std::vector<Segment> segments;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool arabic = unicode::IsArabicBlock(text[i]);
    std::size_t j = i + 1;
    while (j < text.size() && unicode::IsArabicBlock(text[j]) == arabic) ++j;
    segments.push_back(
        {i, j, arabic ? SegmentKind::kWord : SegmentKind::kSeparator});
    i = j;
  }
  return segments;
}

enum class PositionClass {
  kPositionIndependent,
  kNonFinal,
  kWordFinal,
  kIsolated,
};

// Sub-layer order inside a layer: isolated, word-final, non-final, then
// position-independent.
inline constexpr std::array<PositionClass, 4> kPositionApplicationOrder = {
    PositionClass::kIsolated, PositionClass::kWordFinal,
    PositionClass::kNonFinal, PositionClass::kPositionIndependent};

inline constexpr std::string_view PositionName(PositionClass p) {
  switch (p) {
    case PositionClass::kPositionIndependent: return "position_independent";
    case PositionClass::kNonFinal: return "non_final";
    case PositionClass::kWordFinal: return "word_final";
    case PositionClass::kIsolated: return "isolated";
  }
  return "";
}

inline std::optional<PositionClass> ParsePosition(std::string_view name) {
  for (PositionClass p : kPositionApplicationOrder) {
    if (PositionName(p) == name) return p;
  }
  return std::nullopt;
}

enum class LayerKind { kNfc, kVisualCommon, kVisualLang, kReadingLang };

inline constexpr std::string_view LayerName(LayerKind k) {
  switch (k) {
    case LayerKind::kNfc: return "nfc";
    case LayerKind::kVisualCommon: return "visual_common";
    case LayerKind::kVisualLang: return "visual_lang";
    case LayerKind::kReadingLang: return "reading_lang";
  }
  return "";
}

inline std::optional<LayerKind> ParseLayer(std::string_view name) {
  for (LayerKind k : {LayerKind::kNfc, LayerKind::kVisualCommon,
                      LayerKind::kVisualLang, LayerKind::kReadingLang}) {
    if (LayerName(k) == name) return k;
  }
  return std::nullopt;
}

struct RewriteRule {
  LayerKind layer = LayerKind::kVisualCommon;
  PositionClass position = PositionClass::kPositionIndependent;
  Text input;
  Text output;

  bool operator==(const RewriteRule&) const = default;
};

// Does a match ending at `end` in a word of `word_size` codepoints satisfy
// the position class? `emitted` counts codepoints already written for this
// word in the current pass, so deletions earlier in the pass shrink the
// word's current extent.
inline bool PositionHolds(PositionClass position, std::size_t end, std::size_t word_size,
                          std::size_t emitted) {
  const bool at_end = end == word_size;
  const bool whole = at_end && emitted == 0;
  switch (position) {
    case PositionClass::kPositionIndependent: return true;
    case PositionClass::kNonFinal: return !at_end;
    case PositionClass::kWordFinal: return at_end && !whole;
    case PositionClass::kIsolated: return whole;
  }
  return false;
}

class RuleLayer {
 public:
  explicit RuleLayer(LayerKind kind = LayerKind::kVisualCommon,
                     bool recompose = false)
      : kind_(kind), recompose_(recompose) {}

  LayerKind kind() const { return kind_; }

  // When set, the layer's output is brought back to canonical form, so a
  // rewrite that leaves e.g. yeh + hamza above next to each other is closed
  // under composition within the same layer.
  bool recompose() const { return recompose_; }

  // Throws GrammarError for an empty input, a no-op visual rule, or a second
  // rule with the same input in the same position bucket.
  void Add(RewriteRule rule) {
    if (rule.layer != kind_) {
      throw GrammarError("rule for layer '" + std::string(LayerName(rule.layer)) +
                         "' added to layer '" + std::string(LayerName(kind_)) + "'");
    }
    if (rule.input.empty()) throw GrammarError("rule input is empty");
    if ((kind_ == LayerKind::kVisualCommon || kind_ == LayerKind::kVisualLang) &&
        rule.input == rule.output) {
      throw GrammarError("visual rule " + ToHex(rule.input) +
                         " does not change its input");
    }
    Bucket& bucket = buckets_[Index(rule.position)];
    auto& candidates = bucket.by_first[rule.input.front()];
    for (std::size_t idx : candidates) {
      if (bucket.rules[idx].input == rule.input) {
        throw DuplicateRuleError(
            "duplicate " + std::string(LayerName(kind_)) + "/" +
            std::string(PositionName(rule.position)) + " rule for input " +
            ToHex(rule.input));
      }
    }
    bucket.rules.push_back(std::move(rule));
    candidates.push_back(bucket.rules.size() - 1);
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) {
                return bucket.rules[a].input.size() > bucket.rules[b].input.size();
              });
  }

  std::span<const RewriteRule> rules(PositionClass position) const {
    return buckets_[Index(position)].rules;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& b : buckets_) n += b.rules.size();
    return n;
  }
  bool empty() const { return size() == 0; }

  // One left-to-right longest-match pass of a single position bucket.
  Text ApplyPass(TextView text, PositionClass position) const {
    const Bucket& bucket = buckets_[Index(position)];
    if (bucket.rules.empty()) return Text(text);
    Text out;
    out.reserve(text.size());
    for (const Segment& seg : SegmentWords(text)) {
      const TextView word = text.substr(seg.begin, seg.size());
      if (seg.kind == SegmentKind::kSeparator) {
        out.append(word);
        continue;
      }
      const std::size_t word_start = out.size();
      std::size_t i = 0;
      while (i < word.size()) {
        const RewriteRule* hit = nullptr;
        if (auto it = bucket.by_first.find(word[i]); it != bucket.by_first.end()) {
          for (std::size_t idx : it->second) {
            const RewriteRule& r = bucket.rules[idx];
            const std::size_t len = r.input.size();
            if (i + len > word.size() || word.substr(i, len) != r.input) continue;
            if (!PositionHolds(position, i + len, word.size(),
                               out.size() - word_start)) {
              continue;
            }
            hit = &r;
            break;
          }
        }
        if (hit) {
          out.append(hit->output);
          i += hit->input.size();
        } else {
          out.push_back(word[i]);
          ++i;
        }
      }
    }
    return out;
  }

 private:
  struct Bucket {
    std::vector<RewriteRule> rules;
    // First input codepoint -> rule indices, longest input first.
    std::unordered_map<char32_t, std::vector<std::size_t>> by_first;
  };

  static std::size_t Index(PositionClass p) { return static_cast<std::size_t>(p); }

  LayerKind kind_;
  bool recompose_;
  std::array<Bucket, 4> buckets_;
};

inline Text ApplyLayer(TextView text, const RuleLayer& layer) {
  if (layer.kind() == LayerKind::kNfc) return CanonicalNormalize(text);
  Text current(text);
  for (PositionClass position : kPositionApplicationOrder) {
    if (!layer.rules(position).empty()) {
      current = layer.ApplyPass(current, position);
    }
  }
  if (layer.recompose()) current = CanonicalNormalize(current);
  return current;
}

// Layers are applied once each, in order; there is no fixpoint iteration.
inline Text ApplyPipeline(TextView text, std::span<const RuleLayer* const> layers) {
  Text current(text);
  for (const RuleLayer* layer : layers) current = ApplyLayer(current, *layer);
  return current;
}

inline Text ApplyPipeline(TextView text,
                          std::initializer_list<const RuleLayer*> layers) {
  return ApplyPipeline(text, std::span(layers.begin(), layers.size()));
}

}  // namespace pernorm

#endif  // PERNORM_REWRITE_ENGINE_HPP_
