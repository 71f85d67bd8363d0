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

// Per-language grammars: the rule file format, loading and validation, and
// the three normalization modes built on the rewrite engine.
//
//   nfc      canonical normalization only
//   visual   nfc, then the shared visual layer, then the language's visual layer
//   reading  visual, then the language's reading layer
//
// Rule files are UTF-8, one rule per line:
//
//   layer<TAB>position<TAB>input<TAB>output
//
// with input/output as space-separated uppercase hex scalars and `-` for an
// empty output. `#` starts a comment line; `# version: X` sets the version.

#ifndef PERNORM_GRAMMAR_HPP_
#define PERNORM_GRAMMAR_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pernorm/bundled_data.hpp"
#include "pernorm/error.hpp"
#include "pernorm/rewrite_engine.hpp"
#include "pernorm/unicode_data.hpp"
#include "pernorm/utf8.hpp"

namespace pernorm {

enum class Mode { kNfc, kVisual, kReading };

inline constexpr std::string_view ModeName(Mode m) {
  switch (m) {
    case Mode::kNfc: return "nfc";
    case Mode::kVisual: return "visual";
    case Mode::kReading: return "reading";
  }
  return "";
}

inline std::optional<Mode> ParseMode(std::string_view name) {
  for (Mode m : {Mode::kNfc, Mode::kVisual, Mode::kReading}) {
    if (ModeName(m) == name) return m;
  }
  return std::nullopt;
}

// Languages with bundled grammars. "ar" is a reference grammar for Modern
// Standard Arabic spellings and has no Table-style inventory of its own.
inline constexpr std::array<std::string_view, 9> kGrammarLanguages = {
    "ar", "azb", "ckb", "ks", "ms", "pnb", "sd", "ug", "ur"};

inline bool IsGrammarLanguage(std::string_view tag) {
  return std::find(kGrammarLanguages.begin(), kGrammarLanguages.end(), tag) !=
         kGrammarLanguages.end();
}

// Letters of the MSA reference grammar: hamza through ghain, tatweel through
// yeh.
inline LetterInventory ArabicReferenceInventory() {
  std::vector<char32_t> letters;
  for (char32_t cp = 0x0621; cp <= 0x063A; ++cp) letters.push_back(cp);
  for (char32_t cp = 0x0640; cp <= 0x064A; ++cp) letters.push_back(cp);
  return LetterInventory("ar", std::move(letters));
}

inline LetterInventory InventoryForGrammar(std::string_view language) {
  if (language == "ar") return ArabicReferenceInventory();
  return Inventory(language);
}

namespace grammar_detail {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct ParsedRules {
  std::vector<RewriteRule> rules;
  std::string version = "unversioned";
};

inline Text ParseScalars(std::string_view field, bool allow_empty,
                         const std::string& source, std::size_t line,
                         std::size_t column) {
  if (field == "-") {
    if (!allow_empty) {
      throw GrammarParseError(source, line, column, "rule input cannot be empty");
    }
    return {};
  }
  Text out;
  std::size_t pos = 0;
  while (pos < field.size()) {
    while (pos < field.size() && field[pos] == ' ') ++pos;
    if (pos == field.size()) break;
    const std::size_t start = pos;
    char32_t value = 0;
    while (pos < field.size() && field[pos] != ' ') {
      const char c = field[pos];
      int digit;
      if (c >= '0' && c <= '9') {
        digit = c - '0';
      } else if (c >= 'A' && c <= 'F') {
        digit = c - 'A' + 10;
      } else {
        throw GrammarParseError(source, line, column + pos,
                                std::string("expected uppercase hex, got '") + c + "'");
      }
      value = value * 16 + static_cast<char32_t>(digit);
      if (pos - start >= 6 || value > 0x10FFFF) {
        throw GrammarParseError(source, line, column + start,
                                "scalar value out of range");
      }
      ++pos;
    }
    if (value >= 0xD800 && value <= 0xDFFF) {
      throw GrammarParseError(source, line, column + start, "surrogate code point");
    }
    out.push_back(value);
  }
  if (out.empty()) {
    throw GrammarParseError(source, line, column,
                            allow_empty ? "empty output must be written as '-'"
                                        : "rule input cannot be empty");
  }
  return out;
}

inline ParsedRules ParseRules(std::string_view text, const std::string& source) {
  ParsedRules parsed;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) continue;
    if (line.front() == '#') {
      std::string_view body = Trim(line.substr(1));
      constexpr std::string_view kVersion = "version:";
      if (body.substr(0, kVersion.size()) == kVersion) {
        parsed.version = std::string(Trim(body.substr(kVersion.size())));
      }
      continue;
    }
    std::array<std::string_view, 4> fields;
    std::array<std::size_t, 4> columns{};
    std::size_t count = 0;
    std::size_t pos = 0;
    for (;;) {
      const auto tab = line.find('\t', pos);
      if (count == 4) {
        throw GrammarParseError(source, line_no, pos + 1,
                                "too many fields (expected 4)");
      }
      fields[count] = line.substr(pos, tab == std::string_view::npos ? tab : tab - pos);
      columns[count] = pos + 1;
      ++count;
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (count != 4) {
      throw GrammarParseError(source, line_no, line.size() + 1,
                              "expected 4 tab-separated fields, found " +
                                  std::to_string(count));
    }
    RewriteRule rule;
    auto layer = ParseLayer(fields[0]);
    if (!layer || *layer == LayerKind::kNfc) {
      throw GrammarParseError(source, line_no, columns[0],
                              "unknown layer '" + std::string(fields[0]) + "'");
    }
    rule.layer = *layer;
    auto position = ParsePosition(fields[1]);
    if (!position) {
      throw GrammarParseError(source, line_no, columns[1],
                              "unknown position '" + std::string(fields[1]) + "'");
    }
    rule.position = *position;
    rule.input = ParseScalars(fields[2], false, source, line_no, columns[2]);
    rule.output = ParseScalars(fields[3], true, source, line_no, columns[3]);
    parsed.rules.push_back(std::move(rule));
  }
  return parsed;
}

}  // namespace grammar_detail

// Parses the shared visual layer. Only `visual_common` lines are allowed.
inline std::shared_ptr<const RuleLayer> LoadVisualCommon(
    std::string_view source, const std::string& source_name = "visual_common.rules") {
  auto parsed = grammar_detail::ParseRules(source, source_name);
  auto layer = std::make_shared<RuleLayer>(LayerKind::kVisualCommon, true);
  for (auto& rule : parsed.rules) {
    if (rule.layer != LayerKind::kVisualCommon) {
      throw GrammarError(source_name + ": only visual_common rules belong here");
    }
    layer->Add(std::move(rule));
  }
  return layer;
}

inline std::string_view BundledSource(std::string_view name) {
  for (const auto& g : bundled::kGrammarSources) {
    if (g.name == name) return g.text;
  }
  throw UnknownLanguageError(std::string(name));
}

inline std::shared_ptr<const RuleLayer> BundledVisualCommon() {
  static const std::shared_ptr<const RuleLayer> common =
      LoadVisualCommon(BundledSource("visual_common"));
  return common;
}

class Grammar {
 public:
  const std::string& language() const { return language_; }
  const std::string& version() const { return version_; }

  const RuleLayer& nfc() const { return nfc_; }
  const RuleLayer& visual_common() const { return *visual_common_; }
  const RuleLayer& visual_lang() const { return visual_lang_; }
  const RuleLayer& reading_lang() const { return reading_lang_; }

  std::vector<const RuleLayer*> Pipeline(Mode mode) const {
    std::vector<const RuleLayer*> layers{&nfc_};
    if (mode == Mode::kNfc) return layers;
    layers.push_back(visual_common_.get());
    layers.push_back(&visual_lang_);
    if (mode == Mode::kReading) layers.push_back(&reading_lang_);
    return layers;
  }

  Text Normalize(Mode mode, TextView text) const {
    Text current = CanonicalNormalize(text);
    if (mode == Mode::kNfc) return current;
    current = ApplyLayer(current, *visual_common_);
    current = ApplyLayer(current, visual_lang_);
    if (mode == Mode::kReading) current = ApplyLayer(current, reading_lang_);
    return current;
  }

 private:
  friend Grammar LoadGrammar(std::string_view, std::string_view,
                             const std::string&,
                             std::shared_ptr<const RuleLayer>);

  std::string language_;
  std::string version_;
  RuleLayer nfc_{LayerKind::kNfc};
  std::shared_ptr<const RuleLayer> visual_common_;
  RuleLayer visual_lang_{LayerKind::kVisualLang, true};
  RuleLayer reading_lang_{LayerKind::kReadingLang, true};
};

inline Text Normalize(const Grammar& grammar, Mode mode, TextView text) {
  return grammar.Normalize(mode, text);
}

// Parses and validates a language rule file. Language files carry only
// visual_lang and reading_lang rules; every codepoint they output must be a
// letter of the language, an Arabic combining mark, or whitespace.
inline Grammar LoadGrammar(std::string_view language, std::string_view source,
                           const std::string& source_name,
                           std::shared_ptr<const RuleLayer> common) {
  if (!IsGrammarLanguage(language)) {
    throw UnknownLanguageError(std::string(language));
  }
  auto parsed = grammar_detail::ParseRules(source, source_name);
  const LetterInventory inventory = InventoryForGrammar(language);

  Grammar g;
  g.language_ = std::string(language);
  g.version_ = parsed.version;
  g.visual_common_ = std::move(common);
  for (auto& rule : parsed.rules) {
    if (rule.layer == LayerKind::kVisualCommon) {
      throw GrammarError(source_name +
                         ": visual_common rules live in the shared file and "
                         "cannot be set per language");
    }
    for (char32_t cp : rule.output) {
      const bool mark = unicode::IsArabicBlock(cp) && unicode::CombiningClass(cp) > 0;
      if (!inventory.contains(cp) && !mark && !unicode::IsWhiteSpace(cp)) {
        throw InventoryViolationError(
            source_name + ": output U+" + ToHex(Text(1, cp)) +
                " is not in the '" + std::string(language) + "' inventory",
            cp);
      }
    }
    if (rule.layer == LayerKind::kVisualLang) {
      g.visual_lang_.Add(std::move(rule));
    } else {
      g.reading_lang_.Add(std::move(rule));
    }
  }
  return g;
}

inline Grammar LoadGrammar(std::string_view language, std::string_view source,
                           const std::string& source_name = "<memory>") {
  return LoadGrammar(language, source, source_name, BundledVisualCommon());
}

// Bundled grammars are loaded once and shared.
inline const Grammar& BundledGrammar(std::string_view language) {
  static const std::map<std::string, Grammar, std::less<>> grammars = [] {
    std::map<std::string, Grammar, std::less<>> m;
    for (std::string_view tag : kGrammarLanguages) {
      m.emplace(std::string(tag),
                LoadGrammar(tag, BundledSource(tag), std::string(tag) + ".rules"));
    }
    return m;
  }();
  auto it = grammars.find(language);
  if (it == grammars.end()) throw UnknownLanguageError(std::string(language));
  return it->second;
}

// Random strings that stress a grammar: its own rule inputs, letters, Arabic
// marks, presentation forms, Latin letters and spaces.
inline std::vector<Text> ValidationCorpus(const Grammar& grammar,
                                          std::uint64_t seed, std::size_t count,
                                          std::size_t max_length = 6) {
  std::vector<Text> pieces;
  for (const RuleLayer* layer :
       {&grammar.visual_common(), &grammar.visual_lang(), &grammar.reading_lang()}) {
    for (PositionClass p : kPositionApplicationOrder) {
      for (const auto& r : layer->rules(p)) {
        pieces.push_back(r.input);
        pieces.push_back(r.output);
      }
    }
  }
  std::vector<char32_t> arabic;
  for (char32_t cp = 0x0600; cp <= 0x06FF; ++cp) arabic.push_back(cp);
  std::vector<char32_t> marks;
  for (const auto& e : unicode::detail::kCombiningClasses) marks.push_back(e.codepoint);
  const LetterInventory inventory = InventoryForGrammar(grammar.language());

  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
  };
  std::vector<Text> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Text s;
    const std::size_t len = 1 + pick(max_length);
    for (std::size_t k = 0; k < len; ++k) {
      switch (pick(7)) {
        case 0:
          if (!pieces.empty()) {
            s += pieces[pick(pieces.size())];
            break;
          }
          [[fallthrough]];
        case 1: s.push_back(inventory.members()[pick(inventory.size())]); break;
        case 2: s.push_back(marks[pick(marks.size())]); break;
        case 3: s.push_back(arabic[pick(arabic.size())]); break;
        case 4: s.push_back(static_cast<char32_t>(0xFB50 + pick(0xFEFF - 0xFB50 + 1))); break;
        case 5: s.push_back(U' '); break;
        default: s.push_back(static_cast<char32_t>(U'a' + pick(26))); break;
      }
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

struct IdempotenceViolation {
  Mode mode;
  Text input;
  Text once;
  Text twice;
};

inline std::optional<IdempotenceViolation> CheckIdempotence(
    const Grammar& grammar, std::span<const Text> corpus) {
  for (const Text& s : corpus) {
    for (Mode mode : {Mode::kNfc, Mode::kVisual, Mode::kReading}) {
      Text once = grammar.Normalize(mode, s);
      Text twice = grammar.Normalize(mode, once);
      if (once != twice) {
        return IdempotenceViolation{mode, s, std::move(once), std::move(twice)};
      }
    }
  }
  return std::nullopt;
}

}  // namespace pernorm

#endif  // PERNORM_GRAMMAR_HPP_
