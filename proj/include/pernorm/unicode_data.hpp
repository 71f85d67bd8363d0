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

// Static Unicode metadata for the Arabic-script blocks (UCD 14.0.0) and the
// per-language letter inventories.

#ifndef PERNORM_UNICODE_DATA_HPP_
#define PERNORM_UNICODE_DATA_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pernorm/bundled_data.hpp"
#include "pernorm/error.hpp"
#include "pernorm/utf8.hpp"

namespace pernorm {

inline constexpr std::string_view kUnicodeVersion = "14.0.0";

// The eight languages with bundled letter inventories, in column order.
inline constexpr std::array<std::string_view, 8> kInventoryLanguages = {
    "azb", "ckb", "ks", "ms", "pnb", "sd", "ug", "ur"};

struct CodepointRecord {
  char32_t codepoint = 0;
  Text canonical_decomposition;  // empty or exactly two scalars
  int combining_class = 0;
  std::optional<Text> compat_decomposition;
  bool is_arabic_block = false;
};

namespace unicode {
namespace detail {

struct CombiningClassEntry {
  char32_t codepoint;
  std::uint8_t combining_class;
};

struct CanonicalPairEntry {
  char32_t codepoint;
  char32_t first;
  char32_t second;
  bool excluded_from_composition;
};

struct CompatEntry {
  char32_t codepoint;
  const char32_t* mapping;
};

#include "pernorm/detail/unicode_tables.inc"

template <typename Entry, std::size_t N>
const Entry* Find(const Entry (&table)[N], char32_t cp) {
  auto it = std::lower_bound(
      std::begin(table), std::end(table), cp,
      [](const Entry& e, char32_t c) { return e.codepoint < c; });
  if (it == std::end(table) || it->codepoint != cp) return nullptr;
  return &*it;
}

struct CompositionKey {
  char32_t first;
  char32_t second;
  char32_t composite;
};

// Primary composites sorted by (first, second).
inline const std::vector<CompositionKey>& CompositionTable() {
  static const std::vector<CompositionKey> table = [] {
    std::vector<CompositionKey> t;
    for (const auto& e : kCanonicalDecompositions) {
      if (!e.excluded_from_composition) {
        t.push_back({e.first, e.second, e.codepoint});
      }
    }
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return std::pair(a.first, a.second) < std::pair(b.first, b.second);
    });
    return t;
  }();
  return table;
}

}  // namespace detail

inline constexpr bool IsArabicBlock(char32_t cp) {
  return (cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0x0750 && cp <= 0x077F) ||
         (cp >= 0x08A0 && cp <= 0x08FF) || (cp >= 0xFB50 && cp <= 0xFDFF) ||
         (cp >= 0xFE70 && cp <= 0xFEFF);
}

// Unicode White_Space property.
inline constexpr bool IsWhiteSpace(char32_t cp) {
  return (cp >= 0x0009 && cp <= 0x000D) || cp == 0x0020 || cp == 0x0085 ||
         cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

inline int CombiningClass(char32_t cp) {
  const auto* e = detail::Find(detail::kCombiningClasses, cp);
  return e ? e->combining_class : 0;
}

inline std::optional<std::pair<char32_t, char32_t>> CanonicalDecomposition(
    char32_t cp) {
  const auto* e = detail::Find(detail::kCanonicalDecompositions, cp);
  if (!e) return std::nullopt;
  return std::pair(e->first, e->second);
}

// Primary composite of (first, second), if one exists.
inline std::optional<char32_t> Compose(char32_t first, char32_t second) {
  const auto& table = detail::CompositionTable();
  auto it = std::lower_bound(
      table.begin(), table.end(), std::pair(first, second),
      [](const detail::CompositionKey& k, const std::pair<char32_t, char32_t>& v) {
        return std::pair(k.first, k.second) < v;
      });
  if (it == table.end() || it->first != first || it->second != second) {
    return std::nullopt;
  }
  return it->composite;
}

inline std::optional<Text> CompatDecomposition(char32_t cp) {
  const auto* e = detail::Find(detail::kCompatDecompositions, cp);
  if (!e) return std::nullopt;
  return Text(e->mapping);
}

// Total: unknown codepoints get an empty record with range-tested block
// membership.
inline CodepointRecord Lookup(char32_t cp) {
  CodepointRecord r;
  r.codepoint = cp;
  r.is_arabic_block = IsArabicBlock(cp);
  r.combining_class = CombiningClass(cp);
  if (auto d = CanonicalDecomposition(cp)) {
    r.canonical_decomposition = {d->first, d->second};
  }
  r.compat_decomposition = CompatDecomposition(cp);
  return r;
}

}  // namespace unicode

class LetterInventory {
 public:
  LetterInventory() = default;
  LetterInventory(std::string language, std::vector<char32_t> members)
      : language_(std::move(language)), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
  }

  const std::string& language() const { return language_; }
  const std::vector<char32_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(char32_t cp) const {
    return std::binary_search(members_.begin(), members_.end(), cp);
  }

 private:
  std::string language_;
  std::vector<char32_t> members_;
};

// One parsed row of inventories.tsv.
struct InventoryRow {
  char32_t codepoint;
  std::string name;
  std::array<bool, 8> used_by;
};

class InventoryTable {
 public:
  // Parses the `codepoint name azb ckb ks ms pnb sd ug ur` TSV. Duplicate
  // rows are accepted and merged.
  static InventoryTable Parse(std::string_view tsv) {
    InventoryTable table;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!tsv.empty()) {
      auto nl = tsv.find('\n');
      std::string_view line = tsv.substr(0, nl);
      tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string_view> fields;
      for (std::size_t pos = 0;;) {
        auto tab = line.find('\t', pos);
        fields.push_back(line.substr(pos, tab - pos));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
      }
      auto fail = [&](const std::string& what) {
        throw Error("inventories.tsv:" + std::to_string(line_no) + ": " + what);
      };
      if (fields.size() != 10) fail("expected 10 tab-separated fields");
      if (!header_seen) {
        static constexpr std::array<std::string_view, 10> kHeader = {
            "codepoint", "name", "azb", "ckb", "ks",
            "ms",        "pnb",  "sd",  "ug",  "ur"};
        for (std::size_t i = 0; i < kHeader.size(); ++i) {
          if (fields[i] != kHeader[i]) fail("bad header");
        }
        header_seen = true;
        continue;
      }
      InventoryRow row{};
      row.codepoint = ParseHex(fields[0], fail);
      if (!unicode::IsArabicBlock(row.codepoint)) {
        fail("codepoint outside the Arabic blocks");
      }
      row.name = std::string(fields[1]);
      for (std::size_t i = 0; i < 8; ++i) {
        if (fields[2 + i] == "1") {
          row.used_by[i] = true;
        } else if (fields[2 + i] == "0") {
          row.used_by[i] = false;
        } else {
          fail("flags must be 0 or 1");
        }
      }
      table.rows_.push_back(std::move(row));
    }
    if (!header_seen) throw Error("inventories.tsv: missing header");
    return table;
  }

  const std::vector<InventoryRow>& rows() const { return rows_; }

  LetterInventory inventory(std::string_view language) const {
    auto it = std::find(kInventoryLanguages.begin(), kInventoryLanguages.end(),
                        language);
    if (it == kInventoryLanguages.end()) {
      throw UnknownLanguageError(std::string(language));
    }
    const auto column = static_cast<std::size_t>(it - kInventoryLanguages.begin());
    std::vector<char32_t> members;
    for (const auto& row : rows_) {
      if (row.used_by[column]) members.push_back(row.codepoint);
    }
    return LetterInventory(std::string(language), std::move(members));
  }

  // Distinct codepoints used by at least one language.
  std::vector<char32_t> Union() const {
    std::vector<char32_t> all;
    for (const auto& row : rows_) {
      if (std::find(row.used_by.begin(), row.used_by.end(), true) !=
          row.used_by.end()) {
        all.push_back(row.codepoint);
      }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }

 private:
  template <typename Fail>
  static char32_t ParseHex(std::string_view s, Fail&& fail) {
    if (s.empty() || s.size() > 6) fail("bad codepoint '" + std::string(s) + "'");
    char32_t v = 0;
    for (char c : s) {
      v <<= 4;
      if (c >= '0' && c <= '9') {
        v |= static_cast<char32_t>(c - '0');
      } else if (c >= 'A' && c <= 'F') {
        v |= static_cast<char32_t>(c - 'A' + 10);
      } else {
        fail("bad codepoint '" + std::string(s) + "'");
      }
    }
    return v;
  }

  std::vector<InventoryRow> rows_;
};

inline const InventoryTable& BundledInventories() {
  static const InventoryTable table = InventoryTable::Parse(bundled::kInventoriesTsv);
  return table;
}

inline LetterInventory Inventory(std::string_view language) {
  return BundledInventories().inventory(language);
}

}  // namespace pernorm

#endif  // PERNORM_UNICODE_DATA_HPP_
