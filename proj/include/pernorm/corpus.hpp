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

// Corpus ingestion, the script filter, whitespace tokenization and
// normalization diff accounting.

#ifndef PERNORM_CORPUS_HPP_
#define PERNORM_CORPUS_HPP_

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pernorm/detail/parallel.hpp"
#include "pernorm/error.hpp"
#include "pernorm/grammar.hpp"
#include "pernorm/unicode_data.hpp"
#include "pernorm/utf8.hpp"

namespace pernorm {

struct CorpusLine {
  std::size_t index;  // 1-based line number in the source file
  Text text;

  friend bool operator==(const CorpusLine&, const CorpusLine&) = default;
};

struct Corpus {
  std::vector<CorpusLine> lines;
  bool had_bom = false;
};

inline constexpr std::string_view kUtf8Bom = "\xEF\xBB\xBF";

// Splits `bytes` on '\n' and decodes each line strictly. A leading BOM is
// dropped once and reported through `had_bom`. A final newline does not
// start an extra empty line.
inline Corpus ReadCorpus(std::string_view bytes) {
  Corpus corpus;
  if (bytes.substr(0, kUtf8Bom.size()) == kUtf8Bom) {
    corpus.had_bom = true;
    bytes.remove_prefix(kUtf8Bom.size());
  }
  std::size_t line_no = 0;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    const std::string_view line = bytes.substr(0, nl);
    ++line_no;
    corpus.lines.push_back({line_no, utf8::Decode(line, line_no)});
    if (nl == std::string_view::npos) break;
    bytes.remove_prefix(nl + 1);
  }
  return corpus;
}

inline std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline Corpus ReadCorpusFile(const std::string& path) {
  return ReadCorpus(ReadFileBytes(path));
}

// Keeps a line of l codepoints iff at least beta * l of them are in the
// Arabic blocks.
inline bool ScriptFilter(TextView line, double beta) {
  const auto arabic = static_cast<double>(
      std::count_if(line.begin(), line.end(), unicode::IsArabicBlock));
  return arabic >= beta * static_cast<double>(line.size());
}

// Tokens are maximal runs of non-White_Space codepoints.
inline std::vector<TextView> TokenViews(TextView line) {
  std::vector<TextView> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && unicode::IsWhiteSpace(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !unicode::IsWhiteSpace(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline std::vector<Text> Tokenize(TextView line) {
  std::vector<Text> tokens;
  for (TextView t : TokenViews(line)) tokens.emplace_back(t);
  return tokens;
}

// Script-filter thresholds used for the per-language replication runs.
inline std::optional<double> ReplicationBeta(std::string_view language) {
  static constexpr std::pair<std::string_view, double> kBeta[] = {
      {"azb", 0.8}, {"ckb", 0.8}, {"ks", 0.6}, {"ms", 0.0},
      {"pnb", 0.8}, {"sd", 0.8},  {"ug", 0.1}, {"ur", 0.9},
  };
  for (const auto& [tag, beta] : kBeta) {
    if (tag == language) return beta;
  }
  return std::nullopt;
}

struct DiffStats {
  std::size_t n_lines = 0;
  std::size_t n_types = 0;
  std::size_t n_lines_changed = 0;
  std::size_t n_types_changed = 0;
  double ratio_lines = 0.0;
  double ratio_types = 0.0;

  static DiffStats From(std::size_t lines, std::size_t types,
                        std::size_t lines_changed, std::size_t types_changed) {
    DiffStats s{lines, types, lines_changed, types_changed, 0.0, 0.0};
    if (lines) s.ratio_lines = 100.0 * static_cast<double>(lines_changed) / lines;
    if (types) s.ratio_types = 100.0 * static_cast<double>(types_changed) / types;
    return s;
  }
};

struct DiffRecord {
  std::size_t line;   // CorpusLine::index
  std::size_t token;  // 1-based token ordinal within the line
  Text before;
  Text after;

  friend bool operator==(const DiffRecord&, const DiffRecord&) = default;
};

struct CorpusDiff {
  std::vector<Text> normalized;  // parallel to the input lines
  std::vector<DiffRecord> records;
  DiffStats stats;
  std::vector<std::size_t> changed;  // D, sorted line indices
};

// Normalizes every line and accounts for what changed. Token records come
// from normalizing each token on its own; a token type counts as changed
// when its normalized form differs.
inline CorpusDiff DiffCorpus(const std::vector<CorpusLine>& lines,
                             const Grammar& grammar, Mode mode,
                             unsigned jobs = 1) {
  CorpusDiff diff;
  diff.normalized.resize(lines.size());
  detail::ParallelFor(lines.size(), jobs, [&](std::size_t i) {
    diff.normalized[i] = grammar.Normalize(mode, lines[i].text);
  });

  std::unordered_map<Text, std::size_t> type_ids;
  std::vector<TextView> types;
  std::vector<std::vector<std::size_t>> line_tokens(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (TextView tok : TokenViews(lines[i].text)) {
      auto [it, inserted] = type_ids.try_emplace(Text(tok), types.size());
      if (inserted) types.push_back(it->first);
      line_tokens[i].push_back(it->second);
    }
  }
  std::vector<Text> normalized_types(types.size());
  detail::ParallelFor(types.size(), jobs, [&](std::size_t t) {
    normalized_types[t] = grammar.Normalize(mode, types[t]);
  });

  std::size_t types_changed = 0;
  for (std::size_t t = 0; t < types.size(); ++t) {
    if (normalized_types[t] != types[t]) ++types_changed;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (diff.normalized[i] != lines[i].text) diff.changed.push_back(lines[i].index);
    for (std::size_t k = 0; k < line_tokens[i].size(); ++k) {
      const std::size_t t = line_tokens[i][k];
      if (normalized_types[t] != types[t]) {
        diff.records.push_back(
            {lines[i].index, k + 1, Text(types[t]), normalized_types[t]});
      }
    }
  }
  std::sort(diff.changed.begin(), diff.changed.end());
  diff.changed.erase(std::unique(diff.changed.begin(), diff.changed.end()),
                     diff.changed.end());
  diff.stats = DiffStats::From(lines.size(), types.size(), diff.changed.size(),
                               types_changed);
  return diff;
}

// The `# stats` block of a diff report.
inline void WriteDiffStats(std::ostream& out, const DiffStats& s) {
  std::ostringstream rl, rw;
  rl << std::fixed << std::setprecision(4) << s.ratio_lines;
  rw << std::fixed << std::setprecision(4) << s.ratio_types;
  out << "# stats\n"
      << "# N_l\t" << s.n_lines << '\n'
      << "# N_w\t" << s.n_types << '\n'
      << "# N_l^r\t" << s.n_lines_changed << '\n'
      << "# R_l\t" << rl.str() << '\n'
      << "# N_w^r\t" << s.n_types_changed << '\n'
      << "# R_w\t" << rw.str() << '\n';
}

// TSV report: one row per changed token, then a `# stats` block.
inline void WriteDiffReport(std::ostream& out, const CorpusDiff& diff) {
  out << "line\ttoken\tbefore_hex\tafter_hex\n";
  for (const auto& r : diff.records) {
    out << r.line << '\t' << r.token << '\t' << ToHex(r.before) << '\t'
        << ToHex(r.after) << '\n';
  }
  WriteDiffStats(out, diff.stats);
}

}  // namespace pernorm

#endif  // PERNORM_CORPUS_HPP_
