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

// Interpolated modified Kneser-Ney n-gram models over characters or
// whitespace tokens, cross-entropy scoring and ARPA text I/O.

#ifndef PERNORM_NGRAM_LM_HPP_
#define PERNORM_NGRAM_LM_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pernorm/corpus.hpp"
#include "pernorm/error.hpp"
#include "pernorm/unicode_data.hpp"
#include "pernorm/utf8.hpp"

namespace pernorm {

enum class Unit { kChar, kWord };

inline constexpr std::string_view UnitName(Unit u) {
  return u == Unit::kChar ? "char" : "word";
}

inline std::optional<Unit> ParseUnit(std::string_view s) {
  if (s == "char") return Unit::kChar;
  if (s == "word") return Unit::kWord;
  return std::nullopt;
}

// A count-of-counts statistic needed for a discount is zero, or a discount
// falls outside (0, j).
class DegenerateCountsError : public Error {
 public:
  DegenerateCountsError(int order, const std::string& statistic)
      : Error("degenerate counts at order " + std::to_string(order) + ": " +
              statistic),
        order_(order),
        statistic_(statistic) {}
  int order() const { return order_; }
  const std::string& statistic() const { return statistic_; }

 private:
  int order_;
  std::string statistic_;
};

struct Discounts {
  double d1 = 0, d2 = 0, d3 = 0;

  double For(std::uint64_t count) const {
    return count == 0 ? 0.0 : count == 1 ? d1 : count == 2 ? d2 : d3;
  }
};

// Fixed discounts used when `discount_fallback` is on and the estimate for
// an order is degenerate.
inline constexpr Discounts kFallbackDiscounts{0.5, 1.0, 1.5};

struct TrainOptions {
  bool discount_fallback = false;
};

// Counts-of-counts n1..n4 -> discounts. Throws DegenerateCountsError.
inline Discounts EstimateDiscounts(int order, const std::array<std::uint64_t, 5>& n) {
  for (int j = 1; j <= 4; ++j) {
    if (n[j] == 0) throw DegenerateCountsError(order, "n" + std::to_string(j) + " = 0");
  }
  const double n1 = n[1], n2 = n[2], n3 = n[3], n4 = n[4];
  const double y = n1 / (n1 + 2 * n2);
  const Discounts d{1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3};
  const double ds[] = {d.d1, d.d2, d.d3};
  for (int j = 1; j <= 3; ++j) {
    if (!(ds[j - 1] > 0 && ds[j - 1] < j)) {
      std::ostringstream msg;
      msg << "D" << j << " = " << ds[j - 1] << " outside (0, " << j << ")";
      throw DegenerateCountsError(order, msg.str());
    }
  }
  return d;
}

// Splits a line into model tokens: scalar values for char models (space is
// an ordinary symbol), whitespace tokens for word models.
inline std::vector<Text> ToTokens(TextView line, Unit unit) {
  if (unit == Unit::kWord) return Tokenize(line);
  std::vector<Text> out;
  out.reserve(line.size());
  for (char32_t c : line) out.emplace_back(1, c);
  return out;
}

using TokenSequences = std::vector<std::vector<Text>>;

class NGramModel {
 public:
  using Id = std::uint32_t;
  static constexpr Id kUnk = 0, kBos = 1, kEos = 2;

  Unit unit() const { return unit_; }
  int order() const { return order_; }
  // Index = id. Entries 0..2 are <unk>, <s>, </s> and hold empty Text.
  const std::vector<Text>& vocabulary() const { return vocab_; }
  // Size of the predicted vocabulary: everything except <s>.
  std::size_t predicted_vocabulary_size() const { return vocab_.size() - 1; }
  // Discounts of order k (1-based); empty for models read from ARPA.
  const std::vector<Discounts>& discounts() const { return discounts_; }
  // Orders whose discounts came from kFallbackDiscounts.
  const std::vector<int>& fallback_orders() const { return fallback_orders_; }
  // Number of stored n-grams of order k.
  std::size_t ngram_count(int k) const { return tables_.at(k - 1).size(); }

  Id Lookup(TextView token) const {
    auto it = ids_.find(Text(token));
    return it == ids_.end() ? kUnk : it->second;
  }

  // P(w | context). Only the last order-1 context ids are used.
  double Prob(std::span<const Id> context, Id w) const {
    return std::pow(10.0, Log10Prob(context, w));
  }

  double Log10Prob(std::span<const Id> context, Id w) const {
    const std::size_t max_ctx = std::min<std::size_t>(context.size(), order_ - 1);
    double backoff = 0.0;
    for (std::size_t j = max_ctx;; --j) {
      const auto ctx = context.subspan(context.size() - j);
      Key key = Pack(ctx);
      const auto& table = tables_[j];
      auto it = table.find(Append(key, w));
      if (it != table.end()) return backoff + it->second.log_prob;
      if (j == 0) break;
      const auto& htable = tables_[j - 1];
      auto h = htable.find(key);
      if (h != htable.end()) backoff += h->second.log_backoff;
    }
    // Unreachable for ids inside the vocabulary: every id has a unigram.
    return -std::numeric_limits<double>::infinity();
  }

  // Probability by token text; unknown tokens score as <unk>.
  double Prob(const std::vector<Text>& context, TextView w) const {
    std::vector<Id> ids;
    for (const Text& t : context) ids.push_back(Lookup(t));
    return Prob(ids, Lookup(w));
  }

  // Token ids with <s> prepended and </s> appended.
  std::vector<Id> Encode(const std::vector<Text>& sequence) const {
    std::vector<Id> ids;
    ids.reserve(sequence.size() + 2);
    ids.push_back(kBos);
    for (const Text& t : sequence) ids.push_back(Lookup(t));
    ids.push_back(kEos);
    return ids;
  }

  // Summed -log2 P over a sequence's tokens and </s>; `count` receives the
  // number of predictions.
  double SequenceBits(const std::vector<Text>& sequence, std::size_t* count) const {
    const auto ids = Encode(sequence);
    double log10_sum = 0;
    for (std::size_t i = 1; i < ids.size(); ++i) {
      log10_sum += Log10Prob(std::span(ids).first(i), ids[i]);
    }
    if (count) *count = ids.size() - 1;
    return -log10_sum / std::log10(2.0);
  }

  friend NGramModel Train(std::span<const std::vector<Text>* const>, Unit, int,
                          TrainOptions);
  friend void WriteArpa(std::ostream&, const NGramModel&);
  friend NGramModel ReadArpa(std::istream&);

 private:
  using Key = unsigned __int128;
  struct KeyHash {
    std::size_t operator()(Key k) const {
      std::uint64_t x = static_cast<std::uint64_t>(k) ^
                        (static_cast<std::uint64_t>(k >> 64) * 0x9E3779B97F4A7C15ULL);
      x ^= x >> 33;
      x *= 0xFF51AFD7ED558CCDULL;
      x ^= x >> 33;
      return static_cast<std::size_t>(x);
    }
  };
  struct Entry {
    double log_prob = 0;     // log10 P(w | h)
    double log_backoff = 0;  // log10 gamma(this n-gram as a history)
    bool has_backoff = false;
  };
  using Table = std::unordered_map<Key, Entry, KeyHash>;

  // Ids are stored +1 so that a zero field never collides with id 0.
  Key Pack(std::span<const Id> ids) const {
    Key k = 0;
    for (Id id : ids) k = (k << bits_) | (id + 1);
    return k;
  }
  Key Append(Key k, Id id) const { return (k << bits_) | (id + 1); }
  static Key LowMask(int nbits) {
    return nbits >= 128 ? ~Key{0} : (Key{1} << nbits) - 1;
  }

  void InitVocabulary(std::vector<Text> tokens) {
    vocab_.assign(3, Text{});
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (Text& t : tokens) vocab_.push_back(std::move(t));
    ids_.clear();
    for (Id i = 3; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], i);
    bits_ = std::bit_width(vocab_.size());
    if (static_cast<std::size_t>(bits_) * order_ > 128) {
      throw PreconditionError("order " + std::to_string(order_) + " with " +
                              std::to_string(vocab_.size()) +
                              " vocabulary entries exceeds the 128-bit key");
    }
  }

  Unit unit_ = Unit::kWord;
  int order_ = 0;
  int bits_ = 0;
  std::vector<Text> vocab_;
  std::unordered_map<Text, Id> ids_;
  std::vector<Table> tables_;  // tables_[k - 1] holds the k-grams
  std::vector<Discounts> discounts_;
  std::vector<int> fallback_orders_;
};

// Trains an interpolated modified Kneser-Ney model. Each sequence is wrapped
// as <s> tokens </s>. Highest-order counts and n-grams starting with <s>
// keep raw counts; other lower orders use continuation counts (distinct
// left extensions). The unigram level interpolates with the uniform
// distribution over the predicted vocabulary.
inline NGramModel Train(std::span<const std::vector<Text>* const> corpus, Unit unit,
                        int order, TrainOptions options = {}) {
  using Id = NGramModel::Id;
  using Key = NGramModel::Key;
  if (order < 2) throw PreconditionError("n-gram order must be at least 2");
  if (corpus.empty()) throw PreconditionError("training corpus is empty");
  std::vector<Text> tokens;
  for (const auto* seq_ptr : corpus) {
    const auto& seq = *seq_ptr;
    if (seq.empty()) throw PreconditionError("training sequence is empty");
    if (unit == Unit::kChar) {
      for (const Text& t : seq) {
        if (t.size() != 1) throw PreconditionError("char tokens must be single scalars");
      }
    }
  }
  NGramModel m;
  m.unit_ = unit;
  m.order_ = order;
  {
    std::unordered_map<Text, char> seen;
    for (const auto* seq : corpus)
      for (const Text& t : *seq)
        if (seen.emplace(t, 0).second) tokens.push_back(t);
  }
  m.InitVocabulary(std::move(tokens));
  const int bits = m.bits_;

  // counts[k-1]: adjusted counts of k-grams.
  std::vector<std::unordered_map<Key, std::uint64_t, NGramModel::KeyHash>> counts(order);
  std::vector<Id> ids;
  for (const auto* seq : corpus) {
    ids.clear();
    ids.push_back(NGramModel::kBos);
    for (const Text& t : *seq) ids.push_back(m.ids_.at(t));
    ids.push_back(NGramModel::kEos);
    const std::size_t n = ids.size();
    // Full-order windows.
    if (n >= static_cast<std::size_t>(order)) {
      Key k = m.Pack(std::span(ids).first(order - 1));
      const Key mask = NGramModel::LowMask(bits * order);
      for (std::size_t i = order - 1; i < n; ++i) {
        k = m.Append(k, ids[i]) & mask;
        ++counts[order - 1][k];
      }
    }
    // Shorter windows at the start carry <s> and keep raw counts.
    for (int k = 2; k < order && static_cast<std::size_t>(k) <= n; ++k) {
      ++counts[k - 1][m.Pack(std::span(ids).first(k))];
    }
  }
  // Continuation counts: each (k+1)-gram type adds one to its suffix k-gram.
  const Key bos_field = NGramModel::kBos + 1;
  for (int k = order - 1; k >= 1; --k) {
    auto& lower = counts[k - 1];
    for (const auto& [key, c] : counts[k]) {
      const Key suffix = key & NGramModel::LowMask(bits * k);
      if ((suffix >> (bits * (k - 1))) == bos_field) continue;  // raw-count k-gram
      ++lower[suffix];
    }
  }

  // Discounts per order from counts-of-counts.
  m.discounts_.resize(order);
  for (int k = 1; k <= order; ++k) {
    std::array<std::uint64_t, 5> n{};
    for (const auto& [key, c] : counts[k - 1]) {
      if (c <= 4) ++n[c];
    }
    try {
      m.discounts_[k - 1] = EstimateDiscounts(k, n);
    } catch (const DegenerateCountsError&) {
      if (!options.discount_fallback) throw;
      m.discounts_[k - 1] = kFallbackDiscounts;
      m.fallback_orders_.push_back(k);
    }
  }

  // Per-history totals at each order: sum of counts and N1, N2, N3+.
  struct HistoryStats {
    std::uint64_t total = 0;
    std::uint64_t n[3] = {0, 0, 0};
  };
  m.tables_.assign(order, {});
  const std::size_t v = m.predicted_vocabulary_size();
  for (int k = 1; k <= order; ++k) {
    const Discounts& d = m.discounts_[k - 1];
    std::unordered_map<Key, HistoryStats, NGramModel::KeyHash> hist;
    hist.reserve(counts[k - 1].size());
    for (const auto& [key, c] : counts[k - 1]) {
      auto& h = hist[key >> bits];
      h.total += c;
      ++h.n[std::min<std::uint64_t>(c, 3) - 1];
    }
    auto gamma = [&](const HistoryStats& h) {
      return (d.d1 * h.n[0] + d.d2 * h.n[1] + d.d3 * h.n[2]) / h.total;
    };
    auto& table = m.tables_[k - 1];
    table.reserve(counts[k - 1].size() + (k == 1 ? v + 1 : 0));
    if (k == 1) {
      const HistoryStats& h = hist[0];
      const double g = gamma(h);
      for (Id w = 0; w < m.vocab_.size(); ++w) {
        if (w == NGramModel::kBos) continue;
        auto it = counts[0].find(Key{w} + 1);
        const double c = it == counts[0].end() ? 0.0 : static_cast<double>(it->second);
        const double p =
            (c > 0 ? (c - d.For(it->second)) / h.total : 0.0) + g / static_cast<double>(v);
        table[Key{w} + 1].log_prob = std::log10(p);
      }
      table[Key{NGramModel::kBos} + 1].log_prob = -99.0;
    } else {
      const auto& lower = m.tables_[k - 2];
      for (const auto& [key, c] : counts[k - 1]) {
        const HistoryStats& h = hist.at(key >> bits);
        const Key lower_key = key & NGramModel::LowMask(bits * (k - 1));
        const double p_lower = std::pow(10.0, lower.at(lower_key).log_prob);
        const double p = (c - d.For(c)) / h.total + gamma(h) * p_lower;
        table[key].log_prob = std::log10(p);
      }
    }
    // Record gamma on the history entries one order down.
    if (k >= 2) {
      auto& htable = m.tables_[k - 2];
      for (const auto& [hkey, h] : hist) {
        auto& e = htable.at(hkey);
        e.log_backoff = std::log10(gamma(h));
        e.has_backoff = true;
      }
    }
  }
  return m;
}

inline NGramModel Train(const TokenSequences& corpus, Unit unit, int order,
                        TrainOptions options = {}) {
  std::vector<const std::vector<Text>*> refs;
  refs.reserve(corpus.size());
  for (const auto& seq : corpus) refs.push_back(&seq);
  return Train(std::span<const std::vector<Text>* const>(refs), unit, order, options);
}

// Bits per token over `test`, counting one </s> per sequence.
inline double CrossEntropy(const NGramModel& model,
                           std::span<const std::vector<Text>* const> test) {
  if (test.empty()) throw PreconditionError("test set is empty");
  double bits = 0;
  std::size_t count = 0;
  for (const auto* seq : test) {
    std::size_t c = 0;
    bits += model.SequenceBits(*seq, &c);
    count += c;
  }
  return bits / static_cast<double>(count);
}

inline double CrossEntropy(const NGramModel& model, const TokenSequences& test) {
  std::vector<const std::vector<Text>*> refs;
  refs.reserve(test.size());
  for (const auto& seq : test) refs.push_back(&seq);
  return CrossEntropy(model, std::span<const std::vector<Text>* const>(refs));
}

namespace ngram_detail {

inline constexpr std::string_view kUnkName = "<unk>";
inline constexpr std::string_view kBosName = "<s>";
inline constexpr std::string_view kEosName = "</s>";

// '<' and whitespace are written as <U+XXXX> so tokens stay space-separated
// and never collide with the reserved names.
inline std::string EscapeToken(TextView token) {
  std::string out;
  for (char32_t c : token) {
    if (c == U'<' || unicode::IsWhiteSpace(c)) {
      out += "<U+" + ToHex(Text(1, c)) + ">";
    } else {
      utf8::AppendEncoded(c, out);
    }
  }
  return out;
}

inline Text UnescapeToken(std::string_view s) {
  std::string bytes;
  Text out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 3, "<U+") == 0) {
      const auto close = s.find('>', i);
      if (close == std::string_view::npos) throw Error("bad escape in ARPA token");
      out += utf8::Decode(bytes);
      bytes.clear();
      out.push_back(static_cast<char32_t>(
          std::stoul(std::string(s.substr(i + 3, close - i - 3)), nullptr, 16)));
      i = close + 1;
    } else {
      bytes.push_back(s[i++]);
    }
  }
  out += utf8::Decode(bytes);
  return out;
}

inline std::string TokenName(const NGramModel& m, NGramModel::Id id) {
  switch (id) {
    case NGramModel::kUnk: return std::string(kUnkName);
    case NGramModel::kBos: return std::string(kBosName);
    case NGramModel::kEos: return std::string(kEosName);
    default: return EscapeToken(m.vocabulary()[id]);
  }
}

}  // namespace ngram_detail

// ARPA text. A `# unit=char|word` line precedes `\data\`; entries are
// sorted by id sequence, and ids follow sorted token order.
inline void WriteArpa(std::ostream& out, const NGramModel& m) {
  using Key = NGramModel::Key;
  out << "# unit=" << UnitName(m.unit_) << "\n\n\\data\\\n";
  for (int k = 1; k <= m.order_; ++k) {
    out << "ngram " << k << "=" << m.tables_[k - 1].size() << "\n";
  }
  const Key field_mask = (Key{1} << m.bits_) - 1;
  std::ostringstream num;
  num.imbue(std::locale::classic());
  num << std::setprecision(17);
  for (int k = 1; k <= m.order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    std::vector<std::pair<Key, const NGramModel::Entry*>> rows;
    rows.reserve(m.tables_[k - 1].size());
    for (const auto& [key, e] : m.tables_[k - 1]) rows.emplace_back(key, &e);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, e] : rows) {
      num.str("");
      num << e->log_prob;
      out << num.str() << '\t';
      for (int i = k - 1; i >= 0; --i) {
        const auto id = static_cast<NGramModel::Id>((key >> (m.bits_ * i)) & field_mask) - 1;
        out << ngram_detail::TokenName(m, id) << (i ? " " : "");
      }
      if (e->has_backoff) {
        num.str("");
        num << e->log_backoff;
        out << '\t' << num.str();
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

inline NGramModel ReadArpa(std::istream& in) {
  using Id = NGramModel::Id;
  NGramModel m;
  std::string line;
  std::optional<Unit> unit;
  std::vector<std::size_t> declared;
  // Header.
  while (std::getline(in, line)) {
    if (line.rfind("# unit=", 0) == 0) unit = ParseUnit(std::string_view(line).substr(7));
    if (line == "\\data\\") break;
  }
  if (!unit) throw Error("ARPA file lacks a '# unit=' line");
  while (std::getline(in, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (line.rfind("ngram ", 0) != 0 || eq == std::string::npos) {
      throw Error("bad ARPA count line: " + line);
    }
    declared.push_back(std::stoull(line.substr(eq + 1)));
  }
  if (declared.size() < 2) throw Error("ARPA model must have order >= 2");

  struct Row {
    std::vector<std::string> tokens;
    double log_prob;
    std::optional<double> backoff;
  };
  std::vector<std::vector<Row>> sections(declared.size());
  std::vector<Text> vocab_tokens;
  for (std::size_t k = 1; k <= declared.size(); ++k) {
    while (std::getline(in, line) && line.empty()) {
    }
    if (line != "\\" + std::to_string(k) + "-grams:") {
      throw Error("expected \\" + std::to_string(k) + "-grams: in ARPA file");
    }
    for (std::size_t r = 0; r < declared[k - 1]; ++r) {
      if (!std::getline(in, line)) throw Error("truncated ARPA file");
      std::istringstream fields(line);
      std::string prob, words, backoff;
      std::getline(fields, prob, '\t');
      std::getline(fields, words, '\t');
      Row row;
      row.log_prob = std::stod(prob);
      if (std::getline(fields, backoff, '\t')) row.backoff = std::stod(backoff);
      std::istringstream ws(words);
      for (std::string w; ws >> w;) row.tokens.push_back(w);
      if (row.tokens.size() != k) throw Error("bad ARPA n-gram line: " + line);
      if (k == 1 && row.tokens[0] != ngram_detail::kUnkName &&
          row.tokens[0] != ngram_detail::kBosName && row.tokens[0] != ngram_detail::kEosName) {
        vocab_tokens.push_back(ngram_detail::UnescapeToken(row.tokens[0]));
      }
      sections[k - 1].push_back(std::move(row));
    }
  }
  while (std::getline(in, line) && line.empty()) {
  }
  if (line != "\\end\\") throw Error("ARPA file lacks \\end\\");

  m.unit_ = *unit;
  m.order_ = static_cast<int>(declared.size());
  m.InitVocabulary(std::move(vocab_tokens));
  m.tables_.assign(m.order_, {});
  auto id_of = [&](const std::string& name) -> Id {
    if (name == ngram_detail::kUnkName) return NGramModel::kUnk;
    if (name == ngram_detail::kBosName) return NGramModel::kBos;
    if (name == ngram_detail::kEosName) return NGramModel::kEos;
    auto it = m.ids_.find(ngram_detail::UnescapeToken(name));
    if (it == m.ids_.end()) throw Error("ARPA n-gram uses token missing from unigrams");
    return it->second;
  };
  std::vector<Id> ids;
  for (std::size_t k = 1; k <= sections.size(); ++k) {
    for (const Row& row : sections[k - 1]) {
      ids.clear();
      for (const auto& t : row.tokens) ids.push_back(id_of(t));
      auto& e = m.tables_[k - 1][m.Pack(ids)];
      e.log_prob = row.log_prob;
      if (row.backoff) {
        e.log_backoff = *row.backoff;
        e.has_backoff = true;
      }
    }
  }
  for (Id w = 0; w < m.vocab_.size(); ++w) {
    if (!m.tables_[0].count(m.Pack(std::span(&w, 1)))) {
      throw Error("ARPA unigram section is missing " + ngram_detail::TokenName(m, w));
    }
  }
  return m;
}

}  // namespace pernorm

#endif  // PERNORM_NGRAM_LM_HPP_
