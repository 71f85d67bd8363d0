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

// k-fold cross-validation of baseline (B) against normalized (T) n-gram
// models, with changed lines confined to the training side.

#ifndef PERNORM_EXPERIMENT_HPP_
#define PERNORM_EXPERIMENT_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pernorm/corpus.hpp"
#include "pernorm/detail/parallel.hpp"
#include "pernorm/error.hpp"
#include "pernorm/grammar.hpp"
#include "pernorm/ngram_lm.hpp"
#include "pernorm/stats.hpp"

namespace pernorm {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Both conditions saw different test bytes, or similar broken bookkeeping.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class InfeasibleSplitError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  int k = 100;
  double split = 0.8;  // train fraction
  Unit unit = Unit::kChar;
  std::vector<int> orders = {3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<std::uint64_t> seed;
  std::string language = "ur";
  Mode mode = Mode::kReading;
  std::optional<double> beta;      // script filter applied by front ends
  bool discount_fallback = false;  // see TrainOptions

  static std::vector<int> DefaultOrders(Unit unit) {
    return unit == Unit::kChar ? std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10}
                               : std::vector<int>{2, 3, 4, 5};
  }

  void Validate() const {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (!(split > 0 && split < 1)) throw ConfigError("split must lie in (0, 1)");
    if (orders.empty()) throw ConfigError("orders must not be empty");
    for (int n : orders) {
      if (n < 2) throw ConfigError("every order must be at least 2");
    }
    if (beta && !(*beta >= 0 && *beta < 1)) throw ConfigError("beta must lie in [0, 1)");
    if (!IsGrammarLanguage(language)) throw ConfigError("unknown language '" + language + "'");
  }
};

namespace experiment_detail {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + std::string(value));
  }
  return out;
}

inline bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad value for '" + std::string(key) + "': " + std::string(value));
}

}  // namespace experiment_detail

// Flat key=value text; '#' starts a comment line. Keys: k, split, unit,
// orders (comma list), seed, language, mode, beta, discount_fallback.
// Orders default by unit when not given.
inline ExperimentConfig ParseConfig(std::string_view text) {
  using namespace experiment_detail;
  ExperimentConfig c;
  bool orders_set = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = Trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key == "k") {
      c.k = ParseNumber<int>(key, value);
    } else if (key == "split") {
      c.split = ParseNumber<double>(key, value);
    } else if (key == "unit") {
      auto u = ParseUnit(value);
      if (!u) throw ConfigError("unit must be char or word");
      c.unit = *u;
    } else if (key == "orders") {
      c.orders.clear();
      orders_set = true;
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        c.orders.push_back(ParseNumber<int>(key, Trim(rest.substr(0, comma))));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else if (key == "seed") {
      c.seed = ParseNumber<std::uint64_t>(key, value);
    } else if (key == "language") {
      c.language = std::string(value);
    } else if (key == "mode") {
      auto m = ParseMode(value);
      if (!m) throw ConfigError("mode must be nfc, visual or reading");
      c.mode = *m;
    } else if (key == "beta") {
      c.beta = ParseNumber<double>(key, value);
    } else if (key == "discount_fallback") {
      c.discount_fallback = ParseBool(key, value);
    } else {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
  }
  if (!orders_set) c.orders = ExperimentConfig::DefaultOrders(c.unit);
  c.Validate();
  return c;
}

// SplitMix64 finalizer.
inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of fold `fold`'s mt19937_64 stream.
inline std::uint64_t FoldSeed(std::uint64_t seed, std::uint64_t fold) {
  return SplitMix64(SplitMix64(seed) ^ fold);
}

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementation.
inline std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void FisherYates(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformBelow(rng, i)]);
  }
}

struct Fold {
  std::vector<std::size_t> train;  // ascending positions
  std::vector<std::size_t> test;   // ascending positions
};

// Test size for n lines: ceil((1 - split) n), at least 1.
inline std::size_t TestSize(std::size_t n, double split) {
  const double raw = (1.0 - split) * static_cast<double>(n);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

// Positions in `changed` (0-based, into a corpus of n lines) always train.
// Test lines are drawn from a seeded shuffle of the remaining lines.
inline std::vector<Fold> MakeFolds(std::size_t n, const std::vector<std::size_t>& changed,
                                   int k, double split, std::uint64_t seed) {
  std::vector<char> in_d(n, 0);
  for (std::size_t i : changed) {
    if (i >= n) throw PreconditionError("changed-line position out of range");
    in_d[i] = 1;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_d[i]) eligible.push_back(i);
  const std::size_t test_size = TestSize(n, split);
  if (eligible.size() < test_size || n < 2) {
    throw InfeasibleSplitError("need " + std::to_string(test_size) +
                               " unchanged lines for the test side, have " +
                               std::to_string(eligible.size()));
  }
  std::vector<Fold> folds(k);
  for (int f = 0; f < k; ++f) {
    std::mt19937_64 rng(FoldSeed(seed, static_cast<std::uint64_t>(f)));
    std::vector<std::size_t> order = eligible;
    FisherYates(order, rng);
    Fold& fold = folds[f];
    fold.test.assign(order.begin(), order.begin() + test_size);
    std::sort(fold.test.begin(), fold.test.end());
    std::vector<char> is_test(n, 0);
    for (std::size_t i : fold.test) is_test[i] = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_test[i]) fold.train.push_back(i);
  }
  return folds;
}

struct FoldOutcome {
  int fold = 0;
  int order = 0;
  double h_baseline = 0;
  double h_test = 0;
  std::size_t train_lines = 0;
  std::size_t test_lines = 0;
  std::size_t train_tokens_baseline = 0;
  std::size_t train_tokens_test = 0;
  std::size_t test_tokens = 0;
};

struct OrderSummary {
  int order = 0;
  double delta_mu = 0;
  double pct = 0;
  std::optional<TestResult> welch;
  std::optional<TestResult> mann_whitney;
  std::optional<TestResult> brunner_munzel;
};

struct ExperimentResult {
  std::vector<FoldOutcome> folds;  // fold-major, then config order
  std::vector<OrderSummary> summaries;
  DiffStats diff;
  std::size_t lines = 0;
  std::size_t changed_lines = 0;
  std::size_t models_trained = 0;
};

// Summaries recomputed from fold outcomes; `a` is the normalized
// condition, `b` the baseline.
inline OrderSummary Summarize(int order, const std::vector<FoldOutcome>& outcomes) {
  std::vector<double> hb, ht;
  for (const auto& o : outcomes) {
    if (o.order != order) continue;
    hb.push_back(o.h_baseline);
    ht.push_back(o.h_test);
  }
  OrderSummary s;
  s.order = order;
  s.delta_mu = DeltaMu(hb, ht);
  s.pct = 100.0 * s.delta_mu / stats_detail::Mean(hb);
  try {
    s.welch = WelchTest(ht, hb);
  } catch (const PreconditionError&) {
  }
  try {
    s.mann_whitney = MannWhitneyTest(ht, hb);
  } catch (const PreconditionError&) {
  }
  try {
    s.brunner_munzel = BrunnerMunzelTest(ht, hb);
  } catch (const PreconditionError&) {
  }
  return s;
}

// Runs the full design on `lines` (already script-filtered). Lines that are
// empty or all whitespace are dropped first. `jobs` bounds the worker
// threads; results do not depend on it.
inline ExperimentResult RunExperiment(const std::vector<CorpusLine>& input, const Grammar& grammar,
                                      const ExperimentConfig& config, unsigned jobs = 1) {
  config.Validate();
  if (!config.seed) throw ConfigError("experiment needs a seed");
  std::vector<CorpusLine> lines;
  for (const auto& l : input) {
    if (!TokenViews(l.text).empty()) lines.push_back(l);
  }
  if (lines.empty()) throw PreconditionError("experiment corpus is empty");

  ExperimentResult result;
  const CorpusDiff diff = DiffCorpus(lines, grammar, config.mode, jobs);
  result.diff = diff.stats;
  result.lines = lines.size();
  std::vector<std::size_t> changed;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (diff.normalized[i] != lines[i].text) changed.push_back(i);
  }
  result.changed_lines = changed.size();
  const auto folds = MakeFolds(lines.size(), changed, config.k, config.split, *config.seed);

  std::vector<std::vector<Text>> base_tokens(lines.size()), norm_tokens(lines.size());
  detail::ParallelFor(lines.size(), jobs, [&](std::size_t i) {
    base_tokens[i] = ToTokens(lines[i].text, config.unit);
    norm_tokens[i] = ToTokens(diff.normalized[i], config.unit);
  });

  const std::size_t n_orders = config.orders.size();
  result.folds.resize(folds.size() * n_orders);
  // One job per (fold, order, condition).
  std::vector<double> entropy(folds.size() * n_orders * 2);
  detail::ParallelFor(entropy.size(), jobs, [&](std::size_t job) {
    const std::size_t f = job / (2 * n_orders);
    const std::size_t oi = job / 2 % n_orders;
    const bool normalized = job % 2 == 1;
    const Fold& fold = folds[f];
    const auto& source = normalized ? norm_tokens : base_tokens;
    std::vector<const std::vector<Text>*> train, test;
    for (std::size_t i : fold.train)
      if (!source[i].empty()) train.push_back(&source[i]);
    for (std::size_t i : fold.test) {
      if (diff.normalized[i] != lines[i].text) {
        throw InvariantError("test line " + std::to_string(lines[i].index) +
                             " differs between conditions");
      }
      test.push_back(&source[i]);
    }
    const int order = config.orders[oi];
    try {
      const NGramModel model =
          Train(train, config.unit, order, {.discount_fallback = config.discount_fallback});
      entropy[job] = CrossEntropy(model, test);
    } catch (const DegenerateCountsError& e) {
      throw DegenerateCountsError(
          e.order(), e.statistic() + " (fold " + std::to_string(f) + ", " +
                         std::string(UnitName(config.unit)) + " order " +
                         std::to_string(order) + ", " + (normalized ? "T" : "B") +
                         " condition)");
    }
  });
  result.models_trained = entropy.size();

  auto count_tokens = [](const std::vector<std::vector<Text>>& src,
                         const std::vector<std::size_t>& idx) {
    std::size_t n = 0;
    for (std::size_t i : idx) n += src[i].size();
    return n;
  };
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t train_b = count_tokens(base_tokens, folds[f].train);
    const std::size_t train_t = count_tokens(norm_tokens, folds[f].train);
    const std::size_t test_n = count_tokens(base_tokens, folds[f].test);
    for (std::size_t oi = 0; oi < n_orders; ++oi) {
      FoldOutcome& o = result.folds[f * n_orders + oi];
      o.fold = static_cast<int>(f);
      o.order = config.orders[oi];
      o.h_baseline = entropy[(f * n_orders + oi) * 2];
      o.h_test = entropy[(f * n_orders + oi) * 2 + 1];
      o.train_lines = folds[f].train.size();
      o.test_lines = folds[f].test.size();
      o.train_tokens_baseline = train_b;
      o.train_tokens_test = train_t;
      o.test_tokens = test_n;
      if (o.train_lines + o.test_lines != lines.size()) {
        throw InvariantError("fold line counts do not cover the corpus");
      }
    }
  }
  for (int order : config.orders) result.summaries.push_back(Summarize(order, result.folds));
  return result;
}

namespace experiment_detail {

inline std::string Num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace experiment_detail

// One row per order: order Δmu pct ws_t ws_p ws_ci_lo ws_ci_hi mw_u mw_p bm_t bm_p.
inline void WriteResultsTsv(std::ostream& out, const ExperimentResult& r) {
  using experiment_detail::Num;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "order\tΔmu\tpct\tws_t\tws_p\tws_ci_lo\tws_ci_hi\tmw_u\tmw_p\tbm_t\tbm_p\n";
  for (const auto& s : r.summaries) {
    out << s.order << '\t' << Num(s.delta_mu) << '\t' << Num(s.pct) << '\t';
    if (s.welch) {
      out << Num(s.welch->statistic) << '\t' << Num(s.welch->p_value) << '\t'
          << Num(*s.welch->ci_low) << '\t' << Num(*s.welch->ci_high);
    } else {
      out << Num(nan) << '\t' << Num(nan) << '\t' << Num(nan) << '\t' << Num(nan);
    }
    out << '\t';
    if (s.mann_whitney) {
      out << Num(s.mann_whitney->statistic) << '\t' << Num(s.mann_whitney->p_value);
    } else {
      out << Num(nan) << '\t' << Num(nan);
    }
    out << '\t';
    if (s.brunner_munzel) {
      out << Num(s.brunner_munzel->statistic) << '\t' << Num(s.brunner_munzel->p_value);
    } else {
      out << Num(nan) << '\t' << Num(nan);
    }
    out << '\n';
  }
}

inline void WriteFoldsTsv(std::ostream& out, const ExperimentResult& r) {
  using experiment_detail::Num;
  out << "fold\torder\th_baseline\th_test\ttrain_lines\ttest_lines\t"
         "train_tokens_baseline\ttrain_tokens_test\ttest_tokens\n";
  for (const auto& o : r.folds) {
    out << o.fold << '\t' << o.order << '\t' << Num(o.h_baseline) << '\t' << Num(o.h_test)
        << '\t' << o.train_lines << '\t' << o.test_lines << '\t' << o.train_tokens_baseline
        << '\t' << o.train_tokens_test << '\t' << o.test_tokens << '\n';
  }
}

}  // namespace pernorm

#endif  // PERNORM_EXPERIMENT_HPP_
