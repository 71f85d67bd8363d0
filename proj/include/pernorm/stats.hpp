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

// Paired fold aggregate and the three two-sample tests: Welch-Satterthwaite
// t, Mann-Whitney U and Brunner-Munzel. Statistics are signed so that a
// positive value means sample `a` tends to be larger.

#ifndef PERNORM_STATS_HPP_
#define PERNORM_STATS_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "pernorm/error.hpp"

namespace pernorm {

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  std::optional<double> df;
  std::optional<double> ci_low;
  std::optional<double> ci_high;

  bool infinite_statistic() const { return std::isinf(statistic); }
};

namespace stats_detail {

inline void RequireFinite(std::span<const double> xs, const char* name) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw PreconditionError(std::string(name) + " has a non-finite value");
  }
}

inline double Mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Unbiased sample variance.
inline double Variance(std::span<const double> xs) {
  const double m = Mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

// 1-based ranks with ties sharing their average rank.
inline std::vector<double> AverageRanks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double StudentTwoSidedP(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0,
                    1.0);
}

}  // namespace stats_detail

// (1/k) * sum_i (test_i - baseline_i).
inline double DeltaMu(std::span<const double> baseline, std::span<const double> test) {
  if (baseline.size() != test.size()) {
    throw PreconditionError("delta_mu needs paired samples of equal length");
  }
  if (baseline.empty()) throw PreconditionError("delta_mu needs at least one pair");
  double sum = 0;
  for (std::size_t i = 0; i < baseline.size(); ++i) sum += test[i] - baseline[i];
  return sum / static_cast<double>(baseline.size());
}

// Welch's t with Satterthwaite degrees of freedom and a 95% interval for
// mean(a) - mean(b).
inline TestResult WelchTest(std::span<const double> a, std::span<const double> b) {
  using namespace stats_detail;
  if (a.size() < 2 || b.size() < 2) throw PreconditionError("welch_test needs n >= 2 per sample");
  RequireFinite(a, "a");
  RequireFinite(b, "b");
  const double na = a.size(), nb = b.size();
  const double va = Variance(a) / na, vb = Variance(b) / nb;
  if (va + vb == 0) throw PreconditionError("welch_test: both samples have zero variance");
  const double diff = Mean(a) - Mean(b);
  const double se = std::sqrt(va + vb);
  TestResult r;
  r.statistic = diff / se;
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  r.df = df;
  r.p_value = StudentTwoSidedP(r.statistic, df);
  const double q = boost::math::quantile(boost::math::students_t(df), 0.975);
  r.ci_low = diff - q * se;
  r.ci_high = diff + q * se;
  return r;
}

// Combined sizes up to this use the exact permutation distribution.
inline constexpr std::size_t kMannWhitneyExactLimit = 12;

// Reports U for sample a: R_a - n_a (n_a + 1) / 2, with average ranks.
inline TestResult MannWhitneyTest(std::span<const double> a, std::span<const double> b) {
  using namespace stats_detail;
  if (a.empty() || b.empty()) throw PreconditionError("mann_whitney_test needs non-empty samples");
  RequireFinite(a, "a");
  RequireFinite(b, "b");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = AverageRanks(pooled);
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  auto u_of = [&](double rank_sum) {
    return rank_sum - static_cast<double>(na) * (na + 1) / 2.0;
  };
  const double u = u_of(std::accumulate(ranks.begin(), ranks.begin() + na, 0.0));
  const double mean = static_cast<double>(na) * nb / 2.0;
  TestResult r;
  r.statistic = u;
  const double observed = std::fabs(u - mean);
  if (n <= kMannWhitneyExactLimit) {
    // Every way of choosing which na pooled ranks belong to a.
    std::uint64_t extreme = 0, total = 0;
    const double tol = 1e-9;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != na) continue;
      double s = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) s += ranks[i];
      ++total;
      if (std::fabs(u_of(s) - mean) >= observed - tol) ++extreme;
    }
    r.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return r;
  }
  // Normal approximation with tie and continuity corrections.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double dn = static_cast<double>(n);
  const double var = static_cast<double>(na) * nb / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
  if (var <= 0) {
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, observed - 0.5) / std::sqrt(var);
  r.p_value = std::clamp(
      2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), z)), 0.0, 1.0);
  return r;
}

// Brunner-Munzel with the Student-t small-sample approximation. Fully
// separated samples give statistic +/-inf and p = 0; samples with no rank
// variation at all (every value tied) are rejected.
inline TestResult BrunnerMunzelTest(std::span<const double> a, std::span<const double> b) {
  using namespace stats_detail;
  if (a.size() < 2 || b.size() < 2) {
    throw PreconditionError("brunner_munzel_test needs n >= 2 per sample");
  }
  RequireFinite(a, "a");
  RequireFinite(b, "b");
  const std::size_t na = a.size(), nb = b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> rc = AverageRanks(pooled);
  const std::vector<double> ra = AverageRanks(a);
  const std::vector<double> rb = AverageRanks(b);
  const std::span<const double> rca(rc.data(), na), rcb(rc.data() + na, nb);
  const double mca = Mean(rca), mcb = Mean(rcb);
  const double ma = Mean(ra), mb = Mean(rb);
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < na; ++i) {
    const double d = rca[i] - ra[i] - mca + ma;
    sa += d * d;
  }
  for (std::size_t j = 0; j < nb; ++j) {
    const double d = rcb[j] - rb[j] - mcb + mb;
    sb += d * d;
  }
  sa /= static_cast<double>(na - 1);
  sb /= static_cast<double>(nb - 1);
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb);
  const double spread = dna * sa + dnb * sb;
  TestResult r;
  if (spread == 0) {
    if (mca == mcb) throw PreconditionError("brunner_munzel_test: all values are tied");
    r.statistic = mca > mcb ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.statistic = dna * dnb * (mca - mcb) / ((dna + dnb) * std::sqrt(spread));
  const double df = spread * spread /
                    ((dna * sa) * (dna * sa) / (dna - 1) + (dnb * sb) * (dnb * sb) / (dnb - 1));
  r.df = df;
  r.p_value = StudentTwoSidedP(r.statistic, df);
  return r;
}

}  // namespace pernorm

#endif  // PERNORM_STATS_HPP_
