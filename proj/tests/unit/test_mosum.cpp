#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "locprune/mosum.hpp"
#include "locprune/signal_model.hpp"

using namespace locprune;
using locprune::testing::random_series;
using locprune::testing::random_step_series;

namespace {

TimeSeries step_series(std::int64_t n, std::int64_t at, double height) {
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t t = at; t < n; ++t) v[static_cast<std::size_t>(t)] = height;
  return TimeSeries(std::move(v));
}

double window_mean(const TimeSeries& x, std::int64_t from, std::int64_t to) {
  double s = 0.0;
  for (auto t = from; t <= to; ++t) s += x[static_cast<std::size_t>(t - 1)];
  return s / static_cast<double>(to - from + 1);
}

}  // namespace

TEST(MosumStatistic, ConstantSeriesIsZero) {
  TimeSeries x(std::vector<double>(40, 3.7));
  for (std::int64_t b = 5; b <= 30; ++b) EXPECT_EQ(mosum_statistic(x, b, {5, 10}, 1.0), 0.0);
}

TEST(MosumStatistic, UnitStep) {
  auto x = step_series(16, 8, 1.0);
  EXPECT_NEAR(mosum_statistic(x, 8, {8, 8}, 1.0), -2.0, 1e-12);
}

TEST(MosumStatistic, MatchesWindowMeans) {
  Rng rng(1);
  auto x = random_series(rng, 50);
  const double expected = std::sqrt(10.0 * 15.0 / 25.0) * (window_mean(x, 11, 20) - window_mean(x, 21, 35)) / 1.5;
  EXPECT_NEAR(mosum_statistic(x, 20, {10, 15}, 1.5), expected, 1e-12);
}

TEST(MosumStatistic, SymmetricFormReduces) {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    auto x = random_series(rng, 120, 3.0);
    const auto g = rng.uniform_int(1, 40);
    const auto b = rng.uniform_int(g, 120 - g);
    const double sym = std::sqrt(static_cast<double>(g) / 2.0) * (window_mean(x, b - g + 1, b) - window_mean(x, b + 1, b + g));
    ASSERT_NEAR(mosum_statistic(x, b, {g, g}, 1.0), sym, 1e-12);
  }
}

TEST(MosumStatistic, RejectsBadSplit) {
  TimeSeries x(std::vector<double>(20, 0.0));
  EXPECT_THROW(mosum_statistic(x, 4, {5, 5}, 1.0), InvalidArgument);
  EXPECT_THROW(mosum_statistic(x, 16, {5, 5}, 1.0), InvalidArgument);
  EXPECT_THROW(mosum_statistic(x, 10, {5, 5}, 0.0), InvalidArgument);
}

TEST(CriticalValue, ReferenceValue) {
  EXPECT_NEAR(critical_value(1000, {100, 100}, 0.1), 3.63, 5e-3);
}

TEST(CriticalValue, DecreasingInAlpha) {
  EXPECT_GT(critical_value(1000, {50, 50}, 0.05), critical_value(1000, {50, 50}, 0.2));
  double prev = critical_value(1000, {100, 100}, 0.5);
  for (double a : {0.9, 0.99, 0.9999, 1 - 1e-9}) {
    const double v = critical_value(1000, {100, 100}, a);
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double log_x = std::log(10.0);
  const double b_over_a = (2.0 * log_x + 0.5 * std::log(log_x) + std::log(1.5) - 0.5 * std::log(M_PI)) /
                          std::sqrt(2.0 * log_x);
  EXPECT_LT(prev, b_over_a);
}

TEST(CriticalValue, AsymmetricUsesSmallerBandwidth) {
  EXPECT_EQ(critical_value(1000, {20, 60}, 0.1), critical_value(1000, {20, 20}, 0.1));
  EXPECT_THROW(critical_value(1000, {1, 5}, 0.1), InvalidArgument);
  EXPECT_THROW(critical_value(100, {100, 100}, 0.1), InvalidArgument);
  EXPECT_THROW(critical_value(1000, {10, 10}, 1.0), InvalidArgument);
}

TEST(PValue, ConsistentWithCriticalValue) {
  const double d = critical_value(2000, {30, 30}, 0.2);
  EXPECT_NEAR(mosum_p_value(2000, {30, 30}, d), 0.2, 1e-12);
  EXPECT_LT(mosum_p_value(2000, {30, 30}, d + 1.0), 0.2);
  EXPECT_GT(mosum_p_value(2000, {30, 30}, d - 1.0), 0.2);
}

TEST(BandwidthGrid, FibonacciScales) {
  auto g = bandwidth_grid(2000, 10, 4.0);
  EXPECT_EQ(g.scales, (std::vector<std::int64_t>{10, 20, 30, 50, 80, 130, 210}));
}

TEST(BandwidthGrid, AsymmetryFilter) {
  auto g = bandwidth_grid(2000, 10, 4.0);
  auto has = [&](std::int64_t a, std::int64_t b) {
    return std::find(g.pairs.begin(), g.pairs.end(), BandwidthPair{a, b}) != g.pairs.end();
  };
  EXPECT_TRUE(has(10, 30));
  EXPECT_TRUE(has(30, 10));
  EXPECT_FALSE(has(10, 50));
  EXPECT_TRUE(has(10, 10));
  for (const auto& p : g.pairs) EXPECT_LE(std::max(p.g_left, p.g_right), 4 * std::min(p.g_left, p.g_right));
}

TEST(BandwidthGrid, EmptyGridRejected) {
  EXPECT_THROW(bandwidth_grid(2000, 300, 4.0), InvalidArgument);
  EXPECT_THROW(bandwidth_grid(2000, 1, 4.0), InvalidArgument);
  EXPECT_THROW(bandwidth_grid(2000, 10, 0.5), InvalidArgument);
}

TEST(MosumVariance, WindowArithmetic) {
  TimeSeries x(std::vector<double>{0, 0, 2, 2, 1, 1, 3, 3});
  auto v = mosum_variance(x, 4, {4, 4}, WindowVariance::Unbiased);
  EXPECT_NEAR(v.value, 4.0 / 3.0, 1e-12);
  EXPECT_FALSE(v.floored);
  EXPECT_NEAR(mosum_variance(x, 4, {4, 4}, WindowVariance::Pooled).value, 1.0, 1e-12);
}

TEST(MosumVariance, PooledWeightsByWindowLength) {
  TimeSeries x(std::vector<double>{0, 2, 0, 2, 5, 5});
  // SS_left = 4 over 4 points, SS_right = 0 over 2.
  EXPECT_NEAR(mosum_variance(x, 4, {4, 2}).value, 4.0 / 6.0, 1e-12);
}

TEST(MosumVariance, ConstantFloored) {
  TimeSeries x(std::vector<double>(20, 1.0));
  auto v = mosum_variance(x, 10, {5, 5});
  EXPECT_TRUE(v.floored);
  EXPECT_EQ(v.value, kVarianceFloor);
}

TEST(MosumVariance, NearOneOnNoise) {
  auto x = generate_errors(ErrorSpec::gaussian(17), 100000);
  for (auto w : {WindowVariance::Pooled, WindowVariance::Unbiased}) {
    double s = 0.0;
    std::int64_t count = 0;
    for (std::int64_t b = 50; b <= x.n() - 50; b += 7) {
      s += mosum_variance(x, b, {50, 50}, w).value;
      ++count;
    }
    const double mean = s / static_cast<double>(count);
    EXPECT_GE(mean, 0.95);
    EXPECT_LE(mean, 1.05);
    EXPECT_NEAR(global_mosum_variance(x, {50, 50}, w), 1.0, 0.05);
  }
}

TEST(MosumVariance, ParseNames) {
  EXPECT_EQ(parse_window_variance("pooled"), WindowVariance::Pooled);
  EXPECT_EQ(parse_window_variance("unbiased"), WindowVariance::Unbiased);
  EXPECT_THROW(parse_window_variance("x"), InvalidArgument);
}

TEST(EstimateRho, AlternatingClamped) {
  std::vector<double> r;
  for (int i = 0; i < 100; ++i) r.push_back(i % 2 == 0 ? 1.0 : -1.0);
  EXPECT_NEAR(estimate_rho(r), -0.99, 1e-12);
}

TEST(EstimateRho, MonteCarlo) {
  auto iid = generate_errors(ErrorSpec::gaussian(3), 100000);
  EXPECT_LE(std::abs(estimate_rho(iid.values())), 0.02);
  auto ar = generate_errors(ErrorSpec::ar1(0.9, 4), 100000);
  EXPECT_NEAR(estimate_rho(ar.values()), 0.9, 0.02);
}

TEST(EstimateRho, Errors) {
  EXPECT_THROW(estimate_rho(std::vector<double>{1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(estimate_rho(std::vector<double>(10, 2.0)), InvalidArgument);
}

TEST(EtaCandidates, ConstantSeriesEmpty) {
  TimeSeries x(std::vector<double>(300, 2.0));
  EXPECT_TRUE(eta_candidates(x, {30, 30}, 0.2, 0.4, VarianceSpec::local()).empty());
  EXPECT_TRUE(eta_candidates(x, {30, 30}, 0.2, 0.4, VarianceSpec::global(1.0)).empty());
}

TEST(EtaCandidates, CleanStep) {
  auto x = step_series(300, 100, 5.0);
  auto c = eta_candidates(x, {30, 30}, 0.2, 0.4, VarianceSpec::global(1.0));
  ASSERT_EQ(c.size(), 1u);
  const auto& cand = c.candidates[0];
  EXPECT_EQ(cand.location, 100);
  EXPECT_EQ(cand.g_left, 30);
  EXPECT_EQ(cand.g_right, 30);
  EXPECT_NEAR(cand.jump, 5.0, 1e-12);
  EXPECT_NEAR(cand.stat, -std::sqrt(15.0) * 5.0, 1e-9);
  ASSERT_TRUE(cand.p_value.has_value());
  EXPECT_LT(*cand.p_value, 1e-6);
  EXPECT_EQ(cand.source, CandidateSource::Mosum);
}

TEST(EtaCandidates, Ar1InflationScalesStatistic) {
  Rng rng(8);
  auto x = random_step_series(rng, 600, 3, 4.0);
  auto plain = eta_candidates(x, {40, 40}, 0.2, 0.4, VarianceSpec::local());
  auto corrected = eta_candidates(x, {40, 40}, 0.2, 0.4, VarianceSpec::ar1_corrected(0.5));
  EXPECT_NEAR(VarianceSpec::ar1_corrected(0.5).inflation(), 3.0, 1e-12);
  std::size_t matched = 0;
  for (const auto& c : corrected.candidates) {
    for (const auto& p : plain.candidates) {
      if (p.location == c.location) {
        EXPECT_NEAR(p.stat / c.stat, std::sqrt(3.0), 1e-9);
        ++matched;
      }
    }
  }
  EXPECT_EQ(matched, corrected.size());
  EXPECT_LE(corrected.size(), plain.size());
}

TEST(EtaCandidates, ExceedsThresholdAndSeparated) {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    auto x = random_step_series(rng, 800, 6, 2.0);
    const BandwidthPair bw{rng.uniform_int(10, 40), rng.uniform_int(10, 40)};
    const double eta = 0.4;
    auto c = eta_candidates(x, bw, 0.3, eta, VarianceSpec::local());
    const double d = critical_value(x.n(), bw, 0.3);
    const auto sep = static_cast<std::int64_t>(std::floor(eta * static_cast<double>(bw.effective())));
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& cand = c.candidates[i];
      const BandwidthPair w{cand.g_left, cand.g_right};
      const double tau = std::sqrt(mosum_variance(x, cand.location, w).value);
      EXPECT_GT(std::abs(mosum_statistic(x, cand.location, w, tau)), d);
      EXPECT_NEAR(std::abs(cand.stat), std::abs(mosum_statistic(x, cand.location, w, tau)), 1e-8);
      if (i > 0) EXPECT_GT(cand.location - c.candidates[i - 1].location, sep);
    }
  }
}

// Direct evaluation of the eta-criterion from the public statistic.
std::vector<std::int64_t> brute_eta(const TimeSeries& x, BandwidthPair bw, double alpha, double eta) {
  const std::int64_t n = x.n();
  const std::int64_t lo = std::min<std::int64_t>(bw.g_left, 2);
  const std::int64_t hi = std::max<std::int64_t>(n - bw.g_right, n - 2);
  std::vector<double> z;
  for (std::int64_t b = lo; b <= hi; ++b) {
    const BandwidthPair w{std::min(bw.g_left, b), std::min(bw.g_right, n - b)};
    z.push_back(std::abs(mosum_statistic(x, b, w, std::sqrt(mosum_variance(x, b, w).value))));
  }
  const double d = critical_value(n, bw, alpha);
  const auto rl = static_cast<std::int64_t>(std::floor(eta * static_cast<double>(bw.g_left)));
  const auto rr = static_cast<std::int64_t>(std::floor(eta * static_cast<double>(bw.g_right)));
  std::vector<std::int64_t> out;
  for (std::int64_t b = lo; b <= hi; ++b) {
    const double v = z[static_cast<std::size_t>(b - lo)];
    bool ok = v > d;
    for (std::int64_t j = std::max(lo, b - rl); j < b && ok; ++j) ok = z[static_cast<std::size_t>(j - lo)] < v;
    for (std::int64_t j = b + 1; j <= std::min(hi, b + rr) && ok; ++j) ok = z[static_cast<std::size_t>(j - lo)] <= v;
    if (ok) out.push_back(b);
  }
  return out;
}

TEST(EtaCandidates, MatchesDirectDefinition) {
  Rng rng(404);
  for (int rep = 0; rep < 40; ++rep) {
    auto x = random_step_series(rng, rng.uniform_int(60, 400), 5, 1.5);
    const BandwidthPair bw{rng.uniform_int(3, 25), rng.uniform_int(3, 25)};
    auto c = eta_candidates(x, bw, 0.3, 0.4, VarianceSpec::local());
    EXPECT_EQ(c.locations(), brute_eta(x, bw, 0.3, 0.4)) << "rep " << rep;
  }
}

TEST(EtaCandidates, ClippedWindowsReachTheEnds) {
  std::vector<double> v(200, 0.0);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = (t % 2 == 0 ? 0.05 : -0.05) + (t >= 194 ? 3.0 : 0.0);
  TimeSeries x(v);
  auto c = eta_candidates(x, {20, 20}, 0.2, 0.4, VarianceSpec::local());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.candidates[0].location, 194);
  EXPECT_EQ(c.candidates[0].g_left, 20);
  EXPECT_EQ(c.candidates[0].g_right, 6);
}

TEST(MergeCandidates, KeepsSmallestPValue) {
  Candidate a{100, 30, 30, 5.0, 1.0, 1e-6, CandidateSource::Mosum};
  Candidate b{100, 80, 80, 7.0, 1.0, 1e-9, CandidateSource::Mosum};
  Candidate c{50, 20, 20, 4.0, 1.0, 1e-3, CandidateSource::Mosum};
  auto set = merge_candidates(300, {a, b, c});
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.candidates[0].location, 50);
  EXPECT_EQ(set.candidates[1].location - set.candidates[1].g_left, 20);
  EXPECT_EQ(set.candidates[1].location + set.candidates[1].g_right, 180);
  auto reversed = merge_candidates(300, {c, b, a});
  EXPECT_EQ(reversed.candidates[1].g_left, 80);
}

TEST(MultiscaleCandidates, NoDetectionOnConstant) {
  TimeSeries x(std::vector<double>(2000, 1.0));
  auto grid = bandwidth_grid(2000, 10, 4.0);
  EXPECT_TRUE(multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::global(1.0)).empty());
}

TEST(MultiscaleCandidates, CountBound) {
  Rng rng(4);
  auto x = random_step_series(rng, 2000, 10, 1.5);
  auto grid = bandwidth_grid(2000, 10, 4.0);
  auto c = multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::local());
  double bound = 0.0;
  for (const auto& p : grid.pairs) bound += 2000.0 / (0.4 * static_cast<double>(p.effective()));
  EXPECT_LE(static_cast<double>(c.size()), bound);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c.candidates[i - 1].location, c.candidates[i].location);
}

TEST(MultiscaleCandidates, PairOrderAndThreadsInvariant) {
  Rng rng(6);
  auto x = random_step_series(rng, 1500, 8, 2.0);
  auto grid = bandwidth_grid(1500, 10, 4.0);
  auto base = multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::local());
  auto shuffled = grid;
  std::reverse(shuffled.pairs.begin(), shuffled.pairs.end());
  std::swap(shuffled.pairs[0], shuffled.pairs[shuffled.pairs.size() / 2]);
  for (unsigned threads : {1u, 3u}) {
    auto other = multiscale_candidates(x, shuffled, 0.2, 0.4, VarianceSpec::local(), threads);
    ASSERT_EQ(base.size(), other.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(base.candidates[i].location, other.candidates[i].location);
      EXPECT_EQ(base.candidates[i].g_left, other.candidates[i].g_left);
      EXPECT_EQ(base.candidates[i].g_right, other.candidates[i].g_right);
      EXPECT_EQ(base.candidates[i].stat, other.candidates[i].stat);
    }
  }
}

TEST(MultiscaleCandidates, AffineInvariance) {
  Rng rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    auto x = random_step_series(rng, 1000, 5, 2.5);
    auto grid = bandwidth_grid(1000, 10, 4.0);
    auto base = multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::global(1.0));
    const double a = -2.5;
    const double b = 7.0;
    std::vector<double> y(x.values().begin(), x.values().end());
    for (auto& v : y) v = a * v + b;
    auto other = multiscale_candidates(TimeSeries(y), grid, 0.2, 0.4, VarianceSpec::global(a * a));
    EXPECT_EQ(base.locations(), other.locations());
  }
}

TEST(Ar1Corrected, EstimatesRhoAndReruns) {
  auto e = generate_errors(ErrorSpec::ar1(0.5, 99), 4000);
  std::vector<double> y(e.values().begin(), e.values().end());
  for (std::size_t t = 2000; t < y.size(); ++t) y[t] += 3.0;
  TimeSeries x(y);
  auto grid = bandwidth_grid(4000, 20, 4.0);
  auto run = ar1_corrected_candidates(x, grid, 0.2, 0.4);
  EXPECT_GT(run.rho, 0.3);
  EXPECT_LT(run.rho, 0.7);
  auto plain = multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::local());
  EXPECT_LE(run.candidates.size(), plain.size());
  bool near_true = false;
  for (auto loc : run.candidates.locations()) near_true |= std::abs(loc - 2000) <= 20;
  EXPECT_TRUE(near_true);
}
