#include "locprune/mosum.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <thread>

#include "locprune/prefix_sums.hpp"

namespace locprune {
namespace {

void check_split(std::int64_t n, std::int64_t b, BandwidthPair bw) {
  if (bw.g_left < 1 || bw.g_right < 1) throw InvalidArgument("bandwidths must be positive");
  if (b < bw.g_left || b > n - bw.g_right) {
    throw InvalidArgument("split point b = " + std::to_string(b) + " outside [g_left, n - g_right]");
  }
}

struct GumbelScale {
  double a;
  double b;
};

GumbelScale gumbel_scale(std::int64_t n, BandwidthPair bw) {
  const std::int64_t g = bw.effective();
  if (g < 2) throw InvalidArgument("effective bandwidth must be at least 2");
  const double x = static_cast<double>(n) / static_cast<double>(g);
  if (!(x > 1.0)) throw InvalidArgument("n / G must exceed 1 for the asymptotic critical value");
  const double log_x = std::log(x);
  const double a = std::sqrt(2.0 * log_x);
  const double b = 2.0 * log_x + 0.5 * std::log(log_x) + std::log(1.5) - 0.5 * std::log(std::numbers::pi);
  return {a, b};
}

// Unbiased sample variance of x over (s, e]; zero for a single observation.
double window_variance(const PrefixSums& ps, std::int64_t s, std::int64_t e) {
  const std::int64_t len = e - s;
  if (len < 2) return 0.0;
  return ps.rss(s, e) / static_cast<double>(len - 1);
}

VarianceEstimate local_variance(const PrefixSums& ps, std::int64_t b, BandwidthPair bw, WindowVariance window) {
  const double v =
      window == WindowVariance::Pooled
          ? (ps.rss(b - bw.g_left, b) + ps.rss(b, b + bw.g_right)) / static_cast<double>(bw.g_left + bw.g_right)
          : 0.5 * (window_variance(ps, b - bw.g_left, b) + window_variance(ps, b, b + bw.g_right));
  if (v > kVarianceFloor) return {v, false};
  return {kVarianceFloor, true};
}

double raw_mosum(const PrefixSums& ps, std::int64_t b, BandwidthPair bw) {
  const double gl = static_cast<double>(bw.g_left);
  const double gr = static_cast<double>(bw.g_right);
  const long double diff = ps.centred_mean(b - bw.g_left, b) - ps.centred_mean(b, b + bw.g_right);
  return std::sqrt(gl * gr / (gl + gr)) * static_cast<double>(diff);
}

// Maximum of v over the `reach` entries before i (left) or after i (right),
// excluding i itself; -inf when the window is empty.
std::vector<double> window_max(const std::vector<double>& v, std::size_t reach, bool left) {
  const std::size_t n = v.size();
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  if (reach == 0) return out;
  std::deque<std::size_t> dq;  // indices into the scan order, values decreasing
  auto at = [&](std::size_t k) { return left ? k : n - 1 - k; };
  for (std::size_t k = 0; k < n; ++k) {
    while (!dq.empty() && dq.front() + reach < k) dq.pop_front();
    if (!dq.empty()) out[at(k)] = v[at(dq.front())];
    while (!dq.empty() && v[at(dq.back())] <= v[at(k)]) dq.pop_back();
    dq.push_back(k);
  }
  return out;
}

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

double global_variance_impl(const PrefixSums& ps, BandwidthPair bw, WindowVariance window) {
  const std::int64_t n = ps.n();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n - bw.g_left - bw.g_right + 1));
  for (std::int64_t b = bw.g_left; b <= n - bw.g_right; ++b) v.push_back(local_variance(ps, b, bw, window).value);
  if (v.empty()) throw InvalidArgument("bandwidth pair too large for the series");
  return std::max(median_of(std::move(v)), kVarianceFloor);
}

CandidateSet eta_scan(const TimeSeries& x, const PrefixSums& ps, BandwidthPair bw, double alpha, double eta,
                      const VarianceSpec& variance, std::optional<double> tau2) {
  const std::int64_t n = x.n();
  if (bw.g_left + bw.g_right > n) throw InvalidArgument("bandwidth pair exceeds series length");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  const double threshold = critical_value(n, bw, alpha);
  const GumbelScale gs = gumbel_scale(n, bw);
  const double inflation = variance.inflation();

  const std::int64_t lo = std::min<std::int64_t>(bw.g_left, 2);
  const std::int64_t hi = std::max<std::int64_t>(n - bw.g_right, n - 2);
  // Near the ends the windows are clipped to the sample.
  auto window = [&](std::int64_t b) {
    return BandwidthPair{std::min(bw.g_left, b), std::min(bw.g_right, n - b)};
  };
  std::vector<double> z(static_cast<std::size_t>(hi - lo + 1));
  std::size_t floored = 0;
  for (std::int64_t b = lo; b <= hi; ++b) {
    const auto w = window(b);
    double var = 0.0;
    if (tau2) {
      var = *tau2;
    } else {
      auto est = local_variance(ps, b, w, variance.window);
      floored += est.floored ? 1 : 0;
      var = est.value;
    }
    z[static_cast<std::size_t>(b - lo)] = raw_mosum(ps, b, w) / std::sqrt(var * inflation);
  }

  CandidateSet out;
  out.n = n;
  if (floored > 0) {
    out.warnings.push_back("variance floored at " + std::to_string(floored) + " split points for bandwidth (" +
                           std::to_string(bw.g_left) + "," + std::to_string(bw.g_right) + ")");
  }
  const auto reach_left = static_cast<std::int64_t>(std::floor(eta * static_cast<double>(bw.g_left)));
  const auto reach_right = static_cast<std::int64_t>(std::floor(eta * static_cast<double>(bw.g_right)));
  const std::size_t count = z.size();
  std::vector<double> absz(count);
  for (std::size_t i = 0; i < count; ++i) absz[i] = std::abs(z[i]);
  // Strict on the left, weak on the right: a plateau yields its first point only.
  const auto left_max = window_max(absz, static_cast<std::size_t>(reach_left), true);
  const auto right_max = window_max(absz, static_cast<std::size_t>(reach_right), false);
  for (std::int64_t b = lo; b <= hi; ++b) {
    const auto i = static_cast<std::size_t>(b - lo);
    const double v = absz[i];
    if (!(v > threshold)) continue;
    if (!(left_max[i] < v) || !(right_max[i] <= v)) continue;
    Candidate c;
    c.location = b;
    const auto w = window(b);
    c.g_left = w.g_left;
    c.g_right = w.g_right;
    c.stat = z[static_cast<std::size_t>(b - lo)];
    c.jump = std::abs(ps.mean(b - w.g_left, b) - ps.mean(b, b + w.g_right));
    c.p_value = -std::expm1(-2.0 * std::exp(-(gs.a * v - gs.b)));
    c.source = CandidateSource::Mosum;
    out.candidates.push_back(c);
  }
  return out;
}

// Preference order among detections of the same location.
bool preferred(const Candidate& a, const Candidate& b) {
  const double pa = a.p_value.value_or(1.0);
  const double pb = b.p_value.value_or(1.0);
  if (pa != pb) return pa < pb;
  if (std::abs(a.stat) != std::abs(b.stat)) return std::abs(a.stat) > std::abs(b.stat);
  if (a.g_left + a.g_right != b.g_left + b.g_right) return a.g_left + a.g_right < b.g_left + b.g_right;
  if (a.g_left != b.g_left) return a.g_left < b.g_left;
  return a.source == CandidateSource::Mosum && b.source != CandidateSource::Mosum;
}

}  // namespace

double VarianceSpec::inflation() const noexcept {
  return kind == Kind::Ar1Corrected ? (1.0 + rho) / (1.0 - rho) : 1.0;
}

BandwidthGrid bandwidth_grid(std::int64_t n, std::int64_t g0, double c_asym) {
  if (g0 < 2) throw InvalidArgument("G_0 must be at least 2");
  if (!(c_asym >= 1.0)) throw InvalidArgument("C_asym must be >= 1");
  if (n < 3) throw InvalidArgument("series too short for a bandwidth grid");
  const auto cutoff = static_cast<std::int64_t>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
  BandwidthGrid grid;
  grid.base = g0;
  grid.c_asym = c_asym;
  // G_1 = G_0, G_2 = 2 G_0, G_m = G_{m-1} + G_{m-2}.
  std::int64_t prev = g0;
  std::int64_t cur = g0;
  if (cur < cutoff) grid.scales.push_back(cur);
  for (;;) {
    const std::int64_t next = grid.scales.size() == 1 ? 2 * g0 : prev + cur;
    if (grid.scales.empty() || next >= cutoff) break;
    prev = cur;
    cur = next;
    grid.scales.push_back(cur);
  }
  if (grid.scales.empty()) {
    throw InvalidArgument("empty bandwidth grid: G_0 = " + std::to_string(g0) + " is not below floor(n/log n) = " +
                          std::to_string(cutoff));
  }
  for (auto gl : grid.scales) {
    for (auto gr : grid.scales) {
      const double ratio = static_cast<double>(std::max(gl, gr)) / static_cast<double>(std::min(gl, gr));
      if (ratio <= c_asym) grid.pairs.push_back({gl, gr});
    }
  }
  return grid;
}

double mosum_statistic(const TimeSeries& x, std::int64_t b, BandwidthPair bw, double tau) {
  check_split(x.n(), b, bw);
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const auto v = x.values();
  double left = 0.0;
  double right = 0.0;
  for (std::int64_t t = b - bw.g_left; t < b; ++t) left += v[static_cast<std::size_t>(t)];
  for (std::int64_t t = b; t < b + bw.g_right; ++t) right += v[static_cast<std::size_t>(t)];
  const double gl = static_cast<double>(bw.g_left);
  const double gr = static_cast<double>(bw.g_right);
  return std::sqrt(gl * gr / (gl + gr)) * (left / gl - right / gr) / tau;
}

double critical_value(std::int64_t n, BandwidthPair bw, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const GumbelScale gs = gumbel_scale(n, bw);
  const double c_alpha = -std::log(-0.5 * std::log1p(-alpha));
  return (gs.b + c_alpha) / gs.a;
}

double mosum_p_value(std::int64_t n, BandwidthPair bw, double z) {
  const GumbelScale gs = gumbel_scale(n, bw);
  return std::clamp(-std::expm1(-2.0 * std::exp(-(gs.a * std::abs(z) - gs.b))), 0.0, 1.0);
}

WindowVariance parse_window_variance(std::string_view text) {
  if (text == "pooled") return WindowVariance::Pooled;
  if (text == "unbiased") return WindowVariance::Unbiased;
  throw InvalidArgument("unknown window variance '" + std::string(text) + "' (expected pooled or unbiased)");
}

const char* to_string(WindowVariance w) noexcept { return w == WindowVariance::Pooled ? "pooled" : "unbiased"; }

VarianceEstimate mosum_variance(const TimeSeries& x, std::int64_t b, BandwidthPair bw, WindowVariance window) {
  check_split(x.n(), b, bw);
  const auto v = x.values();
  auto sum_sq = [&](std::int64_t s, std::int64_t e) {
    double mean = 0.0;
    for (std::int64_t t = s; t < e; ++t) mean += v[static_cast<std::size_t>(t)];
    mean /= static_cast<double>(e - s);
    double ss = 0.0;
    for (std::int64_t t = s; t < e; ++t) {
      const double d = v[static_cast<std::size_t>(t)] - mean;
      ss += d * d;
    }
    return ss;
  };
  auto sample_var = [&](std::int64_t s, std::int64_t e) {
    return e - s < 2 ? 0.0 : sum_sq(s, e) / static_cast<double>(e - s - 1);
  };
  const double est =
      window == WindowVariance::Pooled
          ? (sum_sq(b - bw.g_left, b) + sum_sq(b, b + bw.g_right)) / static_cast<double>(bw.g_left + bw.g_right)
          : 0.5 * (sample_var(b - bw.g_left, b) + sample_var(b, b + bw.g_right));
  if (est > kVarianceFloor) return {est, false};
  return {kVarianceFloor, true};
}

double global_mosum_variance(const TimeSeries& x, BandwidthPair bw, WindowVariance window) {
  PrefixSums ps(x.values());
  return global_variance_impl(ps, bw, window);
}

double estimate_rho(std::span<const double> r) {
  if (r.size() < 3) throw InvalidArgument("need at least 3 residuals to estimate rho");
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double d = r[t] - mean;
    den += d * d;
    if (t + 1 < r.size()) num += d * (r[t + 1] - mean);
  }
  if (!(den > 0.0)) throw InvalidArgument("residuals have zero variance");
  return std::clamp(num / den, -0.99, 0.99);
}

CandidateSet eta_candidates(const TimeSeries& x, BandwidthPair bw, double alpha, double eta,
                            const VarianceSpec& variance) {
  PrefixSums ps(x.values());
  std::optional<double> tau2;
  if (variance.kind == VarianceSpec::Kind::Global) {
    tau2 = variance.tau2 ? *variance.tau2 : global_variance_impl(ps, bw, variance.window);
    if (!(*tau2 > 0.0)) throw InvalidArgument("global variance must be positive");
  }
  return eta_scan(x, ps, bw, alpha, eta, variance, tau2);
}

CandidateSet merge_candidates(std::int64_t n, std::vector<Candidate> all, std::vector<std::string> warnings) {
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.location != b.location) return a.location < b.location;
    return preferred(a, b);
  });
  CandidateSet out;
  out.n = n;
  out.warnings = std::move(warnings);
  for (const auto& c : all) {
    if (!out.candidates.empty() && out.candidates.back().location == c.location) continue;
    out.candidates.push_back(c);
  }
  return out;
}

CandidateSet multiscale_candidates(const TimeSeries& x, const BandwidthGrid& grid, double alpha, double eta,
                                   const VarianceSpec& variance, unsigned threads) {
  if (grid.pairs.empty()) throw InvalidArgument("empty bandwidth grid");
  PrefixSums ps(x.values());
  std::optional<double> tau2;
  if (variance.kind == VarianceSpec::Kind::Global) {
    const std::int64_t g = grid.scales.front();
    tau2 = variance.tau2 ? *variance.tau2 : global_variance_impl(ps, {g, g}, variance.window);
    if (!(*tau2 > 0.0)) throw InvalidArgument("global variance must be positive");
  }
  std::vector<CandidateSet> per_pair(grid.pairs.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < grid.pairs.size(); i += stride) {
      per_pair[i] = eta_scan(x, ps, grid.pairs[i], alpha, eta, variance, tau2);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.pairs.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::vector<Candidate> all;
  std::vector<std::string> warnings;
  for (auto& set : per_pair) {
    all.insert(all.end(), set.candidates.begin(), set.candidates.end());
    warnings.insert(warnings.end(), set.warnings.begin(), set.warnings.end());
  }
  return merge_candidates(x.n(), std::move(all), std::move(warnings));
}

Ar1CorrectedRun ar1_corrected_candidates(const TimeSeries& x, const BandwidthGrid& grid, double alpha,
                                         double eta, unsigned threads, WindowVariance window) {
  auto local = VarianceSpec::local();
  local.window = window;
  auto first = multiscale_candidates(x, grid, alpha, eta, local, threads);
  PrefixSums ps(x.values());
  std::vector<double> residuals(x.size());
  std::int64_t start = 0;
  auto bounds = first.locations();
  bounds.push_back(x.n());
  for (auto end : bounds) {
    const double m = ps.mean(start, end);
    for (std::int64_t t = start; t < end; ++t) {
      residuals[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(t)] - m;
    }
    start = end;
  }
  Ar1CorrectedRun run;
  std::vector<std::string> notes;
  try {
    run.rho = estimate_rho(residuals);
  } catch (const InvalidArgument&) {
    run.rho = 0.0;
    notes.push_back("residuals have zero variance; AR(1) correction skipped");
  }
  auto corrected = VarianceSpec::ar1_corrected(run.rho);
  corrected.window = window;
  run.candidates = multiscale_candidates(x, grid, alpha, eta, corrected, threads);
  run.candidates.warnings.insert(run.candidates.warnings.end(), notes.begin(), notes.end());
  return run;
}

}  // namespace locprune
