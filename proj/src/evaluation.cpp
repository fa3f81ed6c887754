#include "locprune/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locprune/pruning.hpp"

namespace locprune {
namespace {

double choose2(double k) { return k * (k - 1.0) / 2.0; }

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_estimates(std::span<const std::int64_t> est, std::int64_t n) {
  std::int64_t prev = 0;
  for (auto c : est) {
    if (c <= prev || c >= n) throw InvalidArgument("estimated change points must be increasing within [1, n-1]");
    prev = c;
  }
}

}  // namespace

std::vector<DetectionWindow> detection_windows(const PiecewiseSignal& truth) {
  truth.validate();
  const auto& th = truth.changepoints;
  const std::size_t q = th.size();
  std::vector<DetectionWindow> out;
  if (q == 0) return out;
  double delta = 0.0;
  if (q == 1) {
    delta = static_cast<double>(std::min(th[0], truth.n - th[0]));
  } else {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 1; j < q; ++j) m = std::min(m, th[j] - th[j - 1]);
    delta = static_cast<double>(m);
  }
  for (std::size_t j = 0; j < q; ++j) {
    const double t = static_cast<double>(th[j]);
    const double prev = j == 0 ? 0.0 : static_cast<double>(th[j - 1]);
    const double next = j + 1 == q ? static_cast<double>(truth.n) : static_cast<double>(th[j + 1]);
    out.push_back({std::max((t + prev) / 2.0, t - delta), std::min((t + next) / 2.0, t + delta)});
  }
  return out;
}

DetectionRates detection_rates(const PiecewiseSignal& truth, std::span<const std::int64_t> est) {
  check_estimates(est, truth.n);
  const auto windows = detection_windows(truth);
  DetectionRates r;
  for (const auto& w : windows) {
    auto it = std::lower_bound(est.begin(), est.end(), w.lo, [](std::int64_t c, double v) { return c < v; });
    if (it != est.end() && static_cast<double>(*it) <= w.hi) ++r.detected;
  }
  for (auto c : est) {
    const double v = static_cast<double>(c);
    const bool matched = std::any_of(windows.begin(), windows.end(),
                                     [v](const DetectionWindow& w) { return w.lo <= v && v <= w.hi; });
    if (!matched) ++r.unmatched;
  }
  if (windows.empty()) {
    r.tpr = est.empty() ? 1.0 : 0.0;
    r.tpr_undefined = !est.empty();
  } else {
    r.tpr = static_cast<double>(r.detected) / static_cast<double>(windows.size());
  }
  r.fpr = est.empty() ? 0.0 : static_cast<double>(r.unmatched) / static_cast<double>(est.size());
  return r;
}

double adjusted_rand(std::span<const std::int64_t> truth, std::span<const std::int64_t> est, std::int64_t n) {
  if (n < 1) throw InvalidArgument("n must be positive");
  check_estimates(truth, n);
  check_estimates(est, n);
  std::vector<std::int64_t> a(truth.begin(), truth.end());
  std::vector<std::int64_t> b(est.begin(), est.end());
  a.push_back(n);
  b.push_back(n);

  double sum_ab = 0.0;
  double sum_a = 0.0;
  double sum_b = 0.0;
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum_a += choose2(static_cast<double>(a[i] - prev));
    prev = a[i];
  }
  prev = 0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    sum_b += choose2(static_cast<double>(b[j] - prev));
    prev = b[j];
  }
  // Cells of the contingency table are the pieces of the common refinement.
  std::size_t i = 0;
  std::size_t j = 0;
  prev = 0;
  while (i < a.size() && j < b.size()) {
    const std::int64_t end = std::min(a[i], b[j]);
    sum_ab += choose2(static_cast<double>(end - prev));
    prev = end;
    if (a[i] == end) ++i;
    if (b[j] == end) ++j;
  }
  const double total = choose2(static_cast<double>(n));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (sum_ab - expected) / denom;
}

TrimmedDistance trimmed_distance(const PiecewiseSignal& truth, std::span<const std::int64_t> est) {
  truth.validate();
  check_estimates(est, truth.n);
  const auto& th = truth.changepoints;
  if (th.empty()) throw InvalidArgument("trimmed distance needs at least one true change point");
  const auto d = truth.jumps();
  TrimmedDistance out;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < th.size(); ++j) {
    const std::int64_t prev = j == 0 ? 0 : th[j - 1];
    const std::int64_t next = j + 1 == th.size() ? truth.n : th[j + 1];
    double v = std::min((next - th[j]) / 2.0, (th[j] - prev) / 2.0);
    auto it = std::lower_bound(est.begin(), est.end(), th[j]);
    if (it != est.end()) v = std::min(v, static_cast<double>(*it - th[j]));
    if (it != est.begin()) v = std::min(v, static_cast<double>(th[j] - *std::prev(it)));
    out.per_cp.push_back(v);
    num += d[j] * d[j] * v;
    den += d[j] * d[j];
  }
  out.delta_trim = den > 0.0 ? num / den : 0.0;
  return out;
}

FitMetrics fit_metrics(const TimeSeries& x, const PiecewiseSignal& truth, std::span<const std::int64_t> est) {
  if (x.n() != truth.n) throw InvalidArgument("series and signal lengths differ");
  check_estimates(est, x.n());
  const TimeSeries f = build_signal(truth);
  auto mse_against_f = [&](std::span<const std::int64_t> breaks) {
    const auto seg = make_segmentation(x, std::vector<std::int64_t>(breaks.begin(), breaks.end()), 1.0);
    double total = 0.0;
    std::int64_t start = 0;
    for (std::size_t k = 0; k < seg.segment_means.size(); ++k) {
      const std::int64_t end = k < seg.changepoints.size() ? seg.changepoints[k] : x.n();
      for (std::int64_t t = start; t < end; ++t) {
        const double r = seg.segment_means[k] - f[static_cast<std::size_t>(t)];
        total += r * r;
      }
      start = end;
    }
    return total / static_cast<double>(x.n());
  };
  FitMetrics m;
  m.mse_rel = mse_against_f(est) / std::max(mse_against_f(truth.changepoints), 1e-12);
  m.bic = sc(x, est, std::log(static_cast<double>(x.n())));
  return m;
}

std::int64_t hausdorff(std::span<const std::int64_t> a, std::span<const std::int64_t> b, std::int64_t n) {
  if (a.empty() && b.empty()) return 0;
  if (a.empty() || b.empty()) return n;
  auto directed = [](std::span<const std::int64_t> from, std::span<const std::int64_t> to) {
    std::vector<std::int64_t> sorted(to.begin(), to.end());
    std::sort(sorted.begin(), sorted.end());
    std::int64_t worst = 0;
    for (auto v : from) {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      if (it != sorted.end()) best = *it - v;
      if (it != sorted.begin()) best = std::min(best, v - *std::prev(it));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

EvalReport evaluate(const TimeSeries& x, const PiecewiseSignal& truth, const Segmentation& est,
                    double runtime_ms) {
  EvalReport r;
  const auto rates = detection_rates(truth, est.changepoints);
  r.tpr = rates.tpr;
  r.fpr = rates.fpr;
  r.tpr_undefined = rates.tpr_undefined;
  r.ari = adjusted_rand(truth.changepoints, est.changepoints, truth.n);
  const auto fit = fit_metrics(x, truth, est.changepoints);
  r.mse_rel = fit.mse_rel;
  r.bic = fit.bic;
  r.q_hat = est.q_hat();
  if (!truth.changepoints.empty()) {
    auto td = trimmed_distance(truth, est.changepoints);
    r.delta_trim = td.delta_trim;
    r.delta_trim_per_cp = std::move(td.per_cp);
  }
  r.hausdorff = hausdorff(truth.changepoints, est.changepoints, truth.n);
  r.runtime_ms = runtime_ms;
  return r;
}

double mad(std::vector<double> values) {
  if (values.empty()) return 0.0;
  auto median = [](std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
      m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
    }
    return m;
  };
  const double m = median(values);
  for (auto& v : values) v = std::abs(v - m);
  return median(values);
}

AggregateReport aggregate(std::span<const EvalReport> reports) {
  AggregateReport a;
  a.replicates = static_cast<std::int64_t>(reports.size());
  if (reports.empty()) return a;
  std::vector<double> tpr;
  std::vector<double> fpr, ari, mse, bic, qh, dt, hd, rt;
  for (const auto& r : reports) {
    if (r.tpr_undefined) {
      ++a.tpr_undefined;
    } else {
      tpr.push_back(r.tpr);
    }
    fpr.push_back(r.fpr);
    ari.push_back(r.ari);
    mse.push_back(r.mse_rel);
    bic.push_back(r.bic);
    qh.push_back(static_cast<double>(r.q_hat));
    dt.push_back(r.delta_trim);
    hd.push_back(static_cast<double>(r.hausdorff));
    rt.push_back(r.runtime_ms);
  }
  a.tpr = mean_of(tpr);
  a.fpr = mean_of(fpr);
  a.ari = mean_of(ari);
  a.mse_rel = mean_of(mse);
  a.bic = mean_of(bic);
  a.q_hat = mean_of(qh);
  a.delta_trim = mean_of(dt);
  a.hausdorff = mean_of(hd);
  a.runtime_ms = mean_of(rt);

  const std::size_t q = reports.front().delta_trim_per_cp.size();
  if (q > 0) {
    double total = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      std::vector<double> col;
      for (const auto& r : reports) {
        if (r.delta_trim_per_cp.size() != q) throw InvalidArgument("replicates disagree on the number of change points");
        col.push_back(r.delta_trim_per_cp[j]);
      }
      total += mad(std::move(col));
    }
    a.v_trim = total / static_cast<double>(q);
  }
  return a;
}

}  // namespace locprune
