// Runs acceptance criteria 1-10 and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "locprune/config.hpp"
#include "locprune/evaluation.hpp"
#include "locprune/mosum.hpp"
#include "locprune/pipeline.hpp"
#include "locprune/pruning.hpp"
#include "locprune/rng.hpp"
#include "locprune/signal_model.hpp"
#include "locprune/simulation.hpp"
#include "locprune/wbs.hpp"
#include "oracle.hpp"

using namespace locprune;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

AggregateReport simulate_cell(const std::string& signal, const std::string& errors, const std::string& method,
                              const std::string& penalty, std::int64_t replicates,
                              std::vector<std::pair<std::string, std::string>> extra = {}) {
  RunConfig cfg;
  cfg.set("signal", signal);
  cfg.set("errors", errors);
  cfg.set("method", method);
  cfg.set("penalty", penalty);
  cfg.set("replicates", std::to_string(replicates));
  for (const auto& [k, v] : extra) cfg.set(k, v);
  return run_simulation(cfg).front().aggregate;
}

std::vector<double> step_values(Rng& rng, std::int64_t n, const std::vector<std::int64_t>& cps, double jump) {
  std::vector<double> v(static_cast<std::size_t>(n));
  double level = 0.0;
  std::size_t k = 0;
  for (std::int64_t t = 1; t <= n; ++t) {
    while (k < cps.size() && cps[k] < t) {
      level += (rng.uniform() < 0.5 ? -1.0 : 1.0) * jump;
      ++k;
    }
    v[static_cast<std::size_t>(t - 1)] = level + rng.normal();
  }
  return v;
}

std::vector<std::int64_t> random_points(Rng& rng, std::int64_t lo, std::int64_t hi, std::int64_t k) {
  std::vector<std::int64_t> out;
  const auto count = rng.uniform_int(0, k);
  for (std::int64_t i = 0; i < count; ++i) out.push_back(rng.uniform_int(lo, hi));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CandidateSet candidates_at(const TimeSeries& x, const std::vector<std::int64_t>& locs, std::int64_t g) {
  CandidateSet set;
  set.n = x.n();
  for (auto l : locs) {
    Candidate c;
    c.location = l;
    c.g_left = std::min(g, l);
    c.g_right = std::min(g, x.n() - l);
    c.jump = jump_size(x, l, c.g_left, c.g_right);
    set.candidates.push_back(c);
  }
  return set;
}

Outcome criterion1() {
  Outcome o;
  const auto blocks = simulate_cell("blocks", "gaussian", "molp", "log1.1", 1000);
  o.check(std::abs(blocks.tpr - 0.961) <= 0.03, "blocks TPR " + fmt(blocks.tpr) + " in 0.961+-0.03");
  o.check(std::abs(blocks.fpr - 0.014) <= 0.015, "blocks FPR " + fmt(blocks.fpr) + " in 0.014+-0.015");
  const auto teeth = simulate_cell("teeth10", "gaussian", "molp", "log1.1", 1000);
  o.check(std::abs(teeth.tpr - 0.970) <= 0.03, "teeth10 TPR " + fmt(teeth.tpr) + " in 0.970+-0.03");
  o.check(teeth.fpr <= 0.01, "teeth10 FPR " + fmt(teeth.fpr) + " <= 0.01");
  const auto stairs = simulate_cell("stairs10", "gaussian", "molp", "log1.1", 1000);
  o.check(std::abs(stairs.tpr - 0.998) <= 0.01, "stairs10 TPR " + fmt(stairs.tpr) + " in 0.998+-0.01");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto a = simulate_cell("blocks", "gaussian", "culp", "log1.1", 1000);
  o.check(std::abs(a.tpr - 0.934) <= 0.04, "CuLP blocks TPR " + fmt(a.tpr) + " in 0.934+-0.04");
  o.check(a.fpr <= 0.12, "FPR " + fmt(a.fpr) + " <= 0.12");
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome criterion3() {
  Outcome o;
  const auto truth = resolve_signal("blocks", SignalVariant::Dense);
  const auto cfg = detect_config(RunConfig{});
  double worst = 0.0;
  for (std::int64_t r = 0; r < 5; ++r) {
    const auto x = simulate_series(truth, truth.noise_sd, ErrorSpec::gaussian(replicate_seed(1, r)));
    const auto start = Clock::now();
    detect(x, cfg);
    worst = std::max(worst, std::chrono::duration<double>(Clock::now() - start).count());
  }
  o.check(truth.n >= 20000 && worst <= 1.0,
          "dense blocks n=" + std::to_string(truth.n) + " slowest replicate " + fmt(worst, 3) + " s <= 1 s");

  // Candidate stage on blocks repeated to length n; median of 7 runs.
  const auto base = resolve_signal("blocks", SignalVariant::Original);
  const std::vector<std::int64_t> lengths = {2000, 8000, 32000};
  std::vector<double> ms;
  for (auto n : lengths) {
    const auto t = truncate_signal(concatenate_until(base, n), n);
    const auto x = simulate_series(t, t.noise_sd, ErrorSpec::gaussian(77));
    std::vector<double> runs;
    for (int r = 0; r < 7; ++r) {
      const auto start = Clock::now();
      generate_candidates(x, cfg);
      runs.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    }
    ms.push_back(median(runs));
  }
  auto nlogn = [](double n) { return n * std::log(n); };
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    const double ratio = ms[i] / ms[i - 1];
    const double bound = 1.5 * nlogn(static_cast<double>(lengths[i])) / nlogn(static_cast<double>(lengths[i - 1]));
    o.check(ratio <= bound, "candidate ms " + std::to_string(lengths[i - 1]) + "->" + std::to_string(lengths[i]) +
                                ": " + fmt(ms[i - 1], 2) + "->" + fmt(ms[i], 2) + " ratio " + fmt(ratio, 2) +
                                " <= " + fmt(bound, 2));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto a = simulate_cell("blocks", "t:5", "molp", "heavy_t", 1000);
  o.check(a.fpr <= 0.01, "t5 blocks FPR " + fmt(a.fpr) + " <= 0.01");
  o.check(a.tpr >= 0.70, "TPR " + fmt(a.tpr) + " >= 0.70");
  return o;
}

Outcome criterion5() {
  Outcome o;
  RunConfig cfg;
  cfg.set("signal", "flat:2000");
  cfg.set("alpha", "0.1");
  cfg.set("penalty", "log1.1");
  cfg.set("replicates", "200");
  const auto res = run_simulation(cfg).front();
  const auto zero = std::count_if(res.replicates.begin(), res.replicates.end(),
                                  [](const ReplicateResult& r) { return r.estimates.empty(); });
  const double share = static_cast<double>(zero) / 200.0;
  o.check(share >= 0.90, "q_hat=0 in " + fmt(share, 3) + " of 200 runs (>= 0.90)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(6001);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto n = rng.uniform_int(10, 300);
    const auto x = TimeSeries(step_values(rng, n, random_points(rng, 1, n - 1, 5), 0.5 + 3.0 * rng.uniform()));
    auto a = random_points(rng, 1, n - 1, 8);
    std::int64_t c = rng.uniform_int(1, n - 1);
    while (std::binary_search(a.begin(), a.end(), c)) c = rng.uniform_int(1, n - 1);
    auto with = a;
    with.insert(std::upper_bound(with.begin(), with.end(), c), c);
    const auto it = std::lower_bound(a.begin(), a.end(), c);
    const std::int64_t s = it == a.begin() ? 0 : *(it - 1);
    const std::int64_t e = it == a.end() ? n : *it;
    const double lhs = rss(x, a) - rss(x, with);
    const double z = cusum(x, s, c, e);
    const double rel = std::abs(lhs - z * z) / std::max(1.0, z * z);
    worst = std::max(worst, rel);
  }
  o.check(worst <= 1e-9, "1000 instances, max relative error " + sci(worst));
  return o;
}

Outcome criterion7() {
  Outcome o;
  Rng rng(7001);
  int mismatches = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto n = rng.uniform_int(20, 150);
    const auto x = TimeSeries(step_values(rng, n, random_points(rng, 1, n - 1, 3), 1.0 + 3.0 * rng.uniform()));
    const auto d = random_points(rng, 1, n - 1, 10);
    const PruneContext ctx{d, {}, 0, n};
    const double xi = std::pow(std::log(static_cast<double>(n)), 1.1);
    if (prun_alg(x, d, ctx, xi) != oracle::naive_prunalg(x, d, ctx, xi)) ++mismatches;
  }
  o.check(mismatches == 0, "prun_alg vs naive: " + std::to_string(mismatches) + " mismatches in 500");

  // Well separated: true change points at least 30 apart with 3 sigma jumps,
  // candidates are the truth plus decoys at least 5 apart, |D| <= 10.
  int equal = 0, below = 0, total = 0;
  std::vector<std::string> strict;
  for (int rep = 0; rep < 500; ++rep) {
    const std::int64_t n = 240;
    std::vector<std::int64_t> truth;
    for (std::int64_t p = 30 + rng.uniform_int(0, 20); p <= n - 30 && truth.size() < 4; p += 30 + rng.uniform_int(0, 40)) {
      truth.push_back(p);
    }
    const auto x = TimeSeries(step_values(rng, n, truth, 3.0));
    std::vector<std::int64_t> locs = truth;
    while (locs.size() < static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(truth.size()), 10))) {
      const auto c = rng.uniform_int(5, n - 5);
      if (std::all_of(locs.begin(), locs.end(), [&](auto l) { return std::abs(l - c) >= 5; })) locs.push_back(c);
    }
    std::sort(locs.begin(), locs.end());
    const double xi = std::pow(std::log(static_cast<double>(n)), 1.1);
    const auto set = candidates_at(x, locs, 20);
    const auto direct = prune_direct(x, set, xi);
    const auto best = oracle::exhaustive_sc_min(x, locs, xi);
    ++total;
    if (direct.sc < best.sc - 1e-9) ++below;
    if (std::abs(direct.sc - best.sc) <= 1e-9 * std::max(1.0, std::abs(best.sc))) {
      ++equal;
    } else {
      strict.push_back("rep " + std::to_string(rep) + " dSC=" + fmt(direct.sc - best.sc, 3));
    }
  }
  const double share = static_cast<double>(equal) / total;
  o.check(below == 0, "prune_direct below exhaustive minimum: " + std::to_string(below));
  o.check(share >= 0.95, "prune_direct equals exhaustive on " + fmt(share, 3) + " (>= 0.95)");
  for (const auto& s : strict) std::fprintf(stderr, "criterion 7 strict case: %s\n", s.c_str());
  return o;
}

Outcome criterion8() {
  Outcome o;
  RunConfig cfg;
  cfg.set("signal", "blocks,teeth10");
  cfg.set("errors", "gaussian,t:5,ar1:0.3");
  cfg.set("method", "molp,culp,both");
  cfg.set("replicates", "10");
  cfg.set("seed", "8");
  auto dump = [](const std::vector<ScenarioResult>& r) {
    return replicates_csv(r) + summary_csv(r) + histogram_csv(r);
  };
  const auto a = dump(run_simulation(cfg));
  const auto b = dump(run_simulation(cfg));
  cfg.set("threads", "4");
  const auto c = dump(run_simulation(cfg));
  o.check(a == b, "simulation outputs identical across two runs");
  o.check(a == c, "identical with 1 and 4 threads");

  const auto truth = resolve_signal("blocks", SignalVariant::Original);
  const auto x = simulate_series(truth, truth.noise_sd, ErrorSpec::gaussian(81));
  bool same = true;
  for (const char* m : {"molp", "culp", "both"}) {
    RunConfig rc;
    rc.set("method", m);
    const auto d = detect_config(rc);
    const auto r1 = detect(x, d);
    const auto r2 = detect(x, d);
    same = same && segmentation_json(r1, d) == segmentation_json(r2, d) &&
           candidates_csv(r1.candidates) == candidates_csv(r2.candidates);
  }
  o.check(same, "detect JSON and candidate CSV identical across runs");
  return o;
}

Outcome criterion9() {
  Outcome o;
  Rng rng(9001);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto n = rng.uniform_int(20, 400);
    const auto x = TimeSeries(step_values(rng, n, random_points(rng, 1, n - 1, 4), 2.0));
    const auto g = rng.uniform_int(1, n / 2);
    const auto k = rng.uniform_int(g, n - g);
    const double tau = 0.5 + rng.uniform();
    long double left = 0.0L, right = 0.0L;
    for (std::int64_t t = k + 1; t <= k + g; ++t) right += x[static_cast<std::size_t>(t - 1)];
    for (std::int64_t t = k - g + 1; t <= k; ++t) left += x[static_cast<std::size_t>(t - 1)];
    const double sym = static_cast<double>((right - left) / std::sqrt(2.0L * g)) / tau;
    const double asym = mosum_statistic(x, k, {g, g}, tau);
    worst = std::max(worst, std::abs(sym + asym) / std::max(1.0, std::abs(sym)));
  }
  o.check(worst <= 1e-9, "symmetric vs asymmetric MOSUM, max rel diff " + sci(worst));

  bool shift_ok = true;
  for (int rep = 0; rep < 100 && shift_ok; ++rep) {
    const auto n = rng.uniform_int(50, 500);
    const auto x = TimeSeries(step_values(rng, n, random_points(rng, 1, n - 1, 5), 2.5));
    const double shift = (rng.uniform() - 0.5) * 2000.0;
    std::vector<double> y(x.values().begin(), x.values().end());
    for (auto& v : y) v += shift;
    const TimeSeries xs(std::move(y));
    const auto s = rng.uniform_int(0, n - 2);
    const auto e = rng.uniform_int(s + 2, n);
    const auto b = rng.uniform_int(s + 1, e - 1);
    const double c1 = cusum(x, s, b, e), c2 = cusum(xs, s, b, e);
    shift_ok = shift_ok && std::abs(c1 - c2) <= 1e-8 * std::max(1.0, std::abs(c1));
    const auto a = random_points(rng, 1, n - 1, 6);
    const double r1 = rss(x, a), r2 = rss(xs, a);
    shift_ok = shift_ok && std::abs(r1 - r2) <= 1e-8 * std::max(1.0, r1);
    if (n >= 100) {
      const auto grid = bandwidth_grid(n, 10, 4.0);
      const auto cands = multiscale_candidates(x, grid, 0.2, 0.4, VarianceSpec::local());
      auto shifted = cands;
      for (auto& c : shifted.candidates) c.jump = jump_size(xs, c.location, c.g_left, c.g_right);
      const double xi = std::pow(std::log(static_cast<double>(n)), 1.1);
      shift_ok = shift_ok && loc_alg(x, cands, xi).changepoints == loc_alg(xs, shifted, xi).changepoints;
    }
  }
  o.check(shift_ok, "cusum, rss and loc_alg invariant under level shifts");

  const auto grid = bandwidth_grid(2000, 10, 4.0);
  const std::vector<std::int64_t> expected = {10, 20, 30, 50, 80, 130, 210};
  std::string got;
  for (auto g : grid.scales) got += (got.empty() ? "" : ",") + std::to_string(g);
  o.check(grid.scales == expected, "grid(n=2000, G0=10) = {" + got + "}");
  return o;
}

Outcome criterion10() {
  Outcome o;
  const PiecewiseSignal truth{500, {250}, {0.0, 2.0}, 1.0, "single"};
  const auto cfg = detect_config(RunConfig{});
  int detected = 0, close = 0;
  for (std::int64_t r = 0; r < 500; ++r) {
    const auto x = simulate_series(truth, 1.0, ErrorSpec::gaussian(replicate_seed(10, r)));
    const auto res = detect(x, cfg);
    const auto& cps = res.segmentation.changepoints;
    if (detection_rates(truth, cps).tpr > 0.0) ++detected;
    if (std::any_of(cps.begin(), cps.end(), [](std::int64_t c) { return std::abs(c - 250) <= 20; })) ++close;
  }
  o.check(detected >= 475, "detection rate " + fmt(detected / 500.0, 3) + " >= 0.95");
  o.check(close >= 450, "|theta_hat - 250| <= 20 in " + fmt(close / 500.0, 3) + " >= 0.90");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-10 ...]\n", argv[0]);
      return 2;
    }
    wanted.insert(k);
  }
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (!wanted.empty() && !wanted.count(k)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("criterion %d: %s (%s) [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
