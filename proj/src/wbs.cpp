#include "locprune/wbs.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "locprune/mosum.hpp"
#include "locprune/prefix_sums.hpp"
#include "locprune/rng.hpp"

namespace locprune {
namespace {

struct Interval {
  std::int64_t l;
  std::int64_t r;
};

struct Node {
  std::int64_t s;
  std::int64_t e;
  std::int64_t depth;
};

struct Detection {
  Candidate candidate;
  double abs_cusum;
};

double cusum_fast(const PrefixSums& ps, std::int64_t s, std::int64_t b, std::int64_t e) {
  const double l = static_cast<double>(b - s);
  const double r = static_cast<double>(e - b);
  const long double diff = ps.centred_mean(s, b) - ps.centred_mean(b, e);
  return std::sqrt(l * r / (l + r)) * static_cast<double>(diff);
}

}  // namespace

void WbsConfig::validate() const {
  if (r_per_recursion < 1) throw InvalidArgument("R_n must be positive");
  if (max_candidates && *max_candidates < 1) throw InvalidArgument("max_candidates must be positive");
  if (zeta && !(*zeta >= 0.0)) throw InvalidArgument("zeta must be non-negative");
  if (!(c_zeta >= 0.0) || !(k_const >= 0.0)) throw InvalidArgument("c_zeta and K must be non-negative");
  if (tau2 && !(*tau2 > 0.0)) throw InvalidArgument("tau2 must be positive");
  if (min_seg < 1) throw InvalidArgument("min_seg must be >= 1");
  if (tau_bandwidth < 1) throw InvalidArgument("tau bandwidth must be >= 1");
}

double cusum(const TimeSeries& x, std::int64_t s, std::int64_t b, std::int64_t e) {
  if (!(0 <= s && s < b && b < e && e <= x.n())) {
    throw InvalidArgument("cusum needs 0 <= s < b < e <= n");
  }
  const auto v = x.values();
  double left = 0.0;
  double right = 0.0;
  for (std::int64_t t = s; t < b; ++t) left += v[static_cast<std::size_t>(t)];
  for (std::int64_t t = b; t < e; ++t) right += v[static_cast<std::size_t>(t)];
  const double l = static_cast<double>(b - s);
  const double r = static_cast<double>(e - b);
  return std::sqrt(l * r / (l + r)) * (left / l - right / r);
}

std::int64_t wbs_max_depth(std::int64_t max_candidates) {
  if (max_candidates < 1) throw InvalidArgument("max_candidates must be positive");
  std::int64_t depth = 0;
  while ((std::int64_t{1} << (depth + 1)) <= max_candidates + 1) ++depth;
  return depth;
}

double wbs_threshold(const WbsConfig& cfg, std::int64_t n, double tau2) {
  if (cfg.zeta) return *cfg.zeta;
  return cfg.c_zeta * cfg.k_const * std::sqrt(tau2) * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

CandidateSet wbs2_candidates(const TimeSeries& x, const WbsConfig& cfg) {
  cfg.validate();
  const std::int64_t n = x.n();
  if (n < 3) throw InvalidArgument("WBS2 needs n >= 3");
  PrefixSums ps(x.values());

  double tau2 = 0.0;
  if (cfg.tau2) {
    tau2 = *cfg.tau2;
  } else {
    const std::int64_t g = std::max<std::int64_t>(1, std::min(cfg.tau_bandwidth, n / 2));
    tau2 = global_mosum_variance(x, {g, g});
  }
  const double tau = std::sqrt(tau2);
  const double zeta = wbs_threshold(cfg, n, tau2);
  const std::int64_t max_depth = cfg.max_candidates ? wbs_max_depth(*cfg.max_candidates) : n;
  // A node narrower than 2 * min_seg cannot yield a candidate that survives
  // the min_seg filter, and neither can its descendants.
  const std::int64_t min_width = std::max<std::int64_t>(2, 2 * cfg.min_seg);

  std::vector<Detection> found;
  std::vector<Node> stack{{0, n, 1}};
  std::vector<Interval> intervals;
  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    const std::int64_t width = node.e - node.s;
    if (width <= 1 || node.depth > max_depth) continue;
    if (!cfg.max_candidates && width < min_width) continue;

    intervals.clear();
    const std::int64_t feasible = width * (width - 1) / 2;
    if (feasible <= cfg.r_per_recursion) {
      for (std::int64_t l = node.s; l < node.e; ++l) {
        for (std::int64_t r = l + 2; r <= node.e; ++r) intervals.push_back({l, r});
      }
    } else {
      // Each node draws from its own stream so results do not depend on traversal order.
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(node.s) * static_cast<std::uint64_t>(n + 1) +
                                        static_cast<std::uint64_t>(node.e)));
      while (static_cast<std::int64_t>(intervals.size()) < cfg.r_per_recursion) {
        const std::int64_t l = rng.uniform_int(node.s, node.e);
        const std::int64_t r = rng.uniform_int(node.s, node.e);
        if (r - l > 1) intervals.push_back({l, r});
      }
    }

    Interval best{node.s, node.e};
    std::int64_t best_b = -1;
    double best_val = -1.0;
    double best_cusum = 0.0;
    for (const auto& iv : intervals) {
      for (std::int64_t b = iv.l + 1; b < iv.r; ++b) {
        const double c = cusum_fast(ps, iv.l, b, iv.r);
        if (std::abs(c) > best_val) {
          best_val = std::abs(c);
          best_cusum = c;
          best_b = b;
          best = iv;
        }
      }
    }
    if (best_b < 0) continue;

    Detection d;
    d.abs_cusum = best_val;
    d.candidate.location = best_b;
    d.candidate.g_left = best_b - best.l;
    d.candidate.g_right = best.r - best_b;
    d.candidate.stat = best_cusum / tau;
    d.candidate.jump = std::abs(ps.mean(best.l, best_b) - ps.mean(best_b, best.r));
    d.candidate.source = CandidateSource::Wbs;
    found.push_back(d);

    stack.push_back({best_b, node.e, node.depth + 1});
    stack.push_back({node.s, best_b, node.depth + 1});
  }

  CandidateSet out;
  out.n = n;
  for (const auto& d : found) {
    const auto& c = d.candidate;
    if (d.abs_cusum < zeta) continue;
    if (std::min(c.g_left, c.g_right) < cfg.min_seg) continue;
    out.candidates.push_back(c);
  }
  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.location < b.location; });
  return out;
}

}  // namespace locprune
