#pragma once

#include <cstdint>
#include <optional>

#include "locprune/types.hpp"

namespace locprune {

/// Settings of the WBS2-style candidate generator.
///
/// The threshold is zeta = c_zeta * k_const * tau * sqrt(2 log n), applied to
/// |CUSUM|; `zeta` overrides the derived value. With `max_candidates` set,
/// recursion depth is capped at L = floor(log2(max_candidates + 1)).
struct WbsConfig {
  std::int64_t r_per_recursion = 100;
  std::optional<std::int64_t> max_candidates;
  std::optional<double> zeta;
  double c_zeta = 0.9;
  double k_const = 1.3;
  std::optional<double> tau2;  // estimated (global MOSUM variance) when absent
  std::int64_t min_seg = 5;
  std::int64_t tau_bandwidth = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// sqrt((b-s)(e-b)/(e-s)) * (mean(x[s+1..b]) - mean(x[b+1..e])).
double cusum(const TimeSeries& x, std::int64_t s, std::int64_t b, std::int64_t e);

/// Maximal recursion depth L = floor(log2(max_candidates + 1)).
std::int64_t wbs_max_depth(std::int64_t max_candidates);

/// Threshold on |CUSUM| used by wbs2_candidates for this series.
double wbs_threshold(const WbsConfig& cfg, std::int64_t n, double tau2);

CandidateSet wbs2_candidates(const TimeSeries& x, const WbsConfig& cfg);

}  // namespace locprune
