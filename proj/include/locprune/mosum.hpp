#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "locprune/types.hpp"

namespace locprune {

struct BandwidthPair {
  std::int64_t g_left = 0;
  std::int64_t g_right = 0;

  std::int64_t effective() const noexcept { return g_left < g_right ? g_left : g_right; }
  friend bool operator==(const BandwidthPair&, const BandwidthPair&) = default;
};

/// Multiscale bandwidth grid: single scales G_m = F_m * G_0 below
/// floor(n / log n), and every ordered pair of them whose imbalance
/// max/min stays within c_asym.
struct BandwidthGrid {
  std::int64_t base = 0;
  std::vector<std::int64_t> scales;
  std::vector<BandwidthPair> pairs;
  double c_asym = 1.0;
};

BandwidthGrid bandwidth_grid(std::int64_t n, std::int64_t g0, double c_asym);

inline constexpr double kVarianceFloor = 1e-12;

/// Scaled difference of the left and right window means at split point b:
/// sqrt(gl*gr/(gl+gr)) * (mean(x[b-gl+1..b]) - mean(x[b+1..b+gr])) / tau.
double mosum_statistic(const TimeSeries& x, std::int64_t b, BandwidthPair bw, double tau);

/// Asymptotic (Gumbel) critical value D_n(G; alpha) with G = min(g_left, g_right).
double critical_value(std::int64_t n, BandwidthPair bw, double alpha);

/// Gumbel tail probability of a standardised statistic |z| at this scale.
double mosum_p_value(std::int64_t n, BandwidthPair bw, double z);

/// Pooled: (SS_left + SS_right) / (g_left + g_right), the usual MOSUM
/// estimator. Unbiased: mean of the two windows' n-1 sample variances.
enum class WindowVariance { Pooled, Unbiased };

WindowVariance parse_window_variance(std::string_view text);
const char* to_string(WindowVariance w) noexcept;

struct VarianceEstimate {
  double value = 0.0;
  bool floored = false;
};

/// Local variance from the left and right windows at b.
VarianceEstimate mosum_variance(const TimeSeries& x, std::int64_t b, BandwidthPair bw,
                                WindowVariance window = WindowVariance::Pooled);

/// Median of the local MOSUM variance estimates over every valid b.
double global_mosum_variance(const TimeSeries& x, BandwidthPair bw, WindowVariance window = WindowVariance::Pooled);

/// Lag-1 Yule-Walker autocorrelation, clamped to [-0.99, 0.99].
double estimate_rho(std::span<const double> residuals);

struct VarianceSpec {
  enum class Kind { Local, Global, Ar1Corrected };
  Kind kind = Kind::Local;
  std::optional<double> tau2;  // Global only; estimated when absent
  double rho = 0.0;            // Ar1Corrected only
  WindowVariance window = WindowVariance::Pooled;

  static VarianceSpec local() { return {}; }
  static VarianceSpec global(std::optional<double> tau2 = std::nullopt) {
    return {Kind::Global, tau2, 0.0, WindowVariance::Pooled};
  }
  static VarianceSpec ar1_corrected(double rho) { return {Kind::Ar1Corrected, std::nullopt, rho, WindowVariance::Pooled}; }

  /// Long-run variance inflation (1 + rho) / (1 - rho); 1 unless Ar1Corrected.
  double inflation() const noexcept;
};

/// Single-scale MOSUM candidates under the eta-criterion. Near the ends of
/// the series the windows are clipped to the sample (at least 2 points
/// each), so candidates there carry the clipped detection interval.
CandidateSet eta_candidates(const TimeSeries& x, BandwidthPair bw, double alpha, double eta,
                            const VarianceSpec& variance);

/// Union of eta_candidates over every pair of the grid. A location found at
/// several scales keeps the detection with the smallest p-value.
CandidateSet multiscale_candidates(const TimeSeries& x, const BandwidthGrid& grid, double alpha,
                                   double eta, const VarianceSpec& variance,
                                   unsigned threads = 1);

/// Merges candidate lists into a location-sorted set without duplicates.
CandidateSet merge_candidates(std::int64_t n, std::vector<Candidate> all,
                              std::vector<std::string> warnings = {});

struct Ar1CorrectedRun {
  CandidateSet candidates;
  double rho = 0.0;
};

/// Two-pass protocol for serially dependent errors: uncorrected multiscale
/// candidates, Yule-Walker rho from residuals of the piecewise-mean fit at
/// those candidates, then a rerun with the variance inflated by
/// (1 + rho) / (1 - rho).
Ar1CorrectedRun ar1_corrected_candidates(const TimeSeries& x, const BandwidthGrid& grid,
                                         double alpha, double eta, unsigned threads = 1,
                                         WindowVariance window = WindowVariance::Pooled);

}  // namespace locprune
