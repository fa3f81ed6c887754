#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "locprune/signal_model.hpp"
#include "locprune/types.hpp"

namespace locprune {

struct DetectionRates {
  double tpr = 0.0;
  double fpr = 0.0;
  std::int64_t detected = 0;   // true change points with an estimate in their window
  std::int64_t unmatched = 0;  // estimates outside every window
  bool tpr_undefined = false;  // q = 0 but q_hat > 0
};

/// Closed detection window of theta_j: [max(mid_left, theta_j - delta), min(mid_right, theta_j + delta)]
/// with delta the minimum spacing between true change points.
struct DetectionWindow {
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<DetectionWindow> detection_windows(const PiecewiseSignal& truth);

DetectionRates detection_rates(const PiecewiseSignal& truth, std::span<const std::int64_t> est);

/// Adjusted Rand index of the partitions of {1..n} induced by two change point sets.
double adjusted_rand(std::span<const std::int64_t> truth, std::span<const std::int64_t> est, std::int64_t n);

struct TrimmedDistance {
  double delta_trim = 0.0;
  std::vector<double> per_cp;
};

TrimmedDistance trimmed_distance(const PiecewiseSignal& truth, std::span<const std::int64_t> est);

struct FitMetrics {
  double mse_rel = 0.0;
  double bic = 0.0;
};

/// Relative MSE of the piecewise-mean fit at `est` versus the fit at the true
/// change points, both measured against the noiseless signal; BIC is SC with
/// xi = log n.
FitMetrics fit_metrics(const TimeSeries& x, const PiecewiseSignal& truth, std::span<const std::int64_t> est);

/// Hausdorff distance; n if exactly one set is empty, 0 if both are.
std::int64_t hausdorff(std::span<const std::int64_t> a, std::span<const std::int64_t> b, std::int64_t n);

struct EvalReport {
  double tpr = 0.0;
  double fpr = 0.0;
  bool tpr_undefined = false;
  double ari = 0.0;
  double mse_rel = 0.0;
  double bic = 0.0;
  std::int64_t q_hat = 0;
  double delta_trim = 0.0;
  std::vector<double> delta_trim_per_cp;
  std::int64_t hausdorff = 0;
  double runtime_ms = 0.0;
};

EvalReport evaluate(const TimeSeries& x, const PiecewiseSignal& truth, const Segmentation& est,
                    double runtime_ms = 0.0);

/// Unscaled median absolute deviation.
double mad(std::vector<double> values);

struct AggregateReport {
  std::int64_t replicates = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  double ari = 0.0;
  double mse_rel = 0.0;
  double bic = 0.0;
  double q_hat = 0.0;
  double delta_trim = 0.0;
  double v_trim = 0.0;  // mean over change points of the MAD of delta_trim_j across replicates
  double hausdorff = 0.0;
  double runtime_ms = 0.0;
  std::int64_t tpr_undefined = 0;
};

/// Means across replicates; replicates with an undefined TPR are left out of the TPR mean.
AggregateReport aggregate(std::span<const EvalReport> reports);

}  // namespace locprune
