#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "locprune/config.hpp"
#include "locprune/mosum.hpp"
#include "locprune/pruning.hpp"
#include "locprune/types.hpp"
#include "locprune/wbs.hpp"

namespace locprune {

enum class Method { Molp, Culp, Both };

Method parse_method(std::string_view text);
const char* to_string(Method m) noexcept;

enum class VarianceMode { Auto, Local, Global, Ar1 };

VarianceMode parse_variance_mode(std::string_view text);
const char* to_string(VarianceMode v) noexcept;

/// Settings of one detection run: candidate generation plus localised pruning.
struct DetectConfig {
  Method method = Method::Molp;
  double alpha = 0.2;
  double eta = 0.4;
  std::int64_t g0 = 10;
  double c_asym = 4.0;
  VarianceMode variance = VarianceMode::Auto;
  WindowVariance window_variance = WindowVariance::Pooled;
  WbsConfig wbs;
  Penalty penalty = Penalty::log_pow(1.1);
  SortKind sort = SortKind::Jump;
  std::size_t cap = kDefaultPruneCap;
  unsigned threads = 1;

  /// Throws ConfigError on out-of-range settings.
  void validate() const;
};

/// Reads the detection settings from a run configuration. `g0` set to
/// "auto" resolves to g0_auto.
DetectConfig detect_config(const RunConfig& cfg, std::int64_t g0_auto = 10);

struct DetectResult {
  CandidateSet candidates;
  Segmentation segmentation;
  std::optional<double> rho;  // AR(1) variance correction, when used
  double candidate_ms = 0.0;
  double prune_ms = 0.0;
};

DetectResult detect(const TimeSeries& x, const DetectConfig& cfg);

/// Candidate stage only.
CandidateSet generate_candidates(const TimeSeries& x, const DetectConfig& cfg, std::optional<double>* rho = nullptr);

/// Newline-delimited reals ('#' comments and blank lines skipped), or the
/// 1-based column `csv_col` of a comma-separated file whose first line may
/// be a header. Throws InputError when unreadable or shorter than 2 values.
TimeSeries read_series(const std::string& path, std::int64_t csv_col = 0);
TimeSeries parse_series(std::string_view text, std::int64_t csv_col = 0);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

inline constexpr int kSegmentationSchemaVersion = 1;

std::string segmentation_json(const DetectResult& result, const DetectConfig& cfg);
std::string candidates_csv(const CandidateSet& candidates);

void write_text_file(const std::string& path, std::string_view text);

}  // namespace locprune
