#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "locprune/types.hpp"

namespace locprune {

/// Piecewise-constant mean f_t with change points theta_1 < ... < theta_q.
/// The level of segment j covers (theta_j, theta_{j+1}] with theta_0 = 0 and
/// theta_{q+1} = n.
struct PiecewiseSignal {
  std::int64_t n = 0;
  std::vector<std::int64_t> changepoints;
  std::vector<double> levels;  // q + 1 values
  double noise_sd = 1.0;       // scale applied to unit-variance errors in simulations
  std::string name;

  std::size_t q() const noexcept { return changepoints.size(); }
  /// d_j = level_j - level_{j-1}, j = 1..q.
  std::vector<double> jumps() const;
  /// delta_j = min spacing of theta_j to its neighbours (with 0 and n).
  std::vector<std::int64_t> spacings() const;
  /// Throws InvalidArgument if any invariant is violated.
  void validate() const;
};

/// Builds a PiecewiseSignal from segment end indices and levels, merging
/// adjacent segments whose levels coincide.
PiecewiseSignal signal_from_segments(const std::vector<std::int64_t>& segment_ends,
                                     const std::vector<double>& levels);

TimeSeries build_signal(const PiecewiseSignal& spec);

struct ErrorSpec {
  enum class Kind { IidGaussian, IidT, Ar1 };
  Kind kind = Kind::IidGaussian;
  double df = 5.0;   // IidT only
  double rho = 0.0;  // Ar1 only
  std::uint64_t seed = 0;

  static ErrorSpec gaussian(std::uint64_t seed) { return {Kind::IidGaussian, 5.0, 0.0, seed}; }
  static ErrorSpec student_t(double df, std::uint64_t seed) { return {Kind::IidT, df, 0.0, seed}; }
  static ErrorSpec ar1(double rho, std::uint64_t seed) { return {Kind::Ar1, 5.0, rho, seed}; }
};

/// Parses "gaussian", "t:<df>" or "ar1:<rho>". The seed is left at zero.
ErrorSpec parse_error_spec(std::string_view text);
std::string to_string(const ErrorSpec& spec);

/// Unit-variance error realisation of length n, deterministic in spec.seed.
TimeSeries generate_errors(const ErrorSpec& spec, std::int64_t n);

enum class TestSignal { Blocks, Fms, Mix, Teeth10, Stairs10 };
enum class SignalVariant { Original, Dense, Sparse };

TestSignal parse_test_signal(std::string_view name);
SignalVariant parse_signal_variant(std::string_view name);
const char* to_string(TestSignal s) noexcept;
const char* to_string(SignalVariant v) noexcept;

inline constexpr std::int64_t kLongSignalLength = 20000;
inline constexpr std::int64_t kSparseOffset = 500;

/// Bundled test signal. `stretch` multiplies every segment length (used for
/// AR(1) experiments, where it equals floor(1 / (1 - rho))).
PiecewiseSignal test_signal(TestSignal name, SignalVariant variant, std::int64_t stretch = 1);
PiecewiseSignal test_signal(std::string_view name, SignalVariant variant, std::int64_t stretch = 1);

/// Segment-length stretching factor floor(1 / (1 - rho)) for AR(1) errors.
std::int64_t ar1_stretch_factor(double rho);

PiecewiseSignal stretch_segments(const PiecewiseSignal& signal, std::int64_t factor);
PiecewiseSignal concatenate_until(const PiecewiseSignal& signal, std::int64_t min_length);
PiecewiseSignal embed_sparse(const PiecewiseSignal& signal, std::int64_t total_length,
                             std::int64_t offset);

/// Signal definition text: one segment per line as "<end-index> <level>",
/// '#' comments, and an optional "#! noise_sd = <value>" directive.
PiecewiseSignal parse_signal_definition(std::string_view text, std::string name = {});
PiecewiseSignal load_signal_file(const std::string& path);
/// Embedded copy of the bundled definition file for `name`.
std::string_view bundled_signal_text(TestSignal name);

}  // namespace locprune
