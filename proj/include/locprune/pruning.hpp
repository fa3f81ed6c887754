#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locprune/types.hpp"

namespace locprune {

/// Penalty xi_n of the Schwarz criterion, either fixed or a rule in n.
struct Penalty {
  enum class Kind { Fixed, LogPow, Poly };
  Kind kind = Kind::LogPow;
  double value = 1.1;  // xi, log exponent p, or polynomial exponent

  static Penalty fixed(double xi) { return {Kind::Fixed, xi}; }
  static Penalty log_pow(double p) { return {Kind::LogPow, p}; }
  static Penalty poly(double exponent) { return {Kind::Poly, exponent}; }

  /// Presets: "log1.01", "log1.1" (alias "light"), "heavy_t" = n^(2/4.99),
  /// "heavy_ar" = log(n)^2; or "xi:<v>", "log_pow:<p>", "poly:<e>".
  static Penalty parse(std::string_view text);

  double evaluate(std::int64_t n) const;
  std::string to_string() const;
};

enum class SortKind { Jump, InvPValue };

SortKind parse_sort_kind(std::string_view text);
const char* to_string(SortKind s) noexcept;

inline constexpr std::size_t kDefaultPruneCap = 24;
inline constexpr double kRssFloorPerObservation = 1e-12;

/// Residual sum of squares of the piecewise-mean fit with breaks at A.
double rss(const TimeSeries& x, std::span<const std::int64_t> breaks);

/// Schwarz criterion (n/2) log(RSS(A)/n) + |A| xi, RSS floored at n * 1e-12.
double sc(const TimeSeries& x, std::span<const std::int64_t> breaks, double xi);

/// Decision context of one pruning step: the still-active candidates C,
/// the accepted set, and the open interval (c_left, c_right) holding D.
struct PruneContext {
  std::vector<std::int64_t> active;
  std::vector<std::int64_t> accepted;
  std::int64_t c_left = 0;
  std::int64_t c_right = 0;
};

/// SC of A together with every candidate held fixed by the context
/// (accepted ones and active ones outside (c_left, c_right)).
double sc_conditional(const TimeSeries& x, std::span<const std::int64_t> subset, const PruneContext& ctx,
                      double xi);

/// Inner pruning search over D (sorted, inside (c_left, c_right)).
std::vector<std::int64_t> prun_alg(const TimeSeries& x, std::span<const std::int64_t> d, const PruneContext& ctx,
                                   double xi, std::size_t cap = kDefaultPruneCap);

double jump_size(const TimeSeries& x, std::int64_t c, std::int64_t g_left, std::int64_t g_right);

/// Sorting value h of a candidate: the stored jump, or 1/p.
double sort_value(const Candidate& c, SortKind kind);

struct LocAlgOptions {
  SortKind sort = SortKind::Jump;
  std::size_t cap = kDefaultPruneCap;
};

/// Outer localisation loop; returns the accepted change points with fit
/// diagnostics and a per-candidate audit trail.
Segmentation loc_alg(const TimeSeries& x, const CandidateSet& candidates, double xi,
                     const LocAlgOptions& options = {});

/// Pruning criteria applied to the whole candidate set at once.
Segmentation prune_direct(const TimeSeries& x, const CandidateSet& candidates, double xi,
                          std::size_t cap = kDefaultPruneCap);

/// Fitted segment means, RSS and SC for a given change point set.
Segmentation make_segmentation(const TimeSeries& x, std::vector<std::int64_t> changepoints, double xi);

}  // namespace locprune
