#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "locprune/pruning.hpp"
#include "locprune/types.hpp"

namespace locprune::oracle {

inline constexpr std::size_t kExhaustiveCap = 20;
inline constexpr std::size_t kNaiveCap = 10;

/// RSS by explicit segment loops, no prefix sums.
double brute_rss(std::span<const double> x, std::span<const std::int64_t> breaks);
double brute_sc(std::span<const double> x, std::span<const std::int64_t> breaks, double xi);

struct ExhaustiveResult {
  std::vector<std::int64_t> subset;
  double sc = 0.0;
};

/// Global SC minimiser over every subset of `candidates`. Ties go to fewer
/// elements, then the lexicographically smallest location list.
ExhaustiveResult exhaustive_sc_min(const TimeSeries& x, std::span<const std::int64_t> candidates, double xi);

/// Subset search straight from the definition: A is feasible unless some
/// B containing A has a one-point extension with strictly smaller SC.
std::vector<std::int64_t> naive_prunalg(const TimeSeries& x, std::span<const std::int64_t> d,
                                        const PruneContext& ctx, double xi);

}  // namespace locprune::oracle
