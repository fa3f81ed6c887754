#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace locprune {

/// Cumulative sums of the centred series and its squares, so that window
/// means and residual sums of squares over (s, e] cost O(1). Centring by the
/// global mean keeps the squared sums well conditioned.
class PrefixSums {
 public:
  explicit PrefixSums(std::span<const double> x);

  std::int64_t n() const noexcept { return static_cast<std::int64_t>(s1_.size()) - 1; }

  /// Sum of centred values over (s, e].
  long double sum(std::int64_t s, std::int64_t e) const noexcept { return s1_[e] - s1_[s]; }
  /// Mean of the original values over (s, e].
  double mean(std::int64_t s, std::int64_t e) const noexcept {
    return static_cast<double>(offset_ + sum(s, e) / static_cast<long double>(e - s));
  }
  /// Mean of the centred values over (s, e].
  long double centred_mean(std::int64_t s, std::int64_t e) const noexcept {
    return sum(s, e) / static_cast<long double>(e - s);
  }
  /// Sum of squared deviations from the segment mean over (s, e].
  double rss(std::int64_t s, std::int64_t e) const noexcept {
    const long double len = static_cast<long double>(e - s);
    const long double a = s1_[e] - s1_[s];
    const long double v = (s2_[e] - s2_[s]) - a * a / len;
    return v > 0 ? static_cast<double>(v) : 0.0;
  }

 private:
  long double offset_ = 0;
  std::vector<long double> s1_;
  std::vector<long double> s2_;
};

}  // namespace locprune
