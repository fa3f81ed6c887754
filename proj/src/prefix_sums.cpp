#include "locprune/prefix_sums.hpp"

namespace locprune {

PrefixSums::PrefixSums(std::span<const double> x) : s1_(x.size() + 1, 0.0L), s2_(x.size() + 1, 0.0L) {
  long double total = 0;
  for (double v : x) total += v;
  offset_ = x.empty() ? 0.0L : total / static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double c = static_cast<long double>(x[i]) - offset_;
    s1_[i + 1] = s1_[i] + c;
    s2_[i + 1] = s2_[i] + c * c;
  }
}

}  // namespace locprune
