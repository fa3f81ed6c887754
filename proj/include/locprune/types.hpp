#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locprune {

/// Raised for malformed arguments and violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when input data cannot be read or is too short.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run configuration fails validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exhaustive search is asked to handle more candidates than
/// its cap allows.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::size_t size, std::size_t cap)
      : std::runtime_error(what), size_(size), cap_(cap) {}
  std::size_t size() const noexcept { return size_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t size_;
  std::size_t cap_;
};

/// Ordered real-valued observations X_1..X_n. Indices in the public API are
/// 1-based time points; `values()[t - 1]` holds X_t.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::int64_t n() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

enum class CandidateSource { Mosum, Wbs };

const char* to_string(CandidateSource s) noexcept;

struct Candidate {
  std::int64_t location = 0;
  std::int64_t g_left = 0;   // left detection distance G_L
  std::int64_t g_right = 0;  // right detection distance G_R
  double stat = 0.0;         // standardised MOSUM / CUSUM value
  double jump = 0.0;         // |mean left - mean right| inside the detection interval
  std::optional<double> p_value;
  CandidateSource source = CandidateSource::Mosum;
};

struct CandidateSet {
  std::int64_t n = 0;
  std::vector<Candidate> candidates;  // sorted by location, unique locations
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return candidates.size(); }
  bool empty() const noexcept { return candidates.empty(); }
  std::vector<std::int64_t> locations() const;
};

enum class AuditStatus { Accepted, Discarded, Thinned };

struct CandidateAudit {
  std::int64_t location = 0;
  AuditStatus status = AuditStatus::Discarded;
  std::int64_t iteration = 0;  // 1-based LocAlg iteration that decided the candidate
};

struct Segmentation {
  std::int64_t n = 0;
  std::vector<std::int64_t> changepoints;
  std::vector<double> segment_means;
  double rss = 0.0;
  double sc = 0.0;
  double xi = 0.0;
  std::vector<CandidateAudit> audit;
  std::vector<std::string> warnings;

  std::int64_t q_hat() const noexcept { return static_cast<std::int64_t>(changepoints.size()); }
};

}  // namespace locprune
