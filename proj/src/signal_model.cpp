#include "locprune/signal_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "locprune/rng.hpp"

namespace locprune {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw InvalidArgument("time series needs at least 2 observations");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("non-finite observation at t = " + std::to_string(i + 1));
    }
  }
}

const char* to_string(CandidateSource s) noexcept {
  return s == CandidateSource::Mosum ? "mosum" : "wbs";
}

std::vector<std::int64_t> CandidateSet::locations() const {
  std::vector<std::int64_t> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.location);
  return out;
}

std::vector<double> PiecewiseSignal::jumps() const {
  std::vector<double> d;
  d.reserve(changepoints.size());
  for (std::size_t j = 0; j < changepoints.size(); ++j) d.push_back(levels[j + 1] - levels[j]);
  return d;
}

std::vector<std::int64_t> PiecewiseSignal::spacings() const {
  std::vector<std::int64_t> out;
  out.reserve(changepoints.size());
  for (std::size_t j = 0; j < changepoints.size(); ++j) {
    const std::int64_t prev = j == 0 ? 0 : changepoints[j - 1];
    const std::int64_t next = j + 1 == changepoints.size() ? n : changepoints[j + 1];
    out.push_back(std::min(changepoints[j] - prev, next - changepoints[j]));
  }
  return out;
}

void PiecewiseSignal::validate() const {
  if (n < 2) throw InvalidArgument("signal length must be at least 2");
  if (levels.size() != changepoints.size() + 1) {
    throw InvalidArgument("signal needs exactly q + 1 levels");
  }
  std::int64_t prev = 0;
  for (auto cp : changepoints) {
    if (cp <= prev) throw InvalidArgument("change points must be strictly increasing and >= 1");
    if (cp > n - 1) throw InvalidArgument("change point out of range [1, n-1]");
    prev = cp;
  }
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!std::isfinite(levels[j])) throw InvalidArgument("non-finite signal level");
    if (j > 0 && levels[j] == levels[j - 1]) {
      throw InvalidArgument("adjacent levels must differ");
    }
  }
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw InvalidArgument("noise_sd must be positive");
}

PiecewiseSignal signal_from_segments(const std::vector<std::int64_t>& segment_ends,
                                     const std::vector<double>& levels) {
  if (segment_ends.empty() || segment_ends.size() != levels.size()) {
    throw InvalidArgument("need one level per segment");
  }
  PiecewiseSignal s;
  s.n = segment_ends.back();
  std::int64_t prev_end = 0;
  for (std::size_t i = 0; i < segment_ends.size(); ++i) {
    if (segment_ends[i] <= prev_end) throw InvalidArgument("segment ends must be strictly increasing");
    prev_end = segment_ends[i];
    if (!s.levels.empty() && s.levels.back() == levels[i]) {
      continue;  // merge with the previous segment
    }
    if (!s.levels.empty()) s.changepoints.push_back(segment_ends[i - 1]);
    s.levels.push_back(levels[i]);
  }
  return s;
}

TimeSeries build_signal(const PiecewiseSignal& spec) {
  spec.validate();
  std::vector<double> f(static_cast<std::size_t>(spec.n));
  std::int64_t start = 0;
  for (std::size_t j = 0; j < spec.levels.size(); ++j) {
    const std::int64_t end = j < spec.changepoints.size() ? spec.changepoints[j] : spec.n;
    std::fill(f.begin() + start, f.begin() + end, spec.levels[j]);
    start = end;
  }
  return TimeSeries(std::move(f));
}

ErrorSpec parse_error_spec(std::string_view text) {
  auto parse_num = [&](std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw InvalidArgument("bad number in error spec '" + std::string(text) + "'");
    }
    return v;
  };
  if (text == "gaussian" || text == "normal") return ErrorSpec::gaussian(0);
  if (text.starts_with("t:")) return ErrorSpec::student_t(parse_num(text.substr(2)), 0);
  if (text.starts_with("ar1:")) return ErrorSpec::ar1(parse_num(text.substr(4)), 0);
  throw InvalidArgument("unknown error model '" + std::string(text) +
                        "' (expected gaussian, t:<df> or ar1:<rho>)");
}

std::string to_string(const ErrorSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case ErrorSpec::Kind::IidGaussian: os << "gaussian"; break;
    case ErrorSpec::Kind::IidT: os << "t:" << spec.df; break;
    case ErrorSpec::Kind::Ar1: os << "ar1:" << spec.rho; break;
  }
  return os.str();
}

TimeSeries generate_errors(const ErrorSpec& spec, std::int64_t n) {
  if (n < 2) throw InvalidArgument("error series needs n >= 2");
  Rng rng(spec.seed);
  std::vector<double> e(static_cast<std::size_t>(n));
  switch (spec.kind) {
    case ErrorSpec::Kind::IidGaussian:
      for (auto& v : e) v = rng.normal();
      break;
    case ErrorSpec::Kind::IidT: {
      if (!(spec.df > 2.0)) throw InvalidArgument("t errors need df > 2 for a finite variance");
      const double scale = 1.0 / std::sqrt(spec.df / (spec.df - 2.0));
      for (auto& v : e) v = rng.student_t(spec.df) * scale;
      break;
    }
    case ErrorSpec::Kind::Ar1: {
      if (!(std::abs(spec.rho) < 1.0)) throw InvalidArgument("AR(1) errors need |rho| < 1");
      const double innov_sd = std::sqrt(1.0 - spec.rho * spec.rho);
      e[0] = rng.normal();
      for (std::size_t t = 1; t < e.size(); ++t) e[t] = spec.rho * e[t - 1] + innov_sd * rng.normal();
      break;
    }
  }
  return TimeSeries(std::move(e));
}

TestSignal parse_test_signal(std::string_view name) {
  if (name == "blocks") return TestSignal::Blocks;
  if (name == "fms") return TestSignal::Fms;
  if (name == "mix") return TestSignal::Mix;
  if (name == "teeth10") return TestSignal::Teeth10;
  if (name == "stairs10") return TestSignal::Stairs10;
  throw InvalidArgument("unknown test signal '" + std::string(name) + "'");
}

SignalVariant parse_signal_variant(std::string_view name) {
  if (name == "original") return SignalVariant::Original;
  if (name == "dense") return SignalVariant::Dense;
  if (name == "sparse") return SignalVariant::Sparse;
  throw InvalidArgument("unknown signal variant '" + std::string(name) + "'");
}

const char* to_string(TestSignal s) noexcept {
  switch (s) {
    case TestSignal::Blocks: return "blocks";
    case TestSignal::Fms: return "fms";
    case TestSignal::Mix: return "mix";
    case TestSignal::Teeth10: return "teeth10";
    case TestSignal::Stairs10: return "stairs10";
  }
  return "?";
}

const char* to_string(SignalVariant v) noexcept {
  switch (v) {
    case SignalVariant::Original: return "original";
    case SignalVariant::Dense: return "dense";
    case SignalVariant::Sparse: return "sparse";
  }
  return "?";
}

namespace {

struct Segments {
  std::vector<std::int64_t> ends;
  std::vector<double> levels;
};

Segments to_segments(const PiecewiseSignal& s) {
  Segments out;
  out.ends = s.changepoints;
  out.ends.push_back(s.n);
  out.levels = s.levels;
  return out;
}

PiecewiseSignal from_segments_like(const Segments& seg, const PiecewiseSignal& like) {
  auto out = signal_from_segments(seg.ends, seg.levels);
  out.noise_sd = like.noise_sd;
  out.name = like.name;
  return out;
}

}  // namespace

std::int64_t ar1_stretch_factor(double rho) {
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("|rho| must be < 1");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / (1.0 - rho))));
}

PiecewiseSignal stretch_segments(const PiecewiseSignal& signal, std::int64_t factor) {
  if (factor < 1) throw InvalidArgument("stretch factor must be >= 1");
  if (factor == 1) return signal;
  auto seg = to_segments(signal);
  for (auto& e : seg.ends) e *= factor;
  return from_segments_like(seg, signal);
}

PiecewiseSignal concatenate_until(const PiecewiseSignal& signal, std::int64_t min_length) {
  const auto base = to_segments(signal);
  const std::int64_t copies = min_length / signal.n + 1;
  Segments seg;
  for (std::int64_t k = 0; k < copies; ++k) {
    for (std::size_t i = 0; i < base.ends.size(); ++i) {
      seg.ends.push_back(base.ends[i] + k * signal.n);
      seg.levels.push_back(base.levels[i]);
    }
  }
  return from_segments_like(seg, signal);
}

PiecewiseSignal embed_sparse(const PiecewiseSignal& signal, std::int64_t total_length,
                             std::int64_t offset) {
  if (offset < 1 || offset + signal.n >= total_length) {
    throw InvalidArgument("signal does not fit into the sparse embedding");
  }
  // Flat stretches extend the first and last levels so that no change
  // points are created at the embedding boundaries.
  auto shifted = signal;
  for (auto& cp : shifted.changepoints) cp += offset;
  shifted.n = total_length;
  return shifted;
}

PiecewiseSignal test_signal(TestSignal name, SignalVariant variant, std::int64_t stretch) {
  auto base = parse_signal_definition(bundled_signal_text(name), to_string(name));
  base = stretch_segments(base, stretch);
  switch (variant) {
    case SignalVariant::Original: return base;
    case SignalVariant::Dense: return concatenate_until(base, kLongSignalLength);
    case SignalVariant::Sparse: return embed_sparse(base, kLongSignalLength, kSparseOffset);
  }
  return base;
}

PiecewiseSignal test_signal(std::string_view name, SignalVariant variant, std::int64_t stretch) {
  return test_signal(parse_test_signal(name), variant, stretch);
}

PiecewiseSignal parse_signal_definition(std::string_view text, std::string name) {
  std::vector<std::int64_t> ends;
  std::vector<double> levels;
  double noise_sd = 1.0;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.starts_with("#!")) {
      auto eq = line.find('=');
      auto key_start = line.find_first_not_of(" \t", 2);
      if (eq == std::string::npos || key_start == std::string::npos) continue;
      std::string key = line.substr(key_start, eq - key_start);
      key.erase(key.find_last_not_of(" \t") + 1);
      if (key == "noise_sd") noise_sd = std::stod(line.substr(eq + 1));
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream fields(line);
    std::int64_t end = 0;
    double level = 0.0;
    if (!(fields >> end)) continue;  // blank line
    if (!(fields >> level)) {
      throw InputError("signal definition line " + std::to_string(line_no) + ": expected '<end> <level>'");
    }
    ends.push_back(end);
    levels.push_back(level);
  }
  if (ends.empty()) throw InputError("signal definition has no segments");
  auto s = signal_from_segments(ends, levels);
  s.noise_sd = noise_sd;
  s.name = std::move(name);
  s.validate();
  return s;
}

PiecewiseSignal load_signal_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open signal file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return parse_signal_definition(buf.str(), name);
}

}  // namespace locprune
