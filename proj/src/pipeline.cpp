#include "locprune/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace locprune {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename F>
auto as_config_error(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

const char* status_name(AuditStatus s) {
  switch (s) {
    case AuditStatus::Accepted: return "accepted";
    case AuditStatus::Discarded: return "discarded";
    case AuditStatus::Thinned: return "thinned";
  }
  return "?";
}

bool parse_real(std::string_view s, double& v) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Method parse_method(std::string_view text) {
  if (text == "molp" || text == "mosum") return Method::Molp;
  if (text == "culp" || text == "wbs") return Method::Culp;
  if (text == "both") return Method::Both;
  throw InvalidArgument("unknown method '" + std::string(text) + "' (expected molp, culp or both)");
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::Molp: return "molp";
    case Method::Culp: return "culp";
    case Method::Both: return "both";
  }
  return "?";
}

VarianceMode parse_variance_mode(std::string_view text) {
  if (text == "auto") return VarianceMode::Auto;
  if (text == "local") return VarianceMode::Local;
  if (text == "global") return VarianceMode::Global;
  if (text == "ar1") return VarianceMode::Ar1;
  throw InvalidArgument("unknown variance mode '" + std::string(text) + "'");
}

const char* to_string(VarianceMode v) noexcept {
  switch (v) {
    case VarianceMode::Auto: return "auto";
    case VarianceMode::Local: return "local";
    case VarianceMode::Global: return "global";
    case VarianceMode::Ar1: return "ar1";
  }
  return "?";
}

void DetectConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (g0 < 2) throw ConfigError("g0 must be at least 2");
  if (!(c_asym >= 1.0)) throw ConfigError("c_asym must be >= 1");
  if (cap < 1 || cap > 30) throw ConfigError("n_cap must lie in [1, 30]");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (method == Method::Culp && sort == SortKind::InvPValue) {
    throw ConfigError("sort=pvalue needs MOSUM p-values; use sort=jump with method=culp");
  }
  try {
    wbs.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

DetectConfig detect_config(const RunConfig& cfg, std::int64_t g0_auto) {
  DetectConfig d;
  const auto methods = cfg.get_list("method");
  if (methods.size() != 1) throw ConfigError("method: exactly one method expected for a detection run");
  d.method = as_config_error("method", [&] { return parse_method(methods.front()); });
  d.alpha = cfg.get_double("alpha");
  d.eta = cfg.get_double("eta");
  d.g0 = cfg.get("g0") == "auto" ? g0_auto : cfg.get_int("g0");
  d.c_asym = cfg.get_double("c_asym");
  d.variance = as_config_error("variance", [&] { return parse_variance_mode(cfg.get("variance")); });
  d.window_variance =
      as_config_error("window_variance", [&] { return parse_window_variance(cfg.get("window_variance")); });
  d.wbs.r_per_recursion = cfg.get_int("wbs_r");
  d.wbs.c_zeta = cfg.get_double("c_zeta");
  d.wbs.k_const = cfg.get_double("k");
  d.wbs.min_seg = cfg.get_int("min_seg");
  if (const auto m = cfg.get_int("wbs_max_candidates"); m > 0) d.wbs.max_candidates = m;
  d.wbs.seed = cfg.get_u64("seed");
  d.penalty = as_config_error("penalty", [&] { return Penalty::parse(cfg.get("penalty")); });
  as_config_error("penalty", [&] { return d.penalty.evaluate(1000); });
  d.sort = as_config_error("sort", [&] { return parse_sort_kind(cfg.get("sort")); });
  const auto cap = cfg.get_int("n_cap");
  if (cap < 1 || cap > 30) throw ConfigError("n_cap must lie in [1, 30]");
  d.cap = static_cast<std::size_t>(cap);
  const auto threads = cfg.get_int("threads");
  if (threads < 1 || threads > 1024) throw ConfigError("threads must lie in [1, 1024]");
  d.threads = static_cast<unsigned>(threads);
  d.validate();
  return d;
}

CandidateSet generate_candidates(const TimeSeries& x, const DetectConfig& cfg, std::optional<double>* rho) {
  CandidateSet mosum;
  CandidateSet wbs;
  if (cfg.method != Method::Culp) {
    const auto grid = bandwidth_grid(x.n(), cfg.g0, cfg.c_asym);
    switch (cfg.variance) {
      case VarianceMode::Auto:
      case VarianceMode::Local:
      case VarianceMode::Global: {
        auto spec = cfg.variance == VarianceMode::Global ? VarianceSpec::global() : VarianceSpec::local();
        spec.window = cfg.window_variance;
        mosum = multiscale_candidates(x, grid, cfg.alpha, cfg.eta, spec, cfg.threads);
        break;
      }
      case VarianceMode::Ar1: {
        auto run = ar1_corrected_candidates(x, grid, cfg.alpha, cfg.eta, cfg.threads, cfg.window_variance);
        if (rho) *rho = run.rho;
        mosum = std::move(run.candidates);
        break;
      }
    }
  }
  if (cfg.method != Method::Molp) wbs = wbs2_candidates(x, cfg.wbs);
  if (cfg.method == Method::Molp) return mosum;
  if (cfg.method == Method::Culp) return wbs;
  std::vector<Candidate> all = mosum.candidates;
  all.insert(all.end(), wbs.candidates.begin(), wbs.candidates.end());
  auto warnings = mosum.warnings;
  warnings.insert(warnings.end(), wbs.warnings.begin(), wbs.warnings.end());
  return merge_candidates(x.n(), std::move(all), std::move(warnings));
}

DetectResult detect(const TimeSeries& x, const DetectConfig& cfg) {
  cfg.validate();
  DetectResult r;
  auto start = Clock::now();
  r.candidates = generate_candidates(x, cfg, &r.rho);
  r.candidate_ms = elapsed_ms(start);
  start = Clock::now();
  const double xi = cfg.penalty.evaluate(x.n());
  r.segmentation = loc_alg(x, r.candidates, xi, {cfg.sort, cfg.cap});
  r.prune_ms = elapsed_ms(start);
  auto& w = r.segmentation.warnings;
  w.insert(w.begin(), r.candidates.warnings.begin(), r.candidates.warnings.end());
  return r;
}

TimeSeries parse_series(std::string_view text, std::int64_t csv_col) {
  if (csv_col < 0) throw InputError("csv column must be >= 1");
  std::vector<double> values;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string_view field = line;
    if (csv_col > 0) {
      std::size_t start = 0;
      for (std::int64_t c = 1; c < csv_col; ++c) {
        start = line.find(',', start);
        if (start == std::string::npos) {
          throw InputError("line " + std::to_string(line_no) + " has fewer than " + std::to_string(csv_col) +
                           " columns");
        }
        ++start;
      }
      const auto end = line.find(',', start);
      field = std::string_view(line).substr(start, end == std::string::npos ? std::string::npos : end - start);
    }
    double v = 0.0;
    if (!parse_real(field, v)) {
      if (first_data_line && csv_col > 0) {
        first_data_line = false;  // header
        continue;
      }
      throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) throw InputError("line " + std::to_string(line_no) + ": non-finite value");
    first_data_line = false;
    values.push_back(v);
  }
  if (values.size() < 2) throw InputError("input holds fewer than 2 observations");
  return TimeSeries(std::move(values));
}

TimeSeries read_series(const std::string& path, std::int64_t csv_col) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_series(buf.str(), csv_col);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string segmentation_json(const DetectResult& result, const DetectConfig& cfg) {
  using nlohmann::ordered_json;
  const auto& seg = result.segmentation;
  ordered_json j;
  j["schema_version"] = kSegmentationSchemaVersion;
  j["n"] = seg.n;
  j["q_hat"] = seg.q_hat();
  j["changepoints"] = seg.changepoints;
  j["segment_means"] = seg.segment_means;
  j["rss"] = seg.rss;
  j["sc"] = seg.sc;
  j["xi"] = seg.xi;
  ordered_json c;
  c["method"] = to_string(cfg.method);
  if (cfg.method != Method::Culp) {
    c["alpha"] = cfg.alpha;
    c["eta"] = cfg.eta;
    c["g0"] = cfg.g0;
    c["c_asym"] = cfg.c_asym;
    c["variance"] = to_string(cfg.variance);
    c["window_variance"] = to_string(cfg.window_variance);
  }
  if (cfg.method != Method::Molp) {
    c["wbs_r"] = cfg.wbs.r_per_recursion;
    c["c_zeta"] = cfg.wbs.c_zeta;
    c["k"] = cfg.wbs.k_const;
    c["min_seg"] = cfg.wbs.min_seg;
    c["seed"] = cfg.wbs.seed;
  }
  c["penalty"] = cfg.penalty.to_string();
  c["sort"] = to_string(cfg.sort);
  c["n_cap"] = cfg.cap;
  j["config"] = c;
  if (result.rho) j["rho"] = *result.rho;
  j["candidate_count"] = result.candidates.size();
  ordered_json audit = ordered_json::array();
  for (const auto& a : seg.audit) {
    audit.push_back({{"location", a.location}, {"status", status_name(a.status)}, {"iteration", a.iteration}});
  }
  j["audit"] = audit;
  j["warnings"] = seg.warnings;
  return j.dump(2) + "\n";
}

std::string candidates_csv(const CandidateSet& candidates) {
  std::string out = "location,g_left,g_right,stat,jump,p_value,source\n";
  for (const auto& c : candidates.candidates) {
    out += std::to_string(c.location) + ',' + std::to_string(c.g_left) + ',' + std::to_string(c.g_right) + ',' +
           format_double(c.stat) + ',' + format_double(c.jump) + ',' +
           (c.p_value ? format_double(*c.p_value) : std::string()) + ',' + to_string(c.source) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace locprune
