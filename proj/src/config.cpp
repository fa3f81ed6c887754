#include "locprune/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "locprune/types.hpp"

namespace locprune {
namespace {

constexpr std::array kKeys = {
    ConfigKey{"input", "", "input series: one number per line, or a CSV file with csv_col"},
    ConfigKey{"csv_col", "0", "1-based CSV column to read (0: one value per line)"},
    ConfigKey{"signal", "blocks", "test signal(s): blocks, fms, mix, teeth10, stairs10, flat:<n>, file:<path>"},
    ConfigKey{"variant", "original", "signal variant: original, dense, sparse"},
    ConfigKey{"errors", "gaussian", "error model(s): gaussian, t:<df>, ar1:<rho>"},
    ConfigKey{"noise_sd", "auto", "noise scale (auto: value bundled with the signal)"},
    ConfigKey{"stretch", "auto", "segment stretch factor (auto: floor(1/(1-rho)) for ar1 errors, else 1)"},
    ConfigKey{"method", "molp", "candidate generator(s): molp (MOSUM), culp (WBS2), both"},
    ConfigKey{"alpha", "0.2", "MOSUM significance level per bandwidth"},
    ConfigKey{"eta", "0.4", "MOSUM local-maximum window fraction"},
    ConfigKey{"g0", "auto", "smallest MOSUM bandwidth (auto: 10, or max(10, floor(8/(1-rho))) for simulated ar1 errors)"},
    ConfigKey{"c_asym", "4", "maximal bandwidth imbalance in the MOSUM grid"},
    ConfigKey{"variance", "auto", "MOSUM variance: auto (ar1 for simulated ar1 errors, else local), local, global, ar1"},
    ConfigKey{"window_variance", "pooled", "MOSUM window variance: pooled or unbiased"},
    ConfigKey{"wbs_r", "100", "WBS2 intervals drawn per recursion"},
    ConfigKey{"c_zeta", "0.9", "WBS2 threshold deflation factor"},
    ConfigKey{"k", "1.3", "WBS2 threshold constant"},
    ConfigKey{"min_seg", "5", "WBS2 minimal distance of a candidate to its interval ends"},
    ConfigKey{"wbs_max_candidates", "0", "WBS2 candidate budget capping the recursion depth (0: none)"},
    ConfigKey{"penalty", "log1.1", "SC penalty: log1.01, log1.1, heavy_t, heavy_ar, xi:<v>, log_pow:<p>, poly:<e>"},
    ConfigKey{"sort", "jump", "candidate ranking: jump or pvalue"},
    ConfigKey{"n_cap", "24", "maximal local pruning set size"},
    ConfigKey{"seed", "1", "master seed"},
    ConfigKey{"replicates", "100", "simulation replicates per grid cell"},
    ConfigKey{"threads", "1", "worker threads"},
    ConfigKey{"timing", "off", "record wall-clock runtime in the speed columns: on or off"},
    ConfigKey{"bench_n", "2000,8000,32000", "series lengths for bench"},
    ConfigKey{"bench_reps", "3", "timed repetitions per bench length"},
    ConfigKey{"output", "", "segmentation JSON path (detect) or series path (generate)"},
    ConfigKey{"candidates", "", "candidate CSV path"},
    ConfigKey{"metrics", "", "per-replicate metrics CSV path"},
    ConfigKey{"summary", "", "aggregated metrics CSV path"},
    ConfigKey{"histogram", "", "estimated location histogram CSV path"},
    ConfigKey{"timings", "", "bench timing CSV path"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

const ConfigKey* find_config_key(std::string_view name) {
  for (const auto& k : kKeys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  if (!find_config_key(key)) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  values_[std::string(key)] = trim(value);
}

void RunConfig::unset(std::string_view key) { values_.erase(std::string(key)); }

bool RunConfig::is_set(std::string_view key) const { return values_.contains(std::string(key)); }

std::string RunConfig::get(std::string_view key) const {
  const auto* k = find_config_key(key);
  if (!k) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  auto it = values_.find(std::string(key));
  return it == values_.end() ? k->default_value : it->second;
}

double RunConfig::get_double(std::string_view key) const {
  const auto s = get(key);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::int64_t RunConfig::get_int(std::string_view key) const {
  const auto s = get(key);
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const auto s = get(key);
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void RunConfig::load_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  load_text(buf.str());
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& k : kKeys) {
    out += k.name;
    out += '=';
    out += get(k.name);
    out += '\n';
  }
  return out;
}

}  // namespace locprune
