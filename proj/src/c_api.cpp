#include "locprune/locprune.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "locprune/config.hpp"
#include "locprune/pipeline.hpp"
#include "locprune/simulation.hpp"

struct lp_series {
  locprune::TimeSeries series;
};

struct lp_config {
  locprune::RunConfig config;
  mutable std::string scratch;
};

struct lp_result {
  locprune::DetectResult result;
  std::string json;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

lp_status fail(lp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
lp_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return LP_OK;
  } catch (const locprune::InputError& e) {
    return fail(LP_ERR_IO, e.what());
  } catch (const locprune::ConfigError& e) {
    return fail(LP_ERR_CONFIG, e.what());
  } catch (const locprune::CapExceeded& e) {
    return fail(LP_ERR_CAP_EXCEEDED, e.what());
  } catch (const locprune::InvalidArgument& e) {
    return fail(LP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LP_ERR_INTERNAL, "unknown error");
  }
}

// Input length problems belong to the data, not to the caller.
locprune::TimeSeries checked_series(std::vector<double> values) {
  if (values.size() < 2) throw locprune::InputError("series needs at least 2 observations");
  try {
    return locprune::TimeSeries(std::move(values));
  } catch (const locprune::InvalidArgument& e) {
    throw locprune::InputError(e.what());
  }
}

void write_if_set(const locprune::RunConfig& cfg, const char* key, const std::string& text) {
  const auto path = cfg.get(key);
  if (!path.empty()) locprune::write_text_file(path, text);
}

}  // namespace

extern "C" {

const char* lp_last_error(void) { return g_last_error.c_str(); }

const char* lp_version(void) { return "1.0.0"; }

lp_status lp_series_from_array(const double* values, size_t n, lp_series** out) {
  if (!out || (!values && n > 0)) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] { *out = new lp_series{checked_series(std::vector<double>(values, values + n))}; });
}

lp_status lp_series_from_file(const char* path, int csv_col, lp_series** out) {
  if (!path || !out) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  if (csv_col < 0) return fail(LP_ERR_CONFIG, "csv column must be >= 1");
  return guarded([&] { *out = new lp_series{locprune::read_series(path, csv_col)}; });
}

size_t lp_series_length(const lp_series* series) { return series ? series->series.size() : 0; }

void lp_series_free(lp_series* series) { delete series; }

lp_status lp_config_new(lp_config** out) {
  if (!out) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] { *out = new lp_config{}; });
}

void lp_config_free(lp_config* config) { delete config; }

lp_status lp_config_set(lp_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] { config->config.set(key, value); });
}

const char* lp_config_get(const lp_config* config, const char* key) {
  if (!config || !key) return nullptr;
  if (!locprune::find_config_key(key)) return nullptr;
  config->scratch = config->config.get(key);
  return config->scratch.c_str();
}

lp_status lp_config_load_file(lp_config* config, const char* path) {
  if (!config || !path) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] { config->config.load_file(path); });
}

lp_status lp_config_validate(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    locprune::detect_config(config->config);
    if (config->config.get_int("csv_col") < 0) throw locprune::ConfigError("csv_col must be >= 0");
  });
}

size_t lp_config_key_count(void) { return locprune::config_keys().size(); }

const char* lp_config_key_name(size_t index) {
  const auto keys = locprune::config_keys();
  return index < keys.size() ? keys[index].name : nullptr;
}

const char* lp_config_key_default(size_t index) {
  const auto keys = locprune::config_keys();
  return index < keys.size() ? keys[index].default_value : nullptr;
}

const char* lp_config_key_help(size_t index) {
  const auto keys = locprune::config_keys();
  return index < keys.size() ? keys[index].help : nullptr;
}

lp_status lp_detect(const lp_series* series, const lp_config* config, lp_result** out) {
  if (!series || !config || !out) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    const auto cfg = locprune::detect_config(config->config);
    auto r = std::make_unique<lp_result>();
    r->result = locprune::detect(series->series, cfg);
    r->json = locprune::segmentation_json(r->result, cfg);
    r->csv = locprune::candidates_csv(r->result.candidates);
    *out = r.release();
  });
}

size_t lp_result_changepoint_count(const lp_result* result) {
  return result ? result->result.segmentation.changepoints.size() : 0;
}

int64_t lp_result_changepoint(const lp_result* result, size_t index) {
  if (!result || index >= result->result.segmentation.changepoints.size()) return -1;
  return result->result.segmentation.changepoints[index];
}

size_t lp_result_candidate_count(const lp_result* result) { return result ? result->result.candidates.size() : 0; }

double lp_result_rss(const lp_result* result) { return result ? result->result.segmentation.rss : 0.0; }

double lp_result_sc(const lp_result* result) { return result ? result->result.segmentation.sc : 0.0; }

double lp_result_candidate_ms(const lp_result* result) { return result ? result->result.candidate_ms : 0.0; }

double lp_result_prune_ms(const lp_result* result) { return result ? result->result.prune_ms : 0.0; }

const char* lp_result_json(const lp_result* result) { return result ? result->json.c_str() : nullptr; }

const char* lp_result_candidates_csv(const lp_result* result) { return result ? result->csv.c_str() : nullptr; }

void lp_result_free(lp_result* result) { delete result; }

lp_status lp_simulate(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    const auto& cfg = config->config;
    if (!cfg.get("input").empty()) throw locprune::ConfigError("simulate takes a signal, not an input file");
    const auto results = locprune::run_simulation(cfg);
    write_if_set(cfg, "metrics", locprune::replicates_csv(results));
    write_if_set(cfg, "summary", locprune::summary_csv(results));
    write_if_set(cfg, "histogram", locprune::histogram_csv(results));
  });
}

lp_status lp_bench(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    const auto rows = locprune::run_bench(config->config);
    write_if_set(config->config, "timings", locprune::bench_csv(rows));
  });
}

lp_status lp_generate(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    const auto& cfg = config->config;
    if (cfg.get("output").empty()) throw locprune::ConfigError("generate needs an output path");
    locprune::write_text_file(cfg.get("output"), locprune::generate_series_text(cfg));
  });
}

lp_status lp_detect_files(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "null pointer");
  return guarded([&] {
    const auto& cfg = config->config;
    const auto input = cfg.get("input");
    if (input.empty()) throw locprune::ConfigError("detect needs an input file");
    const auto col = cfg.get_int("csv_col");
    if (col < 0) throw locprune::ConfigError("csv_col must be >= 0");
    const auto dcfg = locprune::detect_config(cfg);
    const auto x = locprune::read_series(input, col);
    const auto result = locprune::detect(x, dcfg);
    write_if_set(cfg, "output", locprune::segmentation_json(result, dcfg));
    write_if_set(cfg, "candidates", locprune::candidates_csv(result.candidates));
  });
}

}  // extern "C"
