#include "locprune/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "locprune/rng.hpp"

namespace locprune {
namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string cell_prefix(const Scenario& s) {
  return s.signal_name + ',' + to_string(s.variant) + ',' + to_string(s.errors) + ',' + to_string(s.detect.method) +
         ',' + s.detect.penalty.to_string();
}

std::string speed(const Scenario& s, double runtime_ms) {
  return s.record_runtime ? format_double(runtime_ms / 1000.0) : std::string("NA");
}

template <typename F>
auto as_config_error(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

double noise_scale(const RunConfig& cfg, const PiecewiseSignal& truth) {
  if (cfg.get("noise_sd") == "auto") return truth.noise_sd;
  const double sd = cfg.get_double("noise_sd");
  if (!(sd >= 0.0)) throw ConfigError("noise_sd must be non-negative");
  return sd;
}

std::int64_t stretch_for(const RunConfig& cfg, const ErrorSpec& errors) {
  if (cfg.get("stretch") != "auto") {
    const auto s = cfg.get_int("stretch");
    if (s < 1) throw ConfigError("stretch must be >= 1");
    return s;
  }
  return errors.kind == ErrorSpec::Kind::Ar1 ? ar1_stretch_factor(errors.rho) : 1;
}

// Serially dependent errors get a wider smallest bandwidth and the
// AR(1)-corrected variance unless configured otherwise.
DetectConfig detect_for_errors(const RunConfig& cfg, const ErrorSpec& errors) {
  if (errors.kind != ErrorSpec::Kind::Ar1) return detect_config(cfg);
  const auto g0 = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::floor(8.0 / (1.0 - errors.rho))));
  auto d = detect_config(cfg, g0);
  if (cfg.get("variance") == "auto") d.variance = VarianceMode::Ar1;
  return d;
}

}  // namespace

PiecewiseSignal resolve_signal(std::string_view spec, SignalVariant variant, std::int64_t stretch) {
  PiecewiseSignal base;
  if (spec.starts_with("flat:")) {
    std::int64_t n = 0;
    const auto digits = spec.substr(5);
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || n < 2) {
      throw InvalidArgument("flat signal needs a length >= 2, got '" + std::string(spec) + "'");
    }
    base = PiecewiseSignal{n, {}, {0.0}, 1.0, std::string(spec)};
  } else if (spec.starts_with("file:")) {
    base = load_signal_file(std::string(spec.substr(5)));
  } else {
    base = test_signal(parse_test_signal(spec), SignalVariant::Original);
  }
  base = stretch_segments(base, stretch);
  switch (variant) {
    case SignalVariant::Original: return base;
    case SignalVariant::Dense: return concatenate_until(base, kLongSignalLength);
    case SignalVariant::Sparse: return embed_sparse(base, kLongSignalLength, kSparseOffset);
  }
  return base;
}

PiecewiseSignal truncate_signal(const PiecewiseSignal& signal, std::int64_t n) {
  if (n < 2 || n > signal.n) throw InvalidArgument("truncation length must lie in [2, n]");
  PiecewiseSignal out = signal;
  out.n = n;
  out.changepoints.clear();
  out.levels = {signal.levels.front()};
  for (std::size_t j = 0; j < signal.changepoints.size() && signal.changepoints[j] < n; ++j) {
    out.changepoints.push_back(signal.changepoints[j]);
    out.levels.push_back(signal.levels[j + 1]);
  }
  return out;
}

TimeSeries simulate_series(const PiecewiseSignal& truth, double noise_sd, const ErrorSpec& errors) {
  auto f = build_signal(truth);
  auto e = generate_errors(errors, truth.n);
  std::vector<double> x(f.values().begin(), f.values().end());
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += noise_sd * e[t];
  return TimeSeries(std::move(x));
}

std::uint64_t replicate_seed(std::uint64_t master, std::int64_t replicate) {
  return derive_seed(master, static_cast<std::uint64_t>(replicate));
}

ScenarioResult run_scenario(const Scenario& scenario, std::int64_t replicates, std::uint64_t master_seed,
                            unsigned threads) {
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  ScenarioResult out;
  out.scenario = scenario;
  out.replicates.resize(static_cast<std::size_t>(replicates));
  DetectConfig detect = scenario.detect;
  detect.threads = 1;

  auto run_one = [&](std::int64_t r) {
    ReplicateResult rr;
    rr.replicate = r;
    rr.seed = replicate_seed(master_seed, r);
    ErrorSpec errors = scenario.errors;
    errors.seed = rr.seed;
    DetectConfig d = detect;
    d.wbs.seed = splitmix64(rr.seed);
    const auto x = simulate_series(scenario.truth, scenario.noise_sd, errors);
    const auto start = Clock::now();
    const auto result = locprune::detect(x, d);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    rr.candidates = static_cast<std::int64_t>(result.candidates.size());
    rr.estimates = result.segmentation.changepoints;
    rr.report = evaluate(x, scenario.truth, result.segmentation, scenario.record_runtime ? ms : 0.0);
    out.replicates[static_cast<std::size_t>(r)] = std::move(rr);
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicates)));
  if (threads == 1) {
    for (std::int64_t r = 0; r < replicates; ++r) run_one(r);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::int64_t r = next++; r < replicates; r = next++) run_one(r);
          } catch (...) {
            errors[t] = std::current_exception();
            next = replicates;
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<EvalReport> reports;
  reports.reserve(out.replicates.size());
  for (const auto& r : out.replicates) reports.push_back(r.report);
  out.aggregate = aggregate(reports);
  return out;
}

std::vector<Scenario> simulation_grid(const RunConfig& cfg) {
  const auto signals = cfg.get_list("signal");
  const auto errors = cfg.get_list("errors");
  const auto methods = cfg.get_list("method");
  if (signals.empty() || errors.empty() || methods.empty()) {
    throw ConfigError("simulation grid needs at least one signal, error model and method");
  }
  const auto variant = as_config_error("variant", [&] { return parse_signal_variant(cfg.get("variant")); });
  const auto timing = cfg.get("timing");
  if (timing != "on" && timing != "off") throw ConfigError("timing must be on or off");
  std::vector<Scenario> grid;
  for (const auto& sig : signals) {
    for (const auto& err : errors) {
      const auto spec = as_config_error("errors", [&] {
        auto e = parse_error_spec(err);
        if (e.kind == ErrorSpec::Kind::IidT && !(e.df > 2.0)) throw InvalidArgument("t errors need df > 2");
        if (e.kind == ErrorSpec::Kind::Ar1 && !(std::abs(e.rho) < 1.0)) throw InvalidArgument("|rho| must be < 1");
        return e;
      });
      const auto stretch = stretch_for(cfg, spec);
      const auto truth = as_config_error("signal", [&] { return resolve_signal(sig, variant, stretch); });
      for (const auto& m : methods) {
        RunConfig single = cfg;
        single.set("method", m);
        Scenario s;
        s.signal_name = sig;
        s.variant = variant;
        s.truth = truth;
        s.noise_sd = noise_scale(cfg, truth);
        s.errors = spec;
        s.detect = detect_for_errors(single, spec);
        s.record_runtime = timing == "on";
        grid.push_back(std::move(s));
      }
    }
  }
  return grid;
}

std::vector<ScenarioResult> run_simulation(const RunConfig& cfg) {
  const auto grid = simulation_grid(cfg);
  const auto replicates = cfg.get_int("replicates");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  const auto seed = cfg.get_u64("seed");
  const auto threads = static_cast<unsigned>(std::max<std::int64_t>(1, cfg.get_int("threads")));
  std::vector<ScenarioResult> out;
  for (const auto& s : grid) out.push_back(run_scenario(s, replicates, seed, threads));
  return out;
}

std::string replicates_csv(const std::vector<ScenarioResult>& results) {
  std::string out =
      "signal,variant,errors,method,penalty,replicate,seed,q,q_hat,candidates,TPR,FPR,ARI,MSE,BIC,delta_trim,"
      "hausdorff,speed\n";
  for (const auto& res : results) {
    const auto prefix = cell_prefix(res.scenario);
    for (const auto& r : res.replicates) {
      const auto& e = r.report;
      out += prefix + ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',' +
             std::to_string(res.scenario.truth.q()) + ',' + std::to_string(e.q_hat) + ',' +
             std::to_string(r.candidates) + ',' + (e.tpr_undefined ? std::string("NA") : format_double(e.tpr)) + ',' +
             format_double(e.fpr) + ',' + format_double(e.ari) + ',' + format_double(e.mse_rel) + ',' +
             format_double(e.bic) + ',' + format_double(e.delta_trim) + ',' + std::to_string(e.hausdorff) + ',' +
             speed(res.scenario, e.runtime_ms) + '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<ScenarioResult>& results) {
  std::string out =
      "signal,variant,errors,method,penalty,replicates,q,q_hat,TPR,FPR,ARI,MSE,BIC,delta_trim,v_trim,hausdorff,"
      "speed\n";
  for (const auto& res : results) {
    const auto& a = res.aggregate;
    out += cell_prefix(res.scenario) + ',' + std::to_string(a.replicates) + ',' +
           std::to_string(res.scenario.truth.q()) + ',' + format_double(a.q_hat) + ',' + format_double(a.tpr) + ',' +
           format_double(a.fpr) + ',' + format_double(a.ari) + ',' + format_double(a.mse_rel) + ',' +
           format_double(a.bic) + ',' + format_double(a.delta_trim) + ',' + format_double(a.v_trim) + ',' +
           format_double(a.hausdorff) + ',' + speed(res.scenario, a.runtime_ms) + '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<ScenarioResult>& results) {
  std::string out = "signal,variant,errors,method,penalty,cp_index,theta,location,count\n";
  for (const auto& res : results) {
    const auto& th = res.scenario.truth.changepoints;
    const auto n = res.scenario.truth.n;
    const auto prefix = cell_prefix(res.scenario);
    for (std::size_t j = 0; j < th.size(); ++j) {
      const double lo = 0.5 * static_cast<double>((j == 0 ? 0 : th[j - 1]) + th[j]);
      const double hi = 0.5 * static_cast<double>(th[j] + (j + 1 == th.size() ? n : th[j + 1]));
      std::map<std::int64_t, std::int64_t> counts;
      for (const auto& r : res.replicates) {
        for (auto e : r.estimates) {
          if (static_cast<double>(e) >= lo && static_cast<double>(e) <= hi) ++counts[e];
        }
      }
      for (const auto& [loc, count] : counts) {
        out += prefix + ',' + std::to_string(j + 1) + ',' + std::to_string(th[j]) + ',' + std::to_string(loc) + ',' +
               std::to_string(count) + '\n';
      }
    }
  }
  return out;
}

std::vector<BenchRow> run_bench(const RunConfig& cfg) {
  const auto lengths = cfg.get_list("bench_n");
  if (lengths.empty()) throw ConfigError("bench_n needs at least one length");
  const auto reps = cfg.get_int("bench_reps");
  if (reps < 1) throw ConfigError("bench_reps must be >= 1");
  const auto signals = cfg.get_list("signal");
  const auto errors = cfg.get_list("errors");
  if (signals.empty() || errors.empty()) throw ConfigError("bench needs a signal and an error model");
  const auto err = as_config_error("errors", [&] { return parse_error_spec(errors.front()); });
  const auto stretch = stretch_for(cfg, err);
  const auto detect = detect_for_errors(cfg, err);
  const auto seed = cfg.get_u64("seed");

  std::vector<BenchRow> rows;
  for (const auto& len : lengths) {
    std::int64_t n = 0;
    auto res = std::from_chars(len.data(), len.data() + len.size(), n);
    if (res.ec != std::errc() || res.ptr != len.data() + len.size() || n < 10) {
      throw ConfigError("bench_n: invalid length '" + len + "'");
    }
    PiecewiseSignal truth;
    if (signals.front().starts_with("flat")) {
      truth = PiecewiseSignal{n, {}, {0.0}, 1.0, "flat"};
    } else {
      auto base = as_config_error("signal", [&] { return resolve_signal(signals.front(), SignalVariant::Original, stretch); });
      truth = truncate_signal(concatenate_until(base, n), n);
    }
    const double sd = noise_scale(cfg, truth);
    std::vector<double> cand_ms, prune_ms, total_ms;
    BenchRow row;
    row.n = n;
    row.reps = reps;
    for (std::int64_t r = 0; r < reps; ++r) {
      ErrorSpec e = err;
      e.seed = replicate_seed(seed, r);
      const auto x = simulate_series(truth, sd, e);
      const auto out = locprune::detect(x, detect);
      cand_ms.push_back(out.candidate_ms);
      prune_ms.push_back(out.prune_ms);
      total_ms.push_back(out.candidate_ms + out.prune_ms);
      row.candidates = static_cast<std::int64_t>(out.candidates.size());
      row.q_hat = out.segmentation.q_hat();
    }
    row.candidate_ms = median(cand_ms);
    row.prune_ms = median(prune_ms);
    row.total_ms = median(total_ms);
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "n,reps,candidate_ms,prune_ms,total_ms,candidates,q_hat\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.reps) + ',' + format_double(r.candidate_ms) + ',' +
           format_double(r.prune_ms) + ',' + format_double(r.total_ms) + ',' + std::to_string(r.candidates) + ',' +
           std::to_string(r.q_hat) + '\n';
  }
  return out;
}

std::string generate_series_text(const RunConfig& cfg) {
  const auto signals = cfg.get_list("signal");
  const auto errors = cfg.get_list("errors");
  if (signals.size() != 1 || errors.size() != 1) throw ConfigError("generate needs exactly one signal and error model");
  auto err = as_config_error("errors", [&] { return parse_error_spec(errors.front()); });
  const auto variant = as_config_error("variant", [&] { return parse_signal_variant(cfg.get("variant")); });
  const auto truth = as_config_error("signal", [&] { return resolve_signal(signals.front(), variant, stretch_for(cfg, err)); });
  err.seed = replicate_seed(cfg.get_u64("seed"), 0);
  const auto x = as_config_error("errors", [&] { return simulate_series(truth, noise_scale(cfg, truth), err); });
  std::string out = "# signal=" + signals.front() + " variant=" + to_string(variant) + " errors=" + to_string(err) +
                    " seed=" + cfg.get("seed") + "\n";
  for (double v : x.values()) out += format_double(v) + '\n';
  return out;
}

}  // namespace locprune
