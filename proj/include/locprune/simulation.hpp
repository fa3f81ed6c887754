#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "locprune/config.hpp"
#include "locprune/evaluation.hpp"
#include "locprune/pipeline.hpp"
#include "locprune/signal_model.hpp"

namespace locprune {

/// Signal by name ("blocks", ...), "flat:<n>" or "file:<path>", in the given
/// variant and with every segment stretched by `stretch`.
PiecewiseSignal resolve_signal(std::string_view spec, SignalVariant variant, std::int64_t stretch = 1);

/// First n observations of a signal, keeping its noise scale.
PiecewiseSignal truncate_signal(const PiecewiseSignal& signal, std::int64_t n);

/// f + noise_sd * errors, with the error stream seeded from errors.seed.
TimeSeries simulate_series(const PiecewiseSignal& truth, double noise_sd, const ErrorSpec& errors);

/// Seed of replicate r: splitmix64(master XOR r).
std::uint64_t replicate_seed(std::uint64_t master, std::int64_t replicate);

/// One point of a simulation grid, fully resolved.
struct Scenario {
  std::string signal_name;
  SignalVariant variant = SignalVariant::Original;
  PiecewiseSignal truth;
  double noise_sd = 1.0;
  ErrorSpec errors;
  DetectConfig detect;
  bool record_runtime = false;  // speed columns read NA when off
};

struct ReplicateResult {
  std::int64_t replicate = 0;
  std::uint64_t seed = 0;
  std::int64_t candidates = 0;
  std::vector<std::int64_t> estimates;
  EvalReport report;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<ReplicateResult> replicates;
  AggregateReport aggregate;
};

/// Runs R replicates; replicates are spread over `threads` workers and the
/// result does not depend on the thread count.
ScenarioResult run_scenario(const Scenario& scenario, std::int64_t replicates, std::uint64_t master_seed,
                            unsigned threads = 1);

/// Expands signal x errors x method lists of the configuration into scenarios.
std::vector<Scenario> simulation_grid(const RunConfig& cfg);

std::vector<ScenarioResult> run_simulation(const RunConfig& cfg);

std::string replicates_csv(const std::vector<ScenarioResult>& results);
std::string summary_csv(const std::vector<ScenarioResult>& results);
/// Counts of estimated locations falling in [(theta_{j-1}+theta_j)/2, (theta_j+theta_{j+1})/2]
/// for every true change point; zero counts are omitted.
std::string histogram_csv(const std::vector<ScenarioResult>& results);

struct BenchRow {
  std::int64_t n = 0;
  std::int64_t reps = 0;
  double candidate_ms = 0.0;  // medians over reps
  double prune_ms = 0.0;
  double total_ms = 0.0;
  std::int64_t candidates = 0;
  std::int64_t q_hat = 0;
};

std::vector<BenchRow> run_bench(const RunConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Series generated from the configured signal and first error model with
/// the seed of replicate 0, as one value per line.
std::string generate_series_text(const RunConfig& cfg);

}  // namespace locprune
