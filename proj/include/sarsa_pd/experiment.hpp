#ifndef SARSA_PD_EXPERIMENT_HPP
#define SARSA_PD_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sarsa_pd/core_model.hpp"
#include "sarsa_pd/dynamics.hpp"
#include "sarsa_pd/learning.hpp"
#include "sarsa_pd/metrics_io.hpp"

namespace sarsa_pd {

struct RunConfig {
  int side = 200;
  std::uint64_t epochs_max = 500'000;
  InitScheme init = InitScheme::random(0.5);
  Composition mode = Composition::Traditional;
  double rho = 0.0;  // only used by Composition::Mixed
  DilemmaParams dilemma;
  LearningParams learning;
  TraditionalRule traditional_rule = TraditionalRule::FermiOnly;
  UpdateRule update_rule = UpdateRule::Sarsa;
  std::uint64_t seed = 1;
  std::uint64_t record_every = 1;
  std::vector<std::uint64_t> snapshot_epochs;
  std::size_t tail_window = 1000;
  /// Stop as soon as the lattice is provably absorbing. Results are
  /// identical to running the full horizon.
  bool early_stop = true;
  int epoch_threads = 1;

  /// Sets Dg = Dr = ds.
  void set_dilemma_strength(double ds) { dilemma = {ds, ds}; }

  /// Throws ParameterError naming the offending field.
  void validate() const;

  /// L = 50, 2e4 epochs.
  static RunConfig desk();
  /// L = 200, 5e5 epochs. Long-running.
  static RunConfig full_scale();
};

/// Every config field as (flag-name, value), in a fixed order.
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg);

enum class Termination { AbsorbedAllC, AbsorbedAllD, TailAverage };
std::string to_string(Termination t);

struct LatticeSnapshot {
  std::uint64_t epoch = 0;
  std::vector<SnapshotCell> cells;
};

struct RunResult {
  double final_coop = 0.0;
  Termination terminated_by = Termination::TailAverage;
  std::uint64_t absorbed_at = 0;        // epoch the early stop fired, else 0
  std::uint64_t epochs_simulated = 0;   // epochs actually iterated
  std::vector<EpochMetrics> timeseries; // one row per recorded epoch
  std::vector<LatticeSnapshot> snapshots;
  Lattice final_lattice;
  std::vector<AgentState> final_agents;
};

/// Per-epoch hook, called after phase D with the committed lattice.
using EpochObserver = std::function<void(std::uint64_t epoch, const Lattice&, const std::vector<AgentState>&)>;

/// Iterates epochs up to cfg.epochs_max. A lattice with no strategy-selecting
/// agents and a homogeneous strategy grid can never change again; with
/// early_stop the remaining recorded rows and snapshots are filled from it.
/// Otherwise final_coop is the mean cooperation rate over the last
/// min(tail_window, epochs_max) epochs.
RunResult run_single(const RunConfig& cfg, const EpochObserver& observer = {});

struct RepeatedResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<RunResult> runs;
};

/// Runs seeds cfg.seed .. cfg.seed + repeats - 1 on up to `jobs` workers.
/// With keep_series false the per-seed time series, snapshots and final
/// lattices are discarded.
RepeatedResult run_repeated(const RunConfig& cfg, int repeats, int jobs = 1, bool keep_series = true);

struct SweepRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// lo, lo + step, ... up to hi inclusive, rounded to 1e-12.
std::vector<double> grid_values(SweepRange range, double step);

/// Dg-major, Dr-minor grid of run_repeated results.
std::vector<HeatmapRow> sweep_heatmap(const RunConfig& base, SweepRange dg_range, SweepRange dr_range, double step,
                                      int repeats, int jobs = 1);

/// Mixed-population runs per (DS, rho), DS-major.
std::vector<RhoRow> sweep_rho(const RunConfig& base, const std::vector<double>& ds_values,
                              const std::vector<double>& rho_values, int repeats, int jobs = 1);

/// Runs fn(0..n-1) on up to `jobs` worker threads.
void parallel_jobs(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

std::string version_string();

/// Plain key=value provenance file. `extra` entries follow the config keys.
void write_manifest(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra, double wall_clock_seconds);

/// Keys a manifest carries that are not replayable flags.
bool is_manifest_metadata_key(const std::string& key);

}  // namespace sarsa_pd

#endif  // SARSA_PD_EXPERIMENT_HPP
