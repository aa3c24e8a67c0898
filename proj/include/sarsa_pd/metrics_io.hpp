#ifndef SARSA_PD_METRICS_IO_HPP
#define SARSA_PD_METRICS_IO_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sarsa_pd/core_model.hpp"
#include "sarsa_pd/dynamics.hpp"

namespace sarsa_pd {

struct EpochMetrics {
  std::uint64_t epoch = 0;
  double coop_rate = 0.0;
  double avg_reward = 0.0;
  double avg_reward_cooperators = 0.0;  // 0 when there are no cooperators
  double avg_reward_defectors = 0.0;    // 0 when there are no defectors
};

/// Snapshot class codes.
enum class SnapshotCell : std::uint8_t {
  DefectorTraditional = 0,   // white
  CooperatorTraditional = 1, // red
  CooperatorSarsa = 2,       // blue
  DefectorSarsa = 3,         // green
};

std::size_t cooperator_count(const Lattice& lat);
double cooperation_rate(const Lattice& lat);

/// Mean reward over cells accepted by `filter`; 0 for an empty class.
double class_average_reward(const Lattice& lat, const std::function<bool(Strategy, AgentKind)>& filter);

EpochMetrics compute_metrics(const Lattice& lat, std::uint64_t epoch);

SnapshotCell classify(Strategy s, AgentKind k);
Strategy strategy_of(SnapshotCell c);
bool is_sarsa(SnapshotCell c);
std::vector<SnapshotCell> snapshot(const Lattice& lat);

/// Mean of the last `window` values. Throws ParameterError when window is 0
/// or exceeds the series length.
double tail_average(std::span<const double> series, std::size_t window);

// File formats. Numbers are written with 15 significant digits.

inline constexpr const char* kTimeseriesHeader = "epoch,coop_rate,avg_reward,avg_reward_coop,avg_reward_def";
inline constexpr const char* kHeatmapHeader = "Dg,Dr,mean_final_coop,std_final_coop,runs";
inline constexpr const char* kRhoHeader = "DS,rho,mean_final_coop,std_final_coop,runs";
inline constexpr const char* kQTableHeader = "agent,state,action,value";

void write_timeseries_csv(std::ostream& os, std::span<const EpochMetrics> rows);
void write_timeseries_csv(const std::filesystem::path& path, std::span<const EpochMetrics> rows);
std::vector<EpochMetrics> read_timeseries_csv(std::istream& is);

/// Header `L=<n> epoch=<t>` then L rows of L single-digit codes.
void write_snapshot(std::ostream& os, int side, std::uint64_t epoch, std::span<const SnapshotCell> cells);
void write_snapshot(const std::filesystem::path& path, int side, std::uint64_t epoch,
                    std::span<const SnapshotCell> cells);

struct SnapshotFile {
  int side = 0;
  std::uint64_t epoch = 0;
  std::vector<SnapshotCell> cells;
};
SnapshotFile read_snapshot(std::istream& is);

struct HeatmapRow {
  double dg = 0.0;
  double dr = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int runs = 0;
};
void write_heatmap_csv(std::ostream& os, std::span<const HeatmapRow> rows);

struct RhoRow {
  double ds = 0.0;
  double rho = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int runs = 0;
};
void write_rho_csv(std::ostream& os, std::span<const RhoRow> rows);

/// One line per (agent, state, action) for every learning agent.
void write_qtables_csv(std::ostream& os, std::span<const AgentState> agents);

}  // namespace sarsa_pd

#endif  // SARSA_PD_METRICS_IO_HPP
