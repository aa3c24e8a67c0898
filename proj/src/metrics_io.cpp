#include "sarsa_pd/metrics_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sarsa_pd {

namespace {

constexpr int kPrecision = 15;

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << std::setprecision(kPrecision);
  return os;
}

}  // namespace

std::size_t cooperator_count(const Lattice& lat) {
  std::size_t count = 0;
  for (Strategy s : lat.strategies) count += s == Strategy::Cooperate ? 1 : 0;
  return count;
}

double cooperation_rate(const Lattice& lat) {
  return static_cast<double>(cooperator_count(lat)) / static_cast<double>(lat.size());
}

double class_average_reward(const Lattice& lat, const std::function<bool(Strategy, AgentKind)>& filter) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (!filter(lat.strategies[i], lat.kinds[i])) continue;
    sum += lat.rewards[i];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

EpochMetrics compute_metrics(const Lattice& lat, std::uint64_t epoch) {
  double sum_c = 0.0;
  double sum_d = 0.0;
  std::size_t n_c = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (lat.strategies[i] == Strategy::Cooperate) {
      sum_c += lat.rewards[i];
      ++n_c;
    } else {
      sum_d += lat.rewards[i];
    }
  }
  const std::size_t n = lat.size();
  const std::size_t n_d = n - n_c;
  EpochMetrics m;
  m.epoch = epoch;
  m.coop_rate = static_cast<double>(n_c) / static_cast<double>(n);
  m.avg_reward = (sum_c + sum_d) / static_cast<double>(n);
  m.avg_reward_cooperators = n_c == 0 ? 0.0 : sum_c / static_cast<double>(n_c);
  m.avg_reward_defectors = n_d == 0 ? 0.0 : sum_d / static_cast<double>(n_d);
  return m;
}

SnapshotCell classify(Strategy s, AgentKind k) {
  const bool coop = s == Strategy::Cooperate;
  if (is_sarsa(k)) return coop ? SnapshotCell::CooperatorSarsa : SnapshotCell::DefectorSarsa;
  return coop ? SnapshotCell::CooperatorTraditional : SnapshotCell::DefectorTraditional;
}

Strategy strategy_of(SnapshotCell c) {
  return c == SnapshotCell::CooperatorTraditional || c == SnapshotCell::CooperatorSarsa ? Strategy::Cooperate
                                                                                        : Strategy::Defect;
}

bool is_sarsa(SnapshotCell c) { return c == SnapshotCell::CooperatorSarsa || c == SnapshotCell::DefectorSarsa; }

std::vector<SnapshotCell> snapshot(const Lattice& lat) {
  std::vector<SnapshotCell> cells(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) cells[i] = classify(lat.strategies[i], lat.kinds[i]);
  return cells;
}

double tail_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw ParameterError("tail window must be positive");
  if (window > series.size()) {
    throw ParameterError("tail window " + std::to_string(window) + " exceeds series length " +
                         std::to_string(series.size()));
  }
  const auto tail = series.last(window);
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(window);
}

void write_timeseries_csv(std::ostream& os, std::span<const EpochMetrics> rows) {
  os << std::setprecision(kPrecision);
  os << kTimeseriesHeader << '\n';
  for (const auto& m : rows) {
    os << m.epoch << ',' << m.coop_rate << ',' << m.avg_reward << ',' << m.avg_reward_cooperators << ','
       << m.avg_reward_defectors << '\n';
  }
}

void write_timeseries_csv(const std::filesystem::path& path, std::span<const EpochMetrics> rows) {
  auto os = open_for_write(path);
  write_timeseries_csv(os, rows);
}

std::vector<EpochMetrics> read_timeseries_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTimeseriesHeader) throw std::runtime_error("bad timeseries header");
  std::vector<EpochMetrics> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    EpochMetrics m;
    char c1, c2, c3, c4;
    if (!(ls >> m.epoch >> c1 >> m.coop_rate >> c2 >> m.avg_reward >> c3 >> m.avg_reward_cooperators >> c4 >>
          m.avg_reward_defectors)) {
      throw std::runtime_error("malformed timeseries row: " + line);
    }
    rows.push_back(m);
  }
  return rows;
}

void write_snapshot(std::ostream& os, int side, std::uint64_t epoch, std::span<const SnapshotCell> cells) {
  os << "L=" << side << " epoch=" << epoch << '\n';
  std::string row(static_cast<std::size_t>(side), '0');
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      row[static_cast<std::size_t>(c)] = static_cast<char>('0' + static_cast<int>(cells[static_cast<std::size_t>(r * side + c)]));
    }
    os << row << '\n';
  }
}

void write_snapshot(const std::filesystem::path& path, int side, std::uint64_t epoch,
                    std::span<const SnapshotCell> cells) {
  auto os = open_for_write(path);
  write_snapshot(os, side, epoch, cells);
}

SnapshotFile read_snapshot(std::istream& is) {
  SnapshotFile f;
  std::string header;
  std::getline(is, header);
  if (std::sscanf(header.c_str(), "L=%d epoch=%" SCNu64, &f.side, &f.epoch) != 2 || f.side < 1) {
    throw std::runtime_error("bad snapshot header: " + header);
  }
  f.cells.reserve(static_cast<std::size_t>(f.side * f.side));
  std::string row;
  for (int r = 0; r < f.side; ++r) {
    if (!std::getline(is, row) || row.size() != static_cast<std::size_t>(f.side)) {
      throw std::runtime_error("snapshot row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (char ch : row) {
      if (ch < '0' || ch > '3') throw std::runtime_error("invalid snapshot code '" + std::string(1, ch) + "'");
      f.cells.push_back(static_cast<SnapshotCell>(ch - '0'));
    }
  }
  return f;
}

void write_heatmap_csv(std::ostream& os, std::span<const HeatmapRow> rows) {
  os << std::setprecision(kPrecision);
  os << kHeatmapHeader << '\n';
  for (const auto& r : rows) os << r.dg << ',' << r.dr << ',' << r.mean << ',' << r.std << ',' << r.runs << '\n';
}

void write_rho_csv(std::ostream& os, std::span<const RhoRow> rows) {
  os << std::setprecision(kPrecision);
  os << kRhoHeader << '\n';
  for (const auto& r : rows) os << r.ds << ',' << r.rho << ',' << r.mean << ',' << r.std << ',' << r.runs << '\n';
}

void write_qtables_csv(std::ostream& os, std::span<const AgentState> agents) {
  os << std::setprecision(kPrecision);
  os << kQTableHeader << '\n';
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const QTable& q = agents[i].q;
    for (StateId s = 0; s < q.states() && agents[i].learns(); ++s) {
      for (ActionId a = 0; a < q.actions(); ++a) os << i << ',' << s << ',' << a << ',' << q(s, a) << '\n';
    }
  }
}

}  // namespace sarsa_pd
