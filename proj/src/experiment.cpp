#include "sarsa_pd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#ifndef SARSA_PD_VERSION
#define SARSA_PD_VERSION "0.1.0"
#endif

namespace sarsa_pd {

namespace {

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(15) << x;
  return os.str();
}

bool has_strategy_selectors(const Lattice& lat) {
  return std::any_of(lat.kinds.begin(), lat.kinds.end(), [](AgentKind k) { return k == AgentKind::SarsaStrategy; });
}

}  // namespace

void RunConfig::validate() const {
  if (side < 2) throw ParameterError("size must be at least 2, got " + std::to_string(side));
  if (epochs_max < 1) throw ParameterError("epochs must be at least 1");
  if (record_every < 1) throw ParameterError("record-every must be at least 1");
  if (tail_window < 1) throw ParameterError("tail must be at least 1");
  if (epoch_threads < 1) throw ParameterError("epoch threads must be at least 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("rho = " + format_double(rho) + " is outside [0,1]");
  payoff_matrix(dilemma);
  learning.validate();
  if (init.kind == InitScheme::Kind::Random && !(init.p0 >= 0.0 && init.p0 <= 1.0)) {
    throw ParameterError("init probability " + format_double(init.p0) + " is outside [0,1]");
  }
  if (init.kind == InitScheme::Kind::Cluster && (init.half_width < 0 || 2 * init.half_width + 1 > side)) {
    throw ParameterError("init cluster half-width " + std::to_string(init.half_width) +
                         " does not fit a lattice of side " + std::to_string(side));
  }
}

RunConfig RunConfig::desk() {
  RunConfig cfg;
  cfg.side = 50;
  cfg.epochs_max = 20'000;
  return cfg;
}

RunConfig RunConfig::full_scale() { return RunConfig{}; }

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg) {
  std::string snaps;
  for (std::size_t i = 0; i < cfg.snapshot_epochs.size(); ++i) {
    snaps += (i ? "," : "") + std::to_string(cfg.snapshot_epochs[i]);
  }
  return {
      {"size", std::to_string(cfg.side)},
      {"epochs", std::to_string(cfg.epochs_max)},
      {"init", cfg.init.to_string()},
      {"mode", to_string(cfg.mode)},
      {"rho", format_double(cfg.rho)},
      {"dg", format_double(cfg.dilemma.dg)},
      {"dr", format_double(cfg.dilemma.dr)},
      {"alpha", format_double(cfg.learning.alpha)},
      {"gamma", format_double(cfg.learning.gamma)},
      {"epsilon", format_double(cfg.learning.epsilon)},
      {"noise", format_double(cfg.learning.noise)},
      {"traditional-rule", to_string(cfg.traditional_rule)},
      {"update", to_string(cfg.update_rule)},
      {"seed", std::to_string(cfg.seed)},
      {"record-every", std::to_string(cfg.record_every)},
      {"snapshot-epochs", snaps},
      {"tail", std::to_string(cfg.tail_window)},
      {"early-stop", cfg.early_stop ? "true" : "false"},
  };
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::AbsorbedAllC: return "absorbed-all-C";
    case Termination::AbsorbedAllD: return "absorbed-all-D";
    case Termination::TailAverage: return "tail-average";
  }
  return "?";
}

RunResult run_single(const RunConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  EpochConfig epoch_cfg{cfg.learning, payoff_matrix(cfg.dilemma), cfg.traditional_rule, cfg.update_rule};

  Lattice lat = init_lattice(cfg.side, cfg.init, cfg.seed);
  lat.kinds = assign_kinds(cfg.side, cfg.rho, cfg.mode, cfg.seed);
  std::vector<AgentState> agents = init_agents(lat, cfg.traditional_rule, cfg.seed);
  const bool can_absorb = !has_strategy_selectors(lat);

  std::vector<std::uint64_t> snap_epochs = cfg.snapshot_epochs;
  std::sort(snap_epochs.begin(), snap_epochs.end());
  snap_epochs.erase(std::unique(snap_epochs.begin(), snap_epochs.end()), snap_epochs.end());
  auto next_snap = snap_epochs.begin();

  RunResult result;
  auto take_snapshot_at = [&](std::uint64_t epoch) {
    if (next_snap != snap_epochs.end() && *next_snap == epoch) {
      result.snapshots.push_back({epoch, snapshot(lat)});
      ++next_snap;
    }
  };
  take_snapshot_at(0);

  const std::size_t window = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.tail_window, cfg.epochs_max));
  std::vector<double> tail(window, 0.0);
  const EpochExecution exec{cfg.epoch_threads, {}};

  std::uint64_t t = 1;
  for (; t <= cfg.epochs_max; ++t) {
    run_epoch(lat, agents, epoch_cfg, t, cfg.seed, exec);
    if (observer) observer(t, lat, agents);

    const std::size_t n_coop = cooperator_count(lat);
    tail[(t - 1) % window] = static_cast<double>(n_coop) / static_cast<double>(lat.size());
    if (t % cfg.record_every == 0) result.timeseries.push_back(compute_metrics(lat, t));
    take_snapshot_at(t);

    if (cfg.early_stop && can_absorb && (n_coop == 0 || n_coop == lat.size()) && t < cfg.epochs_max) {
      result.absorbed_at = t;
      break;
    }
  }
  result.epochs_simulated = std::min(t, cfg.epochs_max);

  if (result.absorbed_at != 0) {
    // Nothing changes from here on; replay the fixed point into the outputs.
    const EpochMetrics fixed = compute_metrics(lat, 0);
    for (std::uint64_t e = result.absorbed_at + 1; e <= cfg.epochs_max; ++e) {
      if (e % cfg.record_every == 0) {
        EpochMetrics row = fixed;
        row.epoch = e;
        result.timeseries.push_back(row);
      }
    }
    const auto snap = snapshot(lat);
    for (; next_snap != snap_epochs.end() && *next_snap <= cfg.epochs_max; ++next_snap) {
      result.snapshots.push_back({*next_snap, snap});
    }
  }

  const std::size_t n_coop = cooperator_count(lat);
  if (can_absorb && n_coop == lat.size()) {
    result.terminated_by = Termination::AbsorbedAllC;
    result.final_coop = 1.0;
  } else if (can_absorb && n_coop == 0) {
    result.terminated_by = Termination::AbsorbedAllD;
    result.final_coop = 0.0;
  } else {
    result.terminated_by = Termination::TailAverage;
    result.final_coop = tail_average(tail, window);
  }
  result.final_lattice = std::move(lat);
  result.final_agents = std::move(agents);
  return result;
}

void parallel_jobs(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = n;
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

void summarize(RepeatedResult& out) {
  const auto n = static_cast<double>(out.runs.size());
  double sum = 0.0;
  for (const auto& r : out.runs) sum += r.final_coop;
  out.mean = sum / n;
  double ss = 0.0;
  for (const auto& r : out.runs) ss += (r.final_coop - out.mean) * (r.final_coop - out.mean);
  out.std = std::sqrt(ss / n);
}

RunResult run_job(RunConfig cfg, std::uint64_t seed, bool keep_series) {
  cfg.seed = seed;
  if (!keep_series) {
    cfg.snapshot_epochs.clear();
    cfg.record_every = cfg.epochs_max;
  }
  RunResult r = run_single(cfg);
  if (!keep_series) {
    r.timeseries = {};
    r.final_lattice = {};
    r.final_agents = {};
  }
  return r;
}

}  // namespace

RepeatedResult run_repeated(const RunConfig& cfg, int repeats, int jobs, bool keep_series) {
  if (repeats < 1) throw ParameterError("repeats must be at least 1, got " + std::to_string(repeats));
  cfg.validate();
  RepeatedResult out;
  out.runs.resize(static_cast<std::size_t>(repeats));
  parallel_jobs(out.runs.size(), jobs, [&](std::size_t k) { out.runs[k] = run_job(cfg, cfg.seed + k, keep_series); });
  summarize(out);
  return out;
}

std::vector<double> grid_values(SweepRange range, double step) {
  if (!(step > 0.0)) throw ParameterError("step must be positive");
  if (!(range.lo <= range.hi)) throw ParameterError("sweep range is empty");
  const auto count = static_cast<std::size_t>(std::floor((range.hi - range.lo) / step + 1e-9)) + 1;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::round((range.lo + static_cast<double>(i) * step) * 1e12) / 1e12;
  }
  return values;
}

namespace {

struct PointResults {
  RunConfig cfg;
  RepeatedResult result;
};

// Flattens (point, seed) into independent jobs so the pool stays busy.
void run_points(std::vector<PointResults>& points, int repeats, int jobs) {
  if (repeats < 1) throw ParameterError("repeats must be at least 1, got " + std::to_string(repeats));
  for (auto& p : points) {
    p.cfg.validate();
    p.result.runs.resize(static_cast<std::size_t>(repeats));
  }
  const std::size_t per = static_cast<std::size_t>(repeats);
  parallel_jobs(points.size() * per, jobs, [&](std::size_t job) {
    auto& p = points[job / per];
    const std::size_t k = job % per;
    p.result.runs[k] = run_job(p.cfg, p.cfg.seed + k, false);
  });
  for (auto& p : points) summarize(p.result);
}

}  // namespace

std::vector<HeatmapRow> sweep_heatmap(const RunConfig& base, SweepRange dg_range, SweepRange dr_range, double step,
                                      int repeats, int jobs) {
  const auto dgs = grid_values(dg_range, step);
  const auto drs = grid_values(dr_range, step);
  std::vector<PointResults> points;
  for (double dg : dgs) {
    for (double dr : drs) {
      RunConfig cfg = base;
      cfg.dilemma = {dg, dr};
      points.push_back({cfg, {}});
    }
  }
  run_points(points, repeats, jobs);
  std::vector<HeatmapRow> rows;
  for (const auto& p : points) {
    rows.push_back({p.cfg.dilemma.dg, p.cfg.dilemma.dr, p.result.mean, p.result.std, repeats});
  }
  return rows;
}

std::vector<RhoRow> sweep_rho(const RunConfig& base, const std::vector<double>& ds_values,
                              const std::vector<double>& rho_values, int repeats, int jobs) {
  std::vector<PointResults> points;
  for (double ds : ds_values) {
    for (double rho : rho_values) {
      RunConfig cfg = base;
      cfg.set_dilemma_strength(ds);
      cfg.mode = Composition::Mixed;
      cfg.rho = rho;
      points.push_back({cfg, {}});
    }
  }
  run_points(points, repeats, jobs);
  std::vector<RhoRow> rows;
  for (const auto& p : points) rows.push_back({p.cfg.dilemma.dg, p.cfg.rho, p.result.mean, p.result.std, repeats});
  return rows;
}

std::string version_string() { return SARSA_PD_VERSION; }

bool is_manifest_metadata_key(const std::string& key) {
  return key == "command" || key == "version" || key == "wall_clock_seconds";
}

void write_manifest(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra, double wall_clock_seconds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "command=" << command << '\n';
  for (const auto& [k, v] : to_key_values(cfg)) os << k << '=' << v << '\n';
  for (const auto& [k, v] : extra) os << k << '=' << v << '\n';
  os << "version=" << version_string() << '\n';
  os << "wall_clock_seconds=" << std::fixed << std::setprecision(3) << wall_clock_seconds << '\n';
}

}  // namespace sarsa_pd
