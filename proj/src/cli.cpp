#include "sarsa_pd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "sarsa_pd/experiment.hpp"

namespace sarsa_pd {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream is(text);
  while (std::getline(is, part, sep)) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double parse_number(const std::string& flag, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParameterError(flag + ": '" + text + "' is not a number");
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> values;
  for (const auto& p : split(text, ',')) values.push_back(parse_number(flag, p));
  if (values.empty()) throw ParameterError(flag + ": expected a comma-separated list of numbers");
  return values;
}

SweepRange parse_range(const std::string& flag, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ParameterError(flag + ": expected <lo>:<hi>, got '" + text + "'");
  SweepRange r{parse_number(flag, text.substr(0, colon)), parse_number(flag, text.substr(colon + 1))};
  if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
    throw ParameterError(flag + ": range " + text + " must satisfy 0 <= lo <= hi <= 1 (valid range [0,1])");
  }
  return r;
}

CLI::Validator in_range(double lo, double hi, bool open_lo = false, bool open_hi = false) {
  std::ostringstream desc;
  desc << (open_lo ? "(" : "[") << lo << ',' << hi << (open_hi ? ")" : "]");
  const std::string range = desc.str();
  return CLI::Validator(
      [=](std::string& s) -> std::string {
        double v = 0.0;
        try {
          std::size_t used = 0;
          v = std::stod(s, &used);
          if (used != s.size()) return "'" + s + "' is not a number";
        } catch (const std::logic_error&) {
          return "'" + s + "' is not a number";
        }
        const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
        return ok ? std::string{} : "value " + s + " is outside the valid range " + range;
      },
      range);
}

/// Expands `--config <file>` into `--key=value` tokens placed right after the
/// subcommand, so flags given on the command line still win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.size() < 2) return args;
  std::ifstream is(config_path);
  if (!is) throw ParameterError("--config: cannot read '" + config_path + "'");
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("--config: line " + std::to_string(line_no) + " is not key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (is_manifest_metadata_key(key) || value.empty()) continue;
    injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

struct Options {
  RunConfig cfg = RunConfig::full_scale();
  std::string preset;
  std::string init = "random:0.5";
  std::string mode = "traditional";
  std::string traditional_rule = "fermi";
  std::string update = "sarsa";
  std::string snapshot_epochs;
  std::string dg_range = "0:1";
  std::string dr_range = "0:1";
  std::string ds_values = "0.1";
  std::string rho_values = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string config;
  double ds = 0.0;
  double step = 0.01;
  int repeats = 20;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool dump_qtables = false;
  fs::path out_dir = "out";
};

void add_common(CLI::App& sub, Options& o) {
  auto& c = o.cfg;
  sub.add_option("--preset", o.preset, "desk (L=50, 20000 epochs, 10 repeats) or full (the defaults below)")
      ->check(CLI::IsMember({"desk", "full"}));
  sub.add_option("--size", c.side, "lattice side L (reference value 200)")->check(CLI::Range(2, 1 << 15));
  sub.add_option("--epochs", c.epochs_max, "epoch horizon (reference value 500000)")->check(CLI::PositiveNumber);
  sub.add_option("--init", o.init, "initial strategies: random:<p0> or cluster:<half-width>");
  sub.add_option("--mode", o.mode, "traditional | sarsa-target | sarsa-strategy | mixed")
      ->check(CLI::IsMember({"traditional", "sarsa-target", "sarsa-strategy", "mixed"}));
  sub.add_option("--rho", c.rho, "share of strategy-selecting SARSA agents in mixed mode")->check(in_range(0, 1));
  sub.add_option("--dg", c.dilemma.dg, "gamble-intending dilemma, T = 1 + Dg")->check(in_range(0, 1));
  sub.add_option("--dr", c.dilemma.dr, "risk-averting dilemma, S = -Dr")->check(in_range(0, 1));
  sub.add_option("--ds", o.ds, "dilemma strength; sets Dg = Dr = DS (overrides --dg/--dr)")
      ->check(in_range(0, 1))
      ->default_str("");
  sub.add_option("--alpha", c.learning.alpha, "learning rate (reference value 0.3)")->check(in_range(0, 1, true));
  sub.add_option("--gamma", c.learning.gamma, "discount rate (reference value 0.9)")
      ->check(in_range(0, 1, false, true));
  sub.add_option("--epsilon", c.learning.epsilon, "exploration rate (reference value 0.02)")->check(in_range(0, 1));
  sub.add_option("--noise", c.learning.noise, "Fermi noise K > 0 (reference value 0.1)")->check(CLI::PositiveNumber);
  sub.add_option("--traditional-rule", o.traditional_rule, "rule for Traditional agents: fermi | target")
      ->check(CLI::IsMember({"fermi", "target"}));
  sub.add_option("--update", o.update, "value update: sarsa | q-learning")
      ->check(CLI::IsMember({"sarsa", "q-learning"}));
  sub.add_option("--seed", c.seed, "base random seed");
  sub.add_option("--record-every", c.record_every, "time-series stride in epochs")->check(CLI::PositiveNumber);
  sub.add_option("--snapshot-epochs", o.snapshot_epochs, "comma-separated epochs to snapshot (0 = initial)");
  sub.add_option("--tail", c.tail_window, "tail-average window in epochs (reference value 1000)")
      ->check(CLI::PositiveNumber);
  sub.add_option("--early-stop", c.early_stop, "stop at provably absorbing states (true/false)");
  sub.add_option("--jobs", o.jobs, "worker threads for independent runs")->check(CLI::PositiveNumber);
  sub.add_option("--out", o.out_dir, "output directory");
  sub.add_option("--config", o.config, "key=value file mirroring these flags (e.g. a manifest.txt)");
}

void apply_preset(CLI::App& sub, Options& o) {
  if (o.preset != "desk") return;
  const RunConfig desk = RunConfig::desk();
  if (sub.count("--size") == 0) o.cfg.side = desk.side;
  if (sub.count("--epochs") == 0) o.cfg.epochs_max = desk.epochs_max;
  if (sub.get_option_no_throw("--repeats") != nullptr && sub.count("--repeats") == 0) o.repeats = 10;
}

void finalize(CLI::App& sub, Options& o) {
  apply_preset(sub, o);
  auto& c = o.cfg;
  c.init = InitScheme::parse(o.init);
  c.mode = parse_composition(o.mode);
  c.traditional_rule = parse_traditional_rule(o.traditional_rule);
  c.update_rule = parse_update_rule(o.update);
  if (sub.count("--ds") > 0) c.set_dilemma_strength(o.ds);
  c.snapshot_epochs.clear();
  for (double e : parse_list("--snapshot-epochs", o.snapshot_epochs.empty() ? "0" : o.snapshot_epochs)) {
    if (e < 0 || e != std::floor(e)) throw ParameterError("--snapshot-epochs: '" + std::to_string(e) + "' is not an epoch");
    c.snapshot_epochs.push_back(static_cast<std::uint64_t>(e));
  }
  if (o.snapshot_epochs.empty()) c.snapshot_epochs.clear();
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ParameterError(std::string("invalid configuration: ") + e.what());
  }
}

std::string command_line(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 1; i < args.size(); ++i) s += (i > 1 ? " " : "") + args[i];
  return s;
}

void write_snapshots(const fs::path& dir, int side, const std::vector<LatticeSnapshot>& snaps) {
  for (const auto& s : snaps) write_snapshot(dir / ("snapshot_" + std::to_string(s.epoch) + ".txt"), side, s.epoch, s.cells);
}

int do_run(const Options& o, const std::string& cmd, bool series, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = run_single(o.cfg);
  fs::create_directories(o.out_dir);
  write_timeseries_csv(o.out_dir / "timeseries.csv", r.timeseries);
  write_snapshots(o.out_dir / "snapshots", o.cfg.side, r.snapshots);
  if (o.dump_qtables) {
    std::ofstream os(o.out_dir / "qtables.csv", std::ios::binary | std::ios::trunc);
    write_qtables_csv(os, r.final_agents);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(o.out_dir / "manifest.txt", cmd, o.cfg, {}, secs);
  out << (series ? "snapshot-series" : "run") << ": final_coop=" << r.final_coop
      << " terminated_by=" << to_string(r.terminated_by) << " rows=" << r.timeseries.size()
      << " snapshots=" << r.snapshots.size() << " out=" << o.out_dir.string() << '\n';
  return kExitOk;
}

int do_heatmap(const Options& o, const std::string& cmd, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto dg = parse_range("--dg-range", o.dg_range);
  const auto dr = parse_range("--dr-range", o.dr_range);
  const auto rows = sweep_heatmap(o.cfg, dg, dr, o.step, o.repeats, o.jobs);
  fs::create_directories(o.out_dir);
  std::ofstream os(o.out_dir / "heatmap.csv", std::ios::binary | std::ios::trunc);
  write_heatmap_csv(os, rows);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream step;
  step << o.step;
  write_manifest(o.out_dir / "manifest.txt", cmd, o.cfg,
                 {{"dg-range", o.dg_range}, {"dr-range", o.dr_range}, {"step", step.str()},
                  {"repeats", std::to_string(o.repeats)}},
                 secs);
  out << "heatmap: " << rows.size() << " points out=" << o.out_dir.string() << '\n';
  return kExitOk;
}

int do_rho_sweep(const Options& o, const std::string& cmd, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto ds = parse_list("--ds-values", o.ds_values);
  const auto rho = parse_list("--rho-values", o.rho_values);
  for (double v : ds) {
    if (!(v >= 0 && v <= 1)) throw ParameterError("--ds-values: " + std::to_string(v) + " is outside the valid range [0,1]");
  }
  for (double v : rho) {
    if (!(v >= 0 && v <= 1)) throw ParameterError("--rho-values: " + std::to_string(v) + " is outside the valid range [0,1]");
  }
  const auto rows = sweep_rho(o.cfg, ds, rho, o.repeats, o.jobs);
  fs::create_directories(o.out_dir);
  std::ofstream os(o.out_dir / "rho.csv", std::ios::binary | std::ios::trunc);
  write_rho_csv(os, rows);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(o.out_dir / "manifest.txt", cmd, o.cfg,
                 {{"ds-values", o.ds_values}, {"rho-values", o.rho_values}, {"repeats", std::to_string(o.repeats)}},
                 secs);
  out << "rho-sweep: " << rows.size() << " points out=" << o.out_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial prisoner's dilemma on a periodic lattice with SARSA-learning agents", "sarsa-pd"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);

  Options o;
  auto* run = app.add_subcommand("run", "single run: timeseries.csv, optional snapshots, manifest.txt");
  auto* heatmap = app.add_subcommand("heatmap", "Dg x Dr grid of repeated runs: heatmap.csv");
  auto* rho = app.add_subcommand("rho-sweep", "mixed populations over DS x rho: rho.csv");
  auto* series = app.add_subcommand("snapshot-series", "lattice snapshots at the given epochs plus timeseries.csv");
  for (auto* sub : {run, heatmap, rho, series}) add_common(*sub, o);
  run->add_flag("--dump-qtables", o.dump_qtables, "write final Q-tables to qtables.csv");
  heatmap->add_option("--step", o.step, "grid step for Dg and Dr (reference value 0.01)")
      ->check(in_range(0, 1, true));
  heatmap->add_option("--dg-range", o.dg_range, "Dg sweep range lo:hi");
  heatmap->add_option("--dr-range", o.dr_range, "Dr sweep range lo:hi");
  rho->add_option("--ds-values", o.ds_values, "comma-separated dilemma strengths");
  rho->add_option("--rho-values", o.rho_values, "comma-separated SARSA shares");
  for (auto* sub : {heatmap, rho}) {
    sub->add_option("--repeats", o.repeats, "seeds per point (reference value 20)")->check(CLI::PositiveNumber);
  }
  series->get_option("--snapshot-epochs")->default_str("0,10,100,1000");

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == series && o.snapshot_epochs.empty()) o.snapshot_epochs = "0,10,100,1000";
    finalize(*sub, o);
    const std::string cmd = command_line(args);
    if (sub == run) return do_run(o, cmd, false, out);
    if (sub == series) return do_run(o, cmd, true, out);
    if (sub == heatmap) return do_heatmap(o, cmd, out);
    o.cfg.mode = Composition::Mixed;
    return do_rho_sweep(o, cmd, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace sarsa_pd
