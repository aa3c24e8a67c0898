// Acceptance suite: one PASS/FAIL line per criterion. Runs every criterion by
// default; `acceptance 4 7` runs a subset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sarsa_pd/core_model.hpp"
#include "sarsa_pd/dynamics.hpp"
#include "sarsa_pd/experiment.hpp"
#include "sarsa_pd/learning.hpp"
#include "sarsa_pd/metrics_io.hpp"
#include "sarsa_pd/rng.hpp"

using namespace sarsa_pd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double max_seconds;  // 0 = no runtime bound
  std::function<Outcome()> body;
};

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

std::uint64_t grid_hash(const std::vector<Strategy>& grid) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Strategy s : grid) h = (h ^ static_cast<std::uint64_t>(s)) * 1099511628211ULL;
  return h;
}

// ---------------------------------------------------------------------------
// 1. Fermi rule

Outcome fermi_exactness() {
  Outcome o;
  CounterRng rng(101, 0, 0);
  double worst_half = 0.0;
  double worst_complement = 0.0;
  int sampled = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = -8.0 + 16.0 * rng.uniform();
    const double y = -8.0 + 16.0 * rng.uniform();
    const double k = 0.01 + 4.0 * rng.uniform();
    worst_half = std::max(worst_half, std::abs(fermi_probability(x, x, k) - 0.5));
    const double a = fermi_probability(x, y, k);
    const double b = fermi_probability(y, x, k);
    if (a == 0.0 || b == 0.0 || std::abs((x - y) / k) >= 500.0) continue;  // saturated
    ++sampled;
    worst_complement = std::max(worst_complement, std::abs(a + b - 1.0));
  }
  // Monotone decreasing in pi_x - pi_y; strictly so away from saturation.
  bool monotone = true;
  const double k = 0.1;
  double prev = fermi_probability(-10.0, 0.0, k);
  for (int i = 1; i <= 20000; ++i) {
    const double d = -10.0 + 20.0 * i / 20000.0;
    const double w = fermi_probability(d, 0.0, k);
    if (w > prev) monotone = false;
    if (std::abs(d / k) < 30.0 && std::abs((d - 20.0 / 20000.0) / k) < 30.0 && !(w < prev)) monotone = false;
    prev = w;
  }
  o.pass = worst_half <= 1e-12 && worst_complement <= 1e-12 && monotone && sampled > 5000;
  o.detail = "max|W(x,x)-0.5|=" + fmt(worst_half) + " max|W(x,y)+W(y,x)-1|=" + fmt(worst_complement) + " over " +
             std::to_string(sampled) + " samples, monotone=" + (monotone ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------------------
// 2. Payoff matrix

Outcome payoff_grid() {
  Outcome o;
  int checked = 0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double dg = i / 20.0;
      const double dr = j / 20.0;
      const auto m = payoff_matrix({dg, dr});
      const bool exact = m.R == 1.0 && m.S == -dr && m.T == 1.0 + dg && m.P == 0.0;
      const bool ordered = m.T >= m.R && m.R >= m.P && m.P >= m.S;
      if (!exact || !ordered) o.pass = false;
      ++checked;
    }
  }
  o.detail = std::to_string(checked) + " grid points exact and ordered";
  return o;
}

// ---------------------------------------------------------------------------
// 3. Value updates against a scalar oracle

struct OracleTable {
  double v[6][4];
};

Outcome update_oracle() {
  Outcome o;
  CounterRng rng(303, 0, 0);
  double worst = 0.0;
  int bad_mutations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int actions = trial % 2 ? 4 : 2;
    QTable q(actions);
    OracleTable ref{};
    for (int s = 0; s < 6; ++s) {
      for (int a = 0; a < actions; ++a) {
        ref.v[s][a] = -10.0 + 20.0 * rng.uniform();
        q(s, a) = ref.v[s][a];
      }
    }
    const int s = static_cast<int>(rng.below(6));
    const int a = static_cast<int>(rng.below(static_cast<std::uint32_t>(actions)));
    const int s2 = static_cast<int>(rng.below(6));
    const int a2 = static_cast<int>(rng.below(static_cast<std::uint32_t>(actions)));
    const double r = -4.0 + 12.0 * rng.uniform();
    LearningParams p;
    p.alpha = 0.001 + 0.999 * rng.uniform();
    p.gamma = 0.999 * rng.uniform();
    const bool use_sarsa = (trial / 2) % 2 == 0;

    double bootstrap = ref.v[s2][a2];
    if (!use_sarsa) {
      bootstrap = ref.v[s2][0];
      for (int k = 1; k < actions; ++k) bootstrap = std::max(bootstrap, ref.v[s2][k]);
    }
    const double expected = ref.v[s][a] + p.alpha * (r + p.gamma * bootstrap - ref.v[s][a]);

    const QTable before = q;
    if (use_sarsa) {
      sarsa_update(q, s, a, r, s2, a2, p);
    } else {
      q_learning_update(q, s, a, r, s2, p);
    }
    worst = std::max(worst, std::abs(q(s, a) - expected));
    int mutated = 0;
    for (int si = 0; si < 6; ++si) {
      for (int ai = 0; ai < actions; ++ai) mutated += q(si, ai) != before(si, ai) ? 1 : 0;
    }
    if (mutated != 1) ++bad_mutations;
  }
  o.pass = worst <= 1e-12 && bad_mutations == 0;
  o.detail = "max deviation " + fmt(worst) + ", updates touching != 1 entry: " + std::to_string(bad_mutations);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Determinism and order independence

std::uint64_t mixed_run_hash(int threads, std::span<const std::size_t> order) {
  constexpr int kSide = 20;
  constexpr std::uint64_t kSeed = 2024;
  Lattice lat = init_lattice(kSide, InitScheme::random(0.5), kSeed);
  lat.kinds = assign_kinds(kSide, 0.5, Composition::Mixed, kSeed);
  EpochConfig cfg;
  cfg.matrix = payoff_matrix({0.1, 0.1});
  auto agents = init_agents(lat, cfg.traditional_rule, kSeed);
  std::uint64_t h = 0;
  for (std::uint64_t t = 1; t <= 200; ++t) {
    run_epoch(lat, agents, cfg, t, kSeed, EpochExecution{threads, order});
    h = mix64(h ^ grid_hash(lat.strategies));
  }
  return h;
}

Outcome determinism() {
  Outcome o;
  const auto reference = mixed_run_hash(1, {});
  const auto repeat = mixed_run_hash(1, {});
  const auto threaded = mixed_run_hash(4, {});
  std::vector<std::size_t> order(400);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(77, 0, 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint32_t>(i + 1))]);
  const auto shuffled = mixed_run_hash(1, order);

  RunConfig cfg;
  cfg.side = 20;
  cfg.epochs_max = 200;
  cfg.mode = Composition::Mixed;
  cfg.rho = 0.5;
  cfg.set_dilemma_strength(0.1);
  cfg.tail_window = 100;
  const auto a = run_single(cfg);
  cfg.epoch_threads = 3;
  const auto b = run_single(cfg);

  o.pass = reference == repeat && reference == threaded && reference == shuffled &&
           a.final_lattice.strategies == b.final_lattice.strategies && a.final_coop == b.final_coop;
  std::ostringstream os;
  os << std::hex << "hash " << reference << " repeat " << repeat << " 4-thread " << threaded << " shuffled "
     << shuffled;
  o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------------------
// 5. Absorbing states

Outcome absorbing() {
  Outcome o;
  for (auto s : {Strategy::Defect, Strategy::Cooperate}) {
    Lattice lat(20);
    std::fill(lat.strategies.begin(), lat.strategies.end(), s);
    EpochConfig cfg;
    cfg.matrix = payoff_matrix({0.5, 0.5});
    auto agents = init_agents(lat, cfg.traditional_rule, 5);
    const double expected = s == Strategy::Cooperate ? 1.0 : 0.0;
    for (std::uint64_t t = 1; t <= 1000; ++t) {
      run_epoch(lat, agents, cfg, t, 5);
      if (cooperation_rate(lat) != expected) {
        o.pass = false;
        o.detail = "cooperation rate left " + fmt(expected) + " at epoch " + std::to_string(t);
        return o;
      }
    }
  }
  o.detail = "all-D stayed at 0 and all-C at 1 for 1000 epochs";
  return o;
}

// ---------------------------------------------------------------------------
// 6. Brute-force payoff oracle

Outcome payoff_enumeration() {
  Outcome o;
  constexpr int kSide = 4;
  CounterRng rng(606, 0, 0);
  int mismatches = 0;
  for (int config = 0; config < 100; ++config) {
    // Dyadic parameters keep every partial sum exact, so equality is order-free.
    const double dg = rng.below(1025) / 1024.0;
    const double dr = rng.below(1025) / 1024.0;
    const auto m = payoff_matrix({dg, dr});
    const double table[2][2] = {{0.0, 1.0 + dg}, {-dr, 1.0}};  // [mine][theirs], 0 = D, 1 = C
    Lattice lat(kSide);
    for (auto& s : lat.strategies) s = rng.below(2) ? Strategy::Cooperate : Strategy::Defect;
    for (int i = 0; i < kSide * kSide; ++i) {
      const int ri = i / kSide;
      const int ci = i % kSide;
      double expected = 0.0;
      for (int j = 0; j < kSide * kSide; ++j) {
        const int rj = j / kSide;
        const int cj = j % kSide;
        const int dr_ = (rj - ri + kSide) % kSide;
        const int dc = (cj - ci + kSide) % kSide;
        const bool adjacent = (dr_ == 0 && (dc == 1 || dc == kSide - 1)) || (dc == 0 && (dr_ == 1 || dr_ == kSide - 1));
        if (!adjacent) continue;
        expected += table[static_cast<int>(lat.strategies[static_cast<std::size_t>(i)])]
                         [static_cast<int>(lat.strategies[static_cast<std::size_t>(j)])];
      }
      if (cumulative_payoff(lat, static_cast<std::size_t>(i), m) != expected) ++mismatches;
    }
  }
  o.pass = mismatches == 0;
  o.detail = "1600 cells over 100 lattices, mismatches: " + std::to_string(mismatches);
  return o;
}

// ---------------------------------------------------------------------------
// 7 and 10. Cluster growth under target selection; reward bookkeeping

struct BookkeepingStats {
  double worst_identity = 0.0;
  std::size_t epochs_checked = 0;
  std::size_t defector_free_epochs = 0;
  std::size_t bad_empty_class = 0;
};

void check_bookkeeping(const Lattice& lat, std::uint64_t epoch, BookkeepingStats& st) {
  const auto m = compute_metrics(lat, epoch);
  const double w_c = m.coop_rate;
  const double mix = w_c * m.avg_reward_cooperators + (1.0 - w_c) * m.avg_reward_defectors;
  st.worst_identity = std::max(st.worst_identity, std::abs(mix - m.avg_reward));
  ++st.epochs_checked;
  if (cooperator_count(lat) == lat.size()) {
    ++st.defector_free_epochs;
    if (m.avg_reward_defectors != 0.0) ++st.bad_empty_class;
  }
  if (cooperator_count(lat) == 0 && m.avg_reward_cooperators != 0.0) ++st.bad_empty_class;
}

BookkeepingStats g_bookkeeping;

double mean_final_coop(RunConfig cfg, int seeds, BookkeepingStats* st) {
  double sum = 0.0;
  for (int k = 0; k < seeds; ++k) {
    cfg.seed = 1 + static_cast<std::uint64_t>(k);
    EpochObserver obs;
    if (st) obs = [st](std::uint64_t t, const Lattice& lat, const std::vector<AgentState>&) { check_bookkeeping(lat, t, *st); };
    sum += run_single(cfg, obs).final_coop;
  }
  return sum / seeds;
}

Outcome cluster_growth() {
  Outcome o;
  RunConfig cfg;
  cfg.side = 50;
  cfg.init = InitScheme::cluster(10);
  cfg.dilemma = {0.02, 0.0};
  cfg.epochs_max = 5000;
  cfg.record_every = cfg.epochs_max;
  const double initial = cooperation_rate(init_lattice(50, cfg.init, 1));

  cfg.mode = Composition::Traditional;
  const double traditional = mean_final_coop(cfg, 10, &g_bookkeeping);
  cfg.mode = Composition::SarsaTarget;
  const double sarsa = mean_final_coop(cfg, 10, &g_bookkeeping);

  o.pass = sarsa >= traditional && sarsa >= initial;
  o.detail = "mean final coop: target-selection SARSA " + fmt(sarsa) + ", traditional " + fmt(traditional) +
             ", initial " + fmt(initial);
  return o;
}

Outcome bookkeeping() {
  Outcome o;
  if (g_bookkeeping.epochs_checked == 0) cluster_growth();
  // Defectors vanish for good in an all-cooperator start.
  RunConfig cfg;
  cfg.side = 50;
  cfg.init = InitScheme::random(1.0);
  cfg.epochs_max = 100;
  cfg.early_stop = false;
  mean_final_coop(cfg, 1, &g_bookkeeping);
  const auto& st = g_bookkeeping;
  o.pass = st.worst_identity <= 1e-10 && st.bad_empty_class == 0 && st.defector_free_epochs > 0;
  o.detail = "max identity error " + fmt(st.worst_identity) + " over " + std::to_string(st.epochs_checked) +
             " epochs; defector-free epochs " + std::to_string(st.defector_free_epochs) + " all report 0";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Mixed populations

Outcome rho_curve() {
  Outcome o;
  RunConfig base;
  base.side = 50;
  base.epochs_max = 20000;
  base.tail_window = 1000;
  base.seed = 1;
  const std::vector<double> rhos{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto rows = sweep_rho(base, {0.1}, rhos, 10);
  std::vector<double> mean(rows.size());
  std::string detail = "DS=0.1 mean coop by rho:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mean[i] = rows[i].mean;
    detail += " " + fmt(rows[i].rho, 3) + "->" + fmt(rows[i].mean, 4);
  }
  const bool beats_traditional = mean[3] > mean[0];
  const bool beats_all_sarsa = mean[3] >= mean[4];
  o.pass = beats_traditional && beats_all_sarsa;
  o.detail = detail + "; coop(0.75) > coop(0): " + (beats_traditional ? "yes" : "no") +
             ", coop(0.75) >= coop(1): " + (beats_all_sarsa ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------------------
// 9. Dilemma-strength monotonicity

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx == 0 || syy == 0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

Outcome dilemma_monotonicity() {
  Outcome o;
  const std::vector<double> levels{0.0, 0.1, 0.3, 0.6};
  RunConfig base;
  base.side = 50;
  base.epochs_max = 20000;
  base.mode = Composition::Traditional;
  std::vector<HeatmapRow> rows;
  for (double dg : levels) {
    for (double dr : levels) {
      const auto r = sweep_heatmap(base, {dg, dg}, {dr, dr}, 1.0, 10);
      rows.push_back(r.front());
    }
  }
  std::vector<double> ds, ds_coop, total, total_coop;
  std::string detail = "diagonal coop:";
  for (const auto& r : rows) {
    total.push_back(r.dg + r.dr);
    total_coop.push_back(r.mean);
    if (r.dg == r.dr) {
      ds.push_back(r.dg);
      ds_coop.push_back(r.mean);
      detail += " DS=" + fmt(r.dg, 2) + "->" + fmt(r.mean, 4);
    }
  }
  const double rho_ds = spearman(ds, ds_coop);
  const double rho_all = spearman(total, total_coop);
  o.pass = rho_ds < 0.0 && rho_all < 0.0;
  o.detail = detail + "; Spearman(DS, coop)=" + fmt(rho_ds, 4) + ", Spearman(Dg+Dr, coop) over 16 cells=" +
             fmt(rho_all, 4);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Fermi rule exactness", 1.0, fermi_exactness},
      {2, "Payoff matrix grid", 1.0, payoff_grid},
      {3, "SARSA / Q-learning updates vs scalar oracle", 1.0, update_oracle},
      {4, "Determinism and order independence", 10.0, determinism},
      {5, "Absorbing homogeneous lattices", 5.0, absorbing},
      {6, "Brute-force payoff enumeration", 1.0, payoff_enumeration},
      {7, "Cluster growth under target selection (desk scale)", 0.0, cluster_growth},
      {8, "Cooperation vs SARSA share rho (desk scale)", 0.0, rho_curve},
      {9, "Dilemma-strength monotonicity (desk scale)", 0.0, dilemma_monotonicity},
      {10, "Reward bookkeeping identity", 0.0, bookkeeping},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0 && secs >= c.max_seconds) {
      out.pass = false;
      out.detail += "; runtime " + fmt(secs, 3) + " s exceeds " + fmt(c.max_seconds) + " s";
    }
    failures += out.pass ? 0 : 1;
    std::printf("[%s] %2d. %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
