#ifndef SARSA_PD_DYNAMICS_HPP
#define SARSA_PD_DYNAMICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarsa_pd/core_model.hpp"
#include "sarsa_pd/learning.hpp"
#include "sarsa_pd/rng.hpp"

namespace sarsa_pd {

/// How Traditional agents pick their next strategy.
enum class TraditionalRule { FermiOnly, TargetSelection };

/// Bootstrap target used by learning agents.
enum class UpdateRule { Sarsa, QLearning };

/// Population makeup of a run. Mixed places round(rho * L^2) SarsaStrategy
/// agents uniformly at random; everyone else is Traditional.
enum class Composition { Traditional, SarsaTarget, SarsaStrategy, Mixed };

std::string to_string(Composition c);
Composition parse_composition(const std::string& text);
std::string to_string(TraditionalRule r);
TraditionalRule parse_traditional_rule(const std::string& text);
std::string to_string(UpdateRule r);
UpdateRule parse_update_rule(const std::string& text);

struct AgentState {
  QTable q;  // q.actions() == 0 for agents that do not learn
  StateId s_prev = 0;
  ActionId a_prev = 0;
  double r_prev = 0.0;
  bool has_history = false;

  bool learns() const { return q.actions() > 0; }
};

struct EpochConfig {
  LearningParams learning;
  PayoffMatrix matrix;
  TraditionalRule traditional_rule = TraditionalRule::FermiOnly;
  UpdateRule update_rule = UpdateRule::Sarsa;
};

enum class Resolver { Fermi, TargetSelection, StrategySelection };

Resolver resolver_for(AgentKind kind, TraditionalRule rule);

struct Resolution {
  StateId state = 0;
  ActionId action = 0;
  Strategy strategy = Strategy::Defect;
};

/// Imitate one uniformly chosen neighbor with the Fermi probability, using
/// last epoch's payoffs. Draws: neighbor index, then the Fermi uniform.
Strategy traditional_resolve(const Lattice& lat, std::size_t index, double noise, CounterRng& rng);

/// Target selection: epsilon-greedy over neighbors, gated by the Fermi rule.
/// On a failed gate the previous target is kept. Returns the target and the
/// strategy that target played last epoch.
Resolution target_resolve(const Lattice& lat, std::size_t index, const AgentState& agent, const LearningParams& p,
                        CounterRng& rng);

/// Strategy selection: epsilon-greedy over {Defect, Cooperate}, no Fermi gate.
Resolution strategy_resolve(const Lattice& lat, std::size_t index, const AgentState& agent, const LearningParams& p,
                        CounterRng& rng);

std::vector<AgentKind> assign_kinds(int side, double rho, Composition mode, std::uint64_t seed);

/// Fresh per-agent bookkeeping for the kinds already stored in `lat`.
/// Target selectors get a uniformly random initial target; strategy
/// selectors start with their initial strategy as the previous action.
std::vector<AgentState> init_agents(const Lattice& lat, TraditionalRule rule, std::uint64_t seed);

/// Scheduling knobs that must not change the result of an epoch.
struct EpochExecution {
  int threads = 1;
  /// When non-empty, agents are visited sequentially in this order.
  std::span<const std::size_t> order;
};

/// One synchronous epoch: (A) observe states on the committed grid,
/// (B) resolve next strategies from last epoch's strategies and payoffs,
/// (C) commit all strategies at once, (D) recompute cumulative payoffs,
/// (E) learning agents with history update Q(s_prev, a_prev) and shift.
void run_epoch(Lattice& lat, std::vector<AgentState>& agents, const EpochConfig& cfg, std::uint64_t epoch,
               std::uint64_t seed, const EpochExecution& exec = {});

}  // namespace sarsa_pd

#endif  // SARSA_PD_DYNAMICS_HPP
