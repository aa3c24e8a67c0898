#include "sarsa_pd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace sarsa_pd {

namespace {

template <typename Fn>
void for_each_agent(std::size_t n, const EpochExecution& exec, Fn&& fn) {
  if (!exec.order.empty()) {
    for (std::size_t i : exec.order) fn(i);
    return;
  }
  const auto threads = static_cast<std::size_t>(std::max(1, exec.threads));
  if (threads == 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace

std::string to_string(Composition c) {
  switch (c) {
    case Composition::Traditional: return "traditional";
    case Composition::SarsaTarget: return "sarsa-target";
    case Composition::SarsaStrategy: return "sarsa-strategy";
    case Composition::Mixed: return "mixed";
  }
  return "?";
}

Composition parse_composition(const std::string& text) {
  for (auto c : {Composition::Traditional, Composition::SarsaTarget, Composition::SarsaStrategy, Composition::Mixed}) {
    if (text == to_string(c)) return c;
  }
  throw ParameterError("unknown mode '" + text + "'; expected traditional, sarsa-target, sarsa-strategy or mixed");
}

std::string to_string(TraditionalRule r) { return r == TraditionalRule::FermiOnly ? "fermi" : "target"; }

TraditionalRule parse_traditional_rule(const std::string& text) {
  if (text == "fermi") return TraditionalRule::FermiOnly;
  if (text == "target") return TraditionalRule::TargetSelection;
  throw ParameterError("unknown traditional rule '" + text + "'; expected fermi or target");
}

std::string to_string(UpdateRule r) { return r == UpdateRule::Sarsa ? "sarsa" : "q-learning"; }

UpdateRule parse_update_rule(const std::string& text) {
  if (text == "sarsa") return UpdateRule::Sarsa;
  if (text == "q-learning") return UpdateRule::QLearning;
  throw ParameterError("unknown update rule '" + text + "'; expected sarsa or q-learning");
}

Resolver resolver_for(AgentKind kind, TraditionalRule rule) {
  switch (kind) {
    case AgentKind::Traditional:
      return rule == TraditionalRule::FermiOnly ? Resolver::Fermi : Resolver::TargetSelection;
    case AgentKind::SarsaTarget: return Resolver::TargetSelection;
    case AgentKind::SarsaStrategy: return Resolver::StrategySelection;
  }
  return Resolver::Fermi;
}

Strategy traditional_resolve(const Lattice& lat, std::size_t index, double noise, CounterRng& rng) {
  const std::uint32_t y = lat.neighbors_of(index)[rng.below(kNeighborCount)];
  const double w = fermi_probability(lat.rewards[index], lat.rewards[y], noise);
  return rng.uniform() < w ? lat.strategies[y] : lat.strategies[index];
}

Resolution target_resolve(const Lattice& lat, std::size_t index, const AgentState& agent, const LearningParams& p,
                        CounterRng& rng) {
  const StateId s_next = state_of(lat, index);
  const ActionId a_temp = epsilon_greedy(agent.q.row(s_next), p.epsilon, rng);
  const auto& nb = lat.neighbors_of(index);
  const double w = fermi_probability(lat.rewards[index], lat.rewards[nb[a_temp]], p.noise);
  const ActionId a_next = w >= rng.uniform() ? a_temp : agent.a_prev;
  return {s_next, a_next, lat.strategies[nb[a_next]]};
}

Resolution strategy_resolve(const Lattice& lat, std::size_t index, const AgentState& agent, const LearningParams& p,
                        CounterRng& rng) {
  const StateId s_next = state_of(lat, index);
  const ActionId a_next = epsilon_greedy(agent.q.row(s_next), p.epsilon, rng);
  return {s_next, a_next, strategy_of(a_next)};
}

std::vector<AgentKind> assign_kinds(int side, double rho, Composition mode, std::uint64_t seed) {
  if (side < 2) throw ParameterError("lattice side must be at least 2, got " + std::to_string(side));
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("rho must lie in [0,1], got " + std::to_string(rho));
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  switch (mode) {
    case Composition::Traditional: return std::vector<AgentKind>(n, AgentKind::Traditional);
    case Composition::SarsaTarget: return std::vector<AgentKind>(n, AgentKind::SarsaTarget);
    case Composition::SarsaStrategy: return std::vector<AgentKind>(n, AgentKind::SarsaStrategy);
    case Composition::Mixed: break;
  }
  const auto count = static_cast<std::size_t>(std::llround(rho * static_cast<double>(n)));
  std::vector<std::size_t> cells(n);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` slots become a uniform sample.
  CounterRng rng(seed, 0, kAssignKindsTag);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(static_cast<std::uint32_t>(n - i));
    std::swap(cells[i], cells[j]);
  }
  std::vector<AgentKind> kinds(n, AgentKind::Traditional);
  for (std::size_t i = 0; i < count; ++i) kinds[cells[i]] = AgentKind::SarsaStrategy;
  return kinds;
}

std::vector<AgentState> init_agents(const Lattice& lat, TraditionalRule rule, std::uint64_t seed) {
  std::vector<AgentState> agents(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    AgentState& a = agents[i];
    switch (resolver_for(lat.kinds[i], rule)) {
      case Resolver::Fermi: break;
      case Resolver::TargetSelection: {
        a.q = QTable(kTargetActions);
        CounterRng rng(seed, i, kInitAgentsTag);
        a.a_prev = static_cast<ActionId>(rng.below(kTargetActions));
        break;
      }
      case Resolver::StrategySelection:
        a.q = QTable(kStrategyActions);
        a.a_prev = action_of(lat.strategies[i]);
        break;
    }
    a.s_prev = state_of(lat, i);
  }
  return agents;
}

void run_epoch(Lattice& lat, std::vector<AgentState>& agents, const EpochConfig& cfg, std::uint64_t epoch,
               std::uint64_t seed, const EpochExecution& exec) {
  const std::size_t n = lat.size();
  std::vector<Strategy> next_strategy(n);
  std::vector<Resolution> resolved(n);

  // (A) + (B): everything read here is last epoch's committed state.
  for_each_agent(n, exec, [&](std::size_t i) {
    CounterRng rng(seed, i, epoch);
    switch (resolver_for(lat.kinds[i], cfg.traditional_rule)) {
      case Resolver::Fermi:
        resolved[i].strategy = traditional_resolve(lat, i, cfg.learning.noise, rng);
        break;
      case Resolver::TargetSelection:
        resolved[i] = target_resolve(lat, i, agents[i], cfg.learning, rng);
        break;
      case Resolver::StrategySelection:
        resolved[i] = strategy_resolve(lat, i, agents[i], cfg.learning, rng);
        break;
    }
    next_strategy[i] = resolved[i].strategy;
  });

  // (C)
  lat.strategies.swap(next_strategy);

  // (D)
  for_each_agent(n, exec, [&](std::size_t i) { lat.rewards[i] = cumulative_payoff(lat, i, cfg.matrix); });

  // (E)
  for_each_agent(n, exec, [&](std::size_t i) {
    AgentState& a = agents[i];
    if (!a.learns()) return;
    const Resolution& r = resolved[i];
    if (a.has_history) {
      if (cfg.update_rule == UpdateRule::Sarsa) {
        sarsa_update(a.q, a.s_prev, a.a_prev, a.r_prev, r.state, r.action, cfg.learning);
      } else {
        q_learning_update(a.q, a.s_prev, a.a_prev, a.r_prev, r.state, cfg.learning);
      }
    }
    a.s_prev = r.state;
    a.a_prev = r.action;
    a.r_prev = lat.rewards[i];
    a.has_history = true;
  });
}

}  // namespace sarsa_pd
