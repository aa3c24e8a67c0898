#include "sarsa_pd/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sarsa_pd {

QTable::QTable(int actions) : actions_(actions) {
  if (actions != kStrategyActions && actions != kTargetActions) {
    throw ParameterError("Q-table must have 2 or 4 actions, got " + std::to_string(actions));
  }
}

double QTable::max_in_row(StateId s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

void LearningParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0,1], got " + std::to_string(alpha));
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0,1), got " + std::to_string(gamma));
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ParameterError("epsilon must lie in [0,1], got " + std::to_string(epsilon));
  }
  if (!(noise > 0.0) || !std::isfinite(noise)) {
    throw ParameterError("Fermi noise K must be positive, got " + std::to_string(noise));
  }
}

StateId state_of(const Lattice& lat, std::size_t index) {
  int count = lat.strategies[index] == Strategy::Cooperate ? 1 : 0;
  for (std::uint32_t j : lat.neighbors_of(index)) count += lat.strategies[j] == Strategy::Cooperate ? 1 : 0;
  return count;
}

ActionId epsilon_greedy(std::span<const double> q_row, double epsilon, CounterRng& rng) {
  if (q_row.empty()) throw std::logic_error("epsilon_greedy called with an empty action row");
  const auto n = static_cast<std::uint32_t>(q_row.size());
  if (rng.uniform() < epsilon) return static_cast<ActionId>(rng.below(n));

  std::array<ActionId, QTable::kMaxActions> tied{};
  std::uint32_t n_tied = 0;
  double best = q_row[0];
  for (std::uint32_t a = 0; a < n; ++a) {
    if (q_row[a] > best) {
      best = q_row[a];
      n_tied = 0;
    }
    if (q_row[a] == best) tied[n_tied++] = static_cast<ActionId>(a);
  }
  return n_tied == 1 ? tied[0] : tied[rng.below(n_tied)];
}

void sarsa_update(QTable& q, StateId s, ActionId a, double reward, StateId s_next, ActionId a_next,
                  const LearningParams& p) {
  double& entry = q(s, a);
  entry += p.alpha * (reward + p.gamma * q(s_next, a_next) - entry);
}

void q_learning_update(QTable& q, StateId s, ActionId a, double reward, StateId s_next, const LearningParams& p) {
  double& entry = q(s, a);
  entry += p.alpha * (reward + p.gamma * q.max_in_row(s_next) - entry);
}

double fermi_probability(double pi_x, double pi_y, double noise) {
  if (!(noise > 0.0)) throw ParameterError("Fermi noise K must be positive, got " + std::to_string(noise));
  const double exponent = std::clamp((pi_x - pi_y) / noise, -500.0, 500.0);
  return 1.0 / (1.0 + std::exp(exponent));
}

}  // namespace sarsa_pd
