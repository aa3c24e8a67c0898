#ifndef SARSA_PD_LEARNING_HPP
#define SARSA_PD_LEARNING_HPP

#include <array>
#include <cstdint>
#include <span>

#include "sarsa_pd/core_model.hpp"
#include "sarsa_pd/rng.hpp"

namespace sarsa_pd {

/// Number of cooperators among an agent and its four neighbors, 0..5.
using StateId = int;
/// Neighbor index 0..3 (target selection) or 0 = Defect, 1 = Cooperate (strategy selection).
using ActionId = int;

inline constexpr int kStateCount = 6;
inline constexpr int kTargetActions = 4;
inline constexpr int kStrategyActions = 2;

inline constexpr ActionId action_of(Strategy s) { return static_cast<ActionId>(s); }
inline constexpr Strategy strategy_of(ActionId a) { return a == 1 ? Strategy::Cooperate : Strategy::Defect; }

/// Action-value table with 6 states and 2 or 4 actions, zero-initialized.
class QTable {
 public:
  static constexpr int kMaxActions = kTargetActions;

  QTable() = default;
  explicit QTable(int actions);

  int states() const { return kStateCount; }
  int actions() const { return actions_; }

  double& operator()(StateId s, ActionId a) { return values_[static_cast<std::size_t>(s * kMaxActions + a)]; }
  double operator()(StateId s, ActionId a) const { return values_[static_cast<std::size_t>(s * kMaxActions + a)]; }

  std::span<const double> row(StateId s) const {
    return {values_.data() + static_cast<std::ptrdiff_t>(s * kMaxActions), static_cast<std::size_t>(actions_)};
  }

  double max_in_row(StateId s) const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  int actions_ = 0;
  std::array<double, kStateCount * kMaxActions> values_{};
};

struct LearningParams {
  double alpha = 0.3;
  double gamma = 0.9;
  double epsilon = 0.02;
  double noise = 0.1;  // Fermi K

  /// Throws ParameterError naming the first field out of range.
  void validate() const;
};

StateId state_of(const Lattice& lat, std::size_t index);

/// Exploration draw first, then either a uniform action or a uniform pick
/// among the tied maxima. Exactly one uniform() and at most one below() draw.
ActionId epsilon_greedy(std::span<const double> q_row, double epsilon, CounterRng& rng);

void sarsa_update(QTable& q, StateId s, ActionId a, double reward, StateId s_next, ActionId a_next,
                  const LearningParams& p);

void q_learning_update(QTable& q, StateId s, ActionId a, double reward, StateId s_next, const LearningParams& p);

/// Probability that x adopts y's strategy: 1 / (1 + exp((pi_x - pi_y) / K)).
/// The exponent is clamped to +-500 so the result saturates cleanly.
double fermi_probability(double pi_x, double pi_y, double noise);

}  // namespace sarsa_pd

#endif  // SARSA_PD_LEARNING_HPP
