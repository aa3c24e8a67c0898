#ifndef SARSA_PD_CORE_MODEL_HPP
#define SARSA_PD_CORE_MODEL_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sarsa_pd {

/// Raised for any out-of-range or inconsistent configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Serialized as C -> 1, D -> 0 everywhere.
enum class Strategy : std::uint8_t { Defect = 0, Cooperate = 1 };

enum class AgentKind : std::uint8_t { Traditional = 0, SarsaTarget = 1, SarsaStrategy = 2 };

inline bool is_sarsa(AgentKind k) { return k != AgentKind::Traditional; }

struct DilemmaParams {
  double dg = 0.0;  // gamble-intending: T = 1 + dg
  double dr = 0.0;  // risk-averting:    S = -dr
};

struct PayoffMatrix {
  double R = 1.0;
  double S = 0.0;
  double T = 1.0;
  double P = 0.0;
};

/// R = 1, S = -Dr, T = 1 + Dg, P = 0. Throws ParameterError outside [0,1]^2.
PayoffMatrix payoff_matrix(const DilemmaParams& params);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Neighbor order is fixed: up, down, left, right. Target-selection action
/// IDs 0..3 index into this order.
enum Direction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNeighborCount = 4;

std::array<Cell, 4> neighbors(Cell cell, int side);

/// Payoff of `mine` against `theirs`, row player's entry of the matrix.
inline double pair_payoff(Strategy mine, Strategy theirs, const PayoffMatrix& m) {
  if (mine == Strategy::Cooperate) return theirs == Strategy::Cooperate ? m.R : m.S;
  return theirs == Strategy::Cooperate ? m.T : m.P;
}

/// L x L periodic square lattice, stored row-major.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(int side);

  int side() const { return side_; }
  std::size_t size() const { return strategies.size(); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(c.col);
  }
  Cell cell(std::size_t i) const {
    return {static_cast<int>(i / static_cast<std::size_t>(side_)), static_cast<int>(i % static_cast<std::size_t>(side_))};
  }

  /// Flat neighbor indices in (up, down, left, right) order.
  const std::array<std::uint32_t, 4>& neighbors_of(std::size_t i) const { return neighbor_table_[i]; }

  std::vector<Strategy> strategies;
  std::vector<double> rewards;  // cumulative payoff from the last completed epoch
  std::vector<AgentKind> kinds;

 private:
  int side_ = 0;
  std::vector<std::array<std::uint32_t, 4>> neighbor_table_;
};

/// Sum of pair payoffs against the four neighbors on the current grid.
double cumulative_payoff(const Lattice& lat, std::size_t index, const PayoffMatrix& m);
inline double cumulative_payoff(const Lattice& lat, Cell c, const PayoffMatrix& m) {
  return cumulative_payoff(lat, lat.index(c), m);
}

struct InitScheme {
  enum class Kind { Random, Cluster };
  Kind kind = Kind::Random;
  double p0 = 0.5;     // Random: per-cell cooperation probability
  int half_width = 0;  // Cluster: centred (2w+1) x (2w+1) block of cooperators

  static InitScheme random(double p0) { return {Kind::Random, p0, 0}; }
  static InitScheme cluster(int w) { return {Kind::Cluster, 0.0, w}; }

  /// Parses "random:<p0>" or "cluster:<w>".
  static InitScheme parse(const std::string& text);
  std::string to_string() const;
};

/// Builds an L x L lattice with zeroed rewards and all-Traditional kinds.
Lattice init_lattice(int side, const InitScheme& scheme, std::uint64_t seed);

}  // namespace sarsa_pd

#endif  // SARSA_PD_CORE_MODEL_HPP
