#include "sarsa_pd/core_model.hpp"

#include <cmath>
#include <sstream>

#include "sarsa_pd/rng.hpp"

namespace sarsa_pd {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

int wrap(int x, int side) { return ((x % side) + side) % side; }

}  // namespace

PayoffMatrix payoff_matrix(const DilemmaParams& params) {
  if (!in_unit_interval(params.dg)) {
    throw ParameterError("Dg = " + std::to_string(params.dg) + " is outside the valid range [0,1]");
  }
  if (!in_unit_interval(params.dr)) {
    throw ParameterError("Dr = " + std::to_string(params.dr) + " is outside the valid range [0,1]");
  }
  return PayoffMatrix{1.0, -params.dr, 1.0 + params.dg, 0.0};
}

std::array<Cell, 4> neighbors(Cell c, int side) {
  return {Cell{wrap(c.row - 1, side), c.col}, Cell{wrap(c.row + 1, side), c.col},
          Cell{c.row, wrap(c.col - 1, side)}, Cell{c.row, wrap(c.col + 1, side)}};
}

Lattice::Lattice(int side) : side_(side) {
  if (side < 2) throw ParameterError("lattice side must be at least 2, got " + std::to_string(side));
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  strategies.assign(n, Strategy::Defect);
  rewards.assign(n, 0.0);
  kinds.assign(n, AgentKind::Traditional);
  neighbor_table_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = sarsa_pd::neighbors(cell(i), side);
    for (int d = 0; d < kNeighborCount; ++d) neighbor_table_[i][d] = static_cast<std::uint32_t>(index(nb[d]));
  }
}

double cumulative_payoff(const Lattice& lat, std::size_t index, const PayoffMatrix& m) {
  const Strategy mine = lat.strategies[index];
  double total = 0.0;
  for (std::uint32_t j : lat.neighbors_of(index)) total += pair_payoff(mine, lat.strategies[j], m);
  return total;
}

InitScheme InitScheme::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (name == "random") {
      const double p0 = arg.empty() ? 0.5 : std::stod(arg, &used);
      if (!arg.empty() && used != arg.size()) throw std::invalid_argument(arg);
      return random(p0);
    }
    if (name == "cluster") {
      const int w = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return cluster(w);
    }
  } catch (const std::logic_error&) {
    throw ParameterError("malformed init scheme '" + text + "'; expected random:<p0> or cluster:<w>");
  }
  throw ParameterError("unknown init scheme '" + text + "'; expected random:<p0> or cluster:<w>");
}

std::string InitScheme::to_string() const {
  std::ostringstream os;
  if (kind == Kind::Random) {
    os.precision(17);
    os << "random:" << p0;
  } else {
    os << "cluster:" << half_width;
  }
  return os.str();
}

Lattice init_lattice(int side, const InitScheme& scheme, std::uint64_t seed) {
  Lattice lat(side);
  switch (scheme.kind) {
    case InitScheme::Kind::Random: {
      if (!in_unit_interval(scheme.p0)) {
        throw ParameterError("initial cooperation probability must lie in [0,1], got " + std::to_string(scheme.p0));
      }
      for (std::size_t i = 0; i < lat.size(); ++i) {
        CounterRng rng(seed, i, kInitLatticeTag);
        lat.strategies[i] = rng.uniform() < scheme.p0 ? Strategy::Cooperate : Strategy::Defect;
      }
      break;
    }
    case InitScheme::Kind::Cluster: {
      const int w = scheme.half_width;
      if (w < 0 || 2 * w + 1 > side) {
        throw ParameterError("cluster half-width " + std::to_string(w) + " does not fit a lattice of side " +
                             std::to_string(side));
      }
      const int centre = side / 2;
      for (int r = centre - w; r <= centre + w; ++r) {
        for (int c = centre - w; c <= centre + w; ++c) lat.strategies[lat.index({r, c})] = Strategy::Cooperate;
      }
      break;
    }
  }
  return lat;
}

}  // namespace sarsa_pd
