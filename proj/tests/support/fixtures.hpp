#pragma once

#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "magmcmc/manifold.hpp"
#include "magmcmc/random.hpp"
#include "magmcmc/target.hpp"

namespace magmcmc::fixture {

// Matrix von Mises-Fisher style potential U(Q) = -tr(W^T Q) on an n x r
// Stiefel manifold (or SO(n) when r == n).
inline TargetPtr matrix_fisher(ManifoldPtr manifold, const Matrix& weight) {
  const Vector w = Eigen::Map<const Vector>(weight.data(), weight.size());
  const Vector init = manifold->retract(Vector::Ones(w.size()) + w);
  return std::make_shared<FunctionTarget>(
      std::move(manifold), "matrix_fisher", [w](const Vector& q) { return -w.dot(q); },
      [w](const Vector&) { return Vector(-w); }, init);
}

// Nine players, random 3-vs-3 games with outcomes drawn from the win model
// at a fixed skill vector.
inline std::vector<Game> volleyball_games(int num_games, Rng& rng) {
  const int players = 9;
  Vector skill(players);
  for (int i = 0; i < players; ++i) skill(i) = 1.0 + i;
  skill /= skill.sum();
  std::vector<Game> games;
  for (int g = 0; g < num_games; ++g) {
    std::vector<Index> order(players);
    std::iota(order.begin(), order.end(), 0);
    for (int i = players - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(std::min(j, i))]);
    }
    Game game;
    game.team_a.assign(order.begin(), order.begin() + 3);
    game.team_b.assign(order.begin() + 3, order.begin() + 6);
    double sa = 0.0, sb = 0.0;
    for (Index i : game.team_a) sa += skill(i);
    for (Index i : game.team_b) sb += skill(i);
    game.winner_a = rng.uniform() < sa / (sa + sb);
    games.push_back(std::move(game));
  }
  return games;
}

inline TargetPtr volleyball_target(double alpha, Rng& rng) {
  return simplex_sphere_target(Vector::Constant(9, alpha), volleyball_games(40, rng));
}

inline TargetPtr bvmf6(std::uint64_t seed) {
  Rng rng(seed);
  const BvmfProblem problem = random_bvmf_problem(6, rng);
  return bvmf_target(problem.a, problem.b);
}

inline TargetPtr eigenmodel8(std::uint64_t seed) {
  Rng rng(seed);
  return network_eigenmodel_target(synthetic_eigenmodel_graph(8, 2, rng), 2, 230.0, 100.0);
}

}  // namespace magmcmc::fixture
