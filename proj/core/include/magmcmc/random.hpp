#pragma once

#include <cstdint>
#include <random>

#include "magmcmc/types.hpp"

namespace magmcmc {

// Seeded random stream. Every draw is counted so tests can account for
// exactly how much randomness a procedure consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal();
  double uniform();  // [0, 1)
  bool coin();
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  std::uint64_t draws() const { return draws_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::uint64_t draws_ = 0;
};

// Child seed for stream `index` of a master seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace magmcmc
