#pragma once

// Reproducible randomness. std::mt19937_64 output is fixed by the C++
// standard; the uniform and Gaussian transforms below are written out so no
// library distribution code is involved.

#include <cstdint>
#include <random>
#include <vector>

#include "lassorec/model.hpp"

namespace lassorec {

std::uint64_t splitmix64(std::uint64_t x);

// Seed for replication `index` of stream `stream` under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  // Standard normal, Marsaglia polar method.
  double normal();
  Vector normal_vector(int n, double scale = 1.0);
  Matrix normal_matrix(int rows, int cols);
  // Sorted random subset of {0..p-1} of the given size.
  IndexSet subset(int p, int size);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lassorec
