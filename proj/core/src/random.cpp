#include "lassorec/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lassorec {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Vector Rng::normal_vector(int n, double scale) {
  Vector out(n);
  for (int i = 0; i < n; ++i) out(i) = scale * normal();
  return out;
}

Matrix Rng::normal_matrix(int rows, int cols) {
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = normal();
  return out;
}

IndexSet Rng::subset(int p, int size) {
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < size; ++i) {
    int j = i + static_cast<int>(below(static_cast<std::uint64_t>(p - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace lassorec
