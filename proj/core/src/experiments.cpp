#include "lassorec/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "lassorec/errors.hpp"

namespace lassorec {

BestLambda best_l2_on_path(const LassoPath& path, const Vector& beta) {
  if (beta.size() != path.p())
    throw InputError("truth length differs from the path dimension");
  BestLambda best;
  best.lambda = path.lambda_max();
  best.sq_error = beta.squaredNorm();
  best.coefficients = Vector::Zero(path.p());
  for (const auto& seg : path.segments()) {
    // beta - path(lambda) = r - u d with u = lambda_high - lambda.
    Vector r = beta - seg.anchor;
    double dd = seg.direction.squaredNorm();
    double width = seg.lambda_high - seg.lambda_low;
    double u = dd > 0 ? std::clamp(r.dot(seg.direction) / dd, 0.0, width) : 0.0;
    // Compare the interior optimum with the low end explicitly; the
    // closed form can lose a few ulps against the endpoint.
    for (double cand : {u, width}) {
      double lambda = seg.lambda_high - cand;
      Vector b = seg.at(lambda);
      double err = (beta - b).squaredNorm();
      if (err < best.sq_error) {
        best.sq_error = err;
        best.lambda = lambda;
        best.coefficients = std::move(b);
      }
    }
  }
  return best;
}

bool always_active(const LassoPath& path, int k) {
  if (k < 0 || k >= path.p()) throw InputError("column index out of range");
  if (path.segments().empty()) return false;
  // Inside a segment the coefficient is linear and only vanishes at an
  // event, so the midpoint and the lower end decide.
  for (const auto& seg : path.segments()) {
    double mid = 0.5 * (seg.lambda_high + seg.lambda_low);
    if (seg.at(mid)(k) == 0.0 || seg.at(seg.lambda_low)(k) == 0.0) return false;
  }
  return true;
}

int max_active_size(const LassoPath& path) {
  std::size_t m = 0;
  for (const auto& seg : path.segments()) m = std::max(m, seg.active_set.size());
  return static_cast<int>(m);
}

std::vector<double> log_lambda_grid(double lambda_max, double ratio,
                                    int points) {
  if (!(lambda_max > 0)) throw InputError("lambda_max must be positive");
  if (!(ratio > 0 && ratio < 1)) throw InputError("lambda ratio must lie in (0, 1)");
  if (points < 2) throw InputError("lambda grid needs at least 2 points");
  std::vector<double> grid(points);
  double step = std::log(ratio) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lambda_max * std::exp(step * i);
  grid.front() = lambda_max;
  grid.back() = lambda_max * ratio;
  return grid;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double h = (values.size() - 1) * q;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

}  // namespace lassorec
