#include <memory>

#include "lassorec/errors.hpp"
#include "lassorec/lasso.hpp"
#include "lassorec/model.hpp"

namespace lassorec {

Vector minimal_l1_representation(const DesignMatrix& design,
                                 const Vector& target) {
  if (target.size() != design.n())
    throw InputError("target length differs from the number of rows");
  if (!target.allFinite()) throw InputError("target not finite");
  const Matrix& X = design.entries();
  Vector ls = Eigen::CompleteOrthogonalDecomposition<Matrix>(X).solve(target);
  double tnorm = target.norm();
  if ((target - X * ls).norm() > 1e-8 * tnorm)
    throw InfeasibleError("target is not in the column span of the design");
  if (tnorm == 0.0) return Vector::Zero(design.p());

  RegressionProblem problem(std::make_shared<DesignMatrix>(design), target);
  PathOptions options;
  options.force = true;
  LassoPath path = lasso_path(problem, 0.0, options);
  return path.segments().back().at(0.0);
}

}  // namespace lassorec
