#pragma once

#include <functional>

#include "minty/operators.hpp"

namespace minty {

/// Largest singular value of a 2x2 matrix in closed form.
double sigma_max_2x2(const Matrix& A);

struct PowerIterationResult {
  double sigma_max = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// sigma_max of an implicit matrix J by (Krylov-accelerated) power iteration on J^T J, using only
/// the products v -> J v and v -> J^T v.
PowerIterationResult power_iteration_sigma_max(const std::function<Vector(const Vector&)>& matvec,
                                               const std::function<Vector(const Vector&)>& rmatvec,
                                               int dim, double rel_tol = 1e-15,
                                               int max_iters = 1000);

/// Spectral norm: closed form for 2x2, power iteration otherwise.
double spectral_norm(const Matrix& A);

}  // namespace minty
