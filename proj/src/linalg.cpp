#include "minty/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace minty {

double sigma_max_2x2(const Matrix& A) {
  if (A.rows() != 2 || A.cols() != 2) throw std::invalid_argument("sigma_max_2x2: not 2x2");
  // sigma_max = (|q| + |r|) / 2 with q, r the conformal and anticonformal parts.
  // Unlike the characteristic-polynomial route this has no cancellation when
  // A is close to a scaled rotation.
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  return 0.5 * (std::hypot(a + d, b - c) + std::hypot(a - d, b + c));
}

PowerIterationResult power_iteration_sigma_max(const std::function<Vector(const Vector&)>& matvec,
                                               const std::function<Vector(const Vector&)>& rmatvec,
                                               int dim, double rel_tol, int max_iters) {
  // Plain power iteration needs O(1/gap) steps, and Jacobians that are close to
  // a scaled rotation have nearly equal singular values. Rayleigh-Ritz over a
  // small Krylov block of J^T J, restarted from the Ritz vector, fixes that;
  // for dim <= block size the first block is already exact.
  PowerIterationResult out;
  const int block = std::max(1, std::min(dim, 16));
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = 1.0 + 0.1 * i;
  v.normalize();
  auto gram = [&](const Vector& x) -> Vector { return rmatvec(matvec(x)); };

  double prev = -1.0;
  int products = 0;
  while (products < max_iters) {
    Matrix V(dim, block);
    Matrix AV(dim, block);
    int m = 0;
    Vector q = v;
    for (; m < block; ++m) {
      V.col(m) = q;
      AV.col(m) = gram(q);
      ++products;
      Vector r = AV.col(m);
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j <= m; ++j) r -= V.col(j).dot(r) * V.col(j);
      }
      const double nr = r.norm();
      if (nr <= 1e-14 * std::max(1.0, AV.col(m).norm())) {
        ++m;
        break;
      }
      q = r / nr;
    }
    const Matrix S = V.leftCols(m).transpose() * AV.leftCols(m);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    const double theta = std::max(0.0, es.eigenvalues()[m - 1]);
    v = V.leftCols(m) * es.eigenvectors().col(m - 1);
    v.normalize();
    out.iterations = products;
    out.sigma_max = std::sqrt(theta);
    const double resid = (gram(v) - theta * v).norm();
    if (theta == 0.0 || resid <= std::sqrt(rel_tol) * theta ||
        (prev >= 0.0 && std::abs(theta - prev) <= rel_tol * theta)) {
      out.converged = true;
      return out;
    }
    prev = theta;
  }
  return out;
}

double spectral_norm(const Matrix& A) {
  if (A.rows() == 2 && A.cols() == 2) return sigma_max_2x2(A);
  return power_iteration_sigma_max([&A](const Vector& v) -> Vector { return A * v; },
                                   [&A](const Vector& v) -> Vector { return A.transpose() * v; },
                                   static_cast<int>(A.cols()))
      .sigma_max;
}

}  // namespace minty
