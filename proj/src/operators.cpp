#include "minty/operators.hpp"

#include <algorithm>
#include <cmath>

namespace minty {

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw NonFiniteError("non-finite value in " + std::string(what));
  }
}

Box Box::symmetric(int dim, double radius) {
  if (dim < 1 || !(radius >= 0.0)) throw std::invalid_argument("Box::symmetric: bad arguments");
  return Box{Vector::Constant(dim, -radius), Vector::Constant(dim, radius)};
}

bool Box::contains(const Vector& z, double slack) const {
  if (z.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < lo[i] - slack || z[i] > hi[i] + slack) return false;
  }
  return true;
}

Vector ForwardOperator::operator()(const Vector& z) const {
  if (z.size() != dim) {
    throw std::invalid_argument("ForwardOperator: expected dimension " + std::to_string(dim) +
                                ", got " + std::to_string(z.size()));
  }
  require_finite(z, "z");
  Vector out = eval(z);
  if (out.size() != dim) throw std::logic_error("ForwardOperator: output dimension mismatch");
  require_finite(out, "F(z)");
  return out;
}

Matrix ForwardOperator::jacobian_at(const Vector& z) const {
  if (jacobian) {
    Matrix J = jacobian(z);
    if (!J.allFinite()) throw NonFiniteError("non-finite Jacobian");
    return J;
  }
  return finite_difference_jacobian(*this, z);
}

Vector ForwardOperator::jvp(const Vector& z, const Vector& v) const { return jacobian_at(z) * v; }

Vector ForwardOperator::vjp(const Vector& z, const Vector& v) const {
  return jacobian_at(z).transpose() * v;
}

Matrix finite_difference_jacobian(const ForwardOperator& F, const Vector& z) {
  const double h = 1e-6 * std::max(1.0, z.lpNorm<Eigen::Infinity>());
  Matrix J(F.dim, F.dim);
  Vector zp = z;
  Vector zm = z;
  for (int j = 0; j < F.dim; ++j) {
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    J.col(j) = (F(zp) - F(zm)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return J;
}

Vector Resolvent::apply(double gamma, const Vector& v) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("Resolvent::apply: gamma must be positive");
  if (dim != 0 && v.size() != dim) throw std::invalid_argument("Resolvent::apply: dimension mismatch");
  Vector out = map(gamma, v);
  require_finite(out, "resolvent output");
  return out;
}

Resolvent make_box_resolvent(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw std::invalid_argument("make_box_resolvent: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("make_box_resolvent: lo > hi");
  }
  return Resolvent{ResolventKind::box, static_cast<int>(lo.size()),
                   [lo, hi](double, const Vector& v) -> Vector { return v.cwiseMax(lo).cwiseMin(hi); }};
}

Resolvent make_box_resolvent(const Box& box) { return make_box_resolvent(box.lo, box.hi); }

Resolvent make_l1_resolvent(double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("make_l1_resolvent: negative weight");
  return Resolvent{ResolventKind::l1, 0, [weight](double gamma, const Vector& v) -> Vector {
                     const double t = gamma * weight;
                     return v.unaryExpr([t](double x) {
                       return std::copysign(std::max(std::abs(x) - t, 0.0), x);
                     });
                   }};
}

Resolvent make_zero_resolvent(int dim) {
  if (dim < 1) throw std::invalid_argument("make_zero_resolvent: dim must be positive");
  return Resolvent{ResolventKind::identity, dim, [](double, const Vector& v) -> Vector { return v; }};
}

Vector apply_H(const ForwardOperator& F, double gamma, const Vector& z) {
  if (!(gamma > 0.0)) throw std::invalid_argument("apply_H: gamma must be positive");
  return z - gamma * F(z);
}

Vector forward_backward_step(const ForwardOperator& F, const Resolvent& J, double gamma,
                             const Vector& z) {
  return J.apply(gamma, apply_H(F, gamma, z));
}

}  // namespace minty
