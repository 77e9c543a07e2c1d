#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace minty {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an operator or resolvent produces NaN/Inf. This is a hard
/// error: genuine non-convergence is reported through run verdicts instead.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool all_finite(const Vector& v);
void require_finite(const Vector& v, std::string_view what);

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  static Box symmetric(int dim, double radius);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& z, double slack = 0.0) const;
};

/// Single-valued Lipschitz operator F : R^n -> R^n.
struct ForwardOperator {
  int dim = 0;
  std::function<Vector(const Vector&)> eval;
  /// Analytic Jacobian. Optional; central differences are used otherwise.
  std::function<Matrix(const Vector&)> jacobian;
  std::optional<double> lipschitz;

  /// Evaluates F(z), checking dimensions and finiteness.
  Vector operator()(const Vector& z) const;

  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
  Matrix jacobian_at(const Vector& z) const;

  /// Jacobian-vector products J v and J^T v at z.
  Vector jvp(const Vector& z, const Vector& v) const;
  Vector vjp(const Vector& z, const Vector& v) const;
};

/// Central differences with step 1e-6 * max(1, ||z||_inf).
Matrix finite_difference_jacobian(const ForwardOperator& F, const Vector& z);

enum class ResolventKind { identity, box, l1, custom };

/// The maximally monotone part A, represented only through
/// v -> (id + gamma A)^{-1} v. gamma is passed per call.
struct Resolvent {
  ResolventKind kind = ResolventKind::custom;
  int dim = 0;  // 0 means any dimension
  std::function<Vector(double, const Vector&)> map;

  Vector apply(double gamma, const Vector& v) const;
  /// True when A is the normal cone of a convex set (resolvent is a projection).
  bool is_projection() const {
    return kind == ResolventKind::box || kind == ResolventKind::identity;
  }
};

Resolvent make_box_resolvent(const Vector& lo, const Vector& hi);
Resolvent make_box_resolvent(const Box& box);
Resolvent make_l1_resolvent(double weight);
Resolvent make_zero_resolvent(int dim);

/// H z = z - gamma F z.
Vector apply_H(const ForwardOperator& F, double gamma, const Vector& z);

/// (id + gamma A)^{-1} (z - gamma F z).
Vector forward_backward_step(const ForwardOperator& F, const Resolvent& J, double gamma,
                             const Vector& z);

}  // namespace minty
