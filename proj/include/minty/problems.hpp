#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "minty/operators.hpp"

namespace minty {

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

enum class RhoKind {
  exact,        // closed form known
  approximate,  // numerically reported value
  upper_bound,  // certified by a witness point; true rho is at most this
};

/// Weak-MVI parameter of the problem restricted to its domain.
struct RhoInfo {
  double value = 0.0;
  RhoKind kind = RhoKind::exact;
  std::optional<Rational> rational;
};

/// rho lies in the open interval (-lo_factor / L, -hi_factor / L).
struct RhoBracket {
  double lo_factor = 0.0;
  double hi_factor = 0.0;
  bool contains(double rho, double L) const { return rho > -lo_factor / L && rho < -hi_factor / L; }
};

/// Polar-coordinate construction: dr/dt = -a r prod(r^2 - c_i^2), dtheta/dt = -b.
struct PolarSpec {
  double a = 1.0;
  double b = 1.0;
  std::vector<double> radii;
};

/// Annulus inner < r < outer on which the flow dz/dt = -F z points inward.
struct TrapAnnulus {
  double inner = 0.0;
  double outer = 0.0;
};

struct ProblemInstance {
  std::string name;
  ForwardOperator F;
  Resolvent A;
  std::optional<Box> domain;
  /// Lipschitz constant of F restricted to the domain (grid-oracle value).
  std::optional<double> L_restricted;
  /// Independent closed-form value of L, kept only for cross-checks.
  std::optional<double> L_reference;
  std::optional<RhoInfo> rho;
  std::optional<Vector> z_star;
  std::vector<double> known_cycles;
  /// A point in the basin of an attracting non-circular limit cycle of dz/dt = -F z.
  std::optional<Vector> cycle_seed;

  /// phi(x, y) with F = (d_x phi, -d_y phi), for problems coming from a minimax game.
  std::function<double(const Vector&)> potential;
  std::optional<PolarSpec> polar;
  std::optional<TrapAnnulus> trap;
  std::optional<RhoBracket> rho_bracket;
  /// Witness point certifying an upper bound on rho.
  std::optional<Vector> rho_witness;

  int dim() const { return F.dim; }
  /// L_restricted, else F.lipschitz; throws if neither is known.
  double lipschitz() const;
  /// rho > -1/(2L), when both are known.
  std::optional<bool> rho_exceeds_half_inverse_L() const;
};

class UnknownProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ProblemInstance make_polargame(double a, double b, const std::vector<double>& radii);
ProblemInstance make_example_polargame(double a_coeff);
ProblemInstance make_global_forsaken();
ProblemInstance make_forsaken();
/// Worst-case bilinear game with L = 1, rho = -c. Unconstrained unless
/// box_radius is given.
ProblemInstance make_lower_bound_bilinear(double c, std::optional<double> box_radius = std::nullopt);

/// Canonical names: polargame-a1, polargame-a34, polargame-a13, global-forsaken,
/// forsaken, bilinear-c<value>[-r<radius>].
ProblemInstance resolve_problem(std::string_view name);
/// The fixed instances; bilinear-c<value> is parsed on demand.
std::vector<std::string> canonical_problem_names();

/// Damped Newton on F z = 0 from z0 using the Jacobian; returns the refined root.
Vector refine_root(const ForwardOperator& F, const Vector& z0, double tol = 1e-12, int max_iters = 50);

}  // namespace minty
