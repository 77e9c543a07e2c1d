#include "minty/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace minty {

namespace {

// Lipschitz constants on each constraint set, pinned from estimate_lipschitz
// (400x400 grid + coordinate refinement).
constexpr double kGlobalForsakenL = 3.0223976419603740;
constexpr double kForsakenL = 12.402569242368148;
constexpr double kPolarGameA1L = 18.547951868806590;
constexpr double kPolarGameA34L = 13.938389880205158;
constexpr double kPolarGameA13L = 6.3060895795165800;

Matrix rotation_generator() {
  Matrix R(2, 2);
  R << 0.0, -1.0, 1.0, 0.0;
  return R;
}

double cycle_psi(double a, double x, double y) {
  return a * x * (-1.0 + x * x + y * y) * (-9.0 + 16.0 * x * x + 16.0 * y * y) / 16.0;
}

// Gradient of cycle_psi with respect to (x, y).
Eigen::Vector2d cycle_psi_grad(double a, double x, double y) {
  const double s = x * x + y * y;
  const double p = (s - 1.0) * (16.0 * s - 9.0) / 16.0;
  const double dp_ds = (32.0 * s - 25.0) / 16.0;
  return {a * (p + 2.0 * x * x * dp_ds), a * 2.0 * x * y * dp_ds};
}

}  // namespace

double ProblemInstance::lipschitz() const {
  if (L_restricted) return *L_restricted;
  if (F.lipschitz) return *F.lipschitz;
  throw std::invalid_argument("problem '" + name + "' has no known Lipschitz constant");
}

std::optional<bool> ProblemInstance::rho_exceeds_half_inverse_L() const {
  if (!rho || !L_restricted) return std::nullopt;
  return rho->value > -1.0 / (2.0 * *L_restricted);
}

ProblemInstance make_polargame(double a, double b, const std::vector<double>& radii) {
  if (a == 0.0 || b == 0.0) throw std::invalid_argument("make_polargame: a and b must be nonzero");
  if (radii.empty()) throw std::invalid_argument("make_polargame: need at least one radius");
  std::set<double> seen;
  for (double c : radii) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("make_polargame: radii must be positive");
    if (!seen.insert(c).second) throw std::invalid_argument("make_polargame: duplicate radius");
  }
  std::vector<double> c2;
  for (double c : radii) c2.push_back(c * c);

  // F z = a p(|z|^2) z + b (-y, x) with p(s) = prod(s - c_i^2), the negated
  // cartesian form of the polar flow.
  auto p = [c2](double s) {
    double prod = 1.0;
    for (double q : c2) prod *= s - q;
    return prod;
  };
  auto dp = [c2](double s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < c2.size(); ++i) {
      double prod = 1.0;
      for (std::size_t j = 0; j < c2.size(); ++j) {
        if (j != i) prod *= s - c2[j];
      }
      sum += prod;
    }
    return sum;
  };

  ProblemInstance P;
  P.name = "polargame";
  P.F.dim = 2;
  P.F.eval = [a, b, p](const Vector& z) -> Vector {
    const double s = z.squaredNorm();
    const double g = a * p(s);
    Vector out(2);
    out << g * z[0] - b * z[1], g * z[1] + b * z[0];
    return out;
  };
  P.F.jacobian = [a, b, p, dp](const Vector& z) -> Matrix {
    const double s = z.squaredNorm();
    Matrix J = a * p(s) * Matrix::Identity(2, 2) + 2.0 * a * dp(s) * (z * z.transpose());
    J += b * rotation_generator();
    return J;
  };
  P.A = make_zero_resolvent(2);
  P.z_star = Vector::Zero(2);
  P.known_cycles = radii;
  P.polar = PolarSpec{a, b, radii};
  return P;
}

ProblemInstance make_example_polargame(double a_coeff) {
  ProblemInstance P;
  std::string suffix;
  if (a_coeff == 1.0) {
    suffix = "a1";
    P.rho = RhoInfo{0.0, RhoKind::exact, Rational{-50176, 1050977}};
    P.L_restricted = kPolarGameA1L;
    P.L_reference = std::sqrt(2538096.0 * std::sqrt(704424929.0) + 70246989617.0) / 20000.0;
    P.rho_bracket = RhoBracket{1.0, 0.5};
  } else if (a_coeff == 0.75) {
    suffix = "a34";
    P.rho = RhoInfo{0.0, RhoKind::exact, Rational{-602112, 16798825}};
    P.L_restricted = kPolarGameA34L;
    P.L_reference = std::sqrt(7614288.0 * std::sqrt(6383574361.0) + 635022906553.0) / 80000.0;
    P.rho_bracket = RhoBracket{0.5, 1.0 / 3.0};
  } else if (std::abs(a_coeff - 1.0 / 3.0) < 1e-15) {
    suffix = "a13";
    a_coeff = 1.0 / 3.0;
    P.rho = RhoInfo{0.0, RhoKind::exact, Rational{-150528, 9439585}};
    P.L_restricted = kPolarGameA13L;
    P.L_reference = std::sqrt(2538096.0 * std::sqrt(754424929.0) + 73446989617.0) / 60000.0;
    P.rho_bracket = RhoBracket{1.0 / 8.0, 1.0 / 10.0};
  } else {
    throw std::invalid_argument("make_example_polargame: a must be 1, 3/4 or 1/3");
  }
  P.rho->value = P.rho->rational->value();

  const double a = a_coeff;
  P.name = "polargame-" + suffix;
  P.F.dim = 2;
  P.F.eval = [a](const Vector& z) -> Vector {
    const double x = z[0], y = z[1];
    Vector out(2);
    out << cycle_psi(a, x, y) - y, cycle_psi(a, y, x) + x;
    return out;
  };
  P.F.jacobian = [a](const Vector& z) -> Matrix {
    const double x = z[0], y = z[1];
    const Eigen::Vector2d gx = cycle_psi_grad(a, x, y);
    const Eigen::Vector2d gy = cycle_psi_grad(a, y, x);  // w.r.t. (y, x)
    Matrix J(2, 2);
    J << gx[0], gx[1] - 1.0, gy[1] + 1.0, gy[0];
    return J;
  };
  P.F.lipschitz = P.L_restricted;
  P.domain = Box::symmetric(2, 11.0 / 10.0);
  P.A = make_box_resolvent(*P.domain);
  P.z_star = Vector::Zero(2);
  P.known_cycles = {0.75, 1.0};
  P.polar = PolarSpec{a, 1.0, {0.75, 1.0}};
  return P;
}

ProblemInstance make_global_forsaken() {
  auto psi = [](double t) { return 2.0 * std::pow(t, 6) / 21.0 - std::pow(t, 4) / 3.0 + t * t / 3.0; };
  auto dpsi = [](double t) { return 4.0 * std::pow(t, 5) / 7.0 - 4.0 * t * t * t / 3.0 + 2.0 * t / 3.0; };
  auto ddpsi = [](double t) { return 20.0 * std::pow(t, 4) / 7.0 - 4.0 * t * t + 2.0 / 3.0; };

  ProblemInstance P;
  P.name = "global-forsaken";
  P.F.dim = 2;
  P.F.eval = [dpsi](const Vector& z) -> Vector {
    Vector out(2);
    out << dpsi(z[0]) + z[1], -z[0] + dpsi(z[1]);
    return out;
  };
  P.F.jacobian = [ddpsi](const Vector& z) -> Matrix {
    Matrix J(2, 2);
    J << ddpsi(z[0]), 1.0, -1.0, ddpsi(z[1]);
    return J;
  };
  P.potential = [psi](const Vector& z) { return z[0] * z[1] + psi(z[0]) - psi(z[1]); };
  P.L_restricted = kGlobalForsakenL;
  P.L_reference = std::sqrt(0.5 * (9409.0 * std::sqrt(59721901.0) + 74125591.0)) / 2835.0;
  P.F.lipschitz = P.L_restricted;
  P.domain = Box::symmetric(2, 4.0 / 3.0);
  P.A = make_box_resolvent(*P.domain);
  P.z_star = Vector::Zero(2);
  P.rho = RhoInfo{-0.119732, RhoKind::approximate, std::nullopt};
  P.trap = TrapAnnulus{std::sqrt(1.5), 2.0};
  Vector seed(2);
  seed << 1.6, 0.0;
  P.cycle_seed = seed;
  return P;
}

ProblemInstance make_forsaken() {
  auto psi = [](double t) { return t * t / 4.0 - std::pow(t, 4) / 2.0 + std::pow(t, 6) / 6.0; };
  auto dpsi = [](double t) { return t / 2.0 - 2.0 * t * t * t + std::pow(t, 5); };
  auto ddpsi = [](double t) { return 0.5 - 6.0 * t * t + 5.0 * std::pow(t, 4); };

  ProblemInstance P;
  P.name = "forsaken";
  P.F.dim = 2;
  P.F.eval = [dpsi](const Vector& z) -> Vector {
    Vector out(2);
    out << z[1] - 0.45 + dpsi(z[0]), -z[0] + dpsi(z[1]);
    return out;
  };
  P.F.jacobian = [ddpsi](const Vector& z) -> Matrix {
    Matrix J(2, 2);
    J << ddpsi(z[0]), 1.0, -1.0, ddpsi(z[1]);
    return J;
  };
  P.potential = [psi](const Vector& z) { return z[0] * (z[1] - 0.45) + psi(z[0]) - psi(z[1]); };
  P.L_restricted = kForsakenL;
  P.L_reference = std::sqrt(0.5 * (1089.0 * std::sqrt(801761.0) + 993841.0)) / 80.0;
  P.F.lipschitz = P.L_restricted;
  P.domain = Box::symmetric(2, 1.5);
  P.A = make_box_resolvent(*P.domain);
  Vector z0(2);
  z0 << 0.0780267, 0.411934;
  P.z_star = refine_root(P.F, z0);
  P.rho = RhoInfo{-0.477761, RhoKind::upper_bound, std::nullopt};
  Vector witness(2);
  witness << -1.01236, -0.104749;
  P.rho_witness = witness;
  Vector seed(2);
  seed << -0.8, 0.3;
  P.cycle_seed = seed;
  return P;
}

ProblemInstance make_lower_bound_bilinear(double c, std::optional<double> box_radius) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("make_lower_bound_bilinear: c must lie in (0,1)");
  // sqrt(1 - c^2)/c = -a/b with a^2 + b^2 = 1.
  const double a = std::sqrt(1.0 - c * c);
  const double b = -c;

  ProblemInstance P;
  P.name = "bilinear-c" + std::to_string(c);
  P.F.dim = 2;
  P.F.eval = [a, b](const Vector& z) -> Vector {
    Vector out(2);
    out << a * z[1] + b * z[0], b * z[1] - a * z[0];
    return out;
  };
  Matrix J(2, 2);
  J << b, a, -a, b;
  P.F.jacobian = [J](const Vector&) -> Matrix { return J; };
  P.potential = [a, b](const Vector& z) {
    return a * z[0] * z[1] + 0.5 * b * (z[0] * z[0] - z[1] * z[1]);
  };
  P.L_restricted = std::sqrt(a * a + b * b);
  P.L_reference = 1.0;
  P.F.lipschitz = P.L_restricted;
  P.rho = RhoInfo{b / (a * a + b * b), RhoKind::exact, std::nullopt};
  P.z_star = Vector::Zero(2);
  if (box_radius) {
    if (!(*box_radius > 0.0)) throw std::invalid_argument("make_lower_bound_bilinear: box radius must be positive");
    P.domain = Box::symmetric(2, *box_radius);
    P.A = make_box_resolvent(*P.domain);
  } else {
    P.A = make_zero_resolvent(2);
  }
  return P;
}

namespace {

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ProblemInstance resolve_problem(std::string_view name) {
  if (name == "polargame-a1") return make_example_polargame(1.0);
  if (name == "polargame-a34") return make_example_polargame(0.75);
  if (name == "polargame-a13") return make_example_polargame(1.0 / 3.0);
  if (name == "global-forsaken") return make_global_forsaken();
  if (name == "forsaken") return make_forsaken();
  constexpr std::string_view prefix = "bilinear-c";
  if (name.substr(0, prefix.size()) == prefix) {
    std::string_view rest = name.substr(prefix.size());
    std::optional<double> radius;
    if (const auto pos = rest.find("-r"); pos != std::string_view::npos) {
      radius = parse_double(rest.substr(pos + 2));
      if (!radius) throw UnknownProblemError("bad box radius in problem name: " + std::string(name));
      rest = rest.substr(0, pos);
    }
    const auto c = parse_double(rest);
    if (!c || !(*c > 0.0 && *c < 1.0)) {
      throw UnknownProblemError("bad bilinear parameter in problem name: " + std::string(name));
    }
    ProblemInstance P = make_lower_bound_bilinear(*c, radius);
    P.name = std::string(name);
    return P;
  }
  throw UnknownProblemError("unknown problem: " + std::string(name));
}

std::vector<std::string> canonical_problem_names() {
  return {"polargame-a1", "polargame-a34", "polargame-a13", "global-forsaken", "forsaken"};
}

Vector refine_root(const ForwardOperator& F, const Vector& z0, double tol, int max_iters) {
  Vector z = z0;
  Vector f = F(z);
  for (int it = 0; it < max_iters && f.lpNorm<Eigen::Infinity>() > tol; ++it) {
    const Vector step = F.jacobian_at(z).fullPivLu().solve(f);
    double t = 1.0;
    Vector trial = z - step;
    Vector ft = F(trial);
    while (ft.norm() >= f.norm() && t > 1e-8) {
      t *= 0.5;
      trial = z - t * step;
      ft = F(trial);
    }
    if (ft.norm() >= f.norm()) break;
    z = trial;
    f = ft;
  }
  if (f.lpNorm<Eigen::Infinity>() > tol) {
    throw std::runtime_error("refine_root: Newton failed to reach the requested residual");
  }
  return z;
}

}  // namespace minty
