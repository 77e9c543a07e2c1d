#include "minty/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "minty/linalg.hpp"

namespace minty {

namespace {

constexpr double kExcludeNorm = 1e-8;

Box region_for(const ProblemInstance& P, const std::optional<Box>& region, const char* who) {
  if (region) return *region;
  if (P.domain) return *P.domain;
  throw std::invalid_argument(std::string(who) + ": problem '" + P.name + "' has no box domain");
}

Vector grid_point(const Box& box, int grid_n, int i, int j) {
  Vector z(2);
  const double tx = grid_n == 1 ? 0.5 : static_cast<double>(i) / (grid_n - 1);
  const double ty = grid_n == 1 ? 0.5 : static_cast<double>(j) / (grid_n - 1);
  z << box.lo[0] + tx * (box.hi[0] - box.lo[0]), box.lo[1] + ty * (box.hi[1] - box.lo[1]);
  return z;
}

// Greedy coordinate search minimising `objective` inside the box. Points
// where objective returns nullopt are treated as infeasible.
template <typename Objective>
std::pair<Vector, double> coordinate_search(const Objective& objective, Vector z, double value, const Box& box,
                                            double step, int rounds) {
  const int n = static_cast<int>(z.size());
  for (int round = 0; round < rounds; ++round) {
    for (int moves = 0; moves < 64; ++moves) {
      Vector best_z = z;
      double best = value;
      for (int i = 0; i < n; ++i) {
        for (double dir : {-1.0, 1.0}) {
          Vector trial = z;
          trial[i] = std::clamp(z[i] + dir * step, box.lo[i], box.hi[i]);
          const std::optional<double> v = objective(trial);
          if (v && *v < best) {
            best = *v;
            best_z = trial;
          }
        }
      }
      if (!(best < value)) break;
      z = best_z;
      value = best;
    }
    step *= 0.5;
  }
  return {z, value};
}

std::vector<Vector> sample_points(const Box& box, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  for (int s = 0; s < samples; ++s) {
    Vector z(box.dim());
    for (int i = 0; i < box.dim(); ++i) {
      z[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    out.push_back(z);
  }
  return out;
}

Box sampling_box(const ProblemInstance& P) {
  return P.domain ? *P.domain : Box::symmetric(P.dim(), 1.5);
}

std::string fmt(double v, int precision = 8) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

double weak_mvi_ratio(const ForwardOperator& F, const Vector& z, const Vector& z_star) {
  const Vector f = F(z);
  return f.dot(z - z_star) / f.squaredNorm();
}

RhoEstimate refine_rho(const ProblemInstance& P, const Vector& z_star, const Vector& start, const Box& box,
                       double initial_step, int rounds) {
  auto objective = [&](const Vector& z) -> std::optional<double> {
    const Vector f = P.F(z);
    if (f.norm() < kExcludeNorm) return std::nullopt;
    return f.dot(z - z_star) / f.squaredNorm();
  };
  const auto v0 = objective(start);
  if (!v0) throw std::invalid_argument("refine_rho: F vanishes at the starting point");
  auto [z, value] = coordinate_search(objective, start, *v0, box, initial_step, rounds);
  RhoEstimate out;
  out.argmin = z;
  out.value = weak_mvi_ratio(P.F, z, z_star);
  return out;
}

RhoEstimate estimate_rho(const ProblemInstance& P, const Vector& z_star, int grid_n,
                         const std::optional<Box>& region) {
  const Box box = region_for(P, region, "estimate_rho");
  if (box.dim() != 2) throw std::invalid_argument("estimate_rho: only 2-D boxes are supported");
  if (grid_n < 100) throw std::invalid_argument("estimate_rho: grid_n must be at least 100");

  double best = std::numeric_limits<double>::infinity();
  Vector best_z;
  long excluded = 0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vector z = grid_point(box, grid_n, i, j);
      const Vector f = P.F(z);
      if (f.norm() < kExcludeNorm) {
        ++excluded;
        continue;
      }
      const double r = f.dot(z - z_star) / f.squaredNorm();
      if (r < best) {
        best = r;
        best_z = z;
      }
    }
  }
  const long total = static_cast<long>(grid_n) * grid_n;
  if (excluded == total) throw std::runtime_error("estimate_rho: F vanishes on every grid point");

  const double spacing = (box.hi - box.lo).maxCoeff() / (grid_n - 1);
  RhoEstimate out = refine_rho(P, z_star, best_z, box, spacing, 60);
  out.grid_resolution = grid_n;
  out.excluded_fraction = static_cast<double>(excluded) / static_cast<double>(total);
  return out;
}

double estimate_lipschitz(const ProblemInstance& P, int grid_n, const std::optional<Box>& region) {
  const Box box = region_for(P, region, "estimate_lipschitz");
  if (box.dim() != 2) throw std::invalid_argument("estimate_lipschitz: only 2-D boxes are supported");
  if (grid_n < 2) throw std::invalid_argument("estimate_lipschitz: grid_n must be at least 2");

  auto sigma = [&P](const Vector& z) { return spectral_norm(P.F.jacobian_at(z)); };
  double best = -1.0;
  Vector best_z;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vector z = grid_point(box, grid_n, i, j);
      const double s = sigma(z);
      if (s > best) {
        best = s;
        best_z = z;
      }
    }
  }
  auto neg = [&sigma](const Vector& z) -> std::optional<double> { return -sigma(z); };
  const double spacing = (box.hi - box.lo).maxCoeff() / (grid_n - 1);
  const auto [z, value] = coordinate_search(neg, best_z, -best, box, spacing, 60);
  return -value;
}

std::pair<double, double> worst_case_bilinear(double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("worst_case_bilinear: c must lie in (0,1)");
  return {std::sqrt(1.0 - c * c), -c};
}

SpectralReport eg_plus_linear_map(double a, double b, double alpha_bar) {
  if (a == 0.0 && b == 0.0) throw std::invalid_argument("eg_plus_linear_map: (a,b) must be nonzero");
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) {
    throw std::invalid_argument("eg_plus_linear_map: alpha_bar must lie in (0,1)");
  }
  const double n2 = a * a + b * b;
  const double s = std::sqrt(n2);
  const double diag = ((1.0 - alpha_bar) * a * a + b * (-alpha_bar * s + alpha_bar * b + b)) / n2;
  const double off = a * alpha_bar * (s - 2.0 * b) / n2;

  SpectralReport out;
  out.T_matrix.resize(2, 2);
  out.T_matrix << diag, -off, off, diag;

  const double tr = out.T_matrix.trace();
  const double det = out.T_matrix.determinant();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  out.eigenvalues = {tr / 2.0 + disc, tr / 2.0 - disc};
  out.spectral_radius = std::max(std::abs(out.eigenvalues.first), std::abs(out.eigenvalues.second));
  out.converges = out.spectral_radius < 1.0 - 1e-12;

  const double rad2 = ((2.0 * (alpha_bar - 1.0) * alpha_bar + 1.0) * a * a -
                       2.0 * alpha_bar * (alpha_bar + 1.0) * b * (s - b) + b * b) /
                      n2;
  out.closed_form_radius = std::sqrt(std::max(0.0, rad2));

  // Literal EG+ step with gamma = 1/L on F(x,y) = (a y + b x, b y - a x).
  auto F = [a, b](const Eigen::Vector2d& z) { return Eigen::Vector2d(a * z[1] + b * z[0], b * z[1] - a * z[0]); };
  const double gamma = 1.0 / s;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d e = Eigen::Vector2d::Unit(i);
    const Eigen::Vector2d z_bar = e - gamma * F(e);
    const Eigen::Vector2d next = e - alpha_bar * gamma * F(z_bar);
    out.step_mismatch = std::max(out.step_mismatch, (next - Eigen::Vector2d(out.T_matrix.col(i))).cwiseAbs().maxCoeff());
  }
  return out;
}

std::string_view trajectory_class_name(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::converged_to_star: return "converged_to_star";
    case TrajectoryClass::cycled: return "cycled";
    case TrajectoryClass::diverged: return "diverged";
    case TrajectoryClass::inconclusive: return "inconclusive";
  }
  return "?";
}

TrajectoryClass classify_trajectory(const RunResult& result, const ProblemInstance& P) {
  if (result.records.size() < 100) throw std::invalid_argument("classify_trajectory: need at least 100 records");
  if (!P.z_star) throw std::invalid_argument("classify_trajectory: problem has no known z*");
  if (result.verdict == Verdict::diverged || !result.final_z.allFinite()) return TrajectoryClass::diverged;
  if ((result.final_z - *P.z_star).norm() <= 1e-4) return TrajectoryClass::converged_to_star;

  const std::size_t n = result.records.size();
  const std::size_t start = n - n / 4;
  bool growing = true;
  for (std::size_t i = start + 1; i < n && growing; ++i) {
    growing = result.records[i].z.norm() > result.records[i - 1].z.norm();
  }
  if (growing && result.final_z.norm() > result.records.back().z.norm()) return TrajectoryClass::diverged;
  if (looks_cyclic(result.records, result.residual_tol)) return TrajectoryClass::cycled;
  return TrajectoryClass::inconclusive;
}

double jacobian_consistency_error(const ProblemInstance& P, int samples, std::uint64_t seed) {
  if (!P.F.has_analytic_jacobian()) return 0.0;
  double worst = 0.0;
  for (const Vector& z : sample_points(sampling_box(P), samples, seed)) {
    const Matrix diff = P.F.jacobian_at(z) - finite_difference_jacobian(P.F, z);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

double gradient_consistency_error(const ProblemInstance& P, int samples, std::uint64_t seed) {
  if (!P.potential) throw std::invalid_argument("gradient_consistency_error: problem has no potential");
  const double h = 1e-5;
  double worst = 0.0;
  for (const Vector& z : sample_points(sampling_box(P), samples, seed)) {
    Vector grad(2);
    for (int i = 0; i < 2; ++i) {
      Vector zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      grad[i] = (P.potential(zp) - P.potential(zm)) / (2.0 * h);
    }
    grad[1] = -grad[1];
    worst = std::max(worst, (P.F(z) - grad).cwiseAbs().maxCoeff());
  }
  return worst;
}

double polar_radial_law_error(const ProblemInstance& P, int samples, std::uint64_t seed) {
  if (!P.polar) throw std::invalid_argument("polar_radial_law_error: not a PolarGame");
  double worst = 0.0;
  for (const Vector& z : sample_points(sampling_box(P), samples, seed)) {
    const double r = z.norm();
    if (r == 0.0) continue;
    const double rdot = -P.F(z).dot(z) / r;
    double prod = 1.0;
    for (double c : P.polar->radii) prod *= r * r - c * c;
    worst = std::max(worst, std::abs(rdot - (-P.polar->a * r * prod)));
  }
  return worst;
}

bool trap_region_holds(const ProblemInstance& P, int angles) {
  if (!P.trap) throw std::invalid_argument("trap_region_holds: no trap annulus registered");
  for (int i = 0; i < angles; ++i) {
    const double theta = 2.0 * M_PI * i / angles;
    Vector u(2);
    u << std::cos(theta), std::sin(theta);
    const Vector inner = P.trap->inner * u;
    const Vector outer = P.trap->outer * u;
    if (!(-P.F(inner).dot(u) > 0.0)) return false;
    if (!(-P.F(outer).dot(u) < 0.0)) return false;
  }
  return true;
}

std::vector<Vector> trace_limit_cycle(const ProblemInstance& P, const Vector& seed, double dt,
                                      double settle_time) {
  if (P.dim() != 2) throw std::invalid_argument("trace_limit_cycle: needs a 2-D problem");
  if (!P.z_star) throw std::invalid_argument("trace_limit_cycle: needs z*");
  if (!(dt > 0.0) || !(settle_time >= 0.0)) throw std::invalid_argument("trace_limit_cycle: bad step or time");
  const Vector& c = *P.z_star;
  auto f = [&P](const Vector& z) -> Vector { return -P.F(z); };
  auto rk4 = [&](const Vector& z) -> Vector {
    const Vector k1 = f(z), k2 = f(z + 0.5 * dt * k1), k3 = f(z + 0.5 * dt * k2), k4 = f(z + dt * k3);
    return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto check = [&](const Vector& z) {
    if (!z.allFinite() || z.norm() > 1e3) throw std::runtime_error("trace_limit_cycle: orbit escaped");
    if ((z - c).norm() < 1e-6) throw std::runtime_error("trace_limit_cycle: orbit collapsed onto z*");
  };

  Vector z = seed;
  const long settle = std::lround(settle_time / dt);
  for (long i = 0; i < settle; ++i) z = rk4(z);
  check(z);

  std::vector<Vector> path{z};
  auto angle = [&c](const Vector& u) { return std::atan2(u[1] - c[1], u[0] - c[0]); };
  double swept = 0.0, prev = angle(z);
  const long max_steps = std::lround(1e3 / dt);
  for (long i = 0; i < max_steps && std::abs(swept) < 2.0 * M_PI; ++i) {
    z = rk4(z);
    check(z);
    const double a = angle(z);
    swept += std::remainder(a - prev, 2.0 * M_PI);
    prev = a;
    if (i % 10 == 0) path.push_back(z);
  }
  if (std::abs(swept) < 2.0 * M_PI) throw std::runtime_error("trace_limit_cycle: no revolution about z*");
  path.push_back(path.front());
  return path;
}

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport verify_problem(const ProblemInstance& P, int grid_n) {
  VerifyReport rep;
  rep.problem = P.name;
  const Box box = P.domain ? *P.domain : Box::symmetric(P.dim(), 1.0);
  const Vector z_star = P.z_star ? *P.z_star : Vector::Zero(P.dim());
  rep.rho = estimate_rho(P, z_star, grid_n, box);
  rep.L_estimate = estimate_lipschitz(P, grid_n, box);
  auto add = [&rep](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  if (P.z_star) {
    const double res = P.F(*P.z_star).lpNorm<Eigen::Infinity>();
    add("z_star_is_zero", res <= 1e-10, "||F(z*)||_inf = " + fmt(res));
  }
  if (P.rho) {
    const double stored = P.rho->value;
    if (P.rho->kind == RhoKind::upper_bound) {
      add("rho_estimate", rep.rho.value <= stored + 1e-9,
          "grid " + fmt(rep.rho.value) + " <= stored bound " + fmt(stored));
    } else {
      add("rho_estimate", std::abs(rep.rho.value - stored) <= 1e-3,
          "grid " + fmt(rep.rho.value) + " vs stored " + fmt(stored));
    }
  }
  if (P.rho_witness) {
    const double r = weak_mvi_ratio(P.F, *P.rho_witness, z_star);
    add("rho_witness", r <= P.rho->value + 1e-6, "ratio at witness = " + fmt(r));
  }
  if (P.L_restricted) {
    const double rel = std::abs(rep.L_estimate - *P.L_restricted) / *P.L_restricted;
    add("lipschitz_estimate", rel <= 5e-3, "grid " + fmt(rep.L_estimate) + " vs stored " + fmt(*P.L_restricted));
  }
  if (P.L_reference && P.L_restricted) {
    const double rel = std::abs(*P.L_reference - *P.L_restricted) / *P.L_reference;
    add("lipschitz_closed_form", rel <= 5e-3,
        "closed form " + fmt(*P.L_reference) + " vs stored " + fmt(*P.L_restricted));
  }
  if (const auto flag = P.rho_exceeds_half_inverse_L()) {
    const bool estimated = rep.rho.value > -1.0 / (2.0 * rep.L_estimate);
    add("rho_vs_half_inverse_L", estimated == *flag,
        std::string("rho > -1/(2L): ") + (*flag ? "true" : "false"));
  }
  if (P.rho_bracket && P.rho && P.L_restricted) {
    const bool stored_ok = P.rho_bracket->contains(P.rho->value, *P.L_restricted);
    const bool est_ok = P.rho_bracket->contains(rep.rho.value, rep.L_estimate);
    add("rho_bracket", stored_ok && est_ok,
        "rho in (-" + fmt(P.rho_bracket->lo_factor, 4) + "/L, -" + fmt(P.rho_bracket->hi_factor, 4) + "/L)");
  }
  if (P.F.has_analytic_jacobian()) {
    const double err = jacobian_consistency_error(P, 100, 1);
    add("jacobian_consistency", err <= 1e-5, "max error " + fmt(err, 3));
  }
  if (P.potential) {
    const double err = gradient_consistency_error(P, 100, 2);
    add("gradient_consistency", err <= 1e-5, "max error " + fmt(err, 3));
  }
  if (P.polar) {
    const double err = polar_radial_law_error(P, 1000, 3);
    add("polar_radial_law", err <= 1e-10, "max error " + fmt(err, 3));
  }
  if (P.trap) {
    add("trap_region", trap_region_holds(P, 360),
        "dr/dt > 0 at r = " + fmt(P.trap->inner, 6) + ", < 0 at r = " + fmt(P.trap->outer, 6));
  }
  return rep;
}

}  // namespace minty
