#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minty/algorithms.hpp"

namespace minty {

struct RhoEstimate {
  /// Smallest <F z, z - z*> / ||F z||^2 found; an upper bound on rho over the box.
  double value = 0.0;
  Vector argmin;
  int grid_resolution = 0;
  /// Share of grid points skipped because ||F z|| < 1e-8.
  double excluded_fraction = 0.0;
};

/// <F z, z - z*> / ||F z||^2.
double weak_mvi_ratio(const ForwardOperator& F, const Vector& z, const Vector& z_star);

/// Grid search (grid_n x grid_n over the box) followed by coordinate-search
/// refinement. `region` overrides the problem's domain.
RhoEstimate estimate_rho(const ProblemInstance& P, const Vector& z_star, int grid_n,
                         const std::optional<Box>& region = std::nullopt);

/// Coordinate search from `start` that lowers the weak-MVI ratio inside `box`.
RhoEstimate refine_rho(const ProblemInstance& P, const Vector& z_star, const Vector& start, const Box& box,
                       double initial_step, int rounds = 60);

/// max sigma_max(JF(z)) over the grid, refined by coordinate ascent.
double estimate_lipschitz(const ProblemInstance& P, int grid_n, const std::optional<Box>& region = std::nullopt);

struct SpectralReport {
  Matrix T_matrix;
  std::pair<std::complex<double>, std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
  /// spectral_radius < 1 - 1e-12.
  bool converges = false;
  /// Radius from the closed-form expression (independent of the eigen solve).
  double closed_form_radius = 0.0;
  /// max |T e_i - EG+ step(e_i)| over both basis vectors.
  double step_mismatch = 0.0;
};

/// One EG+ step (gamma = 1/L, second stepsize alpha_bar) on the bilinear game
/// a x y + b/2 (x^2 - y^2), written as z -> T z.
SpectralReport eg_plus_linear_map(double a, double b, double alpha_bar);

/// (a, b) = (sqrt(1 - c^2), -c): L = 1 and rho = -c.
std::pair<double, double> worst_case_bilinear(double c);

enum class TrajectoryClass { converged_to_star, cycled, diverged, inconclusive };
std::string_view trajectory_class_name(TrajectoryClass c);

/// Verdict proxy for phase portraits. Needs >= 100 records and a known z*.
TrajectoryClass classify_trajectory(const RunResult& result, const ProblemInstance& P);

/// Integrates dz/dt = -F z (RK4, step dt) from `seed` for `settle_time`, then
/// records one revolution about z*. Returns the closed orbit as a polyline.
/// Throws std::runtime_error if the orbit collapses onto z* or leaves |z| < 1e3.
std::vector<Vector> trace_limit_cycle(const ProblemInstance& P, const Vector& seed, double dt = 1e-3,
                                      double settle_time = 300.0);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// max over `samples` random points of ||J_analytic - J_fd||_inf.
double jacobian_consistency_error(const ProblemInstance& P, int samples, std::uint64_t seed);
/// max over random points of |F - (d_x phi, -d_y phi)|_inf, phi differenced centrally.
double gradient_consistency_error(const ProblemInstance& P, int samples, std::uint64_t seed);
/// max |(-<F z, z>/r) - (-a r prod(r^2 - c_i^2))| over random points.
double polar_radial_law_error(const ProblemInstance& P, int samples, std::uint64_t seed);
/// Checks dr/dt > 0 on the inner circle and < 0 on the outer one at `angles` angles.
bool trap_region_holds(const ProblemInstance& P, int angles);

struct VerifyReport {
  std::string problem;
  RhoEstimate rho;
  double L_estimate = 0.0;
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Runs the constant-reproduction and invariant checks registered for P.
VerifyReport verify_problem(const ProblemInstance& P, int grid_n);

}  // namespace minty
