#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minty/problems.hpp"

namespace minty {

enum class Method { CEG, CEG_plus, AdaptiveEG_plus, CurvatureEG_plus, SEG, SEG_plus, FBF, EG_plus };

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();

enum class DeltaPolicy {
  /// max(min(0, rho), min(0, -gamma/2 + delta_offset)); 0 when rho is unknown.
  automatic,
  /// delta_value, used as is.
  fixed,
  /// min(0, -gamma/2 + delta_offset), recomputed for every gamma.
  half_gamma_offset,
};

enum class GammaInit { fixed, curvature };

/// Stepsize and relaxation parameters. Fields left unset take per-method
/// defaults inside run(); see README for the table.
struct AlgorithmConfig {
  /// Constant extrapolation stepsize; defaults to 1/L (0.9/L for FBF).
  std::optional<double> gamma;
  DeltaPolicy delta_policy = DeltaPolicy::automatic;
  double delta_value = 0.0;
  double delta_offset = 1e-3;
  double lambda = 1.0;
  std::optional<double> alpha_bar;
  double nu = 0.9;
  double tau = 0.5;
  GammaInit gamma_init_policy = GammaInit::curvature;
  /// Linesearch initial guess when gamma_init_policy is fixed.
  std::optional<double> gamma_init;
  int max_iters = 1000;
  double residual_tol = 1e-10;
  std::uint64_t seed = 0;
  /// Stochastic methods only; defaults to 0.1 there.
  std::optional<double> noise_sigma;
  /// SEG+ second stepsize alpha_k = (k+1)^(-seg_plus_decay).
  double seg_plus_decay = 0.5;
  double gamma_max = 1e6;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  Vector z;
  Vector z_bar;
  double gamma_k = 0.0;
  double alpha_k = 0.0;
  /// ||H z_bar - H z|| / gamma_k.
  double residual = 0.0;
  std::optional<double> dist_to_star;
  int backtracks = 0;
  /// (||z - z*||^2 - eps_k/gamma_k^2 ||w||^2) - ||z_next - z*||^2; negative
  /// values mean the per-step Fejer inequality failed.
  std::optional<double> fejer_gap;
};

enum class Verdict { converged, cycled, diverged, budget_exhausted };
std::string_view verdict_name(Verdict v);

struct RunResult {
  std::vector<IterationRecord> records;
  Verdict verdict = Verdict::budget_exhausted;
  Vector final_z;
  double min_residual = 0.0;
  double residual_tol = 0.0;
  std::optional<int> diverged_at;
  /// Parameter warnings and other audit notes.
  std::vector<std::string> audit;
};

struct StepResult {
  Vector z_next;
  IterationRecord record;
};

/// delta_k for the given gamma under cfg's policy.
double resolve_delta(const ProblemInstance& P, const AlgorithmConfig& cfg, double gamma);

/// One AdaptiveEG+ iteration with extrapolation stepsize gamma.
StepResult step_adaptive_eg_plus(const ProblemInstance& P, const AlgorithmConfig& cfg, const Vector& z,
                                 double gamma);

/// One CEG+ iteration: z + alpha_bar (H z_bar - H z). Requires cfg.alpha_bar;
/// gamma is cfg.gamma or 1/L.
StepResult step_ceg_plus(const ProblemInstance& P, const AlgorithmConfig& cfg, const Vector& z);

struct BacktrackResult {
  double gamma = 0.0;
  Vector z_bar;
  int backtracks = 0;
};

inline constexpr int kMaxBacktracks = 200;

/// Shrinks gamma by tau until gamma ||F(G(z)) - F(z)|| <= nu ||G(z) - z||,
/// G being the forward-backward map. Throws std::runtime_error after
/// kMaxBacktracks shrinks.
BacktrackResult backtrack_gamma(const ProblemInstance& P, const Vector& z, double gamma_init, double nu,
                                double tau);

/// sigma_max(JF(z)) by power iteration on J^T J via Jacobian-vector products;
/// for n = 2 it is cross-checked against the closed form.
double jacobian_sigma_max(const ProblemInstance& P, const Vector& z);

/// nu / ||JF(z)||, capped at gamma_max (returned as is when JF(z) vanishes).
double curvature_gamma_init(const ProblemInstance& P, const Vector& z, double nu, double gamma_max = 1e6);

/// Runs `method` from z0 until residual <= cfg.residual_tol or cfg.max_iters.
RunResult run(const ProblemInstance& P, Method method, const AlgorithmConfig& cfg, const Vector& z0);

/// The cycle heuristic: over the last quarter of the records the residual has
/// coefficient of variation < 0.5 and dist_to_star stays above 10 * tol.
bool looks_cyclic(const std::vector<IterationRecord>& records, double residual_tol);

}  // namespace minty
