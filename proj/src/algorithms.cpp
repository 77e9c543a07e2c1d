#include "minty/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minty/linalg.hpp"
#include "minty/noise.hpp"

namespace minty {

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::CEG, "CEG"},
    {Method::CEG_plus, "CEG+"},
    {Method::AdaptiveEG_plus, "AdaptiveEG+"},
    {Method::CurvatureEG_plus, "CurvatureEG+"},
    {Method::SEG, "SEG"},
    {Method::SEG_plus, "SEG+"},
    {Method::FBF, "FBF"},
    {Method::EG_plus, "EG+"},
};

double stationarity_eps(const Vector& z) { return 1e-14 * std::max(1.0, z.norm()); }

std::optional<double> distance_to_star(const ProblemInstance& P, const Vector& z) {
  if (!P.z_star) return std::nullopt;
  return (z - *P.z_star).norm();
}

// Lines 2-3 of the adaptive scheme given an already computed z_bar.
StepResult adaptive_update(const ProblemInstance& P, const Vector& z, const Vector& z_bar, double gamma,
                           double delta, double lambda) {
  const Vector Hz = apply_H(P.F, gamma, z);
  const Vector Hzb = apply_H(P.F, gamma, z_bar);
  const Vector w = Hzb - Hz;
  double nw = w.norm();

  StepResult out;
  out.record.z = z;
  out.record.z_bar = z_bar;
  out.record.gamma_k = gamma;
  if (nw <= stationarity_eps(z)) {
    // z_bar is a zero of A + F; the sequence stays put.
    out.z_next = z;
    out.record.alpha_k = 0.0;
    out.record.residual = 0.0;
    nw = 0.0;
  } else {
    const double alpha = delta / gamma + (z_bar - z).dot(w) / (nw * nw);
    out.z_next = z + lambda * alpha * w;
    out.record.alpha_k = alpha;
    out.record.residual = nw / gamma;
  }
  require_finite(out.z_next, "AdaptiveEG+ update");
  if (P.z_star) {
    const double eps = lambda * (2.0 - lambda) * std::pow(gamma / 2.0 + delta, 2);
    const double before = (z - *P.z_star).squaredNorm();
    const double after = (out.z_next - *P.z_star).squaredNorm();
    out.record.fejer_gap = before - eps / (gamma * gamma) * nw * nw - after;
  }
  return out;
}

StepResult ceg_update(const ProblemInstance& P, const Vector& z, double gamma, double alpha_bar,
                      double delta) {
  const Vector z_bar = forward_backward_step(P.F, P.A, gamma, z);
  const Vector w = apply_H(P.F, gamma, z_bar) - apply_H(P.F, gamma, z);
  StepResult out;
  out.z_next = z + alpha_bar * w;
  require_finite(out.z_next, "CEG+ update");
  out.record.z = z;
  out.record.z_bar = z_bar;
  out.record.gamma_k = gamma;
  out.record.alpha_k = alpha_bar;
  out.record.residual = w.norm() / gamma;
  if (P.z_star) {
    const double kappa = alpha_bar * (1.0 + 2.0 * delta / gamma - alpha_bar);
    const double before = (z - *P.z_star).squaredNorm();
    const double after = (out.z_next - *P.z_star).squaredNorm();
    out.record.fejer_gap = before - kappa * w.squaredNorm() - after;
  }
  return out;
}

// Stochastic extragradient step: every call of F receives fresh noise.
StepResult noisy_update(const ProblemInstance& P, const CounterNoise& noise, int k, const Vector& z,
                        double gamma, double alpha) {
  const int n = P.dim();
  const Vector Fz = P.F(z) + noise.sample(static_cast<std::uint64_t>(k), 0, n);
  const Vector z_bar = P.A.apply(gamma, z - gamma * Fz);
  const Vector Fzb = P.F(z_bar) + noise.sample(static_cast<std::uint64_t>(k), 1, n);
  const Vector w = (z_bar - gamma * Fzb) - (z - gamma * Fz);
  StepResult out;
  out.z_next = z + alpha * w;
  require_finite(out.z_next, "stochastic update");
  out.record.z = z;
  out.record.z_bar = z_bar;
  out.record.gamma_k = gamma;
  out.record.alpha_k = alpha;
  out.record.residual = w.norm() / gamma;
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  return std::nullopt;
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& [method, name] : kMethodNames) out.push_back(method);
  return out;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::cycled: return "cycled";
    case Verdict::diverged: return "diverged";
    case Verdict::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

void AlgorithmConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("AlgorithmConfig: " + msg); };
  if (!(lambda > 0.0 && lambda < 2.0)) fail("lambda must lie in (0,2)");
  if (!(nu > 0.0 && nu < 1.0)) fail("nu must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0,1)");
  if (gamma && !(*gamma > 0.0)) fail("gamma must be positive");
  if (gamma_init && !(*gamma_init > 0.0)) fail("gamma_init must be positive");
  if (alpha_bar && !(*alpha_bar > 0.0)) fail("alpha_bar must be positive");
  if (max_iters < 1) fail("max_iters must be positive");
  if (!(residual_tol >= 0.0)) fail("residual_tol must be nonnegative");
  if (noise_sigma && !(*noise_sigma >= 0.0)) fail("noise_sigma must be nonnegative");
  if (!(seg_plus_decay > 0.0)) fail("seg_plus_decay must be positive");
  if (!(gamma_max > 0.0)) fail("gamma_max must be positive");
  if (!std::isfinite(delta_value) || !std::isfinite(delta_offset)) fail("delta must be finite");
}

double resolve_delta(const ProblemInstance& P, const AlgorithmConfig& cfg, double gamma) {
  switch (cfg.delta_policy) {
    case DeltaPolicy::fixed:
      return cfg.delta_value;
    case DeltaPolicy::half_gamma_offset:
      return std::min(0.0, -gamma / 2.0 + cfg.delta_offset);
    case DeltaPolicy::automatic:
      if (!P.rho) return 0.0;
      return std::max(std::min(0.0, P.rho->value), std::min(0.0, -gamma / 2.0 + cfg.delta_offset));
  }
  return 0.0;
}

StepResult step_adaptive_eg_plus(const ProblemInstance& P, const AlgorithmConfig& cfg, const Vector& z,
                                 double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("step_adaptive_eg_plus: gamma must be positive");
  const Vector z_bar = forward_backward_step(P.F, P.A, gamma, z);
  return adaptive_update(P, z, z_bar, gamma, resolve_delta(P, cfg, gamma), cfg.lambda);
}

StepResult step_ceg_plus(const ProblemInstance& P, const AlgorithmConfig& cfg, const Vector& z) {
  if (!cfg.alpha_bar) throw std::invalid_argument("step_ceg_plus: alpha_bar is required");
  const double gamma = cfg.gamma.value_or(1.0 / P.lipschitz());
  return ceg_update(P, z, gamma, *cfg.alpha_bar, resolve_delta(P, cfg, gamma));
}

BacktrackResult backtrack_gamma(const ProblemInstance& P, const Vector& z, double gamma_init, double nu,
                                double tau) {
  if (!(gamma_init > 0.0)) throw std::invalid_argument("backtrack_gamma: gamma_init must be positive");
  if (!(nu > 0.0 && nu < 1.0) || !(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("backtrack_gamma: nu and tau must lie in (0,1)");
  }
  const Vector Fz = P.F(z);
  BacktrackResult out;
  out.gamma = gamma_init;
  for (;;) {
    out.z_bar = P.A.apply(out.gamma, z - out.gamma * Fz);
    const double lhs = out.gamma * (P.F(out.z_bar) - Fz).norm();
    const double rhs = nu * (out.z_bar - z).norm();
    if (!(lhs > rhs)) return out;
    if (out.backtracks == kMaxBacktracks) {
      throw std::runtime_error("backtrack_gamma: no acceptable stepsize after " +
                               std::to_string(kMaxBacktracks) + " shrinks");
    }
    out.gamma *= tau;
    ++out.backtracks;
  }
}

double jacobian_sigma_max(const ProblemInstance& P, const Vector& z) {
  const auto pi = power_iteration_sigma_max([&](const Vector& v) { return P.F.jvp(z, v); },
                                            [&](const Vector& v) { return P.F.vjp(z, v); }, P.dim());
  if (P.dim() == 2) {
    const double closed = sigma_max_2x2(P.F.jacobian_at(z));
    if (std::abs(pi.sigma_max - closed) > 1e-8 * std::max(1.0, closed)) {
      throw std::logic_error("jacobian_sigma_max: power iteration disagrees with the 2x2 closed form");
    }
  }
  return pi.sigma_max;
}

double curvature_gamma_init(const ProblemInstance& P, const Vector& z, double nu, double gamma_max) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("curvature_gamma_init: nu must lie in (0,1)");
  const double sigma = jacobian_sigma_max(P, z);
  if (!(sigma * gamma_max > nu)) return gamma_max;
  return nu / sigma;
}

bool looks_cyclic(const std::vector<IterationRecord>& records, double residual_tol) {
  const std::size_t n = records.size();
  if (n < 8) return false;
  const std::size_t start = n - n / 4;
  double sum = 0.0, sum2 = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i < n; ++i) {
    sum += records[i].residual;
    sum2 += records[i].residual * records[i].residual;
    if (records[i].dist_to_star) min_dist = std::min(min_dist, *records[i].dist_to_star);
  }
  const double m = static_cast<double>(n - start);
  const double mean = sum / m;
  if (!(mean > 0.0) || !std::isfinite(mean)) return false;
  const double var = std::max(0.0, sum2 / m - mean * mean);
  const double cv = std::sqrt(var) / mean;
  return cv < 0.5 && min_dist > 10.0 * residual_tol;
}

RunResult run(const ProblemInstance& P, Method method, const AlgorithmConfig& cfg, const Vector& z0) {
  cfg.validate();
  if (z0.size() != P.dim()) throw std::invalid_argument("run: initial point has wrong dimension");
  if (!z0.allFinite()) throw std::invalid_argument("run: initial point must be finite");

  RunResult result;
  result.residual_tol = cfg.residual_tol;
  auto warn = [&result](std::string msg) { result.audit.push_back(std::move(msg)); };

  // EG+ is CEG+ on the unconstrained problem.
  ProblemInstance unconstrained;
  const ProblemInstance* problem = &P;
  if (method == Method::EG_plus) {
    unconstrained = P;
    unconstrained.A = make_zero_resolvent(P.dim());
    problem = &unconstrained;
  }
  const ProblemInstance& Q = *problem;

  const double L = (Q.L_restricted || Q.F.lipschitz) ? Q.lipschitz() : 0.0;
  auto over_L = [&](double scale) {
    if (!(L > 0.0)) throw std::invalid_argument("run: problem '" + Q.name + "' has no Lipschitz constant; set gamma");
    return scale / L;
  };

  double gamma = 0.0;
  double alpha_bar = 0.0;
  AlgorithmConfig step_cfg = cfg;
  switch (method) {
    case Method::CEG:
      gamma = cfg.gamma ? *cfg.gamma : over_L(1.0);
      alpha_bar = cfg.alpha_bar.value_or(1.0);
      break;
    case Method::CEG_plus:
    case Method::EG_plus:
      gamma = cfg.gamma ? *cfg.gamma : over_L(1.0);
      alpha_bar = cfg.alpha_bar.value_or(0.5);
      break;
    case Method::FBF:
      gamma = cfg.gamma ? *cfg.gamma : over_L(0.9);
      alpha_bar = cfg.alpha_bar.value_or(1.0);
      step_cfg.delta_policy = DeltaPolicy::fixed;
      step_cfg.delta_value = 0.0;
      if (gamma * L >= 1.0) warn("FBF expects gamma < 1/L");
      break;
    case Method::AdaptiveEG_plus:
    case Method::SEG_plus:
      gamma = cfg.gamma ? *cfg.gamma : over_L(1.0);
      break;
    case Method::CurvatureEG_plus:
    case Method::SEG:
      break;
  }
  const bool constant_ceg = method == Method::CEG || method == Method::CEG_plus ||
                            method == Method::EG_plus || method == Method::FBF;

  // Parameter audit (warn-only).
  if (constant_ceg || method == Method::AdaptiveEG_plus) {
    const double delta = resolve_delta(Q, step_cfg, gamma);
    if (L > 0.0 && gamma * L > 1.0 + 1e-12) warn("gamma exceeds 1/L");
    if (!(delta > -gamma / 2.0)) warn("delta = " + format_double(delta) + " is not above -gamma/2");
    if (Q.rho && delta > Q.rho->value) {
      warn("delta = " + format_double(delta) + " exceeds rho = " + format_double(Q.rho->value));
    }
    if (constant_ceg && !(alpha_bar > 0.0 && alpha_bar < 1.0 + 2.0 * delta / gamma)) {
      warn("alpha_bar = " + format_double(alpha_bar) + " outside (0, 1 + 2 delta/gamma) = (0, " +
           format_double(1.0 + 2.0 * delta / gamma) + ")");
    }
  }

  const bool stochastic = method == Method::SEG || method == Method::SEG_plus;
  const CounterNoise noise(cfg.seed, cfg.noise_sigma.value_or(stochastic ? 0.1 : 0.0));
  int rho_gamma_violations = 0;

  Vector z = z0;
  result.min_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 0; k < cfg.max_iters; ++k) {
    if (!z.allFinite()) {
      result.diverged_at = k;
      break;
    }
    StepResult step;
    try {
      switch (method) {
        case Method::CEG:
        case Method::CEG_plus:
        case Method::EG_plus:
        case Method::FBF:
          step = ceg_update(Q, z, gamma, alpha_bar, resolve_delta(Q, step_cfg, gamma));
          break;
        case Method::AdaptiveEG_plus:
          step = step_adaptive_eg_plus(Q, step_cfg, z, gamma);
          break;
        case Method::CurvatureEG_plus: {
          const double init = cfg.gamma_init_policy == GammaInit::curvature
                                  ? 0.999 * curvature_gamma_init(Q, z, cfg.nu, cfg.gamma_max)
                                  : (cfg.gamma_init ? *cfg.gamma_init : over_L(1.0));
          const BacktrackResult bt = backtrack_gamma(Q, z, init, cfg.nu, cfg.tau);
          step = adaptive_update(Q, z, bt.z_bar, bt.gamma, resolve_delta(Q, step_cfg, bt.gamma), cfg.lambda);
          step.record.backtracks = bt.backtracks;
          if (Q.rho && !(2.0 * Q.rho->value + bt.gamma > 0.0)) ++rho_gamma_violations;
          break;
        }
        case Method::SEG: {
          const double gamma0 = cfg.gamma ? *cfg.gamma : over_L(1.0);
          step = noisy_update(Q, noise, k, z, gamma0 / (k + 1.0), 1.0);
          break;
        }
        case Method::SEG_plus:
          step = noisy_update(Q, noise, k, z, gamma, std::pow(k + 1.0, -cfg.seg_plus_decay));
          break;
      }
    } catch (const NonFiniteError&) {
      result.diverged_at = k;
      break;
    }
    step.record.k = k;
    step.record.dist_to_star = distance_to_star(Q, z);
    result.min_residual = std::min(result.min_residual, step.record.residual);
    const bool done = step.record.residual <= cfg.residual_tol;
    result.records.push_back(std::move(step.record));
    z = std::move(step.z_next);
    if (done) {
      converged = true;
      break;
    }
  }
  if (result.records.empty()) result.min_residual = 0.0;
  result.final_z = z;

  if (rho_gamma_violations > 0) {
    warn("2 rho + gamma_k <= 0 at " + std::to_string(rho_gamma_violations) + " iterations");
  }
  if (Q.domain) {
    int outside = 0;
    for (const auto& r : result.records) {
      if (!Q.domain->contains(r.z, 1e-12)) ++outside;
    }
    if (outside > 0) warn("iterate left the constraint box at " + std::to_string(outside) + " iterations");
  }

  if (converged) {
    result.verdict = Verdict::converged;
  } else if (result.diverged_at || !z.allFinite()) {
    result.verdict = Verdict::diverged;
    if (!result.diverged_at) result.diverged_at = static_cast<int>(result.records.size());
  } else if (looks_cyclic(result.records, cfg.residual_tol)) {
    result.verdict = Verdict::cycled;
  } else {
    result.verdict = Verdict::budget_exhausted;
  }
  return result;
}

}  // namespace minty
