#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minty/diagnostics.hpp"
#include "minty/linalg.hpp"
#include "minty/problems.hpp"

using namespace minty;

namespace {

Vector v2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector uniform_in(const Box& box, std::mt19937_64& g) {
  std::uniform_real_distribution<double> ux(box.lo[0], box.hi[0]), uy(box.lo[1], box.hi[1]);
  return v2(ux(g), uy(g));
}

// Hand-written operators, independent of the library's formulas.
Vector global_forsaken_F(double x, double y) {
  return v2(4 * std::pow(x, 5) / 7 - 4 * std::pow(x, 3) / 3 + 2 * x / 3 + y,
            -x + 4 * std::pow(y, 5) / 7 - 4 * std::pow(y, 3) / 3 + 2 * y / 3);
}

Vector forsaken_F(double x, double y) {
  auto dpsi = [](double t) { return t / 2 - 2 * t * t * t + std::pow(t, 5); };
  return v2(y - 0.45 + dpsi(x), -x + dpsi(y));
}

double explicit_psi(double a, double x, double y) {
  return a * x * (-1 + x * x + y * y) * (-9 + 16 * x * x + 16 * y * y) / 16.0;
}

// Grid max of sigma_max(JF) with the Jacobian differenced centrally.
double grid_lipschitz(const ProblemInstance& P, int n) {
  const Box& b = *P.domain;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vector z = v2(b.lo[0] + (b.hi[0] - b.lo[0]) * i / (n - 1), b.lo[1] + (b.hi[1] - b.lo[1]) * j / (n - 1));
      best = std::max(best, sigma_max_2x2(finite_difference_jacobian(P.F, z)));
    }
  }
  return best;
}

}  // namespace

TEST(Zoo, ResolvesNames) {
  for (const auto& name : canonical_problem_names()) {
    const auto P = resolve_problem(name);
    EXPECT_EQ(P.dim(), 2) << name;
    ASSERT_TRUE(P.z_star) << name;
    ASSERT_TRUE(P.domain) << name;
    EXPECT_TRUE(P.domain->contains(*P.z_star)) << name;
  }
  EXPECT_NO_THROW(resolve_problem("bilinear-c0.25"));
  EXPECT_NO_THROW(resolve_problem("bilinear-c0.3333-r2"));
  EXPECT_THROW(resolve_problem("nope"), UnknownProblemError);
  EXPECT_THROW(resolve_problem("bilinear-c1.5"), std::invalid_argument);
  EXPECT_THROW(resolve_problem("bilinear-cabc"), std::invalid_argument);
}

TEST(PolarGame, OriginIsStationary) {
  const auto P = make_polargame(1.0, 1.0, {0.75, 1.0});
  EXPECT_EQ(P.F(v2(0, 0)).norm(), 0.0);
  ASSERT_TRUE(P.z_star);
  EXPECT_EQ(P.z_star->norm(), 0.0);
  EXPECT_EQ(P.known_cycles, (std::vector<double>{0.75, 1.0}));
}

TEST(PolarGame, RejectsBadArguments) {
  EXPECT_THROW(make_polargame(0.0, 1.0, {1.0}), std::invalid_argument);
  EXPECT_THROW(make_polargame(1.0, 0.0, {1.0}), std::invalid_argument);
  EXPECT_THROW(make_polargame(1.0, 1.0, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(make_polargame(1.0, 1.0, {-0.5}), std::invalid_argument);
  EXPECT_THROW(make_polargame(1.0, 1.0, {0.0, 1.0}), std::invalid_argument);
}

TEST(PolarGame, FlowStaysOnUnitCycle) {
  const auto P = make_polargame(1.0, 1.0, {0.75, 1.0});
  auto f = [&](const Vector& z) -> Vector { return -P.F(z); };
  const double dt = 1e-4;
  const int steps = static_cast<int>(std::ceil(2 * std::numbers::pi / dt));
  Vector z = v2(1.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = f(z), k2 = f(z + 0.5 * dt * k1), k3 = f(z + 0.5 * dt * k2), k4 = f(z + dt * k3);
    z += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    worst = std::max(worst, std::abs(z.norm() - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(PolarGame, MatchesExplicitPsiForm) {
  std::mt19937_64 g(42);
  for (double a : {1.0, 0.75, 1.0 / 3.0}) {
    const auto generic = make_polargame(a, 1.0, {0.75, 1.0});
    const auto example = make_example_polargame(a);
    for (int i = 0; i < 50; ++i) {
      const Vector z = uniform_in(*example.domain, g);
      const double x = z[0], y = z[1];
      const Vector want = v2(explicit_psi(a, x, y) - y, explicit_psi(a, y, x) + x);
      EXPECT_LE((generic.F(z) - want).lpNorm<Eigen::Infinity>(), 1e-10);
      EXPECT_LE((example.F(z) - want).lpNorm<Eigen::Infinity>(), 1e-10);
    }
  }
}

TEST(PolarGame, RadialLaw) {
  for (const auto& P : {make_polargame(1.0, 1.0, {0.75, 1.0}), make_polargame(-0.5, 2.0, {0.3, 0.9, 1.4}),
                        make_example_polargame(0.75)}) {
    EXPECT_LE(polar_radial_law_error(P, 1000, 9), 1e-10);
  }
}

TEST(ExamplePolarGame, StoredConstants) {
  struct Case {
    double a;
    long num, den;
    double lo, hi;  // rho in (-lo/L, -hi/L)
  };
  for (const Case& c : {Case{1.0, -50176, 1050977, 1.0, 0.5}, Case{0.75, -602112, 16798825, 0.5, 1.0 / 3.0},
                        Case{1.0 / 3.0, -150528, 9439585, 1.0 / 8.0, 1.0 / 10.0}}) {
    const auto P = make_example_polargame(c.a);
    ASSERT_TRUE(P.rho && P.rho->rational);
    EXPECT_EQ(P.rho->rational->num, c.num);
    EXPECT_EQ(P.rho->rational->den, c.den);
    EXPECT_DOUBLE_EQ(P.rho->value, static_cast<double>(c.num) / c.den);
    const double L = P.lipschitz();
    EXPECT_GT(P.rho->value, -c.lo / L);
    EXPECT_LT(P.rho->value, -c.hi / L);
    EXPECT_EQ(P.F(v2(0, 0)).norm(), 0.0);
    const double box = 11.0 / 10.0;
    EXPECT_EQ(P.domain->hi[0], box);
    EXPECT_EQ(P.domain->lo[1], -box);
  }
  EXPECT_NEAR(make_example_polargame(1.0).rho->value, -0.047742, 1e-6);
  EXPECT_THROW(make_example_polargame(0.5), std::invalid_argument);
}

TEST(GlobalForsaken, OperatorAndConstants) {
  const auto P = make_global_forsaken();
  std::mt19937_64 g(1);
  for (int i = 0; i < 100; ++i) {
    const Vector z = uniform_in(*P.domain, g);
    EXPECT_LE((P.F(z) - global_forsaken_F(z[0], z[1])).lpNorm<Eigen::Infinity>(), 1e-14);
  }
  EXPECT_EQ(P.F(v2(0, 0)).norm(), 0.0);
  EXPECT_NEAR(P.rho->value, -0.119732, 1e-6);
  EXPECT_NEAR(-1.0 / (2.0 * P.lipschitz()), -0.165432, 1e-3);
  EXPECT_EQ(P.rho_exceeds_half_inverse_L(), std::optional<bool>(true));
  EXPECT_NEAR(P.domain->hi[0], 4.0 / 3.0, 0.0);
}

TEST(GlobalForsaken, TrapRegion) {
  const auto P = make_global_forsaken();
  EXPECT_TRUE(trap_region_holds(P, 360));
  // Independent check of the same statement with the hand-written F.
  for (int i = 0; i < 360; ++i) {
    const double t = 2 * std::numbers::pi * i / 360.0;
    for (double r : {std::sqrt(1.5), 2.0}) {
      const Vector z = v2(r * std::cos(t), r * std::sin(t));
      const double rdot = -global_forsaken_F(z[0], z[1]).dot(z) / r;
      if (r < 1.5) {
        EXPECT_GT(rdot, 0.0);
      } else {
        EXPECT_LT(rdot, 0.0);
      }
    }
  }
}

TEST(Forsaken, OperatorAndConstants) {
  const auto P = make_forsaken();
  std::mt19937_64 g(2);
  for (int i = 0; i < 100; ++i) {
    const Vector z = uniform_in(*P.domain, g);
    EXPECT_LE((P.F(z) - forsaken_F(z[0], z[1])).lpNorm<Eigen::Infinity>(), 1e-13);
  }
  EXPECT_LE(forsaken_F(0.0780267, 0.411934).lpNorm<Eigen::Infinity>(), 1e-5);
  ASSERT_TRUE(P.z_star);
  EXPECT_LE(P.F(*P.z_star).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_NEAR((*P.z_star)[0], 0.0780267, 1e-6);
  EXPECT_NEAR((*P.z_star)[1], 0.411934, 1e-6);

  const Vector zp = v2(-1.01236, -0.104749);
  const Vector Fz = forsaken_F(zp[0], zp[1]);
  EXPECT_LE(Fz.dot(zp - *P.z_star) / Fz.squaredNorm(), -0.4777);
  EXPECT_LE(weak_mvi_ratio(P.F, zp, *P.z_star), -0.4777);
  EXPECT_EQ(P.rho_exceeds_half_inverse_L(), std::optional<bool>(false));
  EXPECT_NEAR(-1.0 / (2.0 * P.lipschitz()), -0.04, 0.01);
}

TEST(Forsaken, NewtonRefinement) {
  const auto P = make_forsaken();
  const Vector root = refine_root(P.F, v2(0.0780267, 0.411934));
  EXPECT_LE(forsaken_F(root[0], root[1]).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE((root - *P.z_star).norm(), 1e-12);
}

TEST(Bilinear, WorstCaseParametrization) {
  const auto P = make_lower_bound_bilinear(1.0 / 3.0);
  const double a = std::sqrt(8.0) / 3.0, b = -1.0 / 3.0;
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-5, 5);
  Matrix want(2, 2);
  want << b, a, -a, b;
  for (int i = 0; i < 20; ++i) {
    const Vector z = v2(u(g), u(g));
    EXPECT_LE((P.F(z) - v2(a * z[1] + b * z[0], b * z[1] - a * z[0])).norm(), 1e-14);
    EXPECT_LE((P.F.jacobian_at(z) - want).lpNorm<Eigen::Infinity>(), 1e-15);
    EXPECT_NEAR(sigma_max_2x2(P.F.jacobian_at(z)), 1.0, 1e-15);
  }
  EXPECT_EQ(P.F(v2(0, 0)).norm(), 0.0);
  EXPECT_NEAR(P.lipschitz(), 1.0, 1e-15);
  EXPECT_NEAR(P.rho->value, -1.0 / 3.0, 1e-15);
  EXPECT_FALSE(P.domain);
  EXPECT_TRUE(make_lower_bound_bilinear(0.25, 2.0).domain);
  EXPECT_THROW(make_lower_bound_bilinear(0.0), std::invalid_argument);
  EXPECT_THROW(make_lower_bound_bilinear(1.0), std::invalid_argument);
}

TEST(Zoo, JacobianConsistency) {
  for (const auto& name : canonical_problem_names()) {
    const auto P = resolve_problem(name);
    ASSERT_TRUE(P.F.has_analytic_jacobian()) << name;
    std::mt19937_64 g(7);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector z = uniform_in(*P.domain, g);
      worst = std::max(worst, (P.F.jacobian_at(z) - finite_difference_jacobian(P.F, z)).lpNorm<Eigen::Infinity>());
    }
    EXPECT_LE(worst, 1e-5) << name;
    EXPECT_LE(jacobian_consistency_error(P, 100, 8), 1e-5) << name;
  }
}

TEST(Zoo, GradientConsistency) {
  for (const auto& P : {make_global_forsaken(), make_forsaken()}) {
    ASSERT_TRUE(P.potential);
    std::mt19937_64 g(12);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
      const Vector z = uniform_in(*P.domain, g);
      const double dx = (P.potential(v2(z[0] + h, z[1])) - P.potential(v2(z[0] - h, z[1]))) / (2 * h);
      const double dy = (P.potential(v2(z[0], z[1] + h)) - P.potential(v2(z[0], z[1] - h))) / (2 * h);
      EXPECT_LE((P.F(z) - v2(dx, -dy)).lpNorm<Eigen::Infinity>(), 1e-5) << P.name;
    }
    EXPECT_LE(gradient_consistency_error(P, 100, 13), 1e-5) << P.name;
  }
}

TEST(Zoo, RestrictedLipschitzMatchesGrid) {
  for (const auto& name : canonical_problem_names()) {
    const auto P = resolve_problem(name);
    const double grid = grid_lipschitz(P, 400);
    EXPECT_LE(std::abs(grid - P.lipschitz()) / P.lipschitz(), 5e-3) << name;
    ASSERT_TRUE(P.L_reference) << name;
    EXPECT_LE(std::abs(*P.L_reference - P.lipschitz()) / P.lipschitz(), 5e-3) << name;
  }
}
