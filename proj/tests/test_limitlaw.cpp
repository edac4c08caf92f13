#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kspec/limitlaw.hpp"
#include "kspec/rng.hpp"

using namespace kspec;

namespace {
LimitLawParams P(double a, double b, double gamma, int ell) {
  LimitLawParams p;
  p.a = a;
  p.b = b;
  p.gamma = gamma;
  p.ell = ell;
  return p;
}
}  // namespace

TEST(Stieltjes, SemicircleAtI) {
  cplx m = stieltjes_m(cplx(0, 1), P(0, 1, 1, 1));
  EXPECT_NEAR(m.real(), 0.0, 1e-14);
  EXPECT_NEAR(m.imag(), (std::sqrt(5.0) - 1) / 2, 1e-14);
}

TEST(Stieltjes, LargeZAsymptotics) {
  for (auto p : {P(0, 1, 1, 1), P(1, 0.5, 0.5, 2), P(-0.7, 2, 3, 1)}) {
    cplx z(60.0, 80.0);
    EXPECT_LT(std::abs(stieltjes_m(z, p) + 1.0 / z), 1e-3);
  }
}

TEST(Stieltjes, PointMass) {
  cplx z(0.3, 0.7);
  cplx m = stieltjes_m(z, P(0, 0, 1, 1));
  EXPECT_LT(std::abs(m + 1.0 / z), 1e-15);
}

TEST(Stieltjes, ConventionsAgreeAtUnitB) {
  auto v = P(0.8, 1.0, 0.7, 2);
  auto lit = v;
  lit.convention = Convention::SquaredTail;
  cplx z(0.4, 0.2);
  EXPECT_LT(std::abs(stieltjes_m(z, v) - stieltjes_m(z, lit)), 1e-12);
  auto v4 = P(0, 4, 1, 1), l2 = P(0, 2, 1, 1);
  l2.convention = Convention::SquaredTail;
  EXPECT_LT(std::abs(stieltjes_m(z, v4) - stieltjes_m(z, l2)), 1e-12);
}

TEST(Stieltjes, ResidualAndHerglotz) {
  Stream rng(2024, 0, Role::Test);
  int checked = 0;
  for (int set = 0; set < 20; ++set) {
    auto p = P(4 * rng.uniform() - 2, 3 * rng.uniform(), 0.1 + 3 * rng.uniform(), 1 + static_cast<int>(3 * rng.uniform()));
    for (int k = 0; k < 25; ++k) {
      cplx z(12 * rng.uniform() - 6, 1e-3 + 4 * rng.uniform());
      cplx m = stieltjes_m(z, p);
      ASSERT_LT(std::abs(cubic_residual(m, z, p)), 1e-10) << set << " " << z;
      ASSERT_GT(m.imag(), 0.0) << set << " " << z;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 500);
}

TEST(Stieltjes, RejectsRealZ) { EXPECT_THROW(stieltjes_m(cplx(1, 0), P(0, 1, 1, 1)), std::invalid_argument); }

TEST(Density, SemicircleValues) {
  auto p = P(0, 1, 1, 1);
  EXPECT_NEAR(density_at(0.0, p), 1 / std::numbers::pi, 2e-3);
  EXPECT_LT(density_at(3.0, p), 1e-3);
  EXPECT_LT(density_at(-3.0, p), 1e-3);
  double worst = 0;
  for (double E = 0.05; E < 2.5; E += 0.1) worst = std::max(worst, std::abs(density_at(E, p) - density_at(-E, p)));
  EXPECT_LT(worst, 1e-6);
  for (double E : {-1.5, -0.5, 0.7, 1.2}) EXPECT_NEAR(density_at(E, p), semicircle_density(E), 2e-3);
}

TEST(Density, MassIncludingAtom) {
  Stream rng(77, 0, Role::Test);
  for (int set = 0; set < 20; ++set) {
    auto p = P(4 * rng.uniform() - 2, (set % 4 == 0) ? 0.0 : 2 * rng.uniform(), 0.2 + 2 * rng.uniform(),
               1 + static_cast<int>(2 * rng.uniform()));
    auto law = make_limit_law(p, 6001);
    EXPECT_NEAR(grid_mass(law), 1.0, 1e-3) << "a=" << p.a << " b=" << p.b << " g=" << p.gamma << " l=" << p.ell;
  }
}

TEST(Density, RejectsBadSchedule) {
  EXPECT_THROW(density_at(0.0, P(0, 1, 1, 1), {1e-3, 1e-2}), std::invalid_argument);
}

TEST(Support, SemicircleEdge) {
  for (double g : {0.3, 1.0, 4.0})
    for (int ell : {1, 2, 3}) {
      auto s = support_edge(P(0, 1, g, ell));
      EXPECT_NEAR(s.edge, 2.0, 1e-6);
      ASSERT_EQ(s.support.size(), 1u);
    }
}

TEST(Support, ShiftedMarchenkoPastur) {
  auto s = support_edge(P(1, 0, 1, 1));
  EXPECT_NEAR(s.edge, 3.0, 1e-6);
  ASSERT_EQ(s.support.size(), 1u);
  EXPECT_NEAR(s.support[0].lo, -1.0, 1e-6);
  EXPECT_FALSE(s.atom.has_value());
}

TEST(Support, ScaledSemicircle) { EXPECT_NEAR(support_edge(P(0, 4, 1, 1)).edge, 4.0, 1e-6); }

TEST(Support, SquaredTailRadius) {
  auto p = P(0, 3, 1, 1);
  p.convention = Convention::SquaredTail;
  EXPECT_NEAR(support_edge(p).edge, 6.0, 1e-6);
}

TEST(Support, AtomWhenLambdaAboveOne) {
  auto p = P(1, 0, 1.5, 2);  // lambda = 3
  auto s = support_edge(p);
  ASSERT_TRUE(s.atom.has_value());
  EXPECT_NEAR(s.atom->weight, 1 - 1 / 3.0, 1e-15);
  EXPECT_NEAR(s.atom->location, -1 / std::sqrt(3.0), 1e-15);
  ASSERT_EQ(s.support.size(), 1u);
  EXPECT_NEAR(s.support[0].lo, std::sqrt(3.0) - 2, 1e-6);
  EXPECT_NEAR(s.support[0].hi, std::sqrt(3.0) + 2, 1e-6);
}

TEST(Support, Degenerate) { EXPECT_THROW(support_edge(P(0, 0, 1, 1)), DegenerateLaw); }

TEST(Support, EdgeConsistentWithDensity) {
  for (auto p : {P(0, 1, 1, 1), P(1, 0.5, 0.5, 2), P(1, 0, 0.5, 2), P(-1.3, 0.2, 2.0, 1)}) {
    auto s = support_edge(p);
    for (const auto& iv : s.support) {
      EXPECT_LT(density_at(iv.hi + 0.05, p), 1e-3);
      EXPECT_GT(density_at(iv.hi - 0.05, p), 1e-4);
      EXPECT_LT(density_at(iv.lo - 0.05, p), 1e-3);
      EXPECT_GT(density_at(iv.lo + 0.05, p), 1e-4);
    }
  }
}

TEST(Support, BandFormulaForMPComponent) {
  for (double lam : {0.3, 0.8, 2.0}) {
    auto s = support_edge(P(1, 0, lam, 1));
    EXPECT_NEAR(s.support.back().hi, std::sqrt(lam) + 2, 1e-6);
    EXPECT_NEAR(s.support.front().lo, std::sqrt(lam) - 2, 1e-6);
  }
}

TEST(ClosedForms, SemicircleAndMP) {
  EXPECT_NEAR(semicircle_density(0), 1 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(semicircle_cdf(0), 0.5, 1e-15);
  EXPECT_EQ(semicircle_cdf(2.5), 1.0);
  auto e = mp_edges(1.0);
  EXPECT_EQ(e.first, 0.0);
  EXPECT_EQ(e.second, 4.0);
  EXPECT_EQ(mp_density(4.1, 1.0), 0.0);
  EXPECT_NEAR(mp_atom(2.0), 0.5, 1e-15);
  // MP density integrates to 1 - atom
  for (double lam : {0.5, 2.0}) {
    auto [lo, hi] = mp_edges(lam);
    const int N = 200000;
    double s = 0;
    for (int i = 0; i < N; ++i) {
      double x = lo + (hi - lo) * (i + 0.5) / N;
      s += mp_density(x, lam) * (hi - lo) / N;
    }
    EXPECT_NEAR(s + mp_atom(lam), 1.0, 2e-3);
  }
}

TEST(TensorEdges, Cases) {
  auto t2 = theoretical_tensor_edges(2, 2, 0.4, 922, 48);
  EXPECT_NEAR(*t2.lambda_max, std::sqrt(0.4) + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(*t2.lambda_max, 2.04669, 1e-4);
  EXPECT_NEAR(*t2.lambda_min, std::sqrt(0.4) - std::sqrt(2.0), 1e-12);
  auto t3 = theoretical_tensor_edges(3, 2, 0.5, 450, 30);
  EXPECT_NEAR(*t3.lambda_max, 0.81650, 1e-5);
  EXPECT_NEAR(*t3.lambda_min, -0.81650, 1e-5);
  EXPECT_FALSE(t3.lambda_k1.has_value());
  auto t1 = theoretical_tensor_edges(1, 2, 922 / 2304.0, 922, 48);
  EXPECT_NEAR(*t1.lambda_max, std::sqrt(922 / 48.0) + 2, 1e-12);
  EXPECT_NEAR(*t1.lambda_max, 6.38268, 1e-4);
  EXPECT_EQ(t1.k, 922 - 48);
  EXPECT_EQ(*t1.lambda_min, 0.0);
}
