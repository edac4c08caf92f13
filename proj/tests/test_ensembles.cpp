#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kspec/ensembles.hpp"
#include "kspec/matrix_io.hpp"

using namespace kspec;

namespace {

Matrix small_x() {
  Matrix X(2, 2);
  X << 1, 1, 1, -1;
  return X;
}

Eigen::VectorXd eigs(const Matrix& M) { return Eigen::SelfAdjointEigenSolver<Matrix>(M, Eigen::EigenvaluesOnly).eigenvalues(); }

double spectral_norm(const Matrix& M) {
  auto e = eigs(0.5 * (M + M.transpose()));
  return std::max(std::abs(e(0)), std::abs(e(e.size() - 1)));
}

}  // namespace

TEST(Regime, GammaRecomputed) {
  auto r = ScalingRegime::make(922, 48, 2);
  EXPECT_DOUBLE_EQ(r.gamma, 922.0 / (48.0 * 48.0));
}

TEST(SampleX, RademacherSupportAndDeterminism) {
  auto r = ScalingRegime::make(2, 2, 1);
  auto a = sample_X(r, EntryDistribution::rademacher(), 5);
  auto b = sample_X(r, EntryDistribution::rademacher(), 5);
  EXPECT_EQ(a.entries, b.entries);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(std::abs(a.entries(i, j)), 1.0);
  auto c = sample_X(r, EntryDistribution::rademacher(), 6);
  auto big1 = sample_X(ScalingRegime::make(50, 10, 1), EntryDistribution::rademacher(), 5);
  auto big2 = sample_X(ScalingRegime::make(50, 10, 1), EntryDistribution::rademacher(), 6);
  EXPECT_NE(big1.entries, big2.entries);
  (void)c;
}

TEST(SampleX, GaussianVariance) {
  auto X = sample_X(ScalingRegime::make(1000, 10, 1), EntryDistribution::gaussian(), 3).entries;
  double mean = X.mean();
  double var = (X.array() - mean).square().mean();
  EXPECT_GE(var, 0.95);
  EXPECT_LE(var, 1.05);
}

TEST(SampleX, MomentsWithinFiveSigma) {
  for (auto dist : {EntryDistribution::rademacher(), EntryDistribution::gaussian()}) {
    auto X = sample_X(ScalingRegime::make(1000, 100, 1), dist, 9).entries;
    const double N = 1e5;
    double mean = X.mean();
    double var = X.array().square().mean() - mean * mean;
    EXPECT_LT(std::abs(mean), 5.0 / std::sqrt(N));
    EXPECT_LT(std::abs(var - 1.0), 5.0 * std::sqrt(2.0 / N));
  }
}

TEST(SampleX, CustomSampler) {
  EntryDistribution d;
  d.tag = DistTag::Custom;
  d.sampler = [](Stream& s) { return s.uniform() < 0.5 ? -1.0 : 1.0; };
  auto X = sample_X(ScalingRegime::make(3, 4, 1), d, 1).entries;
  EXPECT_EQ(X.cwiseAbs().maxCoeff(), 1.0);
}

TEST(KernelMatrix, HandExample) {
  Matrix K = kernel_matrix(small_x(), monomial_kernel(1));
  EXPECT_EQ(K(0, 0), 0.0);
  EXPECT_EQ(K(1, 1), 0.0);
  EXPECT_EQ(K(0, 1), 0.0);
}

TEST(KernelMatrix, ConstantKernelAndZeroDiagonal) {
  auto X = sample_X(ScalingRegime::make(20, 5, 1), EntryDistribution::gaussian(), 1).entries;
  Matrix K = kernel_matrix(X, polynomial_kernel({1.5}));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) EXPECT_DOUBLE_EQ(K(i, j), i == j ? 0.0 : 1.5 / std::sqrt(20.0));
  Matrix K2 = kernel_matrix(X, sin_kernel(0.3));
  EXPECT_EQ(K2.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(K2, K2.transpose());
}

TEST(BuildXd, Examples) {
  auto X = sample_X(ScalingRegime::make(4, 5, 1), EntryDistribution::gaussian(), 2).entries;
  EXPECT_EQ(build_Xd(X, 1), X);
  Matrix row(1, 3);
  row << 1, 2, 3;
  Matrix X2 = build_Xd(row, 2);
  ASSERT_EQ(X2.cols(), 3);
  EXPECT_EQ(X2(0, 0), 2);
  EXPECT_EQ(X2(0, 1), 3);
  EXPECT_EQ(X2(0, 2), 6);
  auto B = sample_X(ScalingRegime::make(6, 7, 1), EntryDistribution::rademacher(), 2).entries;
  EXPECT_EQ(build_Xd(B, 3).cwiseAbs().minCoeff(), 1.0);
  EXPECT_EQ(build_Xd(B, 3).cwiseAbs().maxCoeff(), 1.0);
}

TEST(BuildXd, BudgetExceededCarriesSizes) {
  auto X = sample_X(ScalingRegime::make(10, 20, 1), EntryDistribution::rademacher(), 2).entries;
  auto saved = memory_budget();
  set_memory_budget(1024);
  try {
    build_Xd(X, 3);
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_DOUBLE_EQ(e.required, 8.0 * 10 * 1140);
    EXPECT_DOUBLE_EQ(e.allowed, 1024.0);
  }
  set_memory_budget(saved);
  EXPECT_NO_THROW(build_Xd(X, 3));
}

TEST(TensorMatrix, GramProperties) {
  auto X = sample_X(ScalingRegime::make(30, 8, 2), EntryDistribution::rademacher(), 4).entries;
  for (int d = 1; d <= 3; ++d) {
    Matrix R = tensor_matrix(X, d);
    EXPECT_GE(eigs(R)(0), -1e-10);
    double diag = binomial(8, d) / std::sqrt(30 * std::pow(8.0, d));
    for (int i = 0; i < 30; ++i) EXPECT_NEAR(R(i, i), diag, 1e-12);
    Matrix Xd = build_Xd(X, d);
    EXPECT_NEAR(R.trace(), Xd.squaredNorm() / std::sqrt(30 * std::pow(8.0, d)), 1e-9);
    Eigen::FullPivLU<Matrix> lu(R);
    lu.setThreshold(1e-9);
    EXPECT_LE(lu.rank(), std::min<long>(30, binomial(8, d)));
    Matrix Rb = tensor_matrix_T(X, d);
    for (Eigen::Index i = 0; i < Rb.rows(); ++i) EXPECT_NEAR(Rb(i, i), std::sqrt(30.0 / std::pow(8.0, d)), 1e-12);
  }
}

TEST(TensorMatrix, SameNonzeroSpectrum) {
  auto X = sample_X(ScalingRegime::make(12, 6, 2), EntryDistribution::gaussian(), 8).entries;
  for (int d = 1; d <= 3; ++d) {
    auto a = eigs(tensor_matrix(X, d)), b = eigs(tensor_matrix_T(X, d));
    std::vector<double> na, nb;
    for (double v : a) if (std::abs(v) > 1e-8) na.push_back(v);
    for (double v : b) if (std::abs(v) > 1e-8) nb.push_back(v);
    ASSERT_EQ(na.size(), nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) EXPECT_NEAR(na[i], nb[i], 1e-8);
  }
}

TEST(TensorMatrix, OrthogonalColumnsGiveDiagonal) {
  Matrix X(4, 2);
  X << 1, 1, 1, -1, 1, 1, 1, -1;
  Matrix Rb = tensor_matrix_T(X, 1);
  EXPECT_NEAR(Rb(0, 1), 0.0, 1e-15);
}

TEST(TensorMatrix, TraceOfPowers) {
  auto X = sample_X(ScalingRegime::make(10, 5, 2), EntryDistribution::gaussian(), 12).entries;
  Matrix R = tensor_matrix(X, 2);
  auto e = eigs(R);
  Matrix P = Matrix::Identity(10, 10);
  for (int L = 1; L <= 4; ++L) {
    P = P * R;
    double s = e.array().pow(L).sum();
    EXPECT_NEAR(s, P.trace(), 1e-7 * std::abs(P.trace()));
  }
}

TEST(Nonbacktracking, ConventionsAtLowL) {
  auto X = sample_X(ScalingRegime::make(7, 5, 2), EntryDistribution::rademacher(), 1).entries;
  auto T0 = nonbacktracking_matrix(X, 2, 0).T;
  EXPECT_EQ(T0, Matrix::Identity(10, 10));
  auto T1 = nonbacktracking_matrix(X, 2, 1).T;
  EXPECT_EQ(T1.diagonal().cwiseAbs().maxCoeff(), 0.0);
  Matrix expect = offdiag(build_Xd(X, 2).transpose() * build_Xd(X, 2)) * std::sqrt(2.0) / std::sqrt(7 * 25.0);
  EXPECT_LT((T1 - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Nonbacktracking, HandEnumeratedToy) {
  Matrix T2 = nonbacktracking_matrix(small_x(), 1, 2, NbMode::Exact).T;
  Matrix want = -0.5 * Matrix::Identity(2, 2);
  EXPECT_LT((T2 - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((nonbacktracking_bruteforce(small_x(), 1, 2) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Nonbacktracking, DynamicProgramMatchesPathSum) {
  for (int seed = 0; seed < 3; ++seed) {
    auto X = sample_X(ScalingRegime::make(4, 4, 2), EntryDistribution::gaussian(), seed).entries;
    for (int d = 1; d <= 2; ++d)
      for (int L = 1; L <= 3; ++L) {
        Matrix a = nonbacktracking_matrix(X, d, L, NbMode::Exact).T;
        Matrix b = nonbacktracking_bruteforce(X, d, L);
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff())) << d << " " << L;
      }
  }
}

TEST(Nonbacktracking, ClosedFormAtLTwo) {
  auto X = sample_X(ScalingRegime::make(9, 6, 2), EntryDistribution::gaussian(), 21).entries;
  const int d = 2, n = 9, p = 6;
  Matrix Y = build_Xd(X, d);
  Matrix A = Y.transpose() * Y;
  const Eigen::Index C = Y.cols();
  Matrix T = Matrix::Zero(C, C);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = 0; j < C; ++j) {
      auto f = [&](Eigen::Index k) {
        double s = A(i, k) * A(k, j);
        for (int u = 0; u < n; ++u) s -= Y(u, i) * Y(u, k) * Y(u, k) * Y(u, j);
        return s;
      };
      double tot = 0;
      for (Eigen::Index k = 0; k < C; ++k) tot += f(k);
      tot -= f(i) + f(j);
      if (i == j) tot += f(i);
      T(i, j) = tot * 2.0 / (n * std::pow(p, 2.0));
    }
  Matrix got = nonbacktracking_matrix(X, d, 2, NbMode::Exact).T;
  EXPECT_LT((got - T).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Nonbacktracking, RecurrenceFlaggedApproximate) {
  auto X = sample_X(ScalingRegime::make(20, 6, 1), EntryDistribution::rademacher(), 3).entries;
  auto r = nonbacktracking_matrix(X, 1, 3, NbMode::Recurrence);
  EXPECT_TRUE(r.approximate);
  EXPECT_FALSE(nonbacktracking_matrix(X, 1, 3, NbMode::Exact).approximate);
}

// Residual of T(1)^2 = T(2) + (d!)^{-1/2} sqrt(p^d/n) T(1) + T(0) shrinks with p.
TEST(Nonbacktracking, RecurrenceResidualDecreases) {
  const double gamma = 0.5;
  const int d = 1, ell = 2;
  std::vector<double> mean_res;
  for (int p : {16, 32, 64}) {
    int n = static_cast<int>(std::lround(gamma * std::pow(p, ell)));
    double acc = 0.0;
    for (int seed = 0; seed < 5; ++seed) {
      auto X = sample_X(ScalingRegime::make(n, p, ell), EntryDistribution::rademacher(), 100 + seed).entries;
      Matrix T1 = nonbacktracking_matrix(X, d, 1).T;
      Matrix T2 = nonbacktracking_matrix(X, d, 2, NbMode::Exact).T;
      double c = std::sqrt(std::pow(p, d) / n);
      Matrix res = T1 * T1 - T2 - c * T1 - Matrix::Identity(p, p);
      acc += spectral_norm(res);
    }
    mean_res.push_back(acc / 5);
  }
  EXPECT_GT(mean_res[0], mean_res[1]);
  EXPECT_GT(mean_res[1], mean_res[2]);
}

TEST(Abc, ExactOnTheCube) {
  const int p = 10, n = 25, ell = 2, D = 4;
  auto X = sample_X(ScalingRegime::make(n, p, ell), EntryDistribution::rademacher(), 17).entries;
  auto k = polynomial_kernel({0.4, -1.0, 0.8, 0.3, -0.2});
  std::vector<double> c(D + 1);
  for (int d = 0; d <= D; ++d) c[d] = boolean_cube_coeff(k, d, p) / std::sqrt(std::tgamma(d + 1.0));
  auto abc = abc_decomposition(X, c, ell, D);
  Matrix K = kernel_matrix(X, k);
  EXPECT_LT((K - abc.A - abc.B).cwiseAbs().maxCoeff(), 1e-10);
  auto with_kernel = abc_decomposition(X, c, ell, D, &k);
  EXPECT_LT(with_kernel.C.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Abc, SingleTermAndZero) {
  auto X = sample_X(ScalingRegime::make(8, 5, 2), EntryDistribution::rademacher(), 2).entries;
  std::vector<double> c(4, 0.0);
  c[3] = 1.0;
  auto abc = abc_decomposition(X, c, 2, 3);
  Matrix want = std::sqrt(6.0) * offdiag(tensor_matrix(X, 3));
  EXPECT_LT((abc.B - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(abc.A.cwiseAbs().maxCoeff(), 0.0);
  auto zero = abc_decomposition(X, std::vector<double>(5, 0.0), 2, 3);
  EXPECT_EQ(zero.A.cwiseAbs().maxCoeff() + zero.B.cwiseAbs().maxCoeff() + zero.C.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleM, ZeroAndSymmetry) {
  auto r = ScalingRegime::make(40, 8, 2);
  EXPECT_EQ(sample_M(r, 0, 0, 1).cwiseAbs().maxCoeff(), 0.0);
  Matrix M = sample_M(r, 1.0, 0.5, 3);
  EXPECT_EQ(M, M.transpose());
  EXPECT_EQ(M, sample_M(r, 1.0, 0.5, 3));
}

TEST(SampleM, WignerEdges) {
  auto r = ScalingRegime::make(600, 10, 1);
  auto e = eigs(sample_M(r, 0.0, 1.0, 5));
  EXPECT_NEAR(e(0), -2.0, 0.15);
  EXPECT_NEAR(e(e.size() - 1), 2.0, 0.15);
}

TEST(MatrixIo, BinaryRoundTripAndHeader) {
  Matrix M(2, 3);
  M << 1, 2, 3, 4, 5, 6.5;
  std::string path = ::testing::TempDir() + "m.bin";
  write_binary(path, M);
  EXPECT_EQ(read_binary(path), M);
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  EXPECT_EQ(static_cast<long>(in.tellg()), 8 + 6 * 8);
  std::remove(path.c_str());
}
