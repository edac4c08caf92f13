#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kspec/hermite.hpp"
#include "kspec/rng.hpp"

namespace kspec {

using Matrix = Eigen::MatrixXd;

struct BudgetExceeded : std::runtime_error {
  BudgetExceeded(const std::string& what, double required, double allowed)
      : std::runtime_error(what), required(required), allowed(allowed) {}
  double required;
  double allowed;
};

// Memory budget in bytes shared by all constructors (default 2 GiB).
std::size_t memory_budget();
void set_memory_budget(std::size_t bytes);
void check_budget(const std::string& what, double bytes);

std::uint64_t binomial(int n, int k);

struct ScalingRegime {
  int n = 1;
  int p = 1;
  int ell = 1;
  double gamma = 1.0;

  static ScalingRegime make(int n, int p, int ell);
};

enum class DistTag { Rademacher, Gaussian, Custom };

struct EntryDistribution {
  DistTag tag = DistTag::Rademacher;
  std::function<double(Stream&)> sampler;  // used when tag == Custom
  double moment_beta = 0.5;

  static EntryDistribution rademacher() { return {}; }
  static EntryDistribution gaussian() { return {DistTag::Gaussian, {}, 0.5}; }
};

std::string to_string(DistTag tag);
DistTag parse_dist(const std::string& s);

struct DataMatrix {
  Matrix entries;
  ScalingRegime regime;
  EntryDistribution dist;
  std::uint64_t seed = 0;
};

DataMatrix sample_X(const ScalingRegime& regime, const EntryDistribution& dist, std::uint64_t seed);

Matrix kernel_matrix(const Matrix& X, const KernelSpec& kernel);
Matrix kernel_matrix(const DataMatrix& X, const KernelSpec& kernel);

// d-subsets of {0..p-1} in lexicographic order.
std::vector<std::vector<int>> sorted_subsets(int p, int d);

// n x C(p,d); column j is the product over the j-th sorted d-subset.
Matrix build_Xd(const Matrix& X, int d);

Matrix tensor_matrix(const Matrix& X, int d);    // R_d = X_d X_d^T / sqrt(n p^d)
Matrix tensor_matrix_T(const Matrix& X, int d);  // X_d^T X_d / sqrt(n p^d)

Matrix offdiag(const Matrix& M);

enum class NbMode { Auto, Exact, Recurrence };

struct NbResult {
  Matrix T;
  bool approximate = false;
};

// T_d(L). Exact mode is a dynamic program over (row index, tuple) states;
// Recurrence mode uses T(L+1) = T(1)T(L) - (d!)^{-1/2} sqrt(p^d/n) T(L) - T(L-1).
NbResult nonbacktracking_matrix(const Matrix& X, int d, int L, NbMode mode = NbMode::Auto);

// Reference path sum over all index sequences; for tiny instances only.
Matrix nonbacktracking_bruteforce(const Matrix& X, int d, int L);

struct AbcResult {
  Matrix A, B, C;
};

// coeffs[d] for d = 0.. ; term d is coeffs[d] sqrt(d!) (R_d - diag R_d), with
// R_0 = 11^T / sqrt(n). A: d < ell, B: ell <= d <= L1, C: K - A - B when a
// kernel is supplied, otherwise the supplied terms with d > L1.
AbcResult abc_decomposition(const Matrix& X, const std::vector<double>& coeffs, int ell, int L1,
                            const KernelSpec* kernel = nullptr);

// a sqrt(ell!)/sqrt(n p^ell) (Z Z^T - C(p,ell) I) + sqrt(b/n) W, W GOE.
Matrix sample_M(const ScalingRegime& regime, double a, double b, std::uint64_t seed);

// Symmetric GOE matrix: off-diagonal variance 1, diagonal variance 2.
Matrix sample_goe(int n, Stream& rng);

}  // namespace kspec
