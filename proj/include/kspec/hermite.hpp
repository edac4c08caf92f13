#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kspec {

struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, double estimate, double refined)
      : std::runtime_error(what), estimate(estimate), refined(refined) {}
  double estimate;
  double refined;
};

struct InfeasibleExact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel k with growth envelope |k(x)| <= A exp(alpha |x|).
struct KernelSpec {
  std::string name;
  std::function<double(double)> eval;
  double growth_A = 1.0;
  double growth_alpha = 0.3;
  double growth_t = 1.0;
  std::optional<int> polynomial_degree;
  std::vector<double> poly;  // monomial coefficients c_0..c_D when polynomial
};

KernelSpec polynomial_kernel(std::vector<double> coeffs, std::string name = "");
KernelSpec monomial_kernel(int degree);
KernelSpec hermite_kernel(int k);
KernelSpec sin_kernel(double alpha);
KernelSpec exp_clip_kernel(double alpha);

// "monomial:d", "hermite:k", "sin[:alpha]", "exp-clip[:alpha]", "poly:c0,c1,...".
// Throws std::invalid_argument on malformed input.
KernelSpec parse_kernel(const std::string& spec);

// Max |eval - stored polynomial| over 10 seeded points; 0 for non-polynomials.
double polynomial_consistency(const KernelSpec& kernel);

// Orthonormal Hermite polynomial H_k under the standard Gaussian.
double hermite_eval(int k, double x);

// Gauss-Hermite rule for the standard Gaussian measure (weights sum to 1).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const Quadrature& gauss_hermite(int n);

struct QuadOptions {
  int nodes = 200;
  double tol = 1e-10;
};

// E[f(xi)] with one node doubling as error check.
double gaussian_expectation(const std::function<double(double)>& f, const QuadOptions& opt = {});

double gaussian_coeff(const KernelSpec& kernel, int d, const QuadOptions& opt = {});

enum class CubeMode { Exact, BruteForce, MonteCarlo };

struct CubeOptions {
  CubeMode mode = CubeMode::Exact;
  std::uint64_t samples = 1u << 20;
  std::uint64_t seed = 0;
};

// c_d(p) = p^{d/2} E[k(sum Z / sqrt p) Z_1 ... Z_d] over Rademacher Z.
double boolean_cube_coeff(const KernelSpec& kernel, int d, int p, const CubeOptions& opt = {});

// Same quantity in exact arithmetic for polynomial kernels; the double
// coefficients are read as the binary fractions they are.
boost::multiprecision::cpp_rational boolean_cube_coeff_exact(const KernelSpec& kernel, int d, int p);

struct HermiteExpansion {
  std::vector<double> coeffs;
  int ell = 1;
  double a = 0.0;
  double b = 0.0;
  double second_moment = 0.0;
  bool b_clamped = false;
};

HermiteExpansion expand(const KernelSpec& kernel, int ell, int D, const QuadOptions& opt = {});

struct BoundEntry {
  int d = 0;
  double coeff = 0.0;
  double bound = 0.0;
  bool applies = false;
  bool pass = true;
};

struct BoundReport {
  std::vector<BoundEntry> entries;
  std::vector<int> violations;
  bool alpha_below_inv_e = true;
};

// |a_d| <= 3A sqrt(2 e pi) sqrt(d+1) alpha^d for d >= ceil(t alpha).
BoundReport coeff_bound_check(const HermiteExpansion& expansion, const KernelSpec& kernel);

}  // namespace kspec
