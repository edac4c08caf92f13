#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kspec {

using cplx = std::complex<double>;

struct RootSelectionAmbiguous : std::runtime_error {
  RootSelectionAmbiguous(const std::string& what, cplx first, cplx second)
      : std::runtime_error(what), first(first), second(second) {}
  cplx first;
  cplx second;
};

struct DegenerateLaw : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Convention { Variance, SquaredTail };

struct LimitLawParams {
  double a = 0.0;
  double b = 0.0;
  double gamma = 1.0;
  int ell = 1;
  Convention convention = Convention::Variance;

  double lambda() const;  // gamma * ell!
  double tail() const;    // coefficient on m in the equation: b or b^2
};

// Coefficients (A, B, C, D) of A m^3 + B m^2 + C m + D obtained by clearing
// m (z + a^2 m / (1 + sqrt(ell! gamma) a m) + b m) + 1 = 0.
std::array<cplx, 4> cubic_coeffs(cplx z, const LimitLawParams& params);
cplx cubic_residual(cplx m, cplx z, const LimitLawParams& params);

// Roots of the cleared equation (1, 2 or 3 of them), Newton polished.
std::vector<cplx> cubic_roots(const std::array<cplx, 4>& c);

cplx stieltjes_m(cplx z, const LimitLawParams& params);

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

// Point mass of the law; present only when b = 0 and gamma ell! > 1.
std::optional<Atom> law_atom(const LimitLawParams& params);

struct Interval {
  double lo;
  double hi;
};

struct LimitLaw {
  LimitLawParams params;
  std::vector<std::pair<double, double>> grid;  // (E, density)
  std::vector<Interval> support;
  std::optional<Atom> atom;
  double edge = 0.0;
};

struct SupportResult {
  std::vector<Interval> support;
  std::optional<Atom> atom;
  double edge = 0.0;
};

SupportResult support_edge(const LimitLawParams& params);

// Discriminant of the cubic at real E (negative inside the support).
double discriminant(double E, const LimitLawParams& params);

std::vector<double> default_eta_schedule();

double density_at(double E, const LimitLawParams& params, const std::vector<double>& etas = default_eta_schedule());

LimitLaw density_grid(const LimitLawParams& params, double E_lo, double E_hi, int n_points,
                      const std::vector<double>& etas = default_eta_schedule());

// Grid over the support with margin; support and atom filled in.
LimitLaw make_limit_law(const LimitLawParams& params, int n_points = 4001);

// Continuous part integrated by trapezoid plus the atom step.
double law_cdf(const LimitLaw& law, double x);
double grid_mass(const LimitLaw& law);

double semicircle_density(double x);
double semicircle_cdf(double x);
double mp_density(double x, double lambda);
std::pair<double, double> mp_edges(double lambda);
double mp_atom(double lambda);

struct TensorEdges {
  std::optional<double> lambda_min;
  std::optional<double> lambda_k1;
  std::optional<double> lambda_max;
  long long k = 0;
};

TensorEdges theoretical_tensor_edges(int d, int ell, double gamma, long long n, int p);

}  // namespace kspec
