#include "kspec/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "kspec/rng.hpp"

namespace kspec {

namespace {

std::vector<double> hermite_monomial_coeffs(int k) {
  std::vector<double> prev{1.0};
  if (k == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int j = 1; j < k; ++j) {
    std::vector<double> next(j + 2, 0.0);
    for (int i = 0; i <= j; ++i) next[i + 1] += cur[i];
    for (int i = 0; i < j; ++i) next[i] -= std::sqrt(static_cast<double>(j)) * prev[i];
    for (double& c : next) c /= std::sqrt(static_cast<double>(j + 1));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

// sup_x |x|^j exp(-alpha |x|) = (j / (alpha e))^j
double monomial_envelope(int j, double alpha) {
  if (j == 0) return 1.0;
  return std::pow(j / (alpha * std::numbers::e), j);
}

// Evaluates H_{n-1}(x), H_n(x) and sum_{k<n} H_k(x)^2 with a shared scale
// factor 2^{-scale}, so large |x| does not overflow.
struct ScaledTail {
  double h_prev;
  double h_last;
  double sumsq;
  int scale;
};

ScaledTail scaled_recurrence(int n, double x) {
  double hm1 = 0.0, h = 1.0, sumsq = 0.0;
  int scale = 0;
  for (int k = 0; k < n; ++k) {
    sumsq += h * h;
    double next = (x * h - std::sqrt(static_cast<double>(k)) * hm1) / std::sqrt(static_cast<double>(k + 1));
    hm1 = h;
    h = next;
    if (std::abs(h) > 0x1.0p200) {
      hm1 = std::ldexp(hm1, -200);
      h = std::ldexp(h, -200);
      sumsq = std::ldexp(sumsq, -400);
      scale += 200;
    }
  }
  return {hm1, h, sumsq, scale};
}

std::shared_ptr<const Quadrature> build_rule(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  auto rule = std::make_shared<Quadrature>();
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()[i];
    for (int it = 0; it < 4; ++it) {
      auto t = scaled_recurrence(n, x);
      double step = t.h_last / (std::sqrt(static_cast<double>(n)) * t.h_prev);
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    auto t = scaled_recurrence(n, x);
    rule->nodes[i] = x;
    rule->weights[i] = std::ldexp(1.0 / t.sumsq, -2 * t.scale);
  }
  // symmetrize to remove rounding asymmetry
  for (int i = 0; i < n / 2; ++i) {
    int j = n - 1 - i;
    double x = 0.5 * (rule->nodes[j] - rule->nodes[i]);
    double w = 0.5 * (rule->weights[i] + rule->weights[j]);
    rule->nodes[i] = -x;
    rule->nodes[j] = x;
    rule->weights[i] = rule->weights[j] = w;
  }
  if (n % 2 == 1) rule->nodes[n / 2] = 0.0;
  return rule;
}

double apply_rule(const Quadrature& q, const std::function<double(double)>& f) {
  // accumulate from the tails inward so small terms are not swamped
  std::vector<std::size_t> order(q.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return q.weights[a] < q.weights[b]; });
  double s = 0.0;
  for (std::size_t i : order) {
    if (q.weights[i] == 0.0) continue;
    s += q.weights[i] * f(q.nodes[i]);
  }
  return s;
}

long double binom_ld(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

KernelSpec polynomial_kernel(std::vector<double> coeffs, std::string name) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(0.0);
  KernelSpec k;
  if (name.empty()) {
    std::ostringstream os;
    os << "poly:";
    for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? "," : "") << coeffs[i];
    name = os.str();
  }
  k.name = std::move(name);
  k.poly = coeffs;
  k.polynomial_degree = static_cast<int>(coeffs.size()) - 1;
  k.growth_alpha = 0.3;
  k.growth_t = 1.0;
  double A = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    A += std::abs(coeffs[j]) * monomial_envelope(static_cast<int>(j), k.growth_alpha);
  k.growth_A = std::max(A, 1e-300);
  k.eval = [c = std::move(coeffs)](double x) { return horner(c, x); };
  return k;
}

KernelSpec monomial_kernel(int degree) {
  if (degree < 0) throw std::invalid_argument("monomial degree must be >= 0");
  std::vector<double> c(degree + 1, 0.0);
  c[degree] = 1.0;
  KernelSpec k = polynomial_kernel(c, "monomial:" + std::to_string(degree));
  k.eval = [degree](double x) {
    double v = 1.0;
    for (int i = 0; i < degree; ++i) v *= x;
    return v;
  };
  return k;
}

KernelSpec hermite_kernel(int kdeg) {
  if (kdeg < 0 || kdeg > 200) throw std::invalid_argument("hermite index must be in [0, 200]");
  KernelSpec k = polynomial_kernel(hermite_monomial_coeffs(kdeg), "hermite:" + std::to_string(kdeg));
  k.eval = [kdeg](double x) { return hermite_eval(kdeg, x); };
  return k;
}

KernelSpec sin_kernel(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("sin alpha must be in (0, 1)");
  KernelSpec k;
  std::ostringstream os;
  os << "sin:" << alpha;
  k.name = os.str();
  k.eval = [alpha](double x) { return std::sin(alpha * x); };
  k.growth_A = 1.0;
  k.growth_alpha = alpha;
  k.growth_t = 1.0;
  return k;
}

KernelSpec exp_clip_kernel(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("exp-clip alpha must be positive");
  double a = std::min(alpha, 0.99 / std::numbers::e);
  KernelSpec k;
  std::ostringstream os;
  os << "exp-clip:" << a;
  k.name = os.str();
  k.eval = [a](double x) { return std::exp(a * x); };
  k.growth_A = 1.0;
  k.growth_alpha = a;
  k.growth_t = 1.0;
  return k;
}

KernelSpec parse_kernel(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number in kernel spec: " + spec);
    return v;
  };
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad integer in kernel spec: " + spec);
    return v;
  };
  try {
    if (head == "monomial" && !arg.empty()) return monomial_kernel(to_int(arg));
    if (head == "hermite" && !arg.empty()) return hermite_kernel(to_int(arg));
    if (head == "sin") return sin_kernel(arg.empty() ? 0.3 : to_double(arg));
    if (head == "exp-clip") return exp_clip_kernel(arg.empty() ? 0.3 : to_double(arg));
    if (head == "poly" && !arg.empty()) {
      std::vector<double> c;
      std::stringstream ss(arg);
      std::string item;
      while (std::getline(ss, item, ',')) c.push_back(to_double(item));
      return polynomial_kernel(c);
    }
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("number out of range in kernel spec: " + spec);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("invalid kernel spec '") + spec + "': " + e.what());
  }
  throw std::invalid_argument("unknown kernel spec: " + spec);
}

double polynomial_consistency(const KernelSpec& kernel) {
  if (!kernel.polynomial_degree) return 0.0;
  Stream rng(0x5eed, 0, Role::Test);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    double x = 6.0 * rng.uniform() - 3.0;
    double v = kernel.eval(x);
    double err = std::abs(v - horner(kernel.poly, x)) / std::max(1.0, std::abs(v));
    worst = std::max(worst, err);
  }
  return worst;
}

double hermite_eval(int k, double x) {
  if (k == 0) return 1.0;
  double hm1 = 1.0, h = x;
  for (int j = 1; j < k; ++j) {
    double next = (x * h - std::sqrt(static_cast<double>(j)) * hm1) / std::sqrt(static_cast<double>(j + 1));
    hm1 = h;
    h = next;
  }
  return h;
}

const Quadrature& gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Quadrature>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return *it->second;
}

double gaussian_expectation(const std::function<double(double)>& f, const QuadOptions& opt) {
  double coarse = apply_rule(gauss_hermite(opt.nodes), f);
  double fine = apply_rule(gauss_hermite(2 * opt.nodes), f);
  if (!std::isfinite(fine) || std::abs(fine - coarse) > opt.tol * std::max(1.0, std::abs(fine)))
    throw NonConvergence("Gauss-Hermite estimate did not stabilise under node doubling", coarse, fine);
  return fine;
}

double gaussian_coeff(const KernelSpec& kernel, int d, const QuadOptions& opt) {
  if (d < 0) throw std::invalid_argument("coefficient index must be >= 0");
  return gaussian_expectation([&](double x) { return kernel.eval(x) * hermite_eval(d, x); }, opt);
}

boost::multiprecision::cpp_rational boolean_cube_coeff_exact(const KernelSpec& kernel, int d, int p) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (!kernel.polynomial_degree) throw InfeasibleExact("exact Boolean coefficients need a polynomial kernel");
  if (p < 1 || d < 0 || d > p) throw std::invalid_argument("boolean_cube_coeff needs 0 <= d <= p, p >= 1");
  auto binom = [](int n, int k) {
    cpp_int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  cpp_rational total = 0;
  for (std::size_t m = 0; m < kernel.poly.size(); ++m) {
    if (kernel.poly[m] == 0.0 || (static_cast<int>(m) - d) % 2 != 0) continue;
    // E[S^m Z_1...Z_d] * 2^p with j negatives among the first d and w among the rest
    cpp_int moment = 0;
    for (int j = 0; j <= d; ++j) {
      cpp_int inner = 0;
      for (int w = 0; w <= p - d; ++w) inner += binom(p - d, w) * boost::multiprecision::pow(cpp_int(p - 2 * j - 2 * w), static_cast<unsigned>(m));
      moment += (j % 2 ? -1 : 1) * binom(d, j) * inner;
    }
    cpp_rational term(moment, boost::multiprecision::pow(cpp_int(2), static_cast<unsigned>(p)));
    const int e = (d - static_cast<int>(m)) / 2;  // p^{(d-m)/2}
    const cpp_int pe = boost::multiprecision::pow(cpp_int(p), static_cast<unsigned>(std::abs(e)));
    if (e >= 0) term *= pe;
    else term /= pe;
    int exp2 = 0;
    const double mant = std::frexp(kernel.poly[m], &exp2);
    const cpp_int num = static_cast<long long>(std::ldexp(mant, 53));
    cpp_rational c = num;
    if (exp2 >= 53) c *= boost::multiprecision::pow(cpp_int(2), static_cast<unsigned>(exp2 - 53));
    else c /= boost::multiprecision::pow(cpp_int(2), static_cast<unsigned>(53 - exp2));
    total += c * term;
  }
  return total;
}

double boolean_cube_coeff(const KernelSpec& kernel, int d, int p, const CubeOptions& opt) {
  if (p < 1 || d < 0 || d > p) throw std::invalid_argument("boolean_cube_coeff needs 0 <= d <= p, p >= 1");
  const long double sp = std::sqrt(static_cast<long double>(p));
  const long double scale = std::pow(sp, static_cast<long double>(d));

  switch (opt.mode) {
    case CubeMode::Exact: {
      // first d coordinates carry the product, the rest only enter via their sum
      long double total = 0.0L;
      for (int m = 0; m <= d; ++m) {
        long double inner = 0.0L;
        for (int q = 0; q <= p - d; ++q) {
          long double s = static_cast<long double>(d - 2 * m + (p - d) - 2 * q);
          inner += binom_ld(p - d, q) * kernel.eval(static_cast<double>(s / sp));
        }
        total += ((m % 2) ? -1.0L : 1.0L) * binom_ld(d, m) * inner;
      }
      return static_cast<double>(scale * std::ldexp(total, -p));
    }
    case CubeMode::BruteForce: {
      if (p > 24) throw InfeasibleExact("brute-force cube enumeration limited to p <= 24");
      long double total = 0.0L;
      const std::uint32_t count = 1u << p;
      for (std::uint32_t z = 0; z < count; ++z) {
        int sum = 0, prod = 1;
        for (int i = 0; i < p; ++i) {
          int zi = (z >> i) & 1u ? -1 : 1;
          sum += zi;
          if (i < d) prod *= zi;
        }
        total += prod * kernel.eval(sum / static_cast<double>(sp));
      }
      return static_cast<double>(scale * total / count);
    }
    case CubeMode::MonteCarlo: {
      if (opt.samples == 0) throw std::invalid_argument("Monte Carlo mode needs samples > 0");
      Stream rng(opt.seed, 0, Role::MonteCarlo);
      long double total = 0.0L;
      for (std::uint64_t s = 0; s < opt.samples; ++s) {
        int sum = 0, prod = 1;
        for (int i = 0; i < p; ++i) {
          int zi = rng.sign() > 0 ? 1 : -1;
          sum += zi;
          if (i < d) prod *= zi;
        }
        total += prod * kernel.eval(sum / static_cast<double>(sp));
      }
      return static_cast<double>(scale * total / static_cast<long double>(opt.samples));
    }
  }
  return 0.0;
}

HermiteExpansion expand(const KernelSpec& kernel, int ell, int D, const QuadOptions& opt) {
  if (ell < 1) throw std::invalid_argument("ell must be >= 1");
  if (D < ell) throw std::invalid_argument("expand requires D >= ell");
  HermiteExpansion e;
  e.ell = ell;
  e.coeffs.resize(D + 1);
  for (int d = 0; d <= D; ++d) e.coeffs[d] = gaussian_coeff(kernel, d, opt);
  e.a = e.coeffs[ell];
  e.second_moment = gaussian_expectation([&](double x) { double v = kernel.eval(x); return v * v; }, opt);
  double head = 0.0;
  for (int m = 0; m <= ell; ++m) head += e.coeffs[m] * e.coeffs[m];
  double b = e.second_moment - head;
  // round-off from the two quadratures, not a tail
  if (std::abs(b) <= 1e-12 * std::max(1.0, e.second_moment)) b = 0.0;
  if (b < 0.0) {
    if (b < -opt.tol * std::max(1.0, e.second_moment))
      std::cerr << "warning: negative tail variance " << b << " clamped to 0\n";
    e.b_clamped = true;
    b = 0.0;
  }
  e.b = b;
  return e;
}

BoundReport coeff_bound_check(const HermiteExpansion& expansion, const KernelSpec& kernel) {
  BoundReport r;
  const double A = kernel.growth_A, alpha = kernel.growth_alpha;
  r.alpha_below_inv_e = alpha < 1.0 / std::numbers::e;
  const int d0 = static_cast<int>(std::ceil(kernel.growth_t * alpha));
  const double pref = 3.0 * A * std::sqrt(2.0 * std::numbers::e * std::numbers::pi);
  for (std::size_t d = 0; d < expansion.coeffs.size(); ++d) {
    BoundEntry b;
    b.d = static_cast<int>(d);
    b.coeff = expansion.coeffs[d];
    b.bound = pref * std::sqrt(d + 1.0) * std::pow(alpha, static_cast<double>(d));
    b.applies = b.d >= d0;
    b.pass = !b.applies || std::abs(b.coeff) <= b.bound;
    if (!b.pass) r.violations.push_back(b.d);
    r.entries.push_back(b);
  }
  return r;
}

}  // namespace kspec
