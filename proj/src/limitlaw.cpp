#include "kspec/limitlaw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kspec {

namespace {

double factorial(int d) { return std::tgamma(d + 1.0); }

cplx eval_poly(const std::array<cplx, 4>& c, cplx m) { return ((c[0] * m + c[1]) * m + c[2]) * m + c[3]; }
cplx eval_deriv(const std::array<cplx, 4>& c, cplx m) { return (3.0 * c[0] * m + 2.0 * c[1]) * m + c[2]; }

cplx polish(const std::array<cplx, 4>& c, cplx m) {
  for (int it = 0; it < 40; ++it) {
    cplx d = eval_deriv(c, m);
    if (d == cplx(0.0)) break;
    cplx step = eval_poly(c, m) / d;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    m -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(m))) break;
  }
  return m;
}

std::vector<cplx> quadratic_roots(cplx A, cplx B, cplx C) {
  if (A == cplx(0.0)) {
    if (B == cplx(0.0)) return {};
    return {-C / B};
  }
  cplx s = std::sqrt(B * B - 4.0 * A * C);
  if (std::real(std::conj(B) * s) < 0.0) s = -s;
  cplx q = -0.5 * (B + s);
  if (q == cplx(0.0)) return {cplx(0.0), cplx(0.0)};
  return {q / A, C / q};
}

double im_tol(cplx m) { return 1e-12 * (1.0 + std::abs(m)); }

cplx closest(const std::vector<cplx>& roots, cplx target, cplx* runner_up = nullptr) {
  std::size_t best = 0, second = roots.size();
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (std::abs(roots[i] - target) < std::abs(roots[best] - target)) {
      second = best;
      best = i;
    } else if (second == roots.size() || std::abs(roots[i] - target) < std::abs(roots[second] - target)) {
      second = i;
    }
  }
  if (runner_up) *runner_up = second < roots.size() ? roots[second] : roots[best];
  return roots[best];
}

}  // namespace

double LimitLawParams::lambda() const { return gamma * factorial(ell); }
double LimitLawParams::tail() const { return convention == Convention::Variance ? b : b * b; }

std::array<cplx, 4> cubic_coeffs(cplx z, const LimitLawParams& p) {
  const double c = std::sqrt(p.lambda()) * p.a;
  const double t = p.tail();
  return {cplx(t * c), c * z + p.a * p.a + t, z + c, cplx(1.0)};
}

cplx cubic_residual(cplx m, cplx z, const LimitLawParams& params) { return eval_poly(cubic_coeffs(z, params), m); }

std::vector<cplx> cubic_roots(const std::array<cplx, 4>& c) {
  std::vector<cplx> roots;
  if (c[0] == cplx(0.0)) {
    roots = quadratic_roots(c[1], c[2], c[3]);
  } else {
    const cplx b = c[1] / c[0], cc = c[2] / c[0], d = c[3] / c[0];
    const cplx P = cc - b * b / 3.0;
    const cplx Q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    cplx s = std::sqrt(Q * Q / 4.0 + P * P * P / 27.0);
    cplx u3 = -Q / 2.0 + s;
    cplx alt = -Q / 2.0 - s;
    if (std::abs(alt) > std::abs(u3)) u3 = alt;
    const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
    if (std::abs(u3) == 0.0) {
      roots.assign(3, -b / 3.0);
    } else {
      cplx u = std::pow(u3, 1.0 / 3.0);
      for (int k = 0; k < 3; ++k) {
        roots.push_back(u - P / (3.0 * u) - b / 3.0);
        u *= omega;
      }
    }
  }
  for (auto& r : roots) r = polish(c, r);
  return roots;
}

cplx stieltjes_m(cplx z, const LimitLawParams& params) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("stieltjes_m needs Im z > 0");
  auto coeffs = cubic_coeffs(z, params);
  auto roots = cubic_roots(coeffs);
  std::vector<cplx> upper;
  for (cplx r : roots)
    if (r.imag() > im_tol(r)) upper.push_back(r);
  if (upper.size() == 1) return upper[0];

  // continuity tracking from far up the imaginary axis
  const cplx z0(0.0, std::max(10.0, 2.0 * std::abs(z)));
  const int steps = 400;
  cplx cur = -1.0 / z0;
  for (int s = 0; s <= steps; ++s) {
    cplx zs = z0 + (z - z0) * (static_cast<double>(s) / steps);
    auto rs = cubic_roots(cubic_coeffs(zs, params));
    if (rs.empty()) throw RootSelectionAmbiguous("equation has no roots", cur, cur);
    cur = closest(rs, cur);
  }
  cplx runner;
  cplx chosen = closest(roots, cur, &runner);
  if (upper.size() >= 2) {
    bool tie = std::abs(std::abs(chosen - cur) - std::abs(runner - cur)) <= 1e-9 * (1.0 + std::abs(cur));
    bool runner_up = runner.imag() > im_tol(runner);
    if (chosen.imag() <= im_tol(chosen) || (tie && runner_up))
      throw RootSelectionAmbiguous("two roots remain in the upper half plane", upper[0], upper[1]);
  }
  return polish(coeffs, chosen);
}

std::optional<Atom> law_atom(const LimitLawParams& params) {
  const double lam = params.lambda();
  if (params.tail() == 0.0 && params.a != 0.0 && lam > 1.0)
    return Atom{-params.a / std::sqrt(lam), 1.0 - 1.0 / lam};
  return std::nullopt;
}

double discriminant(double E, const LimitLawParams& params) {
  auto c = cubic_coeffs(cplx(E, 0.0), params);
  const double A = c[0].real(), B = c[1].real(), C = c[2].real(), D = c[3].real();
  return 18 * A * B * C * D - 4 * B * B * B * D + B * B * C * C - 4 * A * C * C * C - 27 * A * A * D * D;
}

SupportResult support_edge(const LimitLawParams& params) {
  if (params.a == 0.0 && params.tail() == 0.0) throw DegenerateLaw("a = b = 0: the law is a point mass at 0");
  SupportResult out;
  out.atom = law_atom(params);
  double R = std::abs(params.a) * (2.0 + std::sqrt(params.lambda())) + 2.0 * std::sqrt(params.tail()) + 1.0;
  auto inside = [&](double E) { return discriminant(E, params) < 0.0; };
  auto refine = [&](double out_pt, double in_pt) {
    while (std::abs(in_pt - out_pt) > 1e-10) {
      double mid = 0.5 * (in_pt + out_pt);
      (inside(mid) ? in_pt : out_pt) = mid;
    }
    return 0.5 * (in_pt + out_pt);
  };
  const int N = 4096;
  for (int attempt = 0; attempt < 8; ++attempt, R *= 2.0) {
    std::vector<double> E(N);
    std::vector<char> in(N);
    for (int i = 0; i < N; ++i) {
      E[i] = -R + 2.0 * R * i / (N - 1);
      in[i] = inside(E[i]);
    }
    if (in.front() || in.back()) continue;
    out.support.clear();
    for (int i = 1; i < N; ++i) {
      if (in[i] && !in[i - 1]) {
        double lo = refine(E[i - 1], E[i]);
        int j = i;
        while (in[j]) ++j;
        double hi = refine(E[j], E[j - 1]);
        if (!out.support.empty() && lo - out.support.back().hi < 1e-8) out.support.back().hi = hi;
        else out.support.push_back({lo, hi});
        i = j;
      }
    }
    break;
  }
  out.edge = 0.0;
  for (const auto& iv : out.support) out.edge = std::max({out.edge, std::abs(iv.lo), std::abs(iv.hi)});
  if (out.atom) out.edge = std::max(out.edge, std::abs(out.atom->location));
  return out;
}

std::vector<double> default_eta_schedule() { return {1e-2, 5e-3, 2.5e-3}; }

double density_at(double E, const LimitLawParams& params, const std::vector<double>& etas) {
  if (etas.empty()) throw std::invalid_argument("empty eta schedule");
  for (std::size_t i = 1; i < etas.size(); ++i)
    if (!(etas[i] < etas[i - 1]) || etas[i] <= 0.0) throw std::invalid_argument("eta schedule must be positive and decreasing");
  auto atom = law_atom(params);
  auto rho = [&](double eta) {
    cplx z(E, eta);
    cplx m = stieltjes_m(z, params);
    if (atom) m -= atom->weight / (atom->location - z);
    return m.imag() / std::numbers::pi;
  };
  double v;
  if (etas.size() == 1) {
    v = rho(etas[0]);
  } else {
    double e1 = etas[etas.size() - 2], e2 = etas.back();
    double r1 = rho(e1), r2 = rho(e2);
    v = r2 + (r2 - r1) * e2 / (e1 - e2);
  }
  return std::max(v, 0.0);
}

LimitLaw density_grid(const LimitLawParams& params, double E_lo, double E_hi, int n_points,
                      const std::vector<double>& etas) {
  if (n_points < 2 || !(E_hi > E_lo)) throw std::invalid_argument("density_grid needs n_points >= 2 and E_hi > E_lo");
  LimitLaw law;
  law.params = params;
  if (!(params.a == 0.0 && params.tail() == 0.0)) {
    auto s = support_edge(params);
    law.support = s.support;
    law.atom = s.atom;
    law.edge = s.edge;
  } else {
    law.support = {{0.0, 0.0}};
    law.atom = Atom{0.0, 1.0};
  }
  law.grid.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    double E = E_lo + (E_hi - E_lo) * i / (n_points - 1);
    bool degenerate = params.a == 0.0 && params.tail() == 0.0;
    law.grid[i] = {E, degenerate ? 0.0 : density_at(E, params, etas)};
  }
  return law;
}

LimitLaw make_limit_law(const LimitLawParams& params, int n_points) {
  auto s = support_edge(params);
  double lo = s.support.empty() ? -1.0 : s.support.front().lo;
  double hi = s.support.empty() ? 1.0 : s.support.back().hi;
  double margin = 0.05 * (hi - lo) + 0.05;
  return density_grid(params, lo - margin, hi + margin, n_points);
}

double law_cdf(const LimitLaw& law, double x) {
  double F = 0.0;
  const auto& g = law.grid;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i].first <= x) {
      F += 0.5 * (g[i].second + g[i - 1].second) * (g[i].first - g[i - 1].first);
    } else {
      if (g[i - 1].first < x) {
        double t = (x - g[i - 1].first) / (g[i].first - g[i - 1].first);
        double fx = g[i - 1].second + t * (g[i].second - g[i - 1].second);
        F += 0.5 * (g[i - 1].second + fx) * (x - g[i - 1].first);
      }
      break;
    }
  }
  if (law.atom && x >= law.atom->location) F += law.atom->weight;
  return F;
}

double grid_mass(const LimitLaw& law) {
  double F = 0.0;
  for (std::size_t i = 1; i < law.grid.size(); ++i)
    F += 0.5 * (law.grid[i].second + law.grid[i - 1].second) * (law.grid[i].first - law.grid[i - 1].first);
  return F + (law.atom ? law.atom->weight : 0.0);
}

double semicircle_density(double x) { return std::abs(x) >= 2.0 ? 0.0 : std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi); }

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) + std::asin(x / 2.0) / std::numbers::pi;
}

std::pair<double, double> mp_edges(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("mp_edges needs lambda > 0");
  double s = std::sqrt(lambda);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

double mp_density(double x, double lambda) {
  auto [lo, hi] = mp_edges(lambda);
  if (x <= lo || x >= hi || x <= 0.0) return 0.0;
  return std::sqrt((hi - x) * (x - lo)) / (2.0 * std::numbers::pi * lambda * x);
}

double mp_atom(double lambda) { return std::max(0.0, 1.0 - 1.0 / lambda); }

TensorEdges theoretical_tensor_edges(int d, int ell, double gamma, long long n, int p) {
  if (d < 1) throw std::invalid_argument("theoretical_tensor_edges needs d >= 1");
  TensorEdges t;
  const double w = 2.0 / std::sqrt(factorial(d));
  auto choose = [](int N, int K) {
    long double r = 1.0L;
    for (int i = 1; i <= K; ++i) r = r * (N - K + i) / i;
    return r;
  };
  if (d < ell) {
    long double C = choose(p, d);
    double s = std::sqrt(n / std::pow(static_cast<double>(p), d));
    if (n > C) t.lambda_min = 0.0;
    t.lambda_k1 = s - w;
    t.lambda_max = s + w;
    t.k = n > C ? static_cast<long long>(n - C) : 0;
  } else if (d == ell) {
    long double C = choose(p, d);
    double sg = std::sqrt(gamma);
    t.lambda_min = sg - w;
    t.lambda_k1 = sg - w;
    t.lambda_max = sg + w;
    t.k = n > C ? static_cast<long long>(n - C) : 0;
  } else {
    t.lambda_min = -w;
    t.lambda_max = w;
    t.k = 0;
  }
  return t;
}

}  // namespace kspec
