#include "kspec/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "kspec/limitlaw.hpp"
#include "kspec/rng.hpp"

namespace kspec {

namespace {

double factorial(int d) {
  double f = 1.0;
  for (int i = 2; i <= d; ++i) f *= i;
  return f;
}

void check_symmetric(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) throw NotSymmetric("matrix is not square", INFINITY);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) throw NotSymmetric("matrix is not symmetric", asym);
}

int kernel_degree_cap(const KernelSpec& k, int ell) {
  return k.polynomial_degree ? std::max(*k.polynomial_degree, ell) : std::max(ell, 20);
}

// Coefficients of the degree < ell part, in the abc_decomposition convention.
std::vector<double> low_coeffs(const KernelSpec& k, int ell, int p, const EntryDistribution& dist) {
  std::vector<double> c(ell + 1, 0.0);
  for (int d = 0; d < ell; ++d) {
    if (dist.tag == DistTag::Rademacher) c[d] = boolean_cube_coeff(k, d, p) / std::sqrt(factorial(d));
    else c[d] = gaussian_coeff(k, d);
  }
  return c;
}

Matrix kernel_for_trial(const ExperimentConfig& cfg, const KernelSpec& k, const Matrix& X,
                        const std::vector<double>& low) {
  Matrix K = kernel_matrix(X, k);
  if (cfg.subtract_low) {
    const int ell = cfg.regime.ell;
    K -= abc_decomposition(X, low, ell, ell).A;
  }
  return K;
}

nlohmann::json regime_json(const ExperimentConfig& cfg) {
  return {{"n", cfg.regime.n},          {"p", cfg.regime.p},      {"ell", cfg.regime.ell},
          {"gamma", cfg.regime.gamma},  {"dist", to_string(cfg.dist.tag)}, {"trials", cfg.trials},
          {"seed", cfg.master_seed}};
}

void band_all(Statistic& s, double target, double tol) {
  s.target = target;
  s.tolerance = tol;
  s.rule = "every trial within target +- tolerance";
  s.pass = std::all_of(s.values.begin(), s.values.end(), [&](double v) { return std::abs(v - target) <= tol; });
}

void band_trimmed(Statistic& s, double target, double tol) {
  s.target = target;
  s.tolerance = tol;
  s.rule = "trimmed mean within target +- tolerance";
  s.pass = std::abs(s.trimmed - target) <= tol;
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Matrix& M, double sym_tol) {
  check_symmetric(M, sym_tol);
  if (M.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return es.eigenvalues();
}

Extremes extremal_from_sorted(const Eigen::VectorXd& eig, int k) {
  if (eig.size() == 0) throw std::invalid_argument("empty spectrum");
  if (k < 0 || k >= eig.size()) throw std::invalid_argument("k out of range");
  return {eig(0), eig(k), eig(eig.size() - 1)};
}

Extremes extremal_eigs(const Matrix& M, int k) { return extremal_from_sorted(symmetric_eigenvalues(M), k); }

double eigen_reconstruction_error(const Matrix& M) {
  check_symmetric(M, 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  Matrix R = es.eigenvectors() * es.eigenvalues().asDiagonal() * es.eigenvectors().transpose();
  const double nm = M.norm();
  return nm == 0.0 ? (R.norm()) : (M - R).norm() / nm;
}

double ks_distance(const Eigen::VectorXd& sorted, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double D = 0.0;
  for (Eigen::Index i = 0; i < sorted.size(); ++i) {
    const double F = cdf(sorted(i));
    D = std::max({D, std::abs(F - (i + 1) / n), std::abs(F - i / n)});
  }
  return D;
}

int worker_count() {
  if (const char* env = std::getenv("KERNEL_SPECTRA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double trimmed_mean(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  if (v.size() >= 3) v = std::vector<double>(v.begin() + 1, v.end() - 1);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double default_tolerance(int n, double c) { return std::max(0.1, c * std::pow(static_cast<double>(n), -0.25)); }

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return mix64(master ^ mix64(static_cast<std::uint64_t>(trial) + 1));
}

Statistic summarize(const std::string& name, std::vector<double> values) {
  Statistic s;
  s.name = name;
  s.values = std::move(values);
  const double n = static_cast<double>(s.values.size());
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = s.values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  s.trimmed = trimmed_mean(s.values);
  return s;
}

bool ExperimentResult::pass() const {
  return std::all_of(stats.begin(), stats.end(), [](const Statistic& s) { return s.informational || s.pass; });
}

const Statistic& ExperimentResult::stat(const std::string& name) const {
  for (const auto& s : stats)
    if (s.name == name) return s;
  throw std::out_of_range("no statistic " + name);
}

nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["experiment"] = r.experiment;
  j["parameters"] = r.parameters;
  auto& trials = j["trials"] = nlohmann::json::array();
  for (const auto& t : r.trials) {
    nlohmann::json o{{"index", t.index}, {"seed", t.seed}};
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) o[key] = *v;
    };
    put("lambda_min", t.lambda_min);
    put("lambda_k1", t.lambda_k1);
    put("lambda_max", t.lambda_max);
    put("norm", t.norm);
    put("ks", t.ks);
    put("value", t.value);
    if (t.k) o["k"] = *t.k;
    trials.push_back(o);
  }
  auto& stats = j["stats"] = nlohmann::json::array();
  for (const auto& s : r.stats) {
    nlohmann::json o{{"name", s.name},       {"mean", s.mean},         {"stddev", s.stddev},
                     {"trimmed_mean", s.trimmed}, {"tolerance", s.tolerance}, {"rule", s.rule},
                     {"pass", s.pass},       {"values", s.values}};
    if (s.informational) o["informational"] = true;
    o["target"] = s.target ? nlohmann::json(*s.target) : nlohmann::json(nullptr);
    stats.push_back(o);
  }
  j["pass"] = r.pass();
  return j;
}

ExperimentResult run_tensor_experiment(const ExperimentConfig& cfg) {
  const auto& reg = cfg.regime;
  const int d = cfg.d;
  if (d < 1 || d > reg.p) throw std::invalid_argument("tensor experiment needs 1 <= d <= p");
  const bool low = d < reg.ell;
  const TensorEdges theory = theoretical_tensor_edges(d, reg.ell, reg.gamma, reg.n, reg.p);
  const double tol = cfg.tolerance > 0 ? cfg.tolerance : default_tolerance(reg.n);
  const long long C = static_cast<long long>(binomial(reg.p, d));
  const int k = low && reg.n > C ? static_cast<int>(reg.n - C) : 0;

  struct Out {
    TrialRecord rec;
    Eigen::VectorXd eig;
  };
  std::function<Out(int)> body = [&](int t) {
    Out o;
    o.rec.index = t;
    o.rec.seed = trial_seed(cfg.master_seed, t);
    const DataMatrix X = sample_X(reg, cfg.dist, o.rec.seed);
    Matrix M = tensor_matrix(X.entries, d);
    if (!low) M.diagonal().setZero();
    o.eig = symmetric_eigenvalues(M, 1e-9);
    const Extremes e = extremal_from_sorted(o.eig, k);
    o.rec.lambda_min = e.lambda_min;
    o.rec.lambda_k1 = e.lambda_k1;
    o.rec.lambda_max = e.lambda_max;
    o.rec.k = static_cast<long long>((o.eig.array() < 1e-8).count());
    return o;
  };
  auto outs = run_trials<Out>(cfg.trials, body, cfg.threads);

  ExperimentResult r;
  r.experiment = "tensor";
  r.config = cfg;
  r.parameters = regime_json(cfg);
  r.parameters["d"] = d;
  r.parameters["matrix"] = low ? "R_d" : "R_d - diag";
  r.parameters["expected_small_eigs"] = k;
  r.parameters["tolerance"] = tol;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  r.parameters["theory"] = {{"lambda_min", opt(theory.lambda_min)},
                            {"lambda_k1", opt(theory.lambda_k1)},
                            {"lambda_max", opt(theory.lambda_max)}};
  std::vector<double> mins, k1s, maxs, small;
  for (auto& o : outs) {
    mins.push_back(*o.rec.lambda_min);
    k1s.push_back(*o.rec.lambda_k1);
    maxs.push_back(*o.rec.lambda_max);
    small.push_back(static_cast<double>(*o.rec.k));
    r.trials.push_back(o.rec);
  }
  if (cfg.keep_spectrum) r.spectrum = outs.front().eig;

  Statistic smin = summarize("lambda_min", mins), sk1 = summarize("lambda_k1", k1s),
            smax = summarize("lambda_max", maxs), ssmall = summarize("small_eigs", small);
  if (low) {
    band_all(sk1, *theory.lambda_k1, tol);
    band_all(smax, *theory.lambda_max, tol);
    ssmall.target = k;
    ssmall.rule = "every trial has exactly n - C(p,d) eigenvalues below 1e-8";
    ssmall.pass = std::all_of(small.begin(), small.end(), [&](double v) { return v == k; });
    r.stats = {smin, sk1, smax, ssmall};
  } else {
    band_trimmed(smin, *theory.lambda_min, tol);
    band_trimmed(smax, *theory.lambda_max, tol);
    r.stats = {smin, smax};
  }
  return r;
}

ExperimentResult run_kernel_norm_experiment(const ExperimentConfig& cfg) {
  const auto& reg = cfg.regime;
  const KernelSpec kernel = parse_kernel(cfg.kernel);
  const HermiteExpansion ex = expand(kernel, reg.ell, kernel_degree_cap(kernel, reg.ell));
  LimitLawParams lp;
  lp.a = ex.a;
  lp.b = ex.b;
  lp.gamma = reg.gamma;
  lp.ell = reg.ell;
  const double target = (lp.a == 0.0 && lp.b == 0.0) ? 0.0 : support_edge(lp).edge;
  const double tol = cfg.tolerance > 0 ? cfg.tolerance : default_tolerance(reg.n);
  const auto low = low_coeffs(kernel, reg.ell, reg.p, cfg.dist);

  struct Out {
    TrialRecord rec;
    Eigen::VectorXd eig;
  };
  std::function<Out(int)> body = [&](int t) {
    Out o;
    o.rec.index = t;
    o.rec.seed = trial_seed(cfg.master_seed, t);
    const DataMatrix X = sample_X(reg, cfg.dist, o.rec.seed);
    o.eig = symmetric_eigenvalues(kernel_for_trial(cfg, kernel, X.entries, low), 1e-9);
    o.rec.lambda_min = o.eig(0);
    o.rec.lambda_max = o.eig(o.eig.size() - 1);
    o.rec.norm = std::max(std::abs(o.eig(0)), std::abs(o.eig(o.eig.size() - 1)));
    return o;
  };
  auto outs = run_trials<Out>(cfg.trials, body, cfg.threads);

  ExperimentResult r;
  r.experiment = "kernel-norm";
  r.config = cfg;
  r.parameters = regime_json(cfg);
  r.parameters["kernel"] = kernel.name;
  r.parameters["a"] = ex.a;
  r.parameters["b"] = ex.b;
  r.parameters["subtract_low"] = cfg.subtract_low;
  r.parameters["tolerance"] = tol;
  r.parameters["predicted_norm"] = target;
  std::vector<double> norms;
  for (auto& o : outs) {
    norms.push_back(*o.rec.norm);
    r.trials.push_back(o.rec);
  }
  if (cfg.keep_spectrum) r.spectrum = outs.front().eig;
  Statistic s = summarize("norm", norms);
  band_trimmed(s, target, tol);
  r.stats = {s};
  return r;
}

ExperimentResult run_bulk_experiment(const ExperimentConfig& cfg) {
  const auto& reg = cfg.regime;
  const KernelSpec kernel = parse_kernel(cfg.kernel);
  const HermiteExpansion ex = expand(kernel, reg.ell, kernel_degree_cap(kernel, reg.ell));
  LimitLawParams lp;
  lp.a = ex.a;
  lp.b = ex.b;
  lp.gamma = reg.gamma;
  lp.ell = reg.ell;
  std::function<double(double)> cdf;
  std::optional<LimitLaw> law;
  if (lp.a == 0.0 && lp.b == 0.0) {
    cdf = [](double x) { return x >= 0.0 ? 1.0 : 0.0; };
  } else {
    law = make_limit_law(lp);
    cdf = [&law](double x) { return law_cdf(*law, x); };
  }
  // same law with p^ell / ell! replaced by C(p, ell)
  const double N = static_cast<double>(binomial(reg.p, reg.ell)) * factorial(reg.ell);
  LimitLawParams fp = lp;
  fp.gamma = reg.n / N;
  fp.a = lp.a * std::sqrt(N / std::pow(static_cast<double>(reg.p), reg.ell));
  std::optional<LimitLaw> law_fp;
  if (law) law_fp = make_limit_law(fp);
  const double tol = cfg.tolerance > 0 ? cfg.tolerance : 0.06;
  const auto low = low_coeffs(kernel, reg.ell, reg.p, cfg.dist);

  struct Out {
    TrialRecord rec;
    Eigen::VectorXd eig;
    double ks_fp = 0.0;
  };
  std::function<Out(int)> body = [&](int t) {
    Out o;
    o.rec.index = t;
    o.rec.seed = trial_seed(cfg.master_seed, t);
    const DataMatrix X = sample_X(reg, cfg.dist, o.rec.seed);
    o.eig = symmetric_eigenvalues(kernel_for_trial(cfg, kernel, X.entries, low), 1e-9);
    o.rec.ks = ks_distance(o.eig, cdf);
    o.ks_fp = law_fp ? ks_distance(o.eig, [&](double x) { return law_cdf(*law_fp, x); }) : *o.rec.ks;
    o.rec.lambda_min = o.eig(0);
    o.rec.lambda_max = o.eig(o.eig.size() - 1);
    return o;
  };
  auto outs = run_trials<Out>(cfg.trials, body, cfg.threads);

  ExperimentResult r;
  r.experiment = "bulk";
  r.config = cfg;
  r.parameters = regime_json(cfg);
  r.parameters["kernel"] = kernel.name;
  r.parameters["a"] = ex.a;
  r.parameters["b"] = ex.b;
  r.parameters["tolerance"] = tol;
  r.parameters["finite_p_gamma"] = fp.gamma;
  r.parameters["finite_p_a"] = fp.a;
  std::vector<double> ks, ks_fp;
  for (auto& o : outs) {
    ks.push_back(*o.rec.ks);
    ks_fp.push_back(o.ks_fp);
    r.trials.push_back(o.rec);
  }
  if (cfg.keep_spectrum) r.spectrum = outs.front().eig;
  Statistic s = summarize("ks", ks);
  s.tolerance = tol;
  s.rule = "mean KS distance below tolerance";
  s.pass = s.mean < tol;
  Statistic f = summarize("ks_finite_p", ks_fp);
  f.tolerance = tol;
  f.rule = "mean KS distance to the law with p^ell/ell! replaced by C(p,ell)";
  f.pass = f.mean < tol;
  f.informational = true;
  r.stats = {s, f};
  return r;
}

ExperimentResult run_wigner_control(int n, int trials, std::uint64_t seed, double tolerance, int threads) {
  ExperimentConfig cfg;
  cfg.regime = ScalingRegime::make(n, 1, 1);
  cfg.trials = trials;
  cfg.master_seed = seed;
  cfg.tolerance = tolerance;
  cfg.threads = threads;
  struct Out {
    TrialRecord rec;
    Eigen::VectorXd eig;
  };
  std::function<Out(int)> body = [&](int t) {
    Out o;
    o.rec.index = t;
    o.rec.seed = trial_seed(seed, t);
    o.eig = symmetric_eigenvalues(sample_M(cfg.regime, 0.0, 1.0, o.rec.seed), 1e-9);
    o.rec.ks = ks_distance(o.eig, semicircle_cdf);
    o.rec.lambda_min = o.eig(0);
    o.rec.lambda_max = o.eig(o.eig.size() - 1);
    return o;
  };
  auto outs = run_trials<Out>(trials, body, threads);
  ExperimentResult r;
  r.experiment = "wigner-control";
  r.config = cfg;
  r.parameters = {{"n", n}, {"trials", trials}, {"seed", seed}, {"tolerance", tolerance}};
  std::vector<double> ks;
  for (auto& o : outs) {
    ks.push_back(*o.rec.ks);
    r.trials.push_back(o.rec);
  }
  r.spectrum = outs.front().eig;
  Statistic s = summarize("ks", ks);
  s.tolerance = tolerance;
  s.rule = "mean KS distance below tolerance";
  s.pass = s.mean < tolerance;
  r.stats = {s};
  return r;
}

ConditioningBounds conditioning_bounds(int d, double epsilon, int p) {
  if (d < 1 || p < d) throw std::invalid_argument("conditioning needs 1 <= d <= p");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("conditioning needs 0 < epsilon < 1");
  ConditioningBounds b;
  const double fd = factorial(d);
  b.n = static_cast<int>(std::floor((1.0 - epsilon) * std::pow(static_cast<double>(p), d) / fd));
  if (b.n < 1) throw std::invalid_argument("conditioning: n = floor((1-eps) p^d / d!) is zero");
  const double s = std::sqrt(1.0 - epsilon);
  b.spec_bound = std::sqrt(fd) * (s - 2.0 + 1.0 / s);
  b.limit_value = fd * std::pow(1.0 - 1.0 / s, 2);
  return b;
}

ExperimentResult run_conditioning_experiment(int d, double epsilon, int p, const EntryDistribution& dist,
                                             int trials, std::uint64_t seed, int threads) {
  const ConditioningBounds bounds = conditioning_bounds(d, epsilon, p);
  ExperimentConfig cfg;
  cfg.regime = ScalingRegime::make(bounds.n, p, d);
  cfg.dist = dist;
  cfg.d = d;
  cfg.trials = trials;
  cfg.master_seed = seed;
  cfg.threads = threads;
  const double fd = factorial(d);

  std::function<TrialRecord(int)> body = [&](int t) {
    TrialRecord rec;
    rec.index = t;
    rec.seed = trial_seed(seed, t);
    const DataMatrix X = sample_X(cfg.regime, dist, rec.seed);
    const Matrix Xd = build_Xd(X.entries, d);
    check_budget("Y Y^T", 8.0 * bounds.n * bounds.n);
    Matrix G = Matrix::Zero(bounds.n, bounds.n);
    G.selfadjointView<Eigen::Lower>().rankUpdate(Xd, fd);
    G = G.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd eig = symmetric_eigenvalues(G, 1e-9);
    rec.lambda_min = eig(0);
    rec.lambda_max = eig(eig.size() - 1);
    rec.value = eig(0) / bounds.n;
    return rec;
  };
  ExperimentResult r;
  r.experiment = "conditioning";
  r.config = cfg;
  r.trials = run_trials<TrialRecord>(trials, body, threads);
  r.parameters = regime_json(cfg);
  r.parameters["d"] = d;
  r.parameters["epsilon"] = epsilon;
  r.parameters["lower_bound"] = bounds.spec_bound;
  r.parameters["limit_value"] = bounds.limit_value;
  std::vector<double> vals, mins;
  for (const auto& t : r.trials) {
    vals.push_back(*t.value);
    mins.push_back(*t.lambda_min);
  }
  Statistic s = summarize("lambda_min_over_n", vals);
  s.target = bounds.spec_bound;
  const long long above = std::count_if(vals.begin(), vals.end(), [&](double v) { return v > bounds.spec_bound; });
  const long long need = (9LL * trials + 9) / 10;
  s.rule = "value exceeds lower bound in at least 9/10 of trials";
  s.pass = above >= need;
  Statistic f = summarize("lambda_min", mins);
  f.rule = "positive in every trial";
  f.pass = std::all_of(mins.begin(), mins.end(), [](double v) { return v > 0.0; });
  r.stats = {s, f};
  return r;
}

}  // namespace kspec
