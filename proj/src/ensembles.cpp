#include "kspec/ensembles.hpp"

#include <atomic>
#include <cmath>
#include <random>

namespace kspec {

namespace {

std::atomic<std::size_t> g_budget{std::size_t{2} << 30};

double factorial(int d) { return std::tgamma(d + 1.0); }

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::size_t memory_budget() { return g_budget.load(); }
void set_memory_budget(std::size_t bytes) { g_budget.store(bytes); }

void check_budget(const std::string& what, double bytes) {
  double allowed = static_cast<double>(memory_budget());
  if (bytes > allowed) throw BudgetExceeded(what + " exceeds memory budget", bytes, allowed);
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long double approx = 1.0L;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    approx = approx * (n - k + i) / i;
    if (approx > 4.0e18L) throw BudgetExceeded("binomial coefficient overflows", static_cast<double>(approx), 4.0e18);
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

ScalingRegime ScalingRegime::make(int n, int p, int ell) {
  require(n >= 1 && p >= 1 && ell >= 1, "regime needs n, p, ell >= 1");
  ScalingRegime r;
  r.n = n;
  r.p = p;
  r.ell = ell;
  r.gamma = n / std::pow(static_cast<double>(p), ell);
  return r;
}

std::string to_string(DistTag tag) {
  switch (tag) {
    case DistTag::Rademacher: return "rademacher";
    case DistTag::Gaussian: return "gaussian";
    case DistTag::Custom: return "custom";
  }
  return "?";
}

DistTag parse_dist(const std::string& s) {
  if (s == "rademacher" || s == "bernoulli") return DistTag::Rademacher;
  if (s == "gaussian") return DistTag::Gaussian;
  throw std::invalid_argument("unknown entry distribution: " + s);
}

DataMatrix sample_X(const ScalingRegime& regime, const EntryDistribution& dist, std::uint64_t seed) {
  check_budget("data matrix", 8.0 * regime.n * regime.p);
  DataMatrix out;
  out.regime = regime;
  out.dist = dist;
  out.seed = seed;
  out.entries.resize(regime.n, regime.p);
  Stream rng(seed, 0, Role::Data);
  std::normal_distribution<double> normal;
  for (int i = 0; i < regime.n; ++i)
    for (int j = 0; j < regime.p; ++j) {
      switch (dist.tag) {
        case DistTag::Rademacher: out.entries(i, j) = rng.sign(); break;
        case DistTag::Gaussian: out.entries(i, j) = normal(rng); break;
        case DistTag::Custom:
          require(static_cast<bool>(dist.sampler), "custom distribution without sampler");
          out.entries(i, j) = dist.sampler(rng);
          break;
      }
    }
  return out;
}

Matrix kernel_matrix(const Matrix& X, const KernelSpec& kernel) {
  const Eigen::Index n = X.rows();
  check_budget("kernel matrix", 8.0 * n * n);
  const double sp = std::sqrt(static_cast<double>(X.cols()));
  const double sn = std::sqrt(static_cast<double>(n));
  Matrix G = X * X.transpose();
  Matrix K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = kernel.eval(G(i, j) / sp) / sn;
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Matrix kernel_matrix(const DataMatrix& X, const KernelSpec& kernel) { return kernel_matrix(X.entries, kernel); }

std::vector<std::vector<int>> sorted_subsets(int p, int d) {
  std::vector<std::vector<int>> out;
  if (d < 0 || d > p) return out;
  std::vector<int> s(d);
  for (int i = 0; i < d; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    int i = d - 1;
    while (i >= 0 && s[i] == p - d + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < d; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

Matrix build_Xd(const Matrix& X, int d) {
  const int p = static_cast<int>(X.cols());
  const Eigen::Index n = X.rows();
  require(d >= 0 && d <= p, "build_Xd needs 0 <= d <= p");
  const std::uint64_t cols = binomial(p, d);
  check_budget("X_d", 8.0 * n * static_cast<double>(cols));
  Matrix Xd(n, static_cast<Eigen::Index>(cols));
  auto subsets = sorted_subsets(p, d);
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    auto col = Xd.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (int k : subsets[j]) col.array() *= X.col(k).array();
  }
  return Xd;
}

Matrix tensor_matrix(const Matrix& X, int d) {
  Matrix Xd = build_Xd(X, d);
  check_budget("R_d", 8.0 * X.rows() * X.rows());
  const double s = std::sqrt(X.rows() * std::pow(static_cast<double>(X.cols()), d));
  Matrix R = Matrix::Zero(X.rows(), X.rows());
  R.selfadjointView<Eigen::Lower>().rankUpdate(Xd, 1.0 / s);
  return R.selfadjointView<Eigen::Lower>();
}

Matrix tensor_matrix_T(const Matrix& X, int d) {
  Matrix Xd = build_Xd(X, d);
  check_budget("Rbar_d", 8.0 * Xd.cols() * Xd.cols());
  const double s = std::sqrt(X.rows() * std::pow(static_cast<double>(X.cols()), d));
  Matrix R = Matrix::Zero(Xd.cols(), Xd.cols());
  R.selfadjointView<Eigen::Lower>().rankUpdate(Xd.transpose(), 1.0 / s);
  return R.selfadjointView<Eigen::Lower>();
}

Matrix offdiag(const Matrix& M) {
  Matrix out = M;
  out.diagonal().setZero();
  return out;
}

namespace {

double nb_scale(int n, int p, int d, int L) {
  return std::pow(factorial(d), L / 2.0) / std::sqrt(std::pow(static_cast<double>(n), L) * std::pow(static_cast<double>(p), d * L));
}

Matrix nb_exact(const Matrix& Y, int n, int p, int d, int L) {
  const Eigen::Index C = Y.cols();
  Matrix T(C, C);
  Matrix old(n, C), S(n, C);
  for (Eigen::Index i = 0; i < C; ++i) {
    old = Y.array().colwise() * Y.col(i).array();
    old.col(i).setZero();
    for (int r = 2; r <= L; ++r) {
      Eigen::RowVectorXd colsum = old.colwise().sum();
      S = (-old).rowwise() + colsum;
      Eigen::VectorXd g = Y.cwiseProduct(S).rowwise().sum();
      old = Y.cwiseProduct((-Y.cwiseProduct(S)).colwise() + g);
    }
    T.row(i) = old.colwise().sum();
  }
  return nb_scale(n, p, d, L) * T;
}

}  // namespace

NbResult nonbacktracking_matrix(const Matrix& X, int d, int L, NbMode mode) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  require(d >= 1 && d <= p, "nonbacktracking_matrix needs 1 <= d <= p");
  require(L >= 0, "L must be >= 0");
  const double C = static_cast<double>(binomial(p, d));
  check_budget("T_d(L)", 8.0 * C * C * 3 + 8.0 * n * C * 3);
  NbResult res;
  if (L == 0) {
    res.T = Matrix::Identity(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(C));
    return res;
  }
  Matrix Y = build_Xd(X, d);
  Matrix T1 = Matrix::Zero(Y.cols(), Y.cols());
  T1.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose(), 1.0);
  T1 = T1.selfadjointView<Eigen::Lower>();
  T1.diagonal().setZero();
  T1 *= nb_scale(n, p, d, 1);
  if (L == 1) {
    res.T = T1;
    return res;
  }
  const double ops = C * C * n * L * 6.0;
  if (mode == NbMode::Auto) mode = ops <= 4e9 ? NbMode::Exact : NbMode::Recurrence;
  if (mode == NbMode::Exact) {
    res.T = nb_exact(Y, n, p, d, L);
    return res;
  }
  const double c = std::sqrt(std::pow(static_cast<double>(p), d) / n) / std::sqrt(factorial(d));
  Matrix prev = Matrix::Identity(T1.rows(), T1.cols());
  Matrix cur = T1;
  for (int l = 1; l < L; ++l) {
    Matrix next = T1 * cur - c * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  res.T = cur;
  res.approximate = true;
  return res;
}

Matrix nonbacktracking_bruteforce(const Matrix& X, int d, int L) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  Matrix Y = build_Xd(X, d);
  const int C = static_cast<int>(Y.cols());
  if (L == 0) return Matrix::Identity(C, C);
  Matrix T = Matrix::Zero(C, C);
  std::vector<int> u(L), k(L + 1);
  // iterate over all (u_1..u_L, k_1..k_L) with k_0 = i
  std::function<void(int, double)> rec = [&](int r, double w) {
    if (r > L) {
      T(k[0], k[L]) += w;
      return;
    }
    for (int uu = 0; uu < n; ++uu) {
      if (r >= 2 && uu == u[r - 2]) continue;
      for (int kk = 0; kk < C; ++kk) {
        if (kk == k[r - 1]) continue;
        u[r - 1] = uu;
        k[r] = kk;
        rec(r + 1, w * Y(uu, k[r - 1]) * Y(uu, kk));
      }
    }
  };
  for (int i = 0; i < C; ++i) {
    k[0] = i;
    rec(1, 1.0);
  }
  return nb_scale(n, p, d, L) * T;
}

AbcResult abc_decomposition(const Matrix& X, const std::vector<double>& coeffs, int ell, int L1,
                            const KernelSpec* kernel) {
  const Eigen::Index n = X.rows();
  const int p = static_cast<int>(X.cols());
  require(ell >= 1 && L1 >= ell, "abc_decomposition needs 1 <= ell <= L1");
  require(L1 <= p, "abc_decomposition needs L1 <= p");
  check_budget("A/B/C matrices", 8.0 * n * n * 4);
  AbcResult r{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  const int top = kernel ? L1 : std::min<int>(p, static_cast<int>(coeffs.size()) - 1);
  for (int d = 0; d <= top && d < static_cast<int>(coeffs.size()); ++d) {
    if (coeffs[d] == 0.0) continue;
    Matrix term = d == 0 ? Matrix::Constant(n, n, 1.0 / std::sqrt(static_cast<double>(n))) : tensor_matrix(X, d);
    term.diagonal().setZero();
    term *= coeffs[d] * std::sqrt(factorial(d));
    if (d < ell) r.A += term;
    else if (d <= L1) r.B += term;
    else r.C += term;
  }
  if (kernel) r.C = kernel_matrix(X, *kernel) - r.A - r.B;
  return r;
}

Matrix sample_goe(int n, Stream& rng) {
  std::normal_distribution<double> normal;
  Matrix W(n, n);
  for (int j = 0; j < n; ++j) {
    W(j, j) = std::sqrt(2.0) * normal(rng);
    for (int i = j + 1; i < n; ++i) {
      double v = normal(rng);
      W(i, j) = v;
      W(j, i) = v;
    }
  }
  return W;
}

Matrix sample_M(const ScalingRegime& regime, double a, double b, std::uint64_t seed) {
  require(b >= 0.0, "sample_M needs b >= 0");
  const int n = regime.n, p = regime.p, ell = regime.ell;
  check_budget("M", 8.0 * n * n * 2);
  Matrix M = Matrix::Zero(n, n);
  if (a != 0.0) {
    const double C = static_cast<double>(binomial(p, ell));
    check_budget("Z", 8.0 * n * C);
    Stream rng(seed, 0, Role::Gaussian);
    std::normal_distribution<double> normal;
    Matrix Z(n, static_cast<Eigen::Index>(C));
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
      for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = normal(rng);
    const double s = a * std::sqrt(factorial(ell)) / std::sqrt(n * std::pow(static_cast<double>(p), ell));
    M.selfadjointView<Eigen::Lower>().rankUpdate(Z, s);
    M = M.selfadjointView<Eigen::Lower>();
    M.diagonal().array() -= s * C;
  }
  if (b != 0.0) {
    Stream rng(seed, 0, Role::Wigner);
    M += std::sqrt(b / n) * sample_goe(n, rng);
  }
  return M;
}

}  // namespace kspec
