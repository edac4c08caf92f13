#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kspec/ensembles.hpp"
#include "kspec/hermite.hpp"

namespace kspec {

struct NotSymmetric : std::invalid_argument {
  NotSymmetric(const std::string& what, double asymmetry) : std::invalid_argument(what), asymmetry(asymmetry) {}
  double asymmetry;
};

// Ascending eigenvalues of a symmetric matrix (dense solver).
Eigen::VectorXd symmetric_eigenvalues(const Matrix& M, double sym_tol = 1e-10);

struct Extremes {
  double lambda_min = 0.0;
  double lambda_k1 = 0.0;  // (k+1)-th smallest
  double lambda_max = 0.0;
};

Extremes extremal_eigs(const Matrix& M, int k);
Extremes extremal_from_sorted(const Eigen::VectorXd& eig, int k);

// Relative reconstruction error |M - Q diag Q^T| / |M|.
double eigen_reconstruction_error(const Matrix& M);

// Kolmogorov-Smirnov distance between the empirical law of `sorted` and cdf.
double ks_distance(const Eigen::VectorXd& sorted, const std::function<double(double)>& cdf);

// Worker count: KERNEL_SPECTRA_THREADS if set, else hardware concurrency.
int worker_count();

// Runs body(t) for t in [0, trials) on a pool; results come back in trial order.
template <class T>
std::vector<T> run_trials(int trials, const std::function<T(int)>& body, int threads = 0);

double trimmed_mean(std::vector<double> v);
double default_tolerance(int n, double c = 1.0);

std::uint64_t trial_seed(std::uint64_t master, int trial);

struct ExperimentConfig {
  ScalingRegime regime;
  EntryDistribution dist;
  std::string kernel;  // kernel spec string, when the experiment needs one
  int d = 1;
  int trials = 10;
  std::uint64_t master_seed = 0;
  double tolerance = 0.0;  // 0: default_tolerance(n)
  int threads = 0;         // 0: worker_count()
  bool subtract_low = false;  // kernel-norm: remove degrees below ell first
  bool keep_spectrum = true;  // first trial spectrum for CSV dumps
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::optional<double> lambda_min, lambda_k1, lambda_max, norm, ks, value;
  std::optional<long long> k;
};

struct Statistic {
  std::string name;
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;
  double trimmed = 0.0;
  std::optional<double> target;
  double tolerance = 0.0;
  std::string rule;
  bool pass = true;
  bool informational = false;  // reported, not part of pass()
};

Statistic summarize(const std::string& name, std::vector<double> values);

struct ExperimentResult {
  std::string experiment;
  ExperimentConfig config;
  nlohmann::json parameters;
  std::vector<TrialRecord> trials;
  std::vector<Statistic> stats;
  Eigen::VectorXd spectrum;  // first trial, ascending
  bool pass() const;
  const Statistic& stat(const std::string& name) const;
};

nlohmann::json to_json(const ExperimentResult& r);

// Extremal statistics of R_d (d < ell) or R_d - diag R_d (d >= ell).
ExperimentResult run_tensor_experiment(const ExperimentConfig& cfg);

// |K| (or |K - sum_{d<ell} terms|) against the limit-law edge.
ExperimentResult run_kernel_norm_experiment(const ExperimentConfig& cfg);

// KS distance between the ESD of K and the limit law.
ExperimentResult run_bulk_experiment(const ExperimentConfig& cfg);

// KS distance of sample_M(a = 0, b = 1) to the semicircle.
ExperimentResult run_wigner_control(int n, int trials, std::uint64_t seed, double tolerance = 0.05, int threads = 0);

struct ConditioningBounds {
  int n = 0;
  double spec_bound = 0.0;   // sqrt(d!)(sqrt(1-eps) - 2 + 1/sqrt(1-eps))
  double limit_value = 0.0;  // d!(1 - 1/sqrt(1-eps))^2
};

ConditioningBounds conditioning_bounds(int d, double epsilon, int p);

ExperimentResult run_conditioning_experiment(int d, double epsilon, int p, const EntryDistribution& dist,
                                             int trials, std::uint64_t seed, int threads = 0);

}  // namespace kspec

#include "kspec/harness_impl.hpp"
