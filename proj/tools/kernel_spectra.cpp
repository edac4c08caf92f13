#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kspec/ensembles.hpp"
#include "kspec/graphcomb.hpp"
#include "kspec/harness.hpp"
#include "kspec/hermite.hpp"
#include "kspec/limitlaw.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kspec;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<char> buf(1 << 16);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

// 0.5 -> 0p5, -1 -> m1
std::string tag(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  std::string s = os.str();
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
    if (c == '+') c = 'P';
  }
  return s;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '-';
  return s;
}

// Serialised writer for everything that lands under --out.
class Output {
 public:
  void open(const std::string& dir) {
    dir_ = dir;
    fs::create_directories(dir_);
  }
  fs::path write_text(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
    files_.push_back(p);
    return p;
  }
  fs::path write_json(const std::string& name, const json& j) { return write_text(name, j.dump(2) + "\n"); }
  void manifest(const std::string& stem, const std::string& sub, const std::string& config, const json& params,
                std::uint64_t seed) {
    json m;
    m["schema"] = "v1";
    m["subcommand"] = sub;
    m["config"] = config.empty() ? json(nullptr) : json(config);
    m["parameters"] = params;
    m["seed"] = seed;
    m["out"] = dir_.string();
    json arts = json::array();
    for (const auto& p : files_) arts.push_back({{"file", p.filename().string()}, {"sha256", sha256_file(p)}});
    m["artifacts"] = arts;
    std::ofstream f(dir_ / ("manifest_" + stem + ".json"), std::ios::binary);
    f << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

std::string csv_spectrum(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << std::setprecision(17) << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << i << "," << v(i) << "\n";
  return os.str();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number in list: " + item);
    }
  }
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "out";
  double budget_gib = 2.0;
  std::string config;
};

struct ExpandOpts {
  std::string kernel;
  int ell = 1;
  int D = 8;
  int p = 0;
  int nodes = 200;
};

struct LawOpts {
  double a = 0.0, b = 0.0, gamma = 1.0;
  int ell = 1;
  int points = 2001;
  std::string convention = "variance";
};

struct SimOpts {
  int n = 0, p = 48, ell = 2, d = 2, trials = 10, threads = 0;
  double gamma = 0.0, tolerance = 0.0, epsilon = 0.5;
  std::string dist = "rademacher", kernel;
  bool subtract_low = false, control = false;
};

struct CombOpts {
  int L = 3, n_max = 3, p_max = 3, ell = 1, L1 = 2, d = 1;
  std::string flavor = "all";
  double max_candidates = 2e8;
};

struct OracleOpts {
  int n = 2, p = 2, L = 2, ell = 1, L1 = 1, d = 1, L_inner = 1;
  std::string kind = "B", coeffs = "0,1";
};

int cmd_expand(const ExpandOpts& o, const Globals& g, Output& out) {
  const KernelSpec k = parse_kernel(o.kernel);
  QuadOptions q;
  q.nodes = o.nodes;
  const HermiteExpansion ex = expand(k, o.ell, o.D, q);
  const BoundReport br = coeff_bound_check(ex, k);
  json j;
  j["schema"] = "v1";
  j["kernel"] = k.name;
  j["ell"] = o.ell;
  j["D"] = o.D;
  j["a"] = ex.a;
  j["b"] = ex.b;
  j["second_moment"] = ex.second_moment;
  j["b_clamped"] = ex.b_clamped;
  j["alpha_below_inv_e"] = br.alpha_below_inv_e;
  json rows = json::array();
  std::cout << std::left << std::setw(4) << "d" << std::setw(24) << "a_d (gaussian)";
  if (o.p > 0) std::cout << std::setw(24) << "c_d(p)/sqrt(d!)";
  std::cout << std::setw(16) << "bound" << "status\n";
  for (int d = 0; d <= o.D; ++d) {
    const auto& be = br.entries[d];
    json r{{"d", d}, {"gaussian", ex.coeffs[d]}, {"bound", be.bound}, {"bound_applies", be.applies},
           {"bound_pass", be.pass}};
    std::cout << std::setw(4) << d << std::setw(24) << std::setprecision(12) << ex.coeffs[d];
    if (o.p > 0) {
      double c = 0.0;
      if (d <= o.p)
        c = (k.polynomial_degree ? boolean_cube_coeff_exact(k, d, o.p).convert_to<double>()
                                 : boolean_cube_coeff(k, d, o.p)) /
            std::sqrt(std::tgamma(d + 1.0));
      r["boolean"] = c;
      std::cout << std::setw(24) << c;
    }
    std::cout << std::setw(16) << std::setprecision(6) << be.bound
              << (be.applies ? (be.pass ? "ok" : "VIOLATED") : "n/a") << "\n";
    rows.push_back(r);
  }
  j["coefficients"] = rows;
  if (o.p > 0) j["p"] = o.p;
  std::cout << std::setprecision(12) << "a = " << ex.a << "\nb = " << ex.b << "\n";
  const std::string stem = "expand_" + sanitize(o.kernel) + "_ell" + std::to_string(o.ell) + "_D" + std::to_string(o.D) +
                           (o.p > 0 ? "_p" + std::to_string(o.p) : "");
  out.write_json(stem + ".json", j);
  out.manifest(stem, "expand", g.config, j, g.seed);
  return 0;
}

int cmd_limitlaw(const LawOpts& o, const Globals& g, Output& out) {
  if (!(o.b >= 0.0)) throw UsageError("--b must be >= 0");
  if (!(o.gamma > 0.0)) throw UsageError("--gamma must be > 0");
  if (o.ell < 1) throw UsageError("--ell must be >= 1");
  LimitLawParams lp;
  lp.a = o.a;
  lp.b = o.b;
  lp.gamma = o.gamma;
  lp.ell = o.ell;
  if (o.convention == "variance") lp.convention = Convention::Variance;
  else if (o.convention == "squared") lp.convention = Convention::SquaredTail;
  else throw UsageError("--convention must be variance or squared");
  const LimitLaw law = make_limit_law(lp, o.points);
  json j;
  j["schema"] = "v1";
  j["params"] = {{"a", o.a}, {"b", o.b}, {"gamma", o.gamma}, {"ell", o.ell}, {"convention", o.convention}};
  j["edge"] = law.edge;
  json sup = json::array();
  for (const auto& iv : law.support) sup.push_back({iv.lo, iv.hi});
  j["support"] = sup;
  j["atom"] = law.atom ? json{{"location", law.atom->location}, {"weight", law.atom->weight}} : json(nullptr);
  j["grid_mass"] = grid_mass(law);
  const std::string stem = "limitlaw_a" + tag(o.a) + "_b" + tag(o.b) + "_gamma" + tag(o.gamma) + "_ell" +
                           std::to_string(o.ell);
  std::ostringstream csv;
  csv << std::setprecision(17) << "E,density\n";
  for (const auto& [E, rho] : law.grid) csv << E << "," << rho << "\n";
  out.write_json(stem + ".json", j);
  out.write_text(stem + "_density.csv", csv.str());
  out.manifest(stem, "limitlaw", g.config, j, g.seed);
  std::cout << std::setprecision(10) << "edge = " << law.edge << "\n";
  return 0;
}

EntryDistribution dist_of(const std::string& name) {
  DistTag t;
  try {
    t = parse_dist(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (t == DistTag::Rademacher) return EntryDistribution::rademacher();
  if (t == DistTag::Gaussian) return EntryDistribution::gaussian();
  throw UsageError("--dist must be rademacher or gaussian");
}

ExperimentConfig sim_config(const SimOpts& o, const Globals& g, bool need_kernel) {
  if (o.p < 1 || o.ell < 1 || o.trials < 1) throw UsageError("--p, --ell, --trials must be >= 1");
  int n = o.n;
  if (n <= 0) {
    if (!(o.gamma > 0.0)) throw UsageError("give --n or --gamma");
    n = static_cast<int>(std::lround(o.gamma * std::pow(static_cast<double>(o.p), o.ell)));
  }
  if (n < 1) throw UsageError("n must be >= 1");
  if (need_kernel && o.kernel.empty()) throw UsageError("--kernel is required");
  ExperimentConfig cfg;
  cfg.regime = ScalingRegime::make(n, o.p, o.ell);
  cfg.dist = dist_of(o.dist);
  cfg.kernel = o.kernel;
  cfg.d = o.d;
  cfg.trials = o.trials;
  cfg.master_seed = g.seed;
  cfg.tolerance = o.tolerance;
  cfg.threads = o.threads;
  cfg.subtract_low = o.subtract_low;
  return cfg;
}

void print_result(const ExperimentResult& r) {
  for (const auto& s : r.stats) {
    std::cout << std::left << std::setw(20) << s.name << " mean " << std::setw(12) << std::setprecision(6) << s.mean
              << " trimmed " << std::setw(12) << s.trimmed;
    if (s.target) std::cout << " target " << std::setw(12) << *s.target;
    std::cout << (s.informational ? " info" : (s.pass ? " PASS" : " FAIL")) << "\n";
  }
}

int cmd_simulate(const std::string& kind, const SimOpts& o, const Globals& g, Output& out) {
  ExperimentResult r;
  std::string stem;
  if (kind == "conditioning") {
    r = run_conditioning_experiment(o.d, o.epsilon, o.p, dist_of(o.dist), o.trials, g.seed, o.threads);
    stem = "simulate-conditioning_seed" + std::to_string(g.seed) + "_d" + std::to_string(o.d) + "_eps" +
           tag(o.epsilon) + "_p" + std::to_string(o.p);
  } else {
    const ExperimentConfig cfg = sim_config(o, g, kind != "tensor");
    if (kind == "tensor") r = run_tensor_experiment(cfg);
    else if (kind == "kernel-norm") r = run_kernel_norm_experiment(cfg);
    else r = run_bulk_experiment(cfg);
    stem = "simulate-" + kind + "_seed" + std::to_string(g.seed) + "_n" + std::to_string(cfg.regime.n) + "_p" +
           std::to_string(cfg.regime.p) + "_ell" + std::to_string(cfg.regime.ell) +
           (kind == "tensor" ? "_d" + std::to_string(cfg.d) : "_" + sanitize(cfg.kernel)) + "_" + o.dist;
  }
  json j = to_json(r);
  if (kind == "bulk" && o.control) {
    const auto w = run_wigner_control(r.config.regime.n, o.trials, g.seed, 0.05, o.threads);
    j["wigner_control"] = to_json(w);
    print_result(w);
  }
  print_result(r);
  out.write_json(stem + ".json", j);
  if (r.spectrum.size() > 0) out.write_text(stem + "_spectrum.csv", csv_spectrum(r.spectrum));
  out.manifest(stem, "simulate " + kind, g.config, j["parameters"], g.seed);
  return 0;
}

std::vector<Flavor> flavors_of(const std::string& s) {
  if (s == "all") return {Flavor::Multi, Flavor::Simple, Flavor::Nonbacktracking};
  try {
    return {parse_flavor(s)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_verify_comb(const CombOpts& o, const Globals& g, Output& out) {
  json j;
  j["schema"] = "v1";
  j["params"] = {{"L", o.L}, {"n_max", o.n_max}, {"p_max", o.p_max}, {"ell", o.ell}, {"L1", o.L1},
                 {"d", o.d},  {"flavor", o.flavor}};
  json reports = json::array();
  long long total = 0;
  std::cout << std::left << std::setw(18) << "flavor" << std::setw(28) << "lemma" << std::setw(12) << "instances"
            << "violations\n";
  for (Flavor f : flavors_of(o.flavor)) {
    EnumSpec s;
    s.L = o.L;
    s.n_max = o.n_max;
    s.p_max = o.p_max;
    s.ell = o.ell;
    s.L1 = o.L1;
    s.flavor = f;
    s.d = o.d;
    s.max_candidates = o.max_candidates;
    if (f == Flavor::Nonbacktracking && o.d > o.ell) continue;
    const Certification c = certify(s);
    total += c.total_violations();
    for (const auto& e : c.entries) {
      reports.push_back({{"flavor", to_string(f)},
                         {"lemma", e.name},
                         {"instances_checked", e.instances},
                         {"violation_count", e.violations},
                         {"informational", e.informational},
                         {"violations", e.examples}});
      std::cout << std::setw(18) << to_string(f) << std::setw(28) << e.name << std::setw(12) << e.instances
                << e.violations << (e.informational ? " (info)" : "") << "\n";
    }
    std::cout << std::setw(18) << to_string(f) << std::setw(28) << "(labelings enumerated)" << c.labelings << "\n";
    json cnt{{"flavor", to_string(f)}, {"labelings", c.labelings}};
    j["labelings"].push_back(cnt);
  }
  j["reports"] = reports;
  j["total_violations"] = total;
  std::cout << "total violations: " << total << "\n";
  const std::string stem = "verify-comb_L" + std::to_string(o.L) + "_n" + std::to_string(o.n_max) + "_p" +
                           std::to_string(o.p_max) + "_ell" + std::to_string(o.ell) + "_L1" + std::to_string(o.L1) +
                           "_" + o.flavor + "_d" + std::to_string(o.d);
  out.write_json(stem + ".json", j);
  out.manifest(stem, "verify-comb", g.config, j["params"], g.seed);
  return 0;
}

int cmd_oracle(const OracleOpts& o, const Globals& g, Output& out) {
  OracleOptions opt;
  opt.ell = o.ell;
  opt.L1 = o.L1;
  opt.d = o.d;
  opt.L_inner = o.L_inner;
  opt.coeffs = parse_list(o.coeffs);
  OracleKind kind;
  if (o.kind == "B") kind = OracleKind::B;
  else if (o.kind == "rd") kind = OracleKind::RdOffdiag;
  else if (o.kind == "td") kind = OracleKind::Td;
  else throw UsageError("--kind must be B, rd or td");
  const OracleResult r = oracle_moment(o.n, o.p, o.L, kind, opt);
  json j;
  j["schema"] = "v1";
  j["params"] = {{"n", o.n}, {"p", o.p}, {"L", o.L}, {"kind", o.kind}, {"ell", o.ell}, {"L1", o.L1},
                 {"d", o.d}, {"L_inner", o.L_inner}, {"coeffs", opt.coeffs}};
  j["assignments"] = r.assignments;
  j["value"] = r.value;
  std::cout << std::setprecision(17) << "oracle = " << r.value << "\n";
  if (kind == OracleKind::B && o.L > 0) {
    const MomentSum ms = moment_graph_sum(o.n, o.p, o.ell, o.L1, o.L, opt.coeffs);
    bool equal = true;
    json seqs = json::array();
    for (const auto& [seq, q] : r.exact) {
      auto it = ms.counts.find(seq);
      const long long c = it == ms.counts.end() ? 0 : it->second;
      if (q != Rational(c)) equal = false;
      seqs.push_back({{"sizes", seq},
                      {"oracle", std::to_string(q.numerator()) + "/" + std::to_string(q.denominator())},
                      {"graph_count", c}});
    }
    for (const auto& [seq, c] : ms.counts)
      if (!r.exact.count(seq)) equal = false;
    j["graph_sum"] = ms.value;
    j["per_sequence"] = seqs;
    j["exact_match"] = equal;
    std::cout << "graph sum = " << ms.value << "\nexact match: " << (equal ? "yes" : "NO") << "\n";
  }
  const std::string stem = "oracle_" + o.kind + "_n" + std::to_string(o.n) + "_p" + std::to_string(o.p) + "_L" +
                           std::to_string(o.L);
  out.write_json(stem + ".json", j);
  out.manifest(stem, "oracle", g.config, j["params"], g.seed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of random inner-product kernel matrices: expansions, limit laws, simulation, combinatorics"};
  app.require_subcommand(1);
  Globals g;
  app.set_config("--config", "", "Flat key=value config file (flags override it)");
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--memory-budget", g.budget_gib, "Memory budget in GiB")->capture_default_str();

  ExpandOpts eo;
  auto* expand_cmd = app.add_subcommand("expand", "Hermite and Boolean coefficients of a kernel");
  expand_cmd->add_option("--kernel", eo.kernel, "monomial:d | hermite:k | sin[:alpha] | exp-clip[:alpha] | poly:c0,c1,...")
      ->required();
  expand_cmd->add_option("--ell", eo.ell)->capture_default_str();
  expand_cmd->add_option("--D", eo.D, "Highest degree")->capture_default_str();
  expand_cmd->add_option("--p", eo.p, "Also report Boolean coefficients at this p");
  expand_cmd->add_option("--nodes", eo.nodes, "Gauss-Hermite nodes")->capture_default_str();

  LawOpts lo;
  auto* law_cmd = app.add_subcommand("limitlaw", "Density and support of the limiting spectral law");
  law_cmd->add_option("--a", lo.a)->capture_default_str();
  law_cmd->add_option("--b", lo.b)->capture_default_str();
  law_cmd->add_option("--gamma", lo.gamma)->capture_default_str();
  law_cmd->add_option("--ell", lo.ell)->capture_default_str();
  law_cmd->add_option("--points", lo.points, "Density grid size")->capture_default_str();
  law_cmd->add_option("--convention", lo.convention, "variance | squared")->capture_default_str();

  SimOpts so;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiments");
  sim_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--n", so.n, "Rows (default round(gamma p^ell))");
    c->add_option("--p", so.p)->capture_default_str();
    c->add_option("--ell", so.ell)->capture_default_str();
    c->add_option("--gamma", so.gamma);
    c->add_option("--dist", so.dist, "rademacher | gaussian")->capture_default_str();
    c->add_option("--trials", so.trials)->capture_default_str();
    c->add_option("--tolerance", so.tolerance, "0 selects the default");
    c->add_option("--threads", so.threads, "0 uses KERNEL_SPECTRA_THREADS or all cores");
  };
  auto* tensor_cmd = sim_cmd->add_subcommand("tensor", "Extremal eigenvalues of R_d");
  add_common(tensor_cmd);
  tensor_cmd->add_option("--d", so.d)->capture_default_str();
  auto* knorm_cmd = sim_cmd->add_subcommand("kernel-norm", "Spectral norm of K against the limit-law edge");
  add_common(knorm_cmd);
  knorm_cmd->add_option("--kernel", so.kernel)->required();
  knorm_cmd->add_flag("--subtract-low", so.subtract_low, "Remove the degree < ell part first");
  auto* bulk_cmd = sim_cmd->add_subcommand("bulk", "KS distance of the ESD of K to the limit law");
  add_common(bulk_cmd);
  bulk_cmd->add_option("--kernel", so.kernel)->required();
  bulk_cmd->add_flag("--subtract-low", so.subtract_low);
  bulk_cmd->add_flag("--control", so.control, "Also run the Wigner control");
  auto* cond_cmd = sim_cmd->add_subcommand("conditioning", "Smallest eigenvalue of the distinct-index tensor Gram matrix");
  cond_cmd->add_option("--d", so.d)->capture_default_str();
  cond_cmd->add_option("--epsilon", so.epsilon)->capture_default_str();
  cond_cmd->add_option("--p", so.p)->capture_default_str();
  cond_cmd->add_option("--dist", so.dist)->capture_default_str();
  cond_cmd->add_option("--trials", so.trials)->capture_default_str();
  cond_cmd->add_option("--threads", so.threads);

  CombOpts co;
  auto* comb_cmd = app.add_subcommand("verify-comb", "Exhaustive check of the labeling inequalities");
  comb_cmd->add_option("--L", co.L)->capture_default_str();
  comb_cmd->add_option("--n-max", co.n_max)->capture_default_str();
  comb_cmd->add_option("--p-max", co.p_max)->capture_default_str();
  comb_cmd->add_option("--ell", co.ell)->capture_default_str();
  comb_cmd->add_option("--L1", co.L1)->capture_default_str();
  comb_cmd->add_option("--d", co.d, "Tuple size for the nonbacktracking flavor")->capture_default_str();
  comb_cmd->add_option("--flavor", co.flavor, "multi | simple | nonbacktracking | all")->capture_default_str();
  comb_cmd->add_option("--max-candidates", co.max_candidates)->capture_default_str();

  OracleOpts oo;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact E tr(M^L) by averaging over all sign matrices");
  oracle_cmd->add_option("--n", oo.n)->capture_default_str();
  oracle_cmd->add_option("--p", oo.p)->capture_default_str();
  oracle_cmd->add_option("--L", oo.L)->capture_default_str();
  oracle_cmd->add_option("--kind", oo.kind, "B | rd | td")->capture_default_str();
  oracle_cmd->add_option("--ell", oo.ell)->capture_default_str();
  oracle_cmd->add_option("--L1", oo.L1)->capture_default_str();
  oracle_cmd->add_option("--d", oo.d)->capture_default_str();
  oracle_cmd->add_option("--L-inner", oo.L_inner)->capture_default_str();
  oracle_cmd->add_option("--coeffs", oo.coeffs, "a_0,a_1,... for kind B")->capture_default_str();

  for (auto* c : {expand_cmd, law_cmd, sim_cmd, tensor_cmd, knorm_cmd, bulk_cmd, cond_cmd, comb_cmd, oracle_cmd})
    c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (auto* cfg = app.get_config_ptr(); cfg && cfg->count() > 0) g.config = cfg->as<std::string>();
    if (!(g.budget_gib > 0.0)) throw UsageError("--memory-budget must be positive");
    set_memory_budget(static_cast<std::size_t>(g.budget_gib * 1073741824.0));
    Output out;
    out.open(g.out);
    if (expand_cmd->parsed()) return cmd_expand(eo, g, out);
    if (law_cmd->parsed()) return cmd_limitlaw(lo, g, out);
    if (tensor_cmd->parsed()) return cmd_simulate("tensor", so, g, out);
    if (knorm_cmd->parsed()) return cmd_simulate("kernel-norm", so, g, out);
    if (bulk_cmd->parsed()) return cmd_simulate("bulk", so, g, out);
    if (cond_cmd->parsed()) return cmd_simulate("conditioning", so, g, out);
    if (comb_cmd->parsed()) return cmd_verify_comb(co, g, out);
    if (oracle_cmd->parsed()) return cmd_oracle(oo, g, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << " (requires " << e.required << " bytes, allowed " << e.allowed
              << ")\n";
    return 4;
  } catch (const EnumBudgetExceeded& e) {
    std::cerr << "budget exceeded: estimated " << e.estimate << " candidates, limit " << e.limit << "\n";
    return 4;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const RootSelectionAmbiguous& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateLaw& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NotSymmetric& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleExact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
