#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kspec {

using Rational = boost::rational<long long>;

enum class Flavor { Multi, Simple, Nonbacktracking };

std::string to_string(Flavor f);
Flavor parse_flavor(const std::string& s);

// Cycle P_0 U_0 P_1 U_1 ... P_{L-1} U_{L-1} (back to P_0). p_tuples[s] labels
// P_s, n_labels[s] labels U_s; U_s is adjacent to P_s and P_{s+1}. Labels are
// 1-based and tuples are sorted.
struct LabelledLGraph {
  int L = 2;
  std::vector<int> n_labels;
  std::vector<std::vector<int>> p_tuples;
  Flavor flavor = Flavor::Multi;
  int ell = 1;
  int L1 = 1;
  int d = 1;  // tuple size for the nonbacktracking flavor

  bool operator==(const LabelledLGraph& o) const { return n_labels == o.n_labels && p_tuples == o.p_tuples; }
};

std::string describe(const LabelledLGraph& g);

// Flavor conditions; on failure `why` names the first broken condition.
bool is_valid(const LabelledLGraph& g, std::string* why = nullptr);

// n-labels by first appearance, p-labels by the lexicographically smallest relabelling.
LabelledLGraph canonicalize(const LabelledLGraph& g);

struct EnumSpec {
  int L = 2;
  int n_max = 2;
  int p_max = 2;
  int ell = 1;
  int L1 = 1;
  Flavor flavor = Flavor::Multi;
  int d = 1;
  double max_candidates = 2e8;
};

struct EnumBudgetExceeded : std::runtime_error {
  EnumBudgetExceeded(const std::string& what, double estimate, double limit)
      : std::runtime_error(what), estimate(estimate), limit(limit) {}
  double estimate;
  double limit;
};

// Number of candidate labelings the enumerator will visit.
double estimate_enumeration_cost(const EnumSpec& spec);

// Streams every canonical labeling of the flavor exactly once, n-label strings
// in lexicographic order and tuples in increasing order within each.
void enumerate_labelings(const EnumSpec& spec, const std::function<void(const LabelledLGraph&)>& sink);
std::vector<LabelledLGraph> enumerate_all(const EnumSpec& spec);

struct ExcessReport {
  Rational delta;
  int r = 0;
  int c = 0;
  int k_nonempty = 0;
  std::vector<int> tuple_sizes;
};

ExcessReport excess(const LabelledLGraph& g);

enum class SubType { t1, t3, t4 };
enum class EdgeType { T1, T3, T4 };

std::string to_string(EdgeType t);

struct EdgeClassification {
  // edge k joins vertex k and k+1 of P_0 U_0 P_1 U_1 ...
  std::vector<EdgeType> edges;
  std::vector<std::vector<SubType>> sub;
  std::vector<std::pair<int, int>> good_pairs;  // (T1 edge, T3 edge)
  int bad_edges = 0;
  int t4_edges = 0;
  std::vector<int> t3_order;                    // -1 for non-T3 edges
  std::map<std::pair<int, int>, int> multiplicity;  // (n-label, p-label) -> b_ij
};

EdgeClassification classify_edges(const LabelledLGraph& g);

struct TreeConditions {
  bool twin_edges = false;
  bool tree_and_disjoint = false;
  bool tuple_degree_at_least_two = false;
  bool large_tuple_degree_two = false;
  bool all() const { return twin_edges && tree_and_disjoint && tuple_degree_at_least_two && large_tuple_degree_two; }
};

TreeConditions tree_conditions(const LabelledLGraph& g);

struct LemmaCheck {
  std::string name;
  bool pass = true;
  bool informational = false;
  std::string detail;
};

std::vector<LemmaCheck> verify_lemmas(const LabelledLGraph& g);

struct CertificationEntry {
  std::string name;
  bool informational = false;
  long long instances = 0;
  long long violations = 0;
  std::vector<std::string> examples;  // first few violating labelings
};

struct Certification {
  EnumSpec spec;
  long long labelings = 0;
  std::vector<CertificationEntry> entries;
  long long total_violations() const;
};

Certification certify(const EnumSpec& spec);

// Exact moment E tr(B^L) for Rademacher data by direct enumeration of
// concrete labelings with all multiplicities even. counts maps the tuple
// size sequence (d_1..d_L) to the number of labelings with sorted tuples.
struct MomentSum {
  std::map<std::vector<int>, long long> counts;
  double value = 0.0;
};

MomentSum moment_graph_sum(int n, int p, int ell, int L1, int L, const std::vector<double>& coeffs);

enum class OracleKind { B, RdOffdiag, Td };

struct OracleOptions {
  std::vector<double> coeffs;  // indexed by d, for kind B
  int ell = 1;
  int L1 = 1;
  int d = 1;       // for RdOffdiag and Td
  int L_inner = 1; // T_d(L_inner) for Td
};

struct OracleResult {
  double value = 0.0;
  std::map<std::vector<int>, Rational> exact;  // kind B: per size sequence
  std::uint64_t assignments = 0;
};

// Average over all 2^{np} sign matrices.
OracleResult oracle_moment(int n, int p, int L, OracleKind kind, const OracleOptions& opt);

}  // namespace kspec
