#include "kspec/graphcomb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "kspec/ensembles.hpp"

namespace kspec {

namespace {

using Tuple = std::vector<int>;

double factorial(int d) {
  double f = 1.0;
  for (int i = 2; i <= d; ++i) f *= i;
  return f;
}

std::map<std::pair<int, int>, int> incidences(const LabelledLGraph& g) {
  std::map<std::pair<int, int>, int> b;
  for (int s = 0; s < g.L; ++s) {
    const int i = g.n_labels[s];
    for (int j : g.p_tuples[s]) ++b[{i, j}];
    for (int j : g.p_tuples[(s + 1) % g.L]) ++b[{i, j}];
  }
  return b;
}

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

// Edge k runs from vertex k to vertex k+1 on P_0 U_0 P_1 U_1 ...
int edge_tuple(int k, int L) { return (k % 2 == 0) ? k / 2 : ((k + 1) / 2) % L; }
int edge_nlabel(const LabelledLGraph& g, int k) { return g.n_labels[k / 2]; }

std::vector<Tuple> apply_perm(const std::vector<Tuple>& tuples, const std::vector<int>& used,
                              const std::vector<int>& perm) {
  std::map<int, int> to;
  for (std::size_t k = 0; k < used.size(); ++k) to[used[k]] = perm[k];
  std::vector<Tuple> out = tuples;
  for (auto& t : out) {
    for (int& j : t) j = to[j];
    std::sort(t.begin(), t.end());
  }
  return out;
}

std::vector<int> used_p_labels(const std::vector<Tuple>& tuples) {
  std::set<int> u;
  for (const auto& t : tuples) u.insert(t.begin(), t.end());
  return {u.begin(), u.end()};
}

bool p_canonical(const std::vector<Tuple>& tuples) {
  std::vector<int> used = used_p_labels(tuples);
  std::vector<int> perm(used.size());
  std::iota(perm.begin(), perm.end(), 1);
  do {
    if (apply_perm(tuples, used, perm) < tuples) return false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

std::vector<int> allowed_sizes(const EnumSpec& s) {
  std::vector<int> out;
  switch (s.flavor) {
    case Flavor::Multi:
      for (int d = s.ell; d <= s.L1; ++d) out.push_back(d);
      break;
    case Flavor::Simple:
      out = {0, s.ell};
      break;
    case Flavor::Nonbacktracking:
      out = {s.d};
      break;
  }
  return out;
}

void combinations(int m, int k, const std::function<void(const std::vector<int>&)>& f) {
  if (k > m || k < 0) return;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 1);
  while (true) {
    f(c);
    int i = k - 1;
    while (i >= 0 && c[i] == m - k + i + 1) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

// Tuples available when labels 1..m are used: old labels plus the next q new ones.
std::vector<std::pair<Tuple, int>> next_tuples(int m, int p_max, const std::vector<int>& sizes) {
  std::vector<std::pair<Tuple, int>> out;
  for (int t : sizes) {
    for (int q = 0; q <= t; ++q) {
      if (m + q > p_max || t - q > m) continue;
      combinations(m, t - q, [&](const std::vector<int>& old) {
        Tuple tup = old;
        for (int x = 1; x <= q; ++x) tup.push_back(m + x);
        out.push_back({tup, m + q});
      });
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::Multi: return "multi";
    case Flavor::Simple: return "simple";
    case Flavor::Nonbacktracking: return "nonbacktracking";
  }
  return "?";
}

Flavor parse_flavor(const std::string& s) {
  if (s == "multi") return Flavor::Multi;
  if (s == "simple") return Flavor::Simple;
  if (s == "nonbacktracking" || s == "nb") return Flavor::Nonbacktracking;
  throw std::invalid_argument("unknown flavor: " + s);
}

std::string to_string(EdgeType t) {
  switch (t) {
    case EdgeType::T1: return "T1";
    case EdgeType::T3: return "T3";
    case EdgeType::T4: return "T4";
  }
  return "?";
}

std::string describe(const LabelledLGraph& g) {
  std::ostringstream os;
  os << "n=(";
  for (int s = 0; s < g.L; ++s) os << (s ? "," : "") << g.n_labels[s];
  os << ") p=(";
  for (int s = 0; s < g.L; ++s) {
    os << (s ? "," : "") << "{";
    for (std::size_t k = 0; k < g.p_tuples[s].size(); ++k) os << (k ? "," : "") << g.p_tuples[s][k];
    os << "}";
  }
  os << ")";
  return os.str();
}

bool is_valid(const LabelledLGraph& g, std::string* why) {
  if (g.L < 1 || static_cast<int>(g.n_labels.size()) != g.L || static_cast<int>(g.p_tuples.size()) != g.L)
    return fail(why, "length mismatch");
  for (int s = 0; s < g.L; ++s) {
    if (g.n_labels[s] < 1) return fail(why, "n-label must be positive");
    const auto& t = g.p_tuples[s];
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < 1) return fail(why, "p-label must be positive");
      if (k && t[k] <= t[k - 1]) return fail(why, "tuple not strictly increasing");
    }
  }
  for (int s = 0; s < g.L; ++s)
    if (g.n_labels[s] == g.n_labels[(s + 1) % g.L]) return fail(why, "adjacent n-labels equal");

  const auto b = incidences(g);
  switch (g.flavor) {
    case Flavor::Multi:
      for (const auto& t : g.p_tuples) {
        const int d = static_cast<int>(t.size());
        if (d < g.ell || d > g.L1) return fail(why, "tuple size outside [ell, L1]");
      }
      for (const auto& [key, cnt] : b)
        if (cnt < 2) return fail(why, "incidence count 1");
      break;
    case Flavor::Simple: {
      for (const auto& t : g.p_tuples)
        if (!t.empty() && static_cast<int>(t.size()) != g.ell) return fail(why, "tuple size not 0 or ell");
      for (const auto& [key, cnt] : b)
        if (cnt % 2) return fail(why, "odd incidence count");
      std::map<std::pair<int, int>, int> through_empty;
      for (int s = 0; s < g.L; ++s)
        if (g.p_tuples[s].empty()) ++through_empty[{g.n_labels[(s + g.L - 1) % g.L], g.n_labels[s]}];
      for (const auto& [key, cnt] : through_empty) {
        auto it = through_empty.find({key.second, key.first});
        if (it == through_empty.end() || it->second != cnt) return fail(why, "unbalanced empty crossings");
      }
      break;
    }
    case Flavor::Nonbacktracking:
      if (g.d > g.ell) return fail(why, "d exceeds ell");
      for (const auto& t : g.p_tuples)
        if (static_cast<int>(t.size()) != g.d) return fail(why, "tuple size not d");
      for (int s = 0; s < g.L; ++s)
        if (g.p_tuples[s] == g.p_tuples[(s + 1) % g.L]) return fail(why, "adjacent tuples equal");
      for (const auto& [key, cnt] : b)
        if (cnt % 2) return fail(why, "odd incidence count");
      break;
  }
  return true;
}

LabelledLGraph canonicalize(const LabelledLGraph& g) {
  LabelledLGraph out = g;
  std::map<int, int> nmap;
  for (int s = 0; s < g.L; ++s) {
    auto it = nmap.find(g.n_labels[s]);
    if (it == nmap.end()) it = nmap.emplace(g.n_labels[s], static_cast<int>(nmap.size()) + 1).first;
    out.n_labels[s] = it->second;
  }
  std::vector<int> used = used_p_labels(g.p_tuples);
  std::vector<int> perm(used.size());
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<Tuple> best = apply_perm(g.p_tuples, used, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    auto cand = apply_perm(g.p_tuples, used, perm);
    if (cand < best) best = std::move(cand);
  }
  out.p_tuples = std::move(best);
  return out;
}

double estimate_enumeration_cost(const EnumSpec& spec) {
  // restricted growth strings with no immediate repeat
  std::vector<double> rgs(spec.n_max + 2, 0.0);
  rgs[1] = 1.0;
  for (int s = 1; s < spec.L; ++s) {
    std::vector<double> nx(rgs.size(), 0.0);
    for (int k = 1; k <= spec.n_max; ++k) {
      nx[k] += rgs[k] * (k - 1);
      if (k < spec.n_max) nx[k + 1] += rgs[k];
    }
    rgs = nx;
  }
  const double n_count = std::accumulate(rgs.begin(), rgs.end(), 0.0);

  const auto sizes = allowed_sizes(spec);
  std::vector<double> tup(spec.p_max + 1, 0.0);
  tup[0] = 1.0;
  for (int s = 0; s < spec.L; ++s) {
    std::vector<double> nx(tup.size(), 0.0);
    for (int m = 0; m <= spec.p_max; ++m) {
      if (tup[m] == 0.0) continue;
      for (int t : sizes)
        for (int q = 0; q <= t; ++q)
          if (m + q <= spec.p_max && t - q <= m)
            nx[m + q] += tup[m] * static_cast<double>(binomial(m, t - q));
    }
    tup = nx;
  }
  return n_count * std::accumulate(tup.begin(), tup.end(), 0.0);
}

void enumerate_labelings(const EnumSpec& spec, const std::function<void(const LabelledLGraph&)>& sink) {
  if (spec.L < 1 || spec.n_max < 1 || spec.p_max < 0 || spec.ell < 1)
    throw std::invalid_argument("enumerate_labelings: bad parameters");
  if (spec.flavor == Flavor::Multi && spec.L1 < spec.ell)
    throw std::invalid_argument("enumerate_labelings: L1 < ell");
  const double cost = estimate_enumeration_cost(spec);
  if (cost > spec.max_candidates) {
    std::ostringstream os;
    os << "enumeration needs about " << cost << " candidates, limit " << spec.max_candidates;
    throw EnumBudgetExceeded(os.str(), cost, spec.max_candidates);
  }

  const auto sizes = allowed_sizes(spec);
  std::map<int, std::vector<std::pair<Tuple, int>>> tuple_cache;
  auto tuples_for = [&](int m) -> const std::vector<std::pair<Tuple, int>>& {
    auto it = tuple_cache.find(m);
    if (it == tuple_cache.end()) it = tuple_cache.emplace(m, next_tuples(m, spec.p_max, sizes)).first;
    return it->second;
  };

  LabelledLGraph g;
  g.L = spec.L;
  g.flavor = spec.flavor;
  g.ell = spec.ell;
  g.L1 = spec.L1;
  g.d = spec.d;
  g.n_labels.assign(spec.L, 0);
  g.p_tuples.assign(spec.L, {});

  std::function<void(int, int)> tuple_step = [&](int s, int m) {
    if (s == spec.L) {
      if (is_valid(g) && p_canonical(g.p_tuples)) sink(g);
      return;
    }
    for (const auto& [t, m2] : tuples_for(m)) {
      if (spec.flavor == Flavor::Nonbacktracking && s > 0 && t == g.p_tuples[s - 1]) continue;
      g.p_tuples[s] = t;
      tuple_step(s + 1, m2);
    }
  };

  std::function<void(int, int)> n_step = [&](int s, int k) {
    if (s == spec.L) {
      if (spec.L >= 1 && g.n_labels[spec.L - 1] == g.n_labels[0]) return;
      tuple_step(0, 0);
      return;
    }
    for (int v = 1; v <= std::min(k + 1, spec.n_max); ++v) {
      if (s > 0 && v == g.n_labels[s - 1]) continue;
      g.n_labels[s] = v;
      n_step(s + 1, std::max(k, v));
    }
  };
  n_step(0, 0);
}

std::vector<LabelledLGraph> enumerate_all(const EnumSpec& spec) {
  std::vector<LabelledLGraph> out;
  enumerate_labelings(spec, [&](const LabelledLGraph& g) { out.push_back(g); });
  return out;
}

ExcessReport excess(const LabelledLGraph& g) {
  ExcessReport rep;
  rep.r = static_cast<int>(std::set<int>(g.n_labels.begin(), g.n_labels.end()).size());
  rep.c = static_cast<int>(used_p_labels(g.p_tuples).size());
  int sum_d = 0;
  for (const auto& t : g.p_tuples) {
    rep.tuple_sizes.push_back(static_cast<int>(t.size()));
    sum_d += static_cast<int>(t.size());
    if (!t.empty()) ++rep.k_nonempty;
  }
  const long long L = g.L, ell = g.ell;
  const Rational base = Rational(1) - Rational(rep.r) - Rational(rep.c, ell);
  switch (g.flavor) {
    case Flavor::Multi:
      rep.delta = base + Rational(L, 2) + Rational(sum_d, 2 * ell);
      break;
    case Flavor::Simple:
      rep.delta = base + Rational(L + rep.k_nonempty, 2);
      break;
    case Flavor::Nonbacktracking:
      rep.delta = base + Rational(L, 2) + Rational(static_cast<long long>(g.d) * L, 2 * ell);
      break;
  }
  return rep;
}

EdgeClassification classify_edges(const LabelledLGraph& g) {
  EdgeClassification ec;
  const int L = g.L, E = 2 * L;
  ec.multiplicity = incidences(g);
  std::set<int> seen_n;
  std::set<int> seen_p(g.p_tuples[0].begin(), g.p_tuples[0].end());
  std::map<std::pair<int, int>, std::vector<SubType>> history;

  for (int k = 0; k < E; ++k) {
    const int i = edge_nlabel(g, k);
    const Tuple& t = g.p_tuples[edge_tuple(k, L)];
    std::vector<SubType> sub;
    for (int j : t) {
      const bool fresh = (k % 2 == 0) ? !seen_n.count(i) : !seen_p.count(j);
      const auto& h = history[{i, j}];
      if (fresh) sub.push_back(SubType::t1);
      else if (h.size() == 1 && h[0] == SubType::t1) sub.push_back(SubType::t3);
      else sub.push_back(SubType::t4);
    }
    for (std::size_t q = 0; q < t.size(); ++q) history[{i, t[q]}].push_back(sub[q]);
    if (k % 2 == 0) seen_n.insert(i);
    else seen_p.insert(t.begin(), t.end());

    EdgeType et = EdgeType::T4;
    if (std::all_of(sub.begin(), sub.end(), [](SubType s) { return s == SubType::t1; })) et = EdgeType::T1;
    else if (std::all_of(sub.begin(), sub.end(), [](SubType s) { return s == SubType::t3; })) et = EdgeType::T3;
    ec.edges.push_back(et);
    ec.sub.push_back(std::move(sub));
  }

  std::vector<bool> matched(E, false);
  for (int k = 0; k < E; ++k) {
    if (ec.edges[k] != EdgeType::T3) continue;
    for (int q = 0; q < k; ++q) {
      if (matched[q] || ec.edges[q] != EdgeType::T1) continue;
      if (edge_nlabel(g, q) != edge_nlabel(g, k)) continue;
      if (g.p_tuples[edge_tuple(q, L)] != g.p_tuples[edge_tuple(k, L)]) continue;
      matched[q] = matched[k] = true;
      ec.good_pairs.push_back({q, k});
      break;
    }
  }
  ec.bad_edges = E - 2 * static_cast<int>(ec.good_pairs.size());
  ec.t4_edges = static_cast<int>(std::count(ec.edges.begin(), ec.edges.end(), EdgeType::T4));

  // order of a T3 edge e_r: earlier T1 edges still unpaired at r and touching a
  // vertex labelled like the start of e_r
  ec.t3_order.assign(E, -1);
  for (int r = 0; r < E; ++r) {
    if (ec.edges[r] != EdgeType::T3) continue;
    std::map<std::pair<int, int>, int> seen;
    for (int k = 0; k <= r; ++k)
      for (int j : g.p_tuples[edge_tuple(k, L)]) ++seen[{edge_nlabel(g, k), j}];
    const bool start_is_p = (r % 2 == 0);
    int tau = 0;
    for (int q = 0; q < r; ++q) {
      if (ec.edges[q] != EdgeType::T1) continue;
      const Tuple& tq = g.p_tuples[edge_tuple(q, L)];
      const int iq = edge_nlabel(g, q);
      bool unpaired = false;
      for (int j : tq)
        if (seen[{iq, j}] == 1) unpaired = true;
      if (!unpaired) continue;
      const bool touches = start_is_p ? (tq == g.p_tuples[edge_tuple(r, L)]) : (iq == edge_nlabel(g, r));
      if (touches) ++tau;
    }
    ec.t3_order[r] = tau;
  }
  return ec;
}

TreeConditions tree_conditions(const LabelledLGraph& g) {
  TreeConditions tc;
  const int L = g.L;
  std::map<std::pair<int, Tuple>, int> pairs;
  for (int k = 0; k < 2 * L; ++k) ++pairs[{edge_nlabel(g, k), g.p_tuples[edge_tuple(k, L)]}];
  tc.twin_edges = std::all_of(pairs.begin(), pairs.end(), [](const auto& kv) { return kv.second == 2; });

  std::set<int> nverts(g.n_labels.begin(), g.n_labels.end());
  std::set<Tuple> pverts(g.p_tuples.begin(), g.p_tuples.end());
  bool disjoint = true;
  std::set<int> all;
  std::size_t total = 0;
  for (const auto& t : pverts) {
    total += t.size();
    all.insert(t.begin(), t.end());
  }
  disjoint = (all.size() == total);
  tc.tree_and_disjoint = disjoint && (pairs.size() + 1 == nverts.size() + pverts.size());

  std::map<Tuple, int> degree;
  for (const auto& kv : pairs) ++degree[kv.first.second];
  tc.tuple_degree_at_least_two = true;
  tc.large_tuple_degree_two = true;
  for (const auto& [t, deg] : degree) {
    if (deg < 2) tc.tuple_degree_at_least_two = false;
    if (static_cast<int>(t.size()) > g.ell && deg != 2) tc.large_tuple_degree_two = false;
  }
  return tc;
}

std::vector<LemmaCheck> verify_lemmas(const LabelledLGraph& g) {
  std::vector<LemmaCheck> out;
  const ExcessReport ex = excess(g);
  const Rational delta = ex.delta;
  const Rational ell(g.ell);
  auto fmt = [](const Rational& r) {
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << "/" << r.denominator();
    return os.str();
  };
  auto add = [&](const std::string& name, bool pass, const std::string& detail, bool info = false) {
    out.push_back({name, pass, info, detail});
  };

  if (g.flavor == Flavor::Simple) {
    add("simple_excess_nonnegative", delta >= Rational(0), "excess=" + fmt(delta));
    return out;
  }

  const EdgeClassification ec = classify_edges(g);
  if (g.flavor == Flavor::Multi) {
    add("excess_nonnegative", delta >= Rational(0), "excess=" + fmt(delta));
    long long heavy = 0;
    for (const auto& [key, b] : ec.multiplicity)
      if (b > 2) heavy += b;
    add("heavy_multiplicity_405", Rational(heavy) <= 405 * delta * ell,
        "sum=" + std::to_string(heavy) + " excess=" + fmt(delta));
    add("bad_edges_120", Rational(ec.bad_edges) <= 120 * delta * ell,
        "bad=" + std::to_string(ec.bad_edges) + " excess=" + fmt(delta));
    add("t4_edges_135", Rational(ec.t4_edges) <= 135 * delta * ell,
        "t4=" + std::to_string(ec.t4_edges) + " excess=" + fmt(delta));
    add("t4_edges_120", Rational(ec.t4_edges) <= 120 * delta * ell,
        "t4=" + std::to_string(ec.t4_edges) + " excess=" + fmt(delta), true);
    const TreeConditions tc = tree_conditions(g);
    add("zero_excess_tree", (delta == Rational(0)) == tc.all(),
        "excess=" + fmt(delta) + " tree=" + (tc.all() ? "yes" : "no"));
  } else {
    add("nb_excess_nonnegative", delta >= Rational(0), "excess=" + fmt(delta));
    add("nb_t4_edges_12", Rational(ec.t4_edges) <= 12 * delta * ell,
        "t4=" + std::to_string(ec.t4_edges) + " excess=" + fmt(delta));
    int tau = 0;
    for (int t : ec.t3_order) tau = std::max(tau, t);
    add("nb_t3_order_24", Rational(tau) <= 24 * delta * ell + Rational(1),
        "max_order=" + std::to_string(tau) + " excess=" + fmt(delta));
    add("nb_excess_at_least_one", delta >= Rational(1), "excess=" + fmt(delta), true);
  }
  return out;
}

long long Certification::total_violations() const {
  long long v = 0;
  for (const auto& e : entries)
    if (!e.informational) v += e.violations;
  return v;
}

Certification certify(const EnumSpec& spec) {
  Certification cert;
  cert.spec = spec;
  std::map<std::string, std::size_t> index;
  enumerate_labelings(spec, [&](const LabelledLGraph& g) {
    ++cert.labelings;
    for (const auto& chk : verify_lemmas(g)) {
      auto it = index.find(chk.name);
      if (it == index.end()) {
        it = index.emplace(chk.name, cert.entries.size()).first;
        cert.entries.push_back({chk.name, chk.informational, 0, 0, {}});
      }
      auto& e = cert.entries[it->second];
      ++e.instances;
      if (!chk.pass) {
        ++e.violations;
        if (e.examples.size() < 5) e.examples.push_back(describe(g) + " " + chk.detail);
      }
    }
  });
  return cert;
}

MomentSum moment_graph_sum(int n, int p, int ell, int L1, int L, const std::vector<double>& coeffs) {
  if (n < 1 || p < 1 || ell < 1 || L1 < ell || L < 1 || p > 62)
    throw std::invalid_argument("moment_graph_sum: bad parameters");
  std::vector<std::uint64_t> masks;
  std::vector<int> sizes;
  for (int d = ell; d <= std::min(L1, p); ++d)
    for (const auto& sub : sorted_subsets(p, d)) {
      std::uint64_t m = 0;
      for (int j : sub) m |= (1ULL << j);
      masks.push_back(m);
      sizes.push_back(d);
    }
  const int T = static_cast<int>(masks.size());
  const double cost = std::pow(static_cast<double>(n), L) * std::pow(static_cast<double>(T), L);
  if (cost > 2e9) throw EnumBudgetExceeded("moment_graph_sum: too many labelings", cost, 2e9);

  MomentSum res;
  if (T == 0) return res;
  std::vector<int> nl(L, 0), tl(L, 0);
  std::vector<std::uint64_t> parity(n);
  auto bump = [](std::vector<int>& v, int base) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (++v[k] < base) return true;
      v[k] = 0;
    }
    return false;
  };
  do {
    bool ok = true;
    for (int s = 0; s < L; ++s)
      if (nl[s] == nl[(s + 1) % L]) ok = false;
    if (!ok) continue;
    std::fill(tl.begin(), tl.end(), 0);
    do {
      std::fill(parity.begin(), parity.end(), 0);
      for (int s = 0; s < L; ++s) parity[nl[s]] ^= masks[tl[s]] ^ masks[tl[(s + 1) % L]];
      if (std::any_of(parity.begin(), parity.end(), [](std::uint64_t m) { return m != 0; })) continue;
      std::vector<int> seq(L);
      for (int s = 0; s < L; ++s) seq[s] = sizes[tl[s]];
      ++res.counts[seq];
    } while (bump(tl, T));
  } while (bump(nl, n));

  for (const auto& [seq, cnt] : res.counts) {
    double w = static_cast<double>(cnt);
    for (int d : seq) {
      const double a = d < static_cast<int>(coeffs.size()) ? coeffs[d] : 0.0;
      w *= a * std::sqrt(factorial(d)) / std::sqrt(n * std::pow(static_cast<double>(p), d));
    }
    res.value += w;
  }
  return res;
}

OracleResult oracle_moment(int n, int p, int L, OracleKind kind, const OracleOptions& opt) {
  if (n < 1 || p < 1 || L < 0) throw std::invalid_argument("oracle_moment: bad parameters");
  if (n * p > 20) {
    const double need = std::ldexp(1.0, n * p);
    throw EnumBudgetExceeded("oracle_moment needs n*p <= 20", need, std::ldexp(1.0, 20));
  }
  OracleResult res;
  res.assignments = 1ULL << (n * p);
  if (L == 0) {
    res.value = kind == OracleKind::Td ? static_cast<double>(binomial(p, opt.d)) : n;
    return res;
  }

  using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<int> degs;
  if (kind == OracleKind::B)
    for (int d = opt.ell; d <= std::min(opt.L1, p); ++d) degs.push_back(d);

  std::map<std::vector<int>, long long> sums;
  double acc = 0.0;
  Matrix X(n, p);
  for (std::uint64_t bits = 0; bits < res.assignments; ++bits) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = ((bits >> (i * p + j)) & 1ULL) ? -1.0 : 1.0;
    if (kind == OracleKind::B) {
      if (degs.empty()) break;
      std::vector<IMat> S;
      for (int d : degs) {
        Matrix Xd = build_Xd(X, d);
        Matrix G = Xd * Xd.transpose();
        G.diagonal().setZero();
        S.push_back(G.unaryExpr([](double v) { return std::llround(v); }).cast<long long>());
      }
      std::vector<int> idx(L, 0);
      while (true) {
        IMat P = S[idx[0]];
        for (int s = 1; s < L; ++s) P = P * S[idx[s]];
        std::vector<int> seq(L);
        for (int s = 0; s < L; ++s) seq[s] = degs[idx[s]];
        sums[seq] += P.trace();
        int k = 0;
        while (k < L && ++idx[k] == static_cast<int>(degs.size())) idx[k++] = 0;
        if (k == L) break;
      }
    } else {
      Matrix M = kind == OracleKind::RdOffdiag ? offdiag(tensor_matrix(X, opt.d))
                                               : nonbacktracking_matrix(X, opt.d, opt.L_inner, NbMode::Exact).T;
      Matrix P = M;
      for (int s = 1; s < L; ++s) P = P * M;
      acc += P.trace();
    }
  }

  if (kind == OracleKind::B) {
    for (const auto& [seq, total] : sums) {
      Rational r(total, static_cast<long long>(res.assignments));
      res.exact[seq] = r;
      double w = boost::rational_cast<double>(r);
      for (int d : seq) {
        const double a = d < static_cast<int>(opt.coeffs.size()) ? opt.coeffs[d] : 0.0;
        w *= a * std::sqrt(factorial(d)) / std::sqrt(n * std::pow(static_cast<double>(p), d));
      }
      res.value += w;
    }
  } else {
    res.value = acc / static_cast<double>(res.assignments);
  }
  return res;
}

}  // namespace kspec
