#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"
#include "nmx/frege.hpp"
#include "nmx/natded.hpp"
#include "nmx/schemas.hpp"

namespace nmx {

struct TransformReport {
  std::string transform;
  ProofMetrics input, output;
  // measured value divided by the shape of the claimed bound, e.g. lines / (t log t)
  std::vector<std::pair<std::string, double>> fitted;
  CheckReport verdict;
  std::vector<std::string> notes;

  double fit(const std::string& name) const {
    for (const auto& [k, v] : fitted)
      if (k == name) return v;
    throw std::out_of_range("no fitted value " + name);
  }
};

struct TransformResult {
  Derivation proof;
  TransformReport report;
};

struct TreePair {
  Derivation frege;
  Derivation nm;
  TransformReport report;
};

inline double log2_at_least_1(double t) { return std::max(1.0, std::log2(std::max(t, 1.0))); }

namespace detail {

inline Formula mv(const char* n) { return var(n); }

// Assigns positional indices 0..n-1.
inline FormulaSeq positional(const std::vector<Formula>& v) { return FormulaSeq::from_list(v); }

inline std::vector<Formula> prefix(const std::vector<Formula>& v, std::size_t i) { return {v.begin(), v.begin() + i}; }

inline std::vector<Formula> concat(std::initializer_list<std::vector<Formula>> parts) {
  std::vector<Formula> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Balanced chaining: steps[i] proves φ_i → φ_{i+1}; returns a node proving φ_0 → φ_n. Level k pairs the
// derivations for [i, i+2^k) and [i+2^k, min(i+2^(k+1), n)); an unpaired last block is carried.
inline std::size_t chain_nodes(DagBuilder& b, std::vector<std::size_t> steps) {
  if (steps.empty()) throw std::invalid_argument("chain_proof: empty chain");
  const auto& t = named_schema("chain");
  while (steps.size() > 1) {
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < steps.size(); i += 2) {
      if (i + 1 == steps.size()) {
        next.push_back(steps[i]);
        continue;
      }
      const Formula& x = b.label(steps[i]);
      const Formula& y = b.label(steps[i + 1]);
      next.push_back(use_schema(b, t, {{"a", x.lhs()}, {"b", x.rhs()}, {"c", y.rhs()}}, {steps[i], steps[i + 1]}));
    }
    steps = std::move(next);
  }
  return steps[0];
}

// Subset: (Δ → φ) → (Γ → φ) where Δ is the part of Γ selected by keep.
inline std::size_t subset_node(DagBuilder& b, const std::vector<Formula>& gamma, const std::vector<char>& keep,
                               const Formula& phi) {
  if (gamma.empty()) return identity_proof(b, phi);
  const auto& skip = named_schema("subset_skip");
  const auto& kp = named_schema("subset_keep");
  std::vector<std::size_t> steps;
  std::vector<Formula> dpart;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    Formula d = fold_imp(dpart, phi);
    Formula c = fold_imp(prefix(gamma, i), phi);
    steps.push_back(use_schema(b, keep[i] ? kp : skip, {{"a", gamma[i]}, {"c", c}, {"d", d}}));
    if (keep[i]) dpart.push_back(gamma[i]);
  }
  std::size_t ch = chain_nodes(b, std::move(steps));
  return b.mp(identity_proof(b, phi), ch);
}

// Apply: (Γ → φ → ψ) → (Γ → φ) → (Γ → ψ)
inline std::size_t weak_apply_node(DagBuilder& b, const std::vector<Formula>& gamma, const Formula& phi, const Formula& psi) {
  if (gamma.empty()) return identity_proof(b, imp(phi, psi));
  const auto& t = named_schema("weak_apply");
  std::vector<std::size_t> steps;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    auto g = prefix(gamma, i);
    steps.push_back(use_schema(
        b, t, {{"a", gamma[i]}, {"b", fold_imp(g, imp(phi, psi))}, {"c", fold_imp(g, phi)}, {"d", fold_imp(g, psi)}}));
  }
  std::size_t ch = chain_nodes(b, std::move(steps));
  return b.mp(identity_proof(b, imp(phi, psi)), ch);
}

// Detach: Γ → (Γ → φ) → φ
inline std::size_t weak_detach_node(DagBuilder& b, const std::vector<Formula>& gamma, const Formula& phi) {
  if (gamma.empty()) return identity_proof(b, phi);
  const auto& t = named_schema("weak_swap");
  Formula g = fold_imp(gamma, phi);
  std::vector<std::size_t> steps;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    auto p = prefix(gamma, i);
    steps.push_back(use_schema(b, t, {{"a", g}, {"b", fold_imp(p, phi)}, {"c", gamma[i]}, {"d", fold_imp(p, imp(g, phi))}}));
  }
  std::size_t ch = chain_nodes(b, std::move(steps));
  std::size_t last = b.mp(identity_proof(b, imp(g, phi)), ch);
  return b.mp(identity_proof(b, g), last);
}

// Contract: (Γ → Γ → φ) → (Γ → φ)
inline std::size_t weak_contract_node(DagBuilder& b, const std::vector<Formula>& gamma, const Formula& phi) {
  Formula g = fold_imp(gamma, phi);
  std::size_t w9 = weak_apply_node(b, gamma, g, phi);
  return b.mp(weak_detach_node(b, gamma, phi), w9);
}

// Exchange: (Θ → Γ → Δ → φ) → (Θ → Δ → Γ → φ)
inline std::size_t weak_exchange_node(DagBuilder& b, const std::vector<Formula>& theta, const std::vector<Formula>& gamma,
                               const std::vector<Formula>& delta, const Formula& phi) {
  Formula x = fold_imp(gamma, fold_imp(delta, phi));
  Formula y = fold_imp(delta, fold_imp(gamma, phi));
  // Γ→Δ→φ is the sequence Δ,Γ; embed it in Γ,Δ,Γ,Δ and contract over Γ,Δ.
  std::vector<Formula> gd = concat({gamma, delta});
  std::vector<Formula> big = concat({gd, gd});
  std::vector<char> keep(big.size(), 0);
  for (std::size_t i = gamma.size(); i < gamma.size() + delta.size() + gamma.size(); ++i) keep[i] = 1;
  std::size_t s1 = subset_node(b, big, keep, phi);
  std::size_t s2 = weak_contract_node(b, gd, phi);
  std::size_t xy = use_schema(b, named_schema("chain"), {{"a", x}, {"b", b.label(s1).rhs()}, {"c", y}}, {s1, s2});
  if (theta.empty()) return xy;
  std::size_t lifted = b.mp(xy, subset_node(b, theta, std::vector<char>(theta.size(), 0), imp(x, y)));
  return b.mp(lifted, weak_apply_node(b, theta, x, y));
}

// ---- RET machinery ----

using RetItems = std::vector<std::pair<std::uint64_t, Formula>>;

inline Formula ret_of(const Formula& phi, const RetItems& items) {
  if (items.empty()) return top();
  return ret_rec(phi, items);
}

// Whether each entry belongs to I0, I1, I2 in ret_subset_rec.
struct RetMember {
  bool in[3] = {false, false, false};
};

// RET Γ_0 → RET Γ_1 → RET Γ_2, splitting the index range at the top power of two and merging the halves.
inline std::size_t ret_subset_rec(DagBuilder& b, const Formula& phi, RetItems items, std::vector<RetMember> mem) {
  const Formula T = top();
  const Formula f = mv("f");
  auto side = [&](const RetItems& it, const std::vector<RetMember>& m, int u) {
    RetItems out;
    for (std::size_t i = 0; i < it.size(); ++i)
      if (m[i].in[u]) out.push_back(it[i]);
    return out;
  };
  if (items.empty()) return use_schema(b, schema(imps({T, T, T}), "ret_subset_empty"), {});
  if (items.size() == 1) {
    Formula a = rel_pow(mv("a"), f);
    Formula x[3];
    for (int u = 0; u < 3; ++u) x[u] = mem[0].in[u] ? a : T;
    return use_schema(b, schema(imps({x[0], x[1], x[2]}), "ret_subset_base"), {{"a", items[0].second}, {"f", phi}});
  }
  for (;;) {
    std::uint64_t half = std::uint64_t{1} << floor_log2(items.back().first);
    if (items.front().first >= half) {
      for (auto& it : items) it.first -= half;
      continue;
    }
    RetItems lo, hi;
    std::vector<RetMember> mlo, mhi;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].first < half) {
        lo.push_back(items[i]);
        mlo.push_back(mem[i]);
      } else {
        hi.push_back({items[i].first - half, items[i].second});
        mhi.push_back(mem[i]);
      }
    }
    std::size_t p0 = ret_subset_rec(b, phi, lo, mlo);
    std::size_t p1 = ret_subset_rec(b, phi, hi, mhi);
    // Merge step for this split shape: Y[v][u] stands for RET Γ^v_u, which is ⊤ or of the form x → φ.
    Formula y[2][3], z[3];
    Substitution sigma{{"f", phi}};
    const RetItems* halves[2] = {&lo, &hi};
    const std::vector<RetMember>* mems[2] = {&mlo, &mhi};
    for (int v = 0; v < 2; ++v)
      for (int u = 0; u < 3; ++u) {
        RetItems part = side(*halves[v], *mems[v], u);
        if (part.empty()) {
          y[v][u] = T;
          continue;
        }
        std::string name = "x" + std::to_string(v) + std::to_string(u);
        y[v][u] = imp(var(name), f);
        sigma[name] = ret_of(phi, part).lhs();
      }
    for (int u = 0; u < 3; ++u) {
      bool e0 = y[0][u] == T, e1 = y[1][u] == T;
      z[u] = e0 && e1 ? T : e0 ? y[1][u] : e1 ? y[0][u] : rel_conj(y[0][u], y[1][u], f);
    }
    const auto& t = schema({imps({y[0][0], y[0][1], y[0][2]}), imps({y[1][0], y[1][1], y[1][2]})},
                           imps({z[0], z[1], z[2]}), "ret_subset_merge");
    return use_schema(b, t, sigma, {p0, p1});
  }
}

// RET_φ Γ → (RET_ψ Γ)^φ, by the same split as ret_subset_rec.
inline std::size_t ret_transfer_rec(DagBuilder& b, const Formula& phi, const Formula& psi, RetItems items) {
  const Formula f = mv("f"), g = mv("g"), a = mv("a");
  if (items.empty()) return use_schema(b, schema(imp(top(), rel_pow(top(), f)), "ret_transfer_empty"), {{"f", phi}});
  if (items.size() == 1)
    return use_schema(b, schema(imp(rel_pow(a, f), rel_pow(rel_pow(a, g), f)), "ret_transfer_base"),
                      {{"a", items[0].second}, {"f", phi}, {"g", psi}});
  for (;;) {
    std::uint64_t half = std::uint64_t{1} << floor_log2(items.back().first);
    if (items.front().first >= half) {
      for (auto& it : items) it.first -= half;
      continue;
    }
    RetItems lo, hi;
    for (auto& it : items) {
      if (it.first < half) lo.push_back(it);
      else hi.push_back({it.first - half, it.second});
    }
    std::size_t p0 = ret_transfer_rec(b, phi, psi, lo);
    std::size_t p1 = ret_transfer_rec(b, phi, psi, hi);
    Substitution sigma{{"a", ret_of(phi, lo)}, {"b", ret_of(psi, lo)}, {"c", ret_of(phi, hi)},
                       {"d", ret_of(psi, hi)}, {"f", phi},          {"g", psi}};
    std::size_t s = use_schema(b, named_schema("ret_transfer"), sigma);
    return b.mp(p1, b.mp(p0, s));
  }
}

inline RetItems items_of(const FormulaSeq& s) {
  RetItems out;
  for (const auto& e : s.entries()) out.push_back({static_cast<std::uint64_t>(e.index), e.formula});
  return out;
}

inline std::size_t ret_subset_node(DagBuilder& b, const Formula& phi, const FormulaSeq& gamma,
                                   const std::set<std::int64_t>& i0, const std::set<std::int64_t>& i1,
                                   const std::set<std::int64_t>& i2) {
  std::vector<RetMember> mem;
  for (const auto& e : gamma.entries()) {
    RetMember m;
    m.in[0] = i0.count(e.index) > 0;
    m.in[1] = i1.count(e.index) > 0;
    m.in[2] = i2.count(e.index) > 0;
    mem.push_back(m);
  }
  return ret_subset_rec(b, phi, items_of(gamma), mem);
}

inline std::size_t ret_transfer_node(DagBuilder& b, const Formula& phi, const Formula& psi, const FormulaSeq& gamma) {
  return ret_transfer_rec(b, phi, psi, items_of(gamma));
}

inline std::size_t top_proof(DagBuilder& b) { return identity_proof(b, var(kReservedTop)); }

inline void require_check(const CheckReport& rep, const std::string& what) {
  if (!rep) throw std::logic_error(what + " produced an invalid derivation: " + rep.describe());
}

}  // namespace detail

// ---- chaining, subset, weakening and RET lemmas as stand-alone derivations ----

// φ_0 → φ_n from {φ_i → φ_{i+1}}, each assumption used once.
inline Derivation chain_proof(const std::vector<Formula>& phis) {
  if (phis.size() < 2) throw std::invalid_argument("chain_proof: need n >= 1");
  DagBuilder b;
  std::vector<std::size_t> steps;
  for (std::size_t i = 0; i + 1 < phis.size(); ++i) steps.push_back(b.leaf(imp(phis[i], phis[i + 1])));
  return b.finish(detail::chain_nodes(b, steps));
}

inline Derivation subset_proof(const FormulaSeq& gamma, const FormulaSeq& delta, const Formula& phi) {
  if (!delta.subseq_of(gamma)) throw std::invalid_argument("subset_proof: delta is not a subsequence of gamma");
  std::vector<char> keep;
  for (const auto& e : gamma.entries()) keep.push_back(delta.at(e.index) != nullptr);
  DagBuilder b;
  return b.finish(detail::subset_node(b, gamma.formulas(), keep, phi));
}

struct WeakeningProofs {
  Derivation apply;    // (Γ → φ → ψ) → (Γ → φ) → (Γ → ψ)
  Derivation detach;   // Γ → (Γ → φ) → φ
  Derivation contract; // (Γ → Γ → φ) → (Γ → φ)
  Derivation exchange; // (Θ → Γ → Δ → φ) → (Θ → Δ → Γ → φ)
};

inline WeakeningProofs weakening_proofs(const FormulaSeq& gamma, const FormulaSeq& delta, const FormulaSeq& theta,
                                        const Formula& phi, const Formula& psi) {
  auto g = gamma.formulas();
  WeakeningProofs w;
  {
    DagBuilder b;
    w.apply = b.finish(detail::weak_apply_node(b, g, phi, psi));
  }
  {
    DagBuilder b;
    w.detach = b.finish(detail::weak_detach_node(b, g, phi));
  }
  {
    DagBuilder b;
    w.contract = b.finish(detail::weak_contract_node(b, g, phi));
  }
  {
    DagBuilder b;
    w.exchange = b.finish(detail::weak_exchange_node(b, theta.formulas(), g, delta.formulas(), phi));
  }
  return w;
}

// Formulas each weakening proof concludes, for checking.
inline Formula weak_apply_formula(const FormulaSeq& g, const Formula& phi, const Formula& psi) {
  return imps({fold_imp(g, imp(phi, psi)), fold_imp(g, phi), fold_imp(g, psi)});
}
inline Formula weak_detach_formula(const FormulaSeq& g, const Formula& phi) {
  return fold_imp(g, imp(fold_imp(g, phi), phi));
}
inline Formula weak_contract_formula(const FormulaSeq& g, const Formula& phi) {
  return imp(fold_imp(g, fold_imp(g, phi)), fold_imp(g, phi));
}
inline Formula weak_exchange_formula(const FormulaSeq& theta, const FormulaSeq& g, const FormulaSeq& d, const Formula& phi) {
  return imp(fold_imp(theta, fold_imp(g, fold_imp(d, phi))), fold_imp(theta, fold_imp(d, fold_imp(g, phi))));
}

inline Formula ret_subset_formula(const Formula& phi, const FormulaSeq& gamma, const std::set<std::int64_t>& i0,
                                  const std::set<std::int64_t>& i1, const std::set<std::int64_t>& i2) {
  return imps({ret_build(phi, gamma.restrict(i0)), ret_build(phi, gamma.restrict(i1)), ret_build(phi, gamma.restrict(i2))});
}

inline Derivation ret_subset_proof(const Formula& phi, const FormulaSeq& gamma, const std::set<std::int64_t>& i0,
                                   const std::set<std::int64_t>& i1, const std::set<std::int64_t>& i2) {
  auto dom = gamma.domain();
  std::set<std::int64_t> d(dom.begin(), dom.end());
  for (const auto* s : {&i0, &i1, &i2})
    for (auto i : *s)
      if (!d.count(i)) throw std::invalid_argument("ret_subset_proof: index " + std::to_string(i) + " outside dom(Γ)");
  for (auto i : i2)
    if (!i0.count(i) && !i1.count(i)) throw std::invalid_argument("ret_subset_proof: I2 is not within I0 ∪ I1");
  DagBuilder b;
  return b.finish(detail::ret_subset_node(b, phi, gamma, i0, i1, i2));
}

inline Formula ret_transfer_formula(const Formula& phi, const Formula& psi, const FormulaSeq& gamma) {
  return imp(ret_build(phi, gamma), rel_pow(ret_build(psi, gamma), phi));
}

inline Derivation ret_transfer_proof(const Formula& phi, const Formula& psi, const FormulaSeq& gamma) {
  DagBuilder b;
  return b.finish(detail::ret_transfer_node(b, phi, psi, gamma));
}

// ---- Frege to NM ----

namespace detail {

// α → β → α
inline std::size_t nm_axiom1(DagBuilder& b, const Formula& ax) {
  const Formula& a = ax.lhs();
  const Formula& bb = ax.rhs().lhs();
  return b.intro(b.intro(b.leaf(a), bb), a);
}

// (α → β → γ) → (α → β) → α → γ
inline std::size_t nm_axiom2(DagBuilder& b, const Formula& ax) {
  const Formula& x = ax.lhs();
  const Formula& y = ax.rhs().lhs();
  const Formula& a = x.lhs();
  std::size_t e1 = b.mp(b.leaf(a), b.leaf(x));
  std::size_t e2 = b.mp(b.leaf(a), b.leaf(y));
  std::size_t e3 = b.mp(e2, e1);
  return b.intro(b.intro(b.intro(e3, a), y), x);
}

inline ProofMetrics metrics_of(const Derivation& d) { return derivation_metrics(d); }

}  // namespace detail

inline TransformResult frege_to_nm(const FregeDagDerivation& pi, const FormulaSet& gamma, const Formula& phi) {
  auto in = check_frege_dag(pi, gamma, phi);
  if (!in) throw std::invalid_argument("frege_to_nm: input rejected: " + in.describe());
  DagBuilder b;
  std::vector<std::size_t> at(pi.node_count());
  for (std::size_t v : topological_order(pi)) {
    const auto& ps = pi.premises[v];
    const Formula& g = pi.labels[v];
    if (ps.empty()) {
      if (gamma.count(g)) at[v] = b.leaf(g);
      else if (is_axiom_a1(g)) at[v] = detail::nm_axiom1(b, g);
      else at[v] = detail::nm_axiom2(b, g);
    } else {
      std::size_t x = at[ps[0]], y = at[ps[1]];
      at[v] = b.label(y).is_imp() && b.label(y).lhs() == b.label(x) && b.label(y).rhs() == g ? b.mp(x, y) : b.mp(y, x);
    }
  }
  TransformResult r;
  r.proof = b.finish(at[pi.root], "m");
  r.report.transform = "frege_to_nm";
  r.report.input = frege_metrics(pi);
  r.report.output = nm_metrics(r.proof);
  r.report.verdict = check_nm(r.proof, gamma, phi);
  detail::require_check(r.report.verdict, "frege_to_nm");
  double t = static_cast<double>(r.report.input.lines);
  r.report.fitted = {{"lines/t", r.report.output.lines / t},
                     {"height-h", static_cast<double>(r.report.output.height) - static_cast<double>(r.report.input.height)},
                     {"size/s", static_cast<double>(r.report.output.size) / static_cast<double>(r.report.input.size)}};
  return r;
}

// ---- NM to Frege ----

enum class NmToFregeMode { Basic, Ret };

// Per-node data of the NM-to-Frege simulations: the injective enumeration of labels, the
// sequences A'_v indexed by that enumeration, and the stage formulas δ_v.
struct SegmentTable {
  std::vector<Formula> enumeration;
  std::vector<FormulaSeq> a_prime;
  std::vector<Formula> delta;
  std::vector<std::size_t> order;  // topological order used by the block constructions
};

inline SegmentTable nm_segment_table(const NmDerivation& d, const FormulaSet& gamma, NmToFregeMode mode) {
  SegmentTable st;
  st.order = topological_order(d);
  std::unordered_map<const void*, std::int64_t> idx;
  for (std::size_t v : st.order)
    if (idx.emplace(d.labels[v].id(), static_cast<std::int64_t>(st.enumeration.size())).second)
      st.enumeration.push_back(d.labels[v]);
  auto amap = assumptions(d);
  st.a_prime.resize(d.node_count());
  st.delta.resize(d.node_count());
  for (std::size_t v = 0; v < d.node_count(); ++v) {
    std::vector<std::pair<std::int64_t, Formula>> es;
    for (const auto& f : amap[v])
      if (!gamma.count(f)) es.push_back({idx.at(f.id()), f});
    std::sort(es.begin(), es.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    FormulaSeq s;
    for (auto& [i, f] : es) s.push(i, f);
    st.a_prime[v] = s;
    st.delta[v] = mode == NmToFregeMode::Basic ? fold_imp(s, d.labels[v])
                                                : imp(ret_build(d.labels[v], s), d.labels[v]);
  }
  return st;
}

namespace detail {

inline std::set<std::int64_t> dom_set(const FormulaSeq& s) {
  auto d = s.domain();
  return {d.begin(), d.end()};
}

inline std::vector<char> mask_in(const FormulaSeq& big, const FormulaSeq& small) {
  std::vector<char> m;
  for (const auto& e : big.entries()) m.push_back(small.at(e.index) != nullptr);
  return m;
}

inline std::size_t find_pos(const FormulaSeq& s, const Formula& f) {
  const auto& es = s.entries();
  for (std::size_t i = 0; i < es.size(); ++i)
    if (es[i].formula == f) return i;
  return static_cast<std::size_t>(-1);
}

// Minor and major premise of an →E node.
inline std::pair<std::size_t, std::size_t> elim_premises(const NmDerivation& d, std::size_t v) {
  std::size_t x = d.premises[v][0], y = d.premises[v][1];
  if (d.labels[y].is_imp() && d.labels[y].lhs() == d.labels[x] && d.labels[y].rhs() == d.labels[v]) return {x, y};
  return {y, x};
}

// Basic-mode step for node v: given nodes proving δ_u for its premises, a node proving δ_v.
inline std::size_t basic_step(DagBuilder& b, const NmDerivation& d, const FormulaSet& gamma, const SegmentTable& st,
                              std::size_t v, const std::vector<std::size_t>& out) {
  const auto& ps = d.premises[v];
  const Formula& g = d.labels[v];
  const FormulaSeq& av = st.a_prime[v];
  if (ps.empty()) return gamma.count(g) ? b.leaf(g) : identity_proof(b, g);
  if (ps.size() == 1) {
    std::size_t u = ps[0];
    const FormulaSeq& au = st.a_prime[u];
    const Formula& alpha = g.lhs();
    const Formula& beta = g.rhs();
    std::size_t j = find_pos(au, alpha);
    std::size_t step;
    if (j != static_cast<std::size_t>(-1)) {
      auto xs = au.formulas();
      std::vector<Formula> lower(xs.begin(), xs.begin() + j), upper(xs.begin() + j + 1, xs.end());
      step = weak_exchange_node(b, upper, {alpha}, lower, beta);
    } else {
      std::vector<Formula> big = concat({{alpha}, av.formulas()});
      std::vector<char> keep(big.size(), 1);
      keep[0] = 0;
      step = subset_node(b, big, keep, beta);
    }
    return b.mp(out[u], step);
  }
  auto [u0, u1] = elim_premises(d, v);
  const Formula& alpha = d.labels[u0];
  auto vf = av.formulas();
  std::size_t x0 = b.mp(out[u0], subset_node(b, vf, mask_in(av, st.a_prime[u0]), alpha));
  std::size_t x1 = b.mp(out[u1], subset_node(b, vf, mask_in(av, st.a_prime[u1]), d.labels[u1]));
  std::size_t w = b.mp(x1, weak_apply_node(b, vf, alpha, g));
  return b.mp(x0, w);
}

// RET-mode step in closed form: a proof of δ_v (leaf), δ_u → δ_v (→I), or δ_u0 → δ_u1 → δ_v (→E, minor
// premise first). Leaves whose label is in Γ get a derivation of δ_v from Γ instead.
inline std::size_t ret_step_closed(DagBuilder& b, const NmDerivation& d, const FormulaSet& gamma,
                                   const SegmentTable& st, std::size_t v) {
  const auto& ps = d.premises[v];
  const Formula& g = d.labels[v];
  const FormulaSeq& av = st.a_prime[v];
  const Formula a = detail::mv("a"), bb = detail::mv("b"), c = detail::mv("c"), T = top();
  const Formula vv = detail::mv("v"), w = detail::mv("w"), u = detail::mv("u"), x = detail::mv("x"),
                y = detail::mv("y"), x0 = detail::mv("x0"), x1 = detail::mv("x1");
  if (ps.empty()) {
    if (gamma.count(g)) return lift(b, b.leaf(g), T);
    return use_schema(b, schema(imp(rel_pow(a, a), a), "ret_leaf"), {{"a", g}});
  }
  if (ps.size() == 1) {
    std::size_t uu = ps[0];
    const Formula& alpha = g.lhs();
    const Formula& beta = g.rhs();
    // ambient: A'_v plus α at its enumeration index (or a fresh one past the end)
    std::int64_t ia = static_cast<std::int64_t>(st.enumeration.size());
    for (std::size_t i = 0; i < st.enumeration.size(); ++i)
      if (st.enumeration[i] == alpha) ia = static_cast<std::int64_t>(i);
    FormulaSeq amb;
    bool placed = false;
    for (const auto& e : av.entries()) {
      if (!placed && ia < e.index) {
        amb.push(ia, alpha);
        placed = true;
      }
      amb.push(e.index, e.formula);
    }
    if (!placed) amb.push(ia, alpha);
    std::size_t l14 = ret_subset_node(b, beta, amb, dom_set(av), {ia}, dom_set(st.a_prime[uu]));
    std::size_t l15 = ret_transfer_node(b, g, beta, av);
    // v → α^β → u,  w → (v → α → β) → α → β  ⊢  (u → β) → w → α → β
    const auto& t = schema({imps({vv, rel_pow(a, bb), u}), imps({w, imps({vv, a, bb}), a, bb})}, imps({imp(u, bb), w, a, bb}),
                           "ret_intro_combine");
    Substitution s{{"a", alpha}, {"b", beta}, {"u", ret_build(beta, st.a_prime[uu])}, {"v", ret_build(beta, av)},
                   {"w", ret_build(g, av)}};
    return use_schema(b, t, s, {l14, l15});
  }
  auto [u0, u1] = elim_premises(d, v);
  std::size_t half[2];
  std::size_t prem[2] = {u0, u1};
  for (int i = 0; i < 2; ++i) {
    const FormulaSeq& ax = st.a_prime[prem[i]];
    const Formula& gx = d.labels[prem[i]];
    std::size_t s = ret_subset_node(b, g, av, dom_set(av), {}, dom_set(ax));
    std::size_t t15 = ret_transfer_node(b, g, gx, ax);
    // v → ⊤ → y,  y → (x → β) → β  ⊢  (x → c) → v → (c → β) → β
    const auto& t = schema({imps({vv, T, y}), imps({y, imp(x, bb), bb})}, imps({imp(x, c), vv, imp(c, bb), bb}),
                           "ret_elim_premise");
    Substitution sg{{"b", g}, {"c", gx}, {"v", ret_build(g, av)}, {"x", ret_build(gx, ax)}, {"y", ret_build(g, ax)}};
    half[i] = use_schema(b, t, sg, {s, t15});
  }
  // combine with α^β → (α → β)^β → β
  const auto& t = schema({imps({imp(x0, a), vv, rel_pow(a, bb)}), imps({imp(x1, imp(a, bb)), vv, rel_pow(imp(a, bb), bb)})},
                         imps({imp(x0, a), imp(x1, imp(a, bb)), vv, bb}), "ret_elim_combine");
  Substitution s{{"a", d.labels[u0]},
                 {"b", g},
                 {"v", ret_build(g, av)},
                 {"x0", ret_build(d.labels[u0], st.a_prime[u0])},
                 {"x1", ret_build(d.labels[u1], st.a_prime[u1])}};
  return use_schema(b, t, s, {half[0], half[1]});
}

inline void require_nm_input(const NmDerivation& d, const FormulaSet& gamma, const Formula& phi, const char* who) {
  auto in = check_nm(d, gamma, phi);
  if (!in) throw std::invalid_argument(std::string(who) + ": input rejected: " + in.describe());
}

}  // namespace detail

inline TransformResult nm_to_frege(const NmDerivation& d, const FormulaSet& gamma, const Formula& phi,
                                   NmToFregeMode mode = NmToFregeMode::Basic) {
  detail::require_nm_input(d, gamma, phi, "nm_to_frege");
  auto st = nm_segment_table(d, gamma, mode);
  DagBuilder b;
  std::vector<std::size_t> out(d.node_count());
  for (std::size_t v : st.order) {
    if (mode == NmToFregeMode::Basic) {
      out[v] = detail::basic_step(b, d, gamma, st, v, out);
      continue;
    }
    std::size_t c = detail::ret_step_closed(b, d, gamma, st, v);
    const auto& ps = d.premises[v];
    if (ps.size() == 1) c = b.mp(out[ps[0]], c);
    if (ps.size() == 2) {
      auto [u0, u1] = detail::elim_premises(d, v);
      c = b.mp(out[u1], b.mp(out[u0], c));
    }
    out[v] = c;
  }
  std::size_t root = out[d.root];
  if (mode == NmToFregeMode::Ret) root = b.mp(detail::top_proof(b), root);
  TransformResult r;
  r.proof = b.finish(root, "f");
  r.report.transform = mode == NmToFregeMode::Basic ? "nm_to_frege/basic" : "nm_to_frege/ret";
  r.report.input = nm_metrics(d);
  r.report.output = frege_metrics(r.proof);
  r.report.verdict = check_frege_dag(r.proof, gamma, phi);
  detail::require_check(r.report.verdict, r.report.transform);
  double t = static_cast<double>(r.report.input.lines);
  double h = static_cast<double>(std::max<std::uint64_t>(r.report.input.height, 1));
  double s = static_cast<double>(r.report.input.size);
  double si = static_cast<double>(r.report.input.inferential_size);
  r.report.fitted = {{"lines/t^2", r.report.output.lines / (t * t)}, {"height/h", r.report.output.height / h}};
  if (mode == NmToFregeMode::Basic) r.report.fitted.push_back({"size/(s t^2)", r.report.output.size / (s * t * t)});
  else r.report.fitted.push_back({"size/(s~ t log t)", r.report.output.size / (si * t * log2_at_least_1(t))});
  return r;
}

// ---- Frege dag to tree: block construction ----

struct BlockEntry {
  std::size_t j = 0, k = 0;
  std::set<std::int64_t> premises;  // P_j^k
  FormulaSeq gamma, delta;          // Γ_j^k, Δ_j^k
  Formula tau;                      // τ_j^k
};

namespace detail {

struct BlockPlan {
  std::vector<Formula> lines;
  std::vector<std::vector<std::size_t>> prem;  // edges (i, j) with i < j
  Formula phi;

  std::size_t t() const { return lines.size(); }

  std::set<std::int64_t> P(std::size_t j, std::size_t jend) const {
    std::set<std::int64_t> out;
    for (std::size_t i = j; i < jend; ++i)
      for (std::size_t u : prem[i])
        if (u < j) out.insert(static_cast<std::int64_t>(u));
    return out;
  }

  FormulaSeq seq(const std::set<std::int64_t>& idx) const {
    FormulaSeq s;
    for (auto i : idx) s.push(i, lines[static_cast<std::size_t>(i)]);
    return s;
  }

  static std::set<std::int64_t> range(std::size_t a, std::size_t e) {
    std::set<std::int64_t> r;
    for (std::size_t i = a; i < e; ++i) r.insert(static_cast<std::int64_t>(i));
    return r;
  }

  Formula tau(std::size_t j, std::size_t jend) const {
    return imp(ret_build(phi, seq(P(j, jend))), ret_build(phi, seq(range(j, jend))));
  }
};

inline std::size_t ceil_log2(std::size_t t) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < t) ++k;
  return k;
}

// Merges the base derivations Π_j^0 (base[j] proves τ_j^0) level by level; returns a node proving
// RET_φ ⟨λ_(t-1)⟩, i.e. λ_(t-1)^φ.
inline std::size_t block_merge(DagBuilder& b, const BlockPlan& plan, std::vector<std::size_t> cur) {
  const std::size_t t = plan.t();
  const std::size_t K = ceil_log2(t);
  const Formula& phi = plan.phi;
  const Formula d = mv("d"), d1 = mv("d1"), d2 = mv("d2"), g = mv("g"), g1 = mv("g1"), g2 = mv("g2"), T = top();
  const auto& glue = schema({imp(d1, g1), imp(d2, g2), imps({d, T, d1}), imps({d, g1, d2}), imps({g1, g2, g})}, imp(d, g),
                            "block_merge");
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t step = std::size_t{1} << k;
    for (std::size_t j = 0; j < t; j += 2 * step) {
      std::size_t j2 = j + step;
      if (j2 >= t) continue;
      std::size_t je = std::min(j + 2 * step, t);
      auto pj1 = plan.P(j, je), pj = plan.P(j, j2), pj2 = plan.P(j2, je);
      auto g1r = BlockPlan::range(j, j2), g2r = BlockPlan::range(j2, je), gr = BlockPlan::range(j, je);
      std::size_t a = ret_subset_node(b, phi, plan.seq(pj1), pj1, {}, pj);
      std::set<std::int64_t> amb = pj1;
      amb.insert(g1r.begin(), g1r.end());
      std::size_t bb = ret_subset_node(b, phi, plan.seq(amb), pj1, g1r, pj2);
      std::size_t c = ret_subset_node(b, phi, plan.seq(gr), g1r, g2r, gr);
      Substitution s{{"d", ret_build(phi, plan.seq(pj1))},  {"d1", ret_build(phi, plan.seq(pj))},
                     {"d2", ret_build(phi, plan.seq(pj2))}, {"g", ret_build(phi, plan.seq(gr))},
                     {"g1", ret_build(phi, plan.seq(g1r))}, {"g2", ret_build(phi, plan.seq(g2r))}};
      cur[j] = use_schema(b, glue, s, {cur[j], cur[j2], a, bb, c});
    }
  }
  // τ_0^K = ⊤ → RET_φ ⟨λ_i⟩_(i<t); project onto the last line
  std::size_t all = b.mp(top_proof(b), cur[0]);
  auto full = BlockPlan::range(0, t);
  std::size_t proj = ret_subset_node(b, phi, plan.seq(full), full, {}, {static_cast<std::int64_t>(t - 1)});
  return b.mp(top_proof(b), b.mp(all, proj));
}

inline std::vector<BlockEntry> block_table(const BlockPlan& plan) {
  std::vector<BlockEntry> out;
  const std::size_t t = plan.t();
  for (std::size_t k = 0; k <= ceil_log2(t); ++k) {
    std::size_t step = std::size_t{1} << k;
    for (std::size_t j = 0; j < t; j += step) {
      std::size_t je = std::min(j + step, t);
      BlockEntry e;
      e.j = j;
      e.k = k;
      e.premises = plan.P(j, je);
      e.gamma = plan.seq(BlockPlan::range(j, je));
      e.delta = plan.seq(e.premises);
      e.tau = plan.tau(j, je);
      out.push_back(std::move(e));
    }
  }
  return out;
}

// Non-redundant line sequence with earliest-justification edges, pruned to what the root needs.
inline BlockPlan frege_plan(const FregeDagDerivation& pi, const FormulaSet& gamma, const Formula& phi) {
  FregeSeq lines = dedup(dag_to_seq(pi));
  // φ may already occur before the last line; nothing after its first occurrence is needed
  lines.resize(static_cast<std::size_t>(std::find(lines.begin(), lines.end(), phi) - lines.begin()) + 1);
  FregeDagDerivation d = seq_to_dag(lines, gamma, true);
  BlockPlan p;
  p.lines = d.labels;
  p.prem = d.premises;
  p.phi = phi;
  return p;
}

}  // namespace detail

inline std::vector<BlockEntry> frege_block_table(const FregeDagDerivation& pi, const FormulaSet& gamma, const Formula& phi) {
  return detail::block_table(detail::frege_plan(pi, gamma, phi));
}

inline TransformResult frege_dag_to_tree(const FregeDagDerivation& pi, const FormulaSet& gamma, const Formula& phi) {
  auto in = check_frege_dag(pi, gamma, phi);
  if (!in) throw std::invalid_argument("frege_dag_to_tree: input rejected: " + in.describe());
  auto plan = detail::frege_plan(pi, gamma, phi);
  const Formula a = detail::mv("a"), bb = detail::mv("b"), f = detail::mv("f"), T = top();
  DagBuilder b;
  std::vector<std::size_t> base(plan.t());
  for (std::size_t j = 0; j < plan.t(); ++j) {
    const auto& ps = plan.prem[j];
    const Formula& g = plan.lines[j];
    if (ps.empty()) {
      base[j] = use_schema(b, schema({a}, imp(T, rel_pow(a, f)), "block_base_leaf"), {{"a", g}, {"f", phi}}, {b.leaf(g)});
      continue;
    }
    std::size_t x = ps[0], y = ps[1];
    if (!(plan.lines[y].is_imp() && plan.lines[y].lhs() == plan.lines[x])) std::swap(x, y);
    Formula minor = rel_pow(a, f), major = rel_pow(imp(a, bb), f);
    Formula conj = x < y ? rel_conj(minor, major, f) : rel_conj(major, minor, f);
    base[j] = use_schema(b, schema(imp(conj, rel_pow(bb, f)), "block_base_mp"),
                         {{"a", plan.lines[x]}, {"b", g}, {"f", phi}});
  }
  std::size_t pow = detail::block_merge(b, plan, base);
  std::size_t root = b.mp(identity_proof(b, phi), pow);
  TransformResult r;
  r.proof = b.finish(root, "f");
  r.report.transform = "frege_dag_to_tree";
  r.report.input = frege_metrics(pi);
  r.report.output = frege_metrics(r.proof);
  r.report.verdict = check_frege_dag(r.proof, gamma, phi);
  detail::require_check(r.report.verdict, "frege_dag_to_tree");
  if (!is_tree(r.proof)) throw std::logic_error("frege_dag_to_tree: output is not tree-like");
  r.report.notes.push_back("non-redundant lines: " + std::to_string(plan.t()));
  r.report.notes.push_back("final step: φ^φ detached with ⊢ φ → φ");
  double t = static_cast<double>(plan.t());
  double lt = log2_at_least_1(t);
  double s = static_cast<double>(r.report.input.size);
  r.report.fitted = {{"lines/(t log t)", r.report.output.lines / (t * lt)},
                     {"height/log t", r.report.output.height / lt},
                     {"size/((s+|phi|t) log^2 t)", r.report.output.size / ((s + phi.size() * t) * lt * lt)}};
  return r;
}

inline TreePair nm_to_tree(const NmDerivation& d, const FormulaSet& gamma, const Formula& phi) {
  detail::require_nm_input(d, gamma, phi, "nm_to_tree");
  auto st = nm_segment_table(d, gamma, NmToFregeMode::Ret);
  // renumber along the topological order so that edges point forward
  std::vector<std::size_t> pos(d.node_count());
  for (std::size_t i = 0; i < st.order.size(); ++i) pos[st.order[i]] = i;
  detail::BlockPlan plan;
  plan.phi = phi;
  for (std::size_t v : st.order) {
    plan.lines.push_back(st.delta[v]);
    std::vector<std::size_t> ps;
    for (std::size_t u : d.premises[v]) ps.push_back(pos[u]);
    plan.prem.push_back(ps);
  }
  const Formula c = detail::mv("c"), f = detail::mv("f"), x = detail::mv("x"), x0 = detail::mv("x0"),
                x1 = detail::mv("x1"), T = top();
  DagBuilder b;
  std::vector<std::size_t> base(plan.t());
  for (std::size_t j = 0; j < plan.t(); ++j) {
    std::size_t v = st.order[j];
    std::size_t closed = detail::ret_step_closed(b, d, gamma, st, v);
    const auto& ps = d.premises[v];
    Substitution s{{"c", st.delta[v]}, {"f", phi}};
    if (ps.empty()) {
      base[j] = use_schema(b, schema({c}, imp(T, rel_pow(c, f)), "block_base_leaf_nm"), s, {closed});
    } else if (ps.size() == 1) {
      s["x"] = st.delta[ps[0]];
      base[j] = use_schema(b, schema({imp(x, c)}, imp(rel_pow(x, f), rel_pow(c, f)), "block_base_intro"), s, {closed});
    } else {
      auto [u0, u1] = detail::elim_premises(d, v);
      s["x0"] = st.delta[u0];
      s["x1"] = st.delta[u1];
      Formula conj = pos[u0] < pos[u1] ? rel_conj(rel_pow(x0, f), rel_pow(x1, f), f) : rel_conj(rel_pow(x1, f), rel_pow(x0, f), f);
      base[j] = use_schema(b, schema({imps({x0, x1, c})}, imp(conj, rel_pow(c, f)), "block_base_elim"), s, {closed});
    }
  }
  // the last line is δ_root = ⊤ → φ; (⊤ → φ)^φ gives φ
  std::size_t pow = detail::block_merge(b, plan, base);
  std::size_t fin = use_schema(b, schema(imp(imp(top(), f), f), "ret_unwrap"), {{"f", phi}});
  std::size_t root = b.mp(fin, pow);
  TreePair r;
  r.frege = b.finish(root, "f");
  r.report.transform = "nm_to_tree";
  r.report.input = nm_metrics(d);
  r.report.output = frege_metrics(r.frege);
  r.report.verdict = check_frege_dag(r.frege, gamma, phi);
  detail::require_check(r.report.verdict, "nm_to_tree (Frege leg)");
  if (!is_tree(r.frege)) throw std::logic_error("nm_to_tree: Frege leg is not tree-like");
  r.nm = frege_to_nm(r.frege, gamma, phi).proof;
  if (!is_tree(r.nm)) throw std::logic_error("nm_to_tree: NM leg is not tree-like");
  double t = static_cast<double>(r.report.input.lines);
  double lt = log2_at_least_1(t);
  double si = static_cast<double>(r.report.input.inferential_size);
  r.report.fitted = {{"lines/t^2", r.report.output.lines / (t * t)},
                     {"height/log t", r.report.output.height / lt},
                     {"size/(s~ t log^2 t)", r.report.output.size / (si * t * lt * lt)}};
  r.report.notes.push_back("NM leg: " + std::to_string(r.nm.node_count()) + " nodes, height " +
                           std::to_string(nm_metrics(r.nm).height));
  return r;
}

// ---- deduction ----

// From a derivation of φ from Γ ∪ Δ, one of Γ → φ from Δ, discharging Γ's entries in index order.
inline TransformResult deduction(const FregeDagDerivation& pi, const FormulaSeq& gamma, const FormulaSet& delta) {
  FormulaSet all = delta;
  for (const auto& e : gamma.entries()) all.insert(e.formula);
  const Formula& phi = pi.labels.at(pi.root);
  auto in = check_frege_dag(pi, all, phi);
  if (!in) throw std::invalid_argument("deduction: input rejected: " + in.describe());
  Derivation cur = pi;
  for (const auto& e : gamma.entries()) {
    if (delta.count(e.formula)) {
      // still available from Δ: a plain lift keeps it as an assumption
      DagBuilder b;
      cur = b.finish(lift(b, b.import(cur), e.formula));
      continue;
    }
    DagBuilder b;
    cur = b.finish(discharge(b, cur, e.formula));
  }
  TransformResult r;
  r.proof = std::move(cur);
  r.report.transform = "deduction";
  r.report.input = frege_metrics(pi);
  r.report.output = frege_metrics(r.proof);
  r.report.verdict = check_frege_dag(r.proof, delta, fold_imp(gamma, phi));
  detail::require_check(r.report.verdict, "deduction");
  r.report.fitted = {{"lines/t", static_cast<double>(r.report.output.lines) / r.report.input.lines}};
  return r;
}

inline TransformResult deduction(const FregeDagDerivation& pi, const FormulaSeq& gamma) {
  FormulaSet g;
  for (const auto& e : gamma.entries()) g.insert(e.formula);
  FormulaSet delta;
  for (std::size_t v = 0; v < pi.node_count(); ++v)
    if (pi.premises[v].empty() && !g.count(pi.labels[v]) && !is_axiom(pi.labels[v])) delta.insert(pi.labels[v]);
  return deduction(pi, gamma, delta);
}

}  // namespace nmx
