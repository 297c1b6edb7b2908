#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmx/circuits.hpp"
#include "nmx/formula.hpp"
#include "nmx/natded.hpp"
#include "nmx/semantics.hpp"

namespace nmx {

inline std::string p_name(int i, int j) { return "p_" + std::to_string(i) + "_" + std::to_string(j); }
inline std::string pp_name(int i, int j) { return "pp_" + std::to_string(i) + "_" + std::to_string(j); }
inline std::string q_name(int i, int l) { return "q_" + std::to_string(i) + "_" + std::to_string(l); }
inline std::string r_name(int m, int i) { return "r_" + std::to_string(m) + "_" + std::to_string(i); }

inline int isqrt_floor(int n) { return cc_k(n); }

struct TautFamilyInstance {
  int n = 0;
  int k = 0;
  Formula alpha, beta, tau;
  // naming tables, each in the enumeration order used to build the formulas
  std::vector<std::string> p, pp, q, r;
  std::string u = "u", v = "v", w = "w";
};

// The implicational Clique–Colouring tautologies. Every multi-indexed block is enumerated in
// ascending lexicographic order of its indices and folded so the last entry is outermost.
inline TautFamilyInstance build_tau(int n) {
  if (n < 2) throw std::invalid_argument("build_tau: n must be at least 2");
  TautFamilyInstance t;
  t.n = n;
  t.k = isqrt_floor(n);
  const int k = t.k;
  Formula u = var("u"), v = var("v"), w = var("w");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.p.push_back(p_name(i, j));
      t.pp.push_back(pp_name(i, j));
    }
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < k; ++l) t.q.push_back(q_name(i, l));
  for (int m = 0; m <= k; ++m)
    for (int i = 0; i < n; ++i) t.r.push_back(r_name(m, i));

  // α_n: ⟨⟨q_il → v⟩_l → v⟩_i → ⟨q_il → q_jl → p_ij → v⟩_(i,j,l) → v
  std::vector<Formula> guards, triples;
  for (int i = 0; i < n; ++i) {
    std::vector<Formula> inner;
    for (int l = 0; l < k; ++l) inner.push_back(imp(var(q_name(i, l)), v));
    guards.push_back(fold_imp(inner, v));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < k; ++l) triples.push_back(imps({var(q_name(i, l)), var(q_name(j, l)), var(p_name(i, j)), v}));
  t.alpha = fold_imp(guards, fold_imp(triples, v));

  // β_n: ⟨⟨r_mi → w⟩_i → w⟩_m → ⟨r_li → r_mj → pp_ij → w⟩_(l<m,i,j) → w
  std::vector<Formula> bguards, btriples;
  for (int m = 0; m <= k; ++m) {
    std::vector<Formula> inner;
    for (int i = 0; i < n; ++i) inner.push_back(imp(var(r_name(m, i)), w));
    bguards.push_back(fold_imp(inner, w));
  }
  for (int l = 0; l <= k; ++l)
    for (int m = l + 1; m <= k; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          btriples.push_back(imps({var(r_name(l, i)), var(r_name(m, j)), var(pp_name(i, j)), w}));
  t.beta = fold_imp(bguards, fold_imp(btriples, w));

  std::vector<Formula> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) edges.push_back(imps({imp(var(p_name(i, j)), u), imp(var(pp_name(i, j)), u), u}));
  t.tau = fold_imp(edges, imps({imp(t.alpha, u), imp(t.beta, u), u}));
  return t;
}

inline InterpolationShape make_shape(const TautFamilyInstance& t) {
  InterpolationShape s;
  s.n = t.p.size();
  s.p = t.p;
  s.pp = t.pp;
  s.q = t.q;
  s.r = t.r;
  s.alpha_aux = {t.v};
  s.beta_aux = {t.w};
  s.u = t.u;
  s.alpha = t.alpha;
  s.beta = t.beta;
  return s;
}

struct TauValidation {
  Verdict verdict = Verdict::Budget;
  std::optional<NmDerivation> proof;  // compacted dag witness when valid
  std::optional<KripkeModel> countermodel;
  std::uint64_t states = 0;
};

inline TauValidation validate_formula(const Formula& f, std::uint64_t budget = 1'000'000) {
  DecideOptions opt;
  opt.budget = budget;
  opt.tree_witness = false;
  auto r = decide(std::vector<Formula>{}, f, opt);
  if (r.proof) r.proof = compact_nm(*r.proof);
  return {r.verdict, std::move(r.proof), std::move(r.countermodel), r.states};
}

inline TauValidation validate_tau(int n, std::uint64_t budget = 1'000'000) {
  return validate_formula(build_tau(n).tau, budget);
}

// Moves an interpolant over the p_i_j to the edge variables of K_n: p_i_j and p_j_i both become
// e_min_max, and p_i_i becomes the constant 0.
inline MonotoneCircuit specialize_to_cc(const MonotoneCircuit& c, int n) {
  std::map<std::string, MonotoneCircuit> to;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) to[p_name(i, j)] = i == j ? circuit_constant(false) : circuit_var(edge_var(i, j));
  return substitute_circuit(c, [&](const std::string& name) {
    auto it = to.find(name);
    if (it == to.end()) throw std::invalid_argument("specialize_to_cc: stray variable '" + name + "'");
    return it->second;
  });
}

}  // namespace nmx
