#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/circuits.hpp"
#include "nmx/formula.hpp"
#include "nmx/natded.hpp"

namespace nmx {

// P_0 ⊆ P_1 ⊆ … with P_{i+1} = P_i ∪ {γ_v : A_v ⊆ P_i}. Stored as the formulas each stage adds;
// stage(i) rebuilds P_i.
struct ClosureTrace {
  FormulaSet initial;
  std::vector<std::vector<Formula>> added;  // added[i] = P_{i+1} ∖ P_i, all nonempty
  FormulaSet result;

  // Least i with P_i = P_{i+1}.
  std::size_t fixpoint() const { return added.size(); }

  FormulaSet stage(std::size_t i) const {
    FormulaSet s = initial;
    for (std::size_t k = 0; k < i && k < added.size(); ++k) s.insert(added[k].begin(), added[k].end());
    return s;
  }

  bool contains(const Formula& f) const { return result.count(f) != 0; }
};

// The closure by the literal round schedule: every round rescans all nodes. Test oracle.
inline ClosureTrace closure_literal(const NmDerivation& d, const FormulaSet& p) {
  auto a = assumptions(d);
  ClosureTrace tr;
  tr.initial = p;
  FormulaSet cur = p;
  for (std::size_t round = 0; round < d.node_count(); ++round) {
    std::vector<Formula> fresh;
    for (std::size_t v = 0; v < d.node_count(); ++v) {
      if (cur.count(d.labels[v])) continue;
      bool inside = true;
      for (const auto& f : a[v])
        if (!cur.count(f)) {
          inside = false;
          break;
        }
      if (inside) fresh.push_back(d.labels[v]);
    }
    if (fresh.empty()) break;
    std::sort(fresh.begin(), fresh.end(), FormulaLess());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    cur.insert(fresh.begin(), fresh.end());
    tr.added.push_back(std::move(fresh));
  }
  tr.result = std::move(cur);
  return tr;
}

namespace detail {

// A_v as indices into a formula table that covers every label of d.
struct IndexedAssumptions {
  std::vector<Formula> table;
  std::unordered_map<const void*, std::size_t> index;
  std::vector<std::vector<std::size_t>> a;  // per node
  std::vector<std::size_t> label;           // per node

  std::size_t id(const Formula& f) {
    auto [it, fresh] = index.emplace(f.id(), table.size());
    if (fresh) table.push_back(f);
    return it->second;
  }
};

inline IndexedAssumptions index_assumptions(const NmDerivation& d, const std::vector<Formula>& seed = {}) {
  IndexedAssumptions ix;
  for (const auto& f : seed) ix.id(f);
  auto a = assumptions(d);
  ix.a.resize(d.node_count());
  ix.label.resize(d.node_count());
  for (std::size_t v = 0; v < d.node_count(); ++v) {
    ix.label[v] = ix.id(d.labels[v]);
    for (const auto& f : a[v]) ix.a[v].push_back(ix.id(f));
  }
  return ix;
}

}  // namespace detail

// Worklist closure: each node waits for the members of A_v still missing, so the whole run costs
// Σ|A_v|. Processing level by level yields the same stages as the literal schedule.
inline ClosureTrace closure(const NmDerivation& d, const FormulaSet& p) {
  std::vector<Formula> seed(p.begin(), p.end());
  auto ix = detail::index_assumptions(d, seed);
  const std::size_t n = ix.table.size();
  std::vector<char> in(n, 0);
  for (std::size_t i = 0; i < seed.size(); ++i) in[i] = 1;
  std::vector<std::vector<std::size_t>> users(n);
  std::vector<std::size_t> missing(d.node_count(), 0);
  std::vector<std::size_t> frontier;
  for (std::size_t v = 0; v < d.node_count(); ++v) {
    for (std::size_t f : ix.a[v]) {
      users[f].push_back(v);
      if (!in[f]) ++missing[v];
    }
    if (missing[v] == 0 && !in[ix.label[v]]) frontier.push_back(ix.label[v]);
  }
  ClosureTrace tr;
  tr.initial = p;
  tr.result = p;
  while (!frontier.empty()) {
    std::vector<std::size_t> level;
    for (std::size_t f : frontier)
      if (!in[f]) {
        in[f] = 1;
        level.push_back(f);
      }
    frontier.clear();
    if (level.empty()) break;
    std::vector<Formula> added;
    for (std::size_t f : level) {
      added.push_back(ix.table[f]);
      tr.result.insert(ix.table[f]);
      for (std::size_t v : users[f])
        if (--missing[v] == 0 && !in[ix.label[v]]) frontier.push_back(ix.label[v]);
    }
    std::sort(added.begin(), added.end(), FormulaLess());
    tr.added.push_back(std::move(added));
  }
  return tr;
}

struct ClosureCircuitOptions {
  // Build the layered circuit exactly as wired in the construction, one y gate per formula and
  // z gate per node at each of the t stages, before pruning. Otherwise gates are folded and
  // shared, and stages stop once they no longer change anything.
  bool literal = false;
  std::vector<std::string> input_names;  // defaults to x_0, x_1, …
  std::map<std::size_t, bool> fixed;     // inputs replaced by constants
};

struct ClosureCircuit {
  MonotoneCircuit circuit;
  std::uint64_t lines = 0;          // t
  std::uint64_t inputs = 0;         // n = |F|
  std::uint64_t literal_wires = 0;  // t (n + t + Σ|A_v|): the unpruned layered circuit
  std::uint64_t bound = 0;          // (n + t + nt) t
  std::size_t stages = 0;           // stages actually built
};

// Monotone circuit deciding φ ∈ cls_D({F_i : x_i = 1}).
inline ClosureCircuit closure_circuit(const NmDerivation& d, const std::vector<Formula>& f, const Formula& phi,
                                      const ClosureCircuitOptions& opt = {}) {
  const std::size_t n = f.size();
  std::unordered_map<const void*, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i)
    if (!pos.emplace(f[i].id(), i).second) throw std::invalid_argument("closure_circuit: duplicate formula " + render(f[i]));
  auto target = pos.find(phi.id());
  if (target == pos.end()) throw std::invalid_argument("closure_circuit: target is not in F");
  for (const auto& l : d.labels)
    if (!pos.count(l.id())) throw std::invalid_argument("closure_circuit: label " + render(l) + " is not in F");
  if (!opt.input_names.empty() && opt.input_names.size() != n)
    throw std::invalid_argument("closure_circuit: need one input name per formula");

  auto ix = detail::index_assumptions(d, f);  // table == f
  const std::size_t t = d.node_count();
  ClosureCircuit out;
  out.lines = t;
  out.inputs = n;
  std::uint64_t sum_a = 0;
  for (const auto& av : ix.a) sum_a += av.size();
  out.literal_wires = t * (n + t + sum_a);
  out.bound = (n + t + n * t) * t;

  CircuitBuilder b(!opt.literal);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto fx = opt.fixed.find(i);
    if (fx != opt.fixed.end()) {
      y[i] = b.constant(fx->second);
    } else {
      y[i] = b.var(opt.input_names.empty() ? "x_" + std::to_string(i) : opt.input_names[i]);
    }
  }
  const std::size_t goal = target->second;
  bool derivable = false;
  for (std::size_t v = 0; v < t; ++v) derivable |= ix.label[v] == goal;
  if (!derivable) {
    // Not a label: membership in the closure is membership in the input set.
    out.circuit = b.finish(y[goal]);
    return out;
  }
  std::vector<std::vector<std::size_t>> producers(n);
  for (std::size_t v = 0; v < t; ++v) producers[ix.label[v]].push_back(v);
  // P_i can grow strictly only while new labels arrive, so the closure is reached after as many
  // stages as there are distinct labels; the literal circuit still uses all t.
  std::size_t rounds = t;
  if (!opt.literal) {
    std::size_t distinct = 0;
    for (const auto& pv : producers) distinct += !pv.empty();
    rounds = std::min(t, distinct);
  }
  std::vector<std::size_t> z(t);
  for (std::size_t j = 0; j < rounds; ++j) {
    for (std::size_t v = 0; v < t; ++v) {
      std::vector<std::size_t> in;
      for (std::size_t i : ix.a[v]) in.push_back(y[i]);
      z[v] = b.and_gate(std::move(in));
    }
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> in{y[i]};
      for (std::size_t v : producers[i]) in.push_back(z[v]);
      next[i] = b.or_gate(std::move(in));
    }
    ++out.stages;
    bool same = next == y;
    y = std::move(next);
    if (same && !opt.literal) break;
  }
  out.circuit = b.finish(y[goal]);
  return out;
}

// ---- Kleene slash ----

// A P-slash is fixed by P and its values on variables. ‖φ means |φ and φ ∈ P.
struct SlashContext {
  FormulaSet p;
  std::map<std::string, bool> base;
  bool default_base = true;  // value on variables absent from base
};

// The choice made for interpolation: every variable slashed except u.
inline SlashContext slash_context(FormulaSet p, const std::string& u) {
  SlashContext c;
  c.p = std::move(p);
  c.base[u] = false;
  return c;
}

inline bool slash(const SlashContext& c, const Formula& f) {
  if (f.is_var()) {
    auto it = c.base.find(f.name());
    return it == c.base.end() ? c.default_base : it->second;
  }
  // |(φ → ψ) iff ‖φ implies |ψ
  if (c.p.count(f.lhs()) && slash(c, f.lhs())) return slash(c, f.rhs());
  return true;
}

inline bool strong_slash(const SlashContext& c, const Formula& f) { return c.p.count(f) && slash(c, f); }

// ---- disjunction and interpolation ----

// For a proof of (α₀ → u) → (α₁ → u) → u, the least i with α_i in the closure of {α₀ → u, α₁ → u}.
inline int extract_disjunct(const NmDerivation& d, const std::string& u) {
  if (d.labels.empty() || d.root >= d.labels.size()) throw std::invalid_argument("extract_disjunct: empty derivation");
  const Formula root = d.labels[d.root];
  const Formula uu = var(u);
  auto bad = [&] { return std::invalid_argument("extract_disjunct: root is not (a0 -> " + u + ") -> (a1 -> " + u + ") -> " + u); };
  if (!root.is_imp() || !root.rhs().is_imp() || root.rhs().rhs() != uu) throw bad();
  const Formula h0 = root.lhs(), h1 = root.rhs().lhs();
  if (!h0.is_imp() || !h1.is_imp() || h0.rhs() != uu || h1.rhs() != uu) throw bad();
  const Formula a[2] = {h0.lhs(), h1.lhs()};
  for (int i = 0; i < 2; ++i)
    if (occurs(u, a[i])) throw std::invalid_argument("extract_disjunct: " + u + " occurs in a" + std::to_string(i));
  auto rep = check_nm(d, {}, root);
  if (!rep) throw std::invalid_argument("extract_disjunct: " + rep.describe());
  auto tr = closure(d, {h0, h1});
  for (int i = 0; i < 2; ++i)
    if (tr.contains(a[i])) return i;
  throw std::logic_error("extract_disjunct: neither disjunct is in the closure");
}

struct InterpolantExtraction {
  MonotoneCircuit circuit;
  ClosureCircuit closure;           // statistics of the underlying closure circuit
  std::uint64_t folded_wires = 0;   // wires after fixing inputs, folding and pruning
  std::vector<Formula> f;           // the formula list F
};

// Closure circuit for α over F = P ∪ p ∪ p' ∪ labels(D), where P holds α → u, β → u and the
// edge hypotheses. Inputs for P and p' are fixed to 1, other non-p inputs to 0.
inline InterpolantExtraction extract_interpolant(const NmDerivation& d, const InterpolationShape& s) {
  validate_shape(s);
  for (const Formula* g : {&s.alpha, &s.beta})
    if (occurs(s.u, *g)) throw std::invalid_argument("extract_interpolant: " + s.u + " occurs in alpha or beta");
  const Formula target = s.target();
  if (d.labels.empty() || d.labels[d.root] != target)
    throw std::invalid_argument("extract_interpolant: root label does not match the shape's target");
  auto rep = check_nm(d, {}, target);
  if (!rep) throw std::invalid_argument("extract_interpolant: " + rep.describe());

  InterpolantExtraction out;
  std::unordered_map<const void*, std::size_t> pos;
  std::vector<std::string> names;
  ClosureCircuitOptions opt;
  auto add = [&](const Formula& g, int role) {  // role: 1 fixed true, 0 fixed false, -1 input
    if (pos.count(g.id())) return;
    pos[g.id()] = out.f.size();
    if (role >= 0) opt.fixed[out.f.size()] = role == 1;
    names.push_back(role < 0 ? g.name() : "x_" + std::to_string(out.f.size()));
    out.f.push_back(g);
  };
  const Formula uu = var(s.u);
  add(imp(s.alpha, uu), 1);
  add(imp(s.beta, uu), 1);
  for (std::size_t i = 0; i < s.n; ++i) add(imps({imp(var(s.p[i]), uu), imp(var(s.pp[i]), uu), uu}), 1);
  for (const auto& x : s.p) add(var(x), -1);
  for (const auto& x : s.pp) add(var(x), 1);
  for (const auto& l : d.labels) add(l, 0);
  add(s.alpha, 0);
  opt.input_names = names;
  out.closure = closure_circuit(d, out.f, s.alpha, opt);
  out.circuit = fold_constants(out.closure.circuit);
  out.folded_wires = out.circuit.size();
  return out;
}

}  // namespace nmx
