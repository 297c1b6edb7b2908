#pragma once

#include <algorithm>
#include <unordered_map>

#include <cstdint>
#include <string>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"

namespace nmx {

using NmDerivation = Derivation;

enum class NmRule { Leaf, Intro, Elim };

struct NmStep {
  NmRule rule = NmRule::Leaf;
  std::size_t minor = 0;  // →E: premise labelled α; →I: the single premise
  std::size_t major = 0;  // →E: premise labelled α → β
};

// Classifies node v and checks the local rule. The orientation of →E is inferred.
inline bool nm_step(const NmDerivation& d, std::size_t v, NmStep& out, std::string& why) {
  const auto& ps = d.premises[v];
  const Formula& g = d.labels[v];
  if (ps.empty()) {
    out = {NmRule::Leaf, 0, 0};
    return true;
  }
  if (ps.size() == 1) {
    if (!g.is_imp() || g.rhs() != d.labels[ps[0]]) {
      why = "→I node must be labelled α → β where β labels its premise " + d.ids[ps[0]];
      return false;
    }
    out = {NmRule::Intro, ps[0], ps[0]};
    return true;
  }
  if (ps.size() == 2) {
    const Formula& a = d.labels[ps[0]];
    const Formula& b = d.labels[ps[1]];
    if (b.is_imp() && b.lhs() == a && b.rhs() == g) {
      out = {NmRule::Elim, ps[0], ps[1]};
      return true;
    }
    if (a.is_imp() && a.lhs() == b && a.rhs() == g) {
      out = {NmRule::Elim, ps[1], ps[0]};
      return true;
    }
    why = "→E premises " + d.ids[ps[0]] + ", " + d.ids[ps[1]] + " do not fit the label";
    return false;
  }
  why = "in-degree above 2";
  return false;
}

// Local rule check for every node, in topological order; the first bad node is reported.
inline CheckReport check_nm_rules(const NmDerivation& d, std::vector<std::size_t>* topo_out = nullptr) {
  std::vector<std::size_t> topo;
  auto rep = check_structure(d, 2, &topo);
  if (!rep) return rep;
  for (std::size_t v : topo) {
    NmStep st;
    std::string why;
    if (!nm_step(d, v, st, why)) return CheckReport::reject(d.ids[v], why);
  }
  if (topo_out) *topo_out = std::move(topo);
  return CheckReport::accept();
}

using AssumptionMap = std::vector<FormulaSet>;  // indexed like d.labels

inline AssumptionMap assumptions_in_order(const NmDerivation& d, const std::vector<std::size_t>& topo) {
  AssumptionMap a(d.node_count());
  for (std::size_t v : topo) {
    const auto& ps = d.premises[v];
    if (ps.empty()) {
      a[v].insert(d.labels[v]);
    } else if (ps.size() == 1) {
      a[v] = a[ps[0]];
      a[v].erase(d.labels[v].lhs());
    } else {
      a[v] = a[ps[0]];
      a[v].insert(a[ps[1]].begin(), a[ps[1]].end());
    }
  }
  return a;
}

// Open assumptions A_v of every node. Throws std::invalid_argument on a malformed dag.
inline AssumptionMap assumptions(const NmDerivation& d) {
  std::vector<std::size_t> topo;
  auto rep = check_nm_rules(d, &topo);
  if (!rep) throw std::invalid_argument("assumptions: " + rep.describe());
  return assumptions_in_order(d, topo);
}

inline CheckReport check_nm(const NmDerivation& d, const FormulaSet& gamma, const Formula& phi) {
  std::vector<std::size_t> topo;
  auto rep = check_nm_rules(d, &topo);
  if (!rep) return rep;
  if (d.labels[d.root] != phi)
    return CheckReport::reject(d.ids[d.root], "root is labelled " + render(d.labels[d.root]) + ", expected " + render(phi));
  auto a = assumptions_in_order(d, topo);
  for (const auto& f : a[d.root])
    if (!gamma.count(f)) return CheckReport::reject(d.ids[d.root], "open assumption " + render(f) + " is not in Γ");
  return CheckReport::accept();
}

// Thread semantics by brute force: walks every root-to-leaf path, remembering the antecedents of
// the →I nodes passed. A leaf whose label is not among them must be in Γ. Cost is the number of
// paths, so a budget on visited path steps applies.
inline bool check_threads_naive(const NmDerivation& d, const FormulaSet& gamma, const Formula& phi,
                                std::uint64_t budget = 10'000'000) {
  if (!check_nm_rules(d)) return false;
  if (d.labels[d.root] != phi) return false;
  std::vector<Formula> discharged;
  std::uint64_t steps = 0;
  bool ok = true;
  auto walk = [&](auto&& self, std::size_t v) -> void {
    if (!ok) return;
    if (++steps > budget) throw BudgetExceeded("thread enumeration exceeded " + std::to_string(budget) + " steps");
    const auto& ps = d.premises[v];
    if (ps.empty()) {
      const Formula& g = d.labels[v];
      bool closed = std::find(discharged.begin(), discharged.end(), g) != discharged.end();
      if (!closed && !gamma.count(g)) ok = false;
      return;
    }
    if (ps.size() == 1) {
      discharged.push_back(d.labels[v].lhs());
      self(self, ps[0]);
      discharged.pop_back();
      return;
    }
    for (std::size_t u : ps) self(self, u);
  };
  walk(walk, d.root);
  return ok;
}

// Unwinds the dag into a tree by copying every shared subproof once per path to the root.
inline NmDerivation unravel(const NmDerivation& d, std::uint64_t budget = 10'000'000) {
  (void)topological_order(d);
  NmDerivation t;
  std::vector<std::pair<std::size_t, std::size_t>> work;  // (source node, tree node)
  auto add = [&](std::size_t src) {
    if (t.labels.size() >= budget) throw BudgetExceeded("unravel exceeded " + std::to_string(budget) + " nodes");
    t.labels.push_back(d.labels[src]);
    t.premises.emplace_back();
    return t.labels.size() - 1;
  };
  std::size_t r = add(d.root);
  work.push_back({d.root, r});
  for (std::size_t i = 0; i < work.size(); ++i) {
    auto [src, dst] = work[i];
    for (std::size_t u : d.premises[src]) {
      std::size_t c = add(u);
      t.premises[dst].push_back(c);
      work.push_back({u, c});
    }
  }
  // Ids follow breadth-first order from the root; the root is u0.
  std::size_t width = std::to_string(t.labels.size() - 1).size();
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    std::string num = std::to_string(i);
    t.ids.push_back("u" + std::string(width - num.size(), '0') + num);
  }
  t.root = r;
  return t;
}

// Shrinks a dag by reusing, for every node, an earlier node with the same label whose open
// assumptions are a subset of its own. Successors then depend on fewer assumptions, so every
// rule stays valid; the earlier node cannot depend on the replaced one, so no cycle appears.
inline NmDerivation compact_nm(const NmDerivation& d) {
  std::vector<std::size_t> topo;
  auto rep = check_nm_rules(d, &topo);
  if (!rep) throw std::invalid_argument("compact_nm: " + rep.describe());
  DagBuilder b;
  std::vector<FormulaSet> open;
  std::vector<std::size_t> at(d.node_count());
  std::unordered_map<const void*, std::vector<std::size_t>> by_label;
  for (std::size_t v : topo) {
    const Formula& g = d.labels[v];
    std::vector<std::size_t> ps;
    for (std::size_t u : d.premises[v]) ps.push_back(at[u]);
    FormulaSet a;
    if (ps.empty()) a.insert(g);
    else if (ps.size() == 1) {
      a = open[ps[0]];
      a.erase(g.lhs());
    } else {
      a = open[ps[0]];
      a.insert(open[ps[1]].begin(), open[ps[1]].end());
    }
    auto& cands = by_label[g.id()];
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t w : cands)
      if (std::includes(a.begin(), a.end(), open[w].begin(), open[w].end(), FormulaLess{}) &&
          (best == static_cast<std::size_t>(-1) || open[w].size() < open[best].size()))
        best = w;
    if (best != static_cast<std::size_t>(-1)) {
      at[v] = best;
      continue;
    }
    at[v] = b.add(g, std::move(ps));
    open.push_back(std::move(a));
    cands.push_back(at[v]);
  }
  return b.finish(at[d.root], "c");
}

inline ProofMetrics nm_metrics(const NmDerivation& d) { return derivation_metrics(d); }

}  // namespace nmx
