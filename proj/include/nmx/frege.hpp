#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"

namespace nmx {

using FregeDagDerivation = Derivation;
using FregeSeq = std::vector<Formula>;

// (A1) α → β → α
inline bool is_axiom_a1(const Formula& f) {
  return f.is_imp() && f.rhs().is_imp() && f.rhs().rhs() == f.lhs();
}

// (A2) (α → β → γ) → (α → β) → α → γ
inline bool is_axiom_a2(const Formula& f) {
  if (!f.is_imp() || !f.rhs().is_imp()) return false;
  const Formula& x = f.lhs();
  const Formula& y = f.rhs().lhs();
  const Formula& z = f.rhs().rhs();
  if (!x.is_imp() || !x.rhs().is_imp() || !y.is_imp() || !z.is_imp()) return false;
  const Formula& a = x.lhs();
  const Formula& b = x.rhs().lhs();
  const Formula& c = x.rhs().rhs();
  return y.lhs() == a && y.rhs() == b && z.lhs() == a && z.rhs() == c;
}

inline bool is_axiom(const Formula& f) { return is_axiom_a1(f) || is_axiom_a2(f); }

inline Formula axiom_a1(const Formula& a, const Formula& b) { return imp(a, imp(b, a)); }

inline Formula axiom_a2(const Formula& a, const Formula& b, const Formula& c) {
  return imp(imp(a, imp(b, c)), imp(imp(a, b), imp(a, c)));
}

enum class Just { Assumption, Axiom1, Axiom2, MP };

struct LineJust {
  Just kind = Just::Assumption;
  std::size_t minor = 0;
  std::size_t major = 0;
};

// Justifies every line, preferring assumption, then axiom, then the earliest usable major premise.
// Returns the index of the first unjustified line, or lines.size() when all are justified.
inline std::size_t justify_seq(const FregeSeq& lines, const FormulaSet& gamma, std::vector<LineJust>& out) {
  out.assign(lines.size(), {});
  std::unordered_map<const void*, std::size_t> first;  // formula → earliest line
  // major premises X → γ indexed by their consequent, in line order
  std::unordered_map<const void*, std::vector<std::size_t>> by_rhs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Formula& g = lines[i];
    bool ok = false;
    if (gamma.count(g)) {
      out[i] = {Just::Assumption, 0, 0};
      ok = true;
    } else if (is_axiom_a1(g)) {
      out[i] = {Just::Axiom1, 0, 0};
      ok = true;
    } else if (is_axiom_a2(g)) {
      out[i] = {Just::Axiom2, 0, 0};
      ok = true;
    } else {
      auto it = by_rhs.find(g.id());
      if (it != by_rhs.end()) {
        for (std::size_t k : it->second) {
          auto m = first.find(lines[k].lhs().id());
          if (m != first.end()) {
            out[i] = {Just::MP, m->second, k};
            ok = true;
            break;
          }
        }
      }
    }
    if (!ok) return i;
    first.emplace(g.id(), i);
    if (g.is_imp()) by_rhs[g.rhs().id()].push_back(i);
  }
  return lines.size();
}

inline CheckReport check_frege_seq(const FregeSeq& lines, const FormulaSet& gamma, const Formula& phi) {
  if (lines.empty()) return CheckReport::reject("", "empty derivation");
  std::vector<LineJust> j;
  std::size_t bad = justify_seq(lines, gamma, j);
  if (bad < lines.size())
    return CheckReport::reject("line " + std::to_string(bad + 1), render(lines[bad]) + " is not an assumption, axiom, or MP consequence");
  if (lines.back() != phi)
    return CheckReport::reject("line " + std::to_string(lines.size()), "last line is " + render(lines.back()) + ", expected " + render(phi));
  return CheckReport::accept();
}

// Local check of dag node v: a leaf must be an assumption or axiom, a binary node an MP step.
inline bool frege_step(const FregeDagDerivation& d, std::size_t v, const FormulaSet& gamma, LineJust& out, std::string& why) {
  const auto& ps = d.premises[v];
  const Formula& g = d.labels[v];
  if (ps.empty()) {
    if (gamma.count(g)) out = {Just::Assumption, 0, 0};
    else if (is_axiom_a1(g)) out = {Just::Axiom1, 0, 0};
    else if (is_axiom_a2(g)) out = {Just::Axiom2, 0, 0};
    else {
      why = "leaf " + render(g) + " is neither an assumption nor an axiom";
      return false;
    }
    return true;
  }
  if (ps.size() == 2) {
    const Formula& a = d.labels[ps[0]];
    const Formula& b = d.labels[ps[1]];
    if (b.is_imp() && b.lhs() == a && b.rhs() == g) {
      out = {Just::MP, ps[0], ps[1]};
      return true;
    }
    if (a.is_imp() && a.lhs() == b && a.rhs() == g) {
      out = {Just::MP, ps[1], ps[0]};
      return true;
    }
    why = "MP premises " + d.ids[ps[0]] + ", " + d.ids[ps[1]] + " do not fit the label";
    return false;
  }
  why = "in-degree " + std::to_string(ps.size()) + " is not allowed";
  return false;
}

inline CheckReport check_frege_dag(const FregeDagDerivation& d, const FormulaSet& gamma, const Formula& phi) {
  std::vector<std::size_t> topo;
  auto rep = check_structure(d, 2, &topo);
  if (!rep) return rep;
  for (std::size_t v : topo) {
    LineJust j;
    std::string why;
    if (!frege_step(d, v, gamma, j, why)) return CheckReport::reject(d.ids[v], why);
  }
  if (d.labels[d.root] != phi)
    return CheckReport::reject(d.ids[d.root], "root is labelled " + render(d.labels[d.root]) + ", expected " + render(phi));
  return CheckReport::accept();
}

// Dag of a sequence proof using the earliest justifications. With prune, lines the last
// line does not depend on are dropped.
inline FregeDagDerivation seq_to_dag(const FregeSeq& lines, const FormulaSet& gamma, bool prune = true) {
  std::vector<LineJust> j;
  if (lines.empty() || justify_seq(lines, gamma, j) < lines.size())
    throw std::invalid_argument("seq_to_dag: input is not a derivation");
  if (!prune) {
    // Every line becomes a node; unused lines would be extra sinks, so they are only kept
    // for metric purposes by callers that do not check structure.
    Derivation d;
    std::size_t width = std::to_string(lines.size() - 1).size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string num = std::to_string(i);
      d.ids.push_back("l" + std::string(width - num.size(), '0') + num);
      d.labels.push_back(lines[i]);
      if (j[i].kind == Just::MP) d.premises.push_back({j[i].minor, j[i].major});
      else d.premises.emplace_back();
    }
    d.root = lines.size() - 1;
    return d;
  }
  DagBuilder b;
  std::vector<std::size_t> at(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (j[i].kind == Just::MP) at[i] = b.add(lines[i], {at[j[i].minor], at[j[i].major]});
    else at[i] = b.leaf(lines[i]);
  }
  return b.finish(at.back(), "l");
}

inline FregeSeq dag_to_seq(const FregeDagDerivation& d) {
  FregeSeq out;
  for (std::size_t v : topological_order(d)) out.push_back(d.labels[v]);
  return out;
}

// Keeps the first occurrence of each formula. Later copies are justified exactly like the first,
// so the result is still a derivation.
inline FregeSeq dedup(const FregeSeq& lines) {
  FregeSeq out;
  std::unordered_map<const void*, bool> seen;
  for (const auto& f : lines)
    if (seen.emplace(f.id(), true).second) out.push_back(f);
  return out;
}

inline bool is_non_redundant(const FregeSeq& lines) { return dedup(lines).size() == lines.size(); }

inline ProofMetrics frege_metrics(const FregeDagDerivation& d) { return derivation_metrics(d); }

// Sequence metrics: lines, size and formula size of the sequence itself; height and inferential
// size through the earliest-justification dag over all lines.
inline ProofMetrics frege_metrics(const FregeSeq& lines, const FormulaSet& gamma) {
  auto d = seq_to_dag(lines, gamma, false);
  ProofMetrics m;
  std::vector<std::uint64_t> h(lines.size(), 0);
  m.lines = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::uint64_t s = lines[i].size();
    m.size += s;
    m.formula_size = std::max(m.formula_size, s);
    std::uint64_t inf = s;
    for (std::size_t u : d.premises[i]) {
      inf += lines[u].size();
      h[i] = std::max(h[i], h[u] + 1);
    }
    m.inferential_size += inf;
    m.height = std::max(m.height, h[i]);
  }
  return m;
}

// The leaves of a Frege dag that are assumptions (labels in gamma), counted with multiplicity.
inline std::map<Formula, std::size_t, FormulaLess> assumption_uses(const FregeDagDerivation& d, const FormulaSet& gamma) {
  std::map<Formula, std::size_t, FormulaLess> uses;
  for (std::size_t v = 0; v < d.node_count(); ++v)
    if (d.premises[v].empty() && gamma.count(d.labels[v])) ++uses[d.labels[v]];
  return uses;
}

}  // namespace nmx
