#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"
#include "nmx/frege.hpp"
#include "nmx/natded.hpp"
#include "nmx/semantics.hpp"

namespace nmx {

// ---- small Frege building blocks ----

inline std::size_t axiom1_node(DagBuilder& b, const Formula& a, const Formula& c) { return b.leaf(axiom_a1(a, c)); }

// ⊢ a → a in five lines.
inline std::size_t identity_proof(DagBuilder& b, const Formula& a) {
  Formula aa = imp(a, a);
  std::size_t s1 = b.leaf(axiom_a2(a, aa, a));
  std::size_t s2 = b.leaf(axiom_a1(a, aa));
  std::size_t s3 = b.mp(s2, s1);
  std::size_t s4 = b.leaf(axiom_a1(a, a));
  return b.mp(s4, s3);
}

// From a node proving γ, a node proving a → γ.
inline std::size_t lift(DagBuilder& b, std::size_t node, const Formula& a) {
  return b.mp(node, axiom1_node(b, b.label(node), a));
}

// Deduction step for one hypothesis: copies d into b and returns a node proving alpha → root label.
// Leaves labelled alpha that are not axioms are the discharged hypothesis; everything else is
// copied unchanged. Subproofs that do not use alpha are lifted with one (A1) instance at their
// topmost use, so a tree input gives a tree output.
inline std::size_t discharge(DagBuilder& b, const Derivation& d, const Formula& alpha) {
  auto order = topological_order(d);
  const bool alpha_is_axiom = is_axiom(alpha);
  std::vector<char> dep(d.node_count(), 0);
  for (std::size_t v : order) {
    if (d.premises[v].empty()) dep[v] = !alpha_is_axiom && d.labels[v] == alpha;
    else
      for (std::size_t u : d.premises[v]) dep[v] |= dep[u];
  }
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> copy(d.node_count(), none), img(d.node_count(), none);
  auto imp_of = [&](std::size_t u) { return dep[u] ? img[u] : lift(b, copy[u], alpha); };
  for (std::size_t v : order) {
    const auto& ps = d.premises[v];
    if (!dep[v]) {
      std::vector<std::size_t> cps;
      for (std::size_t u : ps) cps.push_back(copy[u]);
      copy[v] = b.add(d.labels[v], std::move(cps));
      continue;
    }
    if (ps.empty()) {
      img[v] = identity_proof(b, alpha);
      continue;
    }
    if (ps.size() != 2) throw std::invalid_argument("discharge: node of in-degree " + std::to_string(ps.size()));
    std::size_t minor = ps[0], major = ps[1];
    if (!(d.labels[major].is_imp() && d.labels[major].lhs() == d.labels[minor] && d.labels[major].rhs() == d.labels[v]))
      std::swap(minor, major);
    if (!dep[major] && d.premises[minor].empty()) {
      // the minor premise is alpha itself: the major premise already proves alpha → γ_v
      img[v] = copy[major];
      continue;
    }
    std::size_t maj = imp_of(major);
    std::size_t a2 = b.leaf(axiom_a2(alpha, d.labels[minor], d.labels[v]));
    std::size_t step = b.mp(maj, a2);
    img[v] = b.mp(imp_of(minor), step);
  }
  return dep[d.root] ? img[d.root] : lift(b, copy[d.root], alpha);
}

// Straightforward NM-to-Frege translation: →E becomes MP and every →I is one deduction step on the
// translated premise. Exponential in the worst case; used only for the fixed schema templates.
inline Derivation nm_to_frege_by_deduction(const NmDerivation& d) {
  auto order = topological_order(d);
  std::vector<Derivation> out(d.node_count());
  for (std::size_t v : order) {
    const auto& ps = d.premises[v];
    DagBuilder b;
    std::size_t root;
    if (ps.empty()) {
      root = b.leaf(d.labels[v]);
    } else if (ps.size() == 1) {
      const Formula& g = d.labels[v];
      root = discharge(b, out[ps[0]], g.lhs());
    } else {
      std::size_t x = b.import(out[ps[0]]);
      std::size_t y = b.import(out[ps[1]]);
      root = b.label(y).is_imp() && b.label(y).lhs() == b.label(x) && b.label(y).rhs() == d.labels[v] ? b.mp(x, y) : b.mp(y, x);
    }
    out[v] = b.finish(root);
  }
  return std::move(out[d.root]);
}

namespace detail {

// Linear normalization of tree NM proofs before translation: η-contraction of λx.(M x) and
// β-reduction of redexes whose bound hypothesis is used at most once. Decide produces η-long
// proofs, which would otherwise inflate every template.
struct NmTerm {
  enum Kind { Leaf, Intro, Elim } kind = Leaf;
  Formula label;
  std::shared_ptr<const NmTerm> a, b;  // Intro: a = body; Elim: a = minor, b = major
};
using NmTermP = std::shared_ptr<const NmTerm>;

inline NmTermP nm_term(const NmDerivation& d, std::size_t v) {
  auto t = std::make_shared<NmTerm>();
  t->label = d.labels[v];
  const auto& ps = d.premises[v];
  if (ps.size() == 1) {
    t->kind = NmTerm::Intro;
    t->a = nm_term(d, ps[0]);
  } else if (ps.size() == 2) {
    t->kind = NmTerm::Elim;
    std::size_t minor = ps[0], major = ps[1];
    if (!(d.labels[major].is_imp() && d.labels[major].lhs() == d.labels[minor])) std::swap(minor, major);
    t->a = nm_term(d, minor);
    t->b = nm_term(d, major);
  }
  return t;
}

inline std::size_t count_open(const NmTermP& t, const Formula& x) {
  switch (t->kind) {
    case NmTerm::Leaf: return t->label == x ? 1 : 0;
    case NmTerm::Intro: return t->label.lhs() == x ? 0 : count_open(t->a, x);
    default: return count_open(t->a, x) + count_open(t->b, x);
  }
}

inline NmTermP plug_open(const NmTermP& t, const Formula& x, const NmTermP& s) {
  switch (t->kind) {
    case NmTerm::Leaf: return t->label == x ? s : t;
    case NmTerm::Intro: {
      if (t->label.lhs() == x) return t;
      auto n = std::make_shared<NmTerm>(*t);
      n->a = plug_open(t->a, x, s);
      return n;
    }
    default: {
      auto n = std::make_shared<NmTerm>(*t);
      n->a = plug_open(t->a, x, s);
      n->b = plug_open(t->b, x, s);
      return n;
    }
  }
}

inline NmTermP normalize_linear(const NmTermP& t) {
  if (t->kind == NmTerm::Leaf) return t;
  auto n = std::make_shared<NmTerm>(*t);
  n->a = normalize_linear(t->a);
  if (t->kind == NmTerm::Intro) {
    const Formula& x = t->label.lhs();
    const auto& body = n->a;
    if (body->kind == NmTerm::Elim && body->a->kind == NmTerm::Leaf && body->a->label == x &&
        body->b->label == t->label && count_open(body->b, x) == 0)
      return body->b;
    return n;
  }
  n->b = normalize_linear(t->b);
  if (n->b->kind == NmTerm::Intro && count_open(n->b->a, n->b->label.lhs()) <= 1)
    return normalize_linear(plug_open(n->b->a, n->b->label.lhs(), n->a));
  return n;
}

inline std::size_t emit_term(DagBuilder& b, const NmTermP& t) {
  switch (t->kind) {
    case NmTerm::Leaf: return b.leaf(t->label);
    case NmTerm::Intro: return b.intro(emit_term(b, t->a), t->label.lhs());
    default: {
      std::size_t x = emit_term(b, t->a);
      return b.mp(x, emit_term(b, t->b));
    }
  }
}

// Goal-directed search for η-long normal proofs with bounded elimination depth. G4ip proofs of
// nested implications go through the left-implication rule and come out several times larger, so
// the templates prefer this search and only fall back to decide when it gives up.
class ShortProofSearch {
 public:
  explicit ShortProofSearch(std::uint64_t budget) : budget_(budget) {}

  NmTermP find(const std::vector<Formula>& ctx, const Formula& goal, int max_depth) {
    FormulaSet c(ctx.begin(), ctx.end());
    for (int d = 1; d <= max_depth; ++d) {
      failed_.clear();
      if (auto t = prove(c, goal, d)) return t;
      if (calls_ > budget_) return nullptr;
    }
    return nullptr;
  }

 private:
  NmTermP prove(const FormulaSet& ctx, const Formula& goal, int depth) {
    if (++calls_ > budget_) return nullptr;
    if (goal.is_imp()) {
      FormulaSet inner = ctx;
      inner.insert(goal.lhs());
      auto body = prove(inner, goal.rhs(), depth);
      if (!body) return nullptr;
      auto t = std::make_shared<NmTerm>();
      t->kind = NmTerm::Intro;
      t->label = goal;
      t->a = body;
      return t;
    }
    if (ctx.count(goal)) return leaf(goal);
    if (depth == 0) return nullptr;
    std::string key = key_of(ctx, goal, depth);
    if (failed_.count(key)) return nullptr;
    std::vector<std::pair<std::size_t, Formula>> heads;
    for (const auto& h : ctx) {
      std::size_t m = 0;
      Formula x = h;
      while (x.is_imp()) x = x.rhs(), ++m;
      if (m > 0 && x == goal) heads.push_back({m, h});
    }
    std::stable_sort(heads.begin(), heads.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [m, h] : heads) {
      NmTermP t = leaf(h);
      Formula x = h;
      for (; x.is_imp(); x = x.rhs()) {
        auto arg = prove(ctx, x.lhs(), depth - 1);
        if (!arg) break;
        auto e = std::make_shared<NmTerm>();
        e->kind = NmTerm::Elim;
        e->label = x.rhs();
        e->a = arg;
        e->b = t;
        t = e;
      }
      if (!x.is_imp()) return t;
    }
    failed_.insert(std::move(key));
    return nullptr;
  }

  static NmTermP leaf(const Formula& f) {
    auto t = std::make_shared<NmTerm>();
    t->label = f;
    return t;
  }

  static std::string key_of(const FormulaSet& ctx, const Formula& goal, int depth) {
    std::vector<std::string> parts;
    for (const auto& f : ctx) parts.push_back(render(f));
    std::sort(parts.begin(), parts.end());
    std::string k = std::to_string(depth) + "|" + render(goal);
    for (const auto& p : parts) k += ";" + p;
    return k;
  }

  std::uint64_t budget_;
  std::uint64_t calls_ = 0;
  std::set<std::string> failed_;
};

}  // namespace detail

// Tree NM proof with linear detours removed; conclusion unchanged, open assumptions can only shrink.
inline NmDerivation normalize_nm_tree(const NmDerivation& d) {
  if (!is_tree(d)) throw std::invalid_argument("normalize_nm_tree: input is not tree-like");
  DagBuilder b;
  return b.finish(detail::emit_term(b, detail::normalize_linear(detail::nm_term(d, d.root))), "u");
}

// ---- schema templates ----

struct SchemaTemplate {
  std::string name;
  std::vector<Formula> premises;  // patterns; the metavariables are all their variables except _t
  Formula conclusion;
  std::set<std::string> metavars;
  Derivation proof;  // tree-like derivation of the conclusion from the premises
  std::vector<std::size_t> premise_leaf;
};

inline std::string schema_key(const std::vector<Formula>& premises, const Formula& conclusion) {
  std::string k;
  for (const auto& p : premises) k += render(p) + " ; ";
  return k + "|- " + render(conclusion);
}

namespace detail {

inline std::set<std::string> pattern_vars(const std::vector<Formula>& premises, const Formula& conclusion) {
  std::set<std::string> vs = vars_of(conclusion);
  for (const auto& p : premises) collect_vars(p, vs);
  vs.erase(std::string(kReservedTop));
  return vs;
}

inline SchemaTemplate identity_template() {
  SchemaTemplate t;
  t.name = "identity";
  t.conclusion = F("a -> a");
  t.metavars = {"a"};
  DagBuilder b;
  t.proof = b.finish(identity_proof(b, var("a")));
  return t;
}

// Proof of c from the premises via decide, normalization and the deduction translation. Premises
// the proof uses exactly once stay as leaves; any other premise is discharged and detached again
// with a single leaf. Repeated or axiom-shaped premises fall back to proving p1 → … → pk → c.
inline SchemaTemplate generate_template(const std::string& name, const std::vector<Formula>& premises,
                                        const Formula& conclusion) {
  DecideOptions opt;
  opt.budget = 2'000'000;
  FormulaSet distinct(premises.begin(), premises.end());
  bool open_form = distinct.size() == premises.size();
  for (const auto& p : premises) open_form = open_form && !is_axiom(p);
  std::vector<Formula> rev(premises.rbegin(), premises.rend());
  Formula goal = open_form ? conclusion : fold_imp(rev, conclusion);
  std::vector<Formula> ctx = open_form ? premises : std::vector<Formula>{};
  NmDerivation nm;
  if (auto t = ShortProofSearch(200'000).find(ctx, goal, 8)) {
    DagBuilder nb;
    nm = nb.finish(emit_term(nb, t), "u");
  } else {
    auto r = decide(ctx, goal, opt);
    if (r.verdict != Verdict::Valid) throw std::logic_error("schema " + name + " is not provable: " + render(goal));
    nm = *r.proof;
  }
  Derivation body = nm_to_frege_by_deduction(normalize_nm_tree(nm));

  std::vector<char> detach(premises.size(), 1);
  if (open_form) {
    for (std::size_t i = 0; i < premises.size(); ++i) {
      std::size_t uses = 0;
      for (std::size_t v = 0; v < body.node_count(); ++v) uses += body.premises[v].empty() && body.labels[v] == premises[i];
      detach[i] = uses != 1;
    }
    // discharge the innermost premise first so that the detaching MPs run in premise order
    for (std::size_t i = premises.size(); i-- > 0;) {
      if (!detach[i]) continue;
      DagBuilder b;
      body = b.finish(discharge(b, body, premises[i]));
    }
  }
  DagBuilder b;
  std::size_t cur = b.import(body);
  SchemaTemplate t;
  t.name = name;
  t.premises = premises;
  t.conclusion = conclusion;
  t.metavars = pattern_vars(premises, conclusion);
  std::vector<std::size_t> leaves(premises.size());
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (!detach[i]) continue;
    leaves[i] = b.leaf(premises[i]);
    cur = b.mp(leaves[i], cur);
  }
  t.proof = b.finish(cur);
  // every node is reachable from the root, so finish() keeps the builder's indices
  if (t.proof.node_count() != b.size()) throw std::logic_error("schema " + name + ": unreachable nodes");
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (detach[i]) continue;
    for (std::size_t v = 0; v < t.proof.node_count(); ++v)
      if (t.proof.premises[v].empty() && t.proof.labels[v] == premises[i]) leaves[i] = v;
  }
  t.premise_leaf = leaves;
  return t;
}

inline void verify_template(const SchemaTemplate& t) {
  FormulaSet gamma(t.premises.begin(), t.premises.end());
  auto rep = check_frege_dag(t.proof, gamma, t.conclusion);
  if (!rep) throw std::logic_error("schema " + t.name + " failed the Frege checker: " + rep.describe());
  if (!is_tree(t.proof)) throw std::logic_error("schema " + t.name + " is not tree-like");
  std::set<std::string> seen;
  for (const auto& f : t.proof.labels) collect_vars(f, seen);
  seen.erase(std::string(kReservedTop));
  for (const auto& v : seen)
    if (!t.metavars.count(v)) throw std::logic_error("schema " + t.name + " uses stray variable " + v);
}

class SchemaCache {
 public:
  static SchemaCache& get() {
    static SchemaCache c;
    return c;
  }

  const SchemaTemplate& lookup(const std::string& name, const std::vector<Formula>& premises, const Formula& conclusion) {
    std::string key = schema_key(premises, conclusion);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return *it->second;
    auto t = std::make_unique<SchemaTemplate>(
        premises.empty() && conclusion == F("a -> a") ? identity_template() : generate_template(name, premises, conclusion));
    verify_template(*t);
    auto& ref = *t;
    by_key_.emplace(key, std::move(t));
    return ref;
  }

  std::size_t size() {
    std::lock_guard<std::mutex> lock(mu_);
    return by_key_.size();
  }

  // Every template generated so far, in key order.
  std::vector<const SchemaTemplate*> all() {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<const SchemaTemplate*> out;
    for (const auto& [k, t] : by_key_) out.push_back(t.get());
    return out;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<SchemaTemplate>> by_key_;
};

}  // namespace detail

inline const SchemaTemplate& schema(const std::vector<Formula>& premises, const Formula& conclusion,
                                    const std::string& name = "adhoc") {
  return detail::SchemaCache::get().lookup(name, premises, conclusion);
}

inline const SchemaTemplate& schema(const Formula& conclusion, const std::string& name = "adhoc") {
  return schema(std::vector<Formula>{}, conclusion, name);
}

// The fixed catalogue. Metavariables are lower-case letters; f and g play the roles of φ and ψ.
struct NamedSchema {
  std::string name;
  std::vector<std::string> premises;
  std::string conclusion;
};

inline const std::vector<NamedSchema>& schema_catalogue() {
  static const std::vector<NamedSchema> c = {
      {"identity", {}, "a -> a"},
      {"chain", {"a -> b", "b -> c"}, "a -> c"},
      {"subset_skip", {}, "(d -> c) -> d -> a -> c"},
      {"subset_keep", {}, "(d -> c) -> (a -> d) -> a -> c"},
      {"weak_apply", {}, "(b -> c -> d) -> (a -> b) -> (a -> c) -> a -> d"},
      {"weak_swap", {}, "((a -> b) -> d) -> (a -> c -> b) -> c -> d"},
      {"ret_proj0", {}, "(((a -> f) -> (b -> f) -> f) -> f) -> a -> f"},
      {"ret_proj1", {}, "(((a -> f) -> (b -> f) -> f) -> f) -> b -> f"},
      {"ret_pair", {}, "a -> b -> (a -> b -> f) -> f"},
      {"ret_transfer", {}, "(a -> (b -> f) -> f) -> (c -> (d -> f) -> f) -> ((a -> c -> f) -> f) -> (((b -> d -> g) -> g) -> f) -> f"},
      {"mp_pow", {}, "((a -> b) -> b) -> (((a -> b) -> b) -> b) -> b"},
  };
  return c;
}

inline const SchemaTemplate& named_schema(const std::string& name) {
  for (const auto& s : schema_catalogue())
    if (s.name == name) {
      std::vector<Formula> ps;
      for (const auto& p : s.premises) ps.push_back(F(p));
      return schema(ps, F(s.conclusion), s.name);
    }
  throw std::invalid_argument("unknown schema " + name);
}

// Copies a template into b under sigma, plugging the given nodes in for its premise leaves.
inline std::size_t use_schema(DagBuilder& b, const SchemaTemplate& t, const Substitution& sigma,
                              const std::vector<std::size_t>& premise_nodes = {}) {
  for (const auto& m : t.metavars)
    if (!sigma.count(m)) throw std::invalid_argument("schema " + t.name + ": metavariable " + m + " is unbound");
  if (premise_nodes.size() != t.premises.size())
    throw std::invalid_argument("schema " + t.name + ": wrong number of premises");
  Substituter sub(sigma);
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> plug(t.proof.node_count(), none);
  for (std::size_t i = 0; i < t.premise_leaf.size(); ++i) {
    if (b.label(premise_nodes[i]) != sub(t.premises[i]))
      throw std::logic_error("schema " + t.name + ": premise " + std::to_string(i) + " does not match: " +
                             render(b.label(premise_nodes[i])) + " vs " + render(sub(t.premises[i])));
    plug[t.premise_leaf[i]] = premise_nodes[i];
  }
  std::vector<std::size_t> at(t.proof.node_count());
  for (std::size_t v = 0; v < t.proof.node_count(); ++v) {  // creation order is topological
    if (plug[v] != none) {
      at[v] = plug[v];
      continue;
    }
    std::vector<std::size_t> ps;
    for (std::size_t u : t.proof.premises[v]) ps.push_back(at[u]);
    at[v] = b.add(sub(t.proof.labels[v]), std::move(ps));
  }
  return at[t.proof.root];
}

// Stand-alone instance: a tree derivation of σ(conclusion) from σ(premises).
inline Derivation instantiate_schema(const SchemaTemplate& t, const Substitution& sigma) {
  DagBuilder b;
  std::vector<std::size_t> leaves;
  for (const auto& m : t.metavars)
    if (!sigma.count(m)) throw std::invalid_argument("schema " + t.name + ": metavariable " + m + " is unbound");
  for (const auto& p : t.premises) leaves.push_back(b.leaf(apply_subst(sigma, p)));
  return b.finish(use_schema(b, t, sigma, leaves));
}

}  // namespace nmx
