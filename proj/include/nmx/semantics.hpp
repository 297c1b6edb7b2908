#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"
#include "nmx/natded.hpp"

namespace nmx {

// ---- Kripke models ----

class KripkeModel {
 public:
  KripkeModel() = default;

  // leq[x][y] != 0 means x ≤ y. Throws unless leq is a partial order and the valuation persists.
  KripkeModel(std::vector<std::vector<char>> leq, std::vector<std::set<std::string>> val)
      : leq_(std::move(leq)), val_(std::move(val)) {
    const std::size_t n = leq_.size();
    if (val_.size() != n) throw std::invalid_argument("KripkeModel: valuation size mismatch");
    for (const auto& row : leq_)
      if (row.size() != n) throw std::invalid_argument("KripkeModel: order is not square");
    for (std::size_t x = 0; x < n; ++x) {
      if (!leq_[x][x]) throw std::invalid_argument("KripkeModel: order is not reflexive");
      for (std::size_t y = 0; y < n; ++y) {
        if (x != y && leq_[x][y] && leq_[y][x]) throw std::invalid_argument("KripkeModel: order is not antisymmetric");
        for (std::size_t z = 0; z < n; ++z)
          if (leq_[x][y] && leq_[y][z] && !leq_[x][z]) throw std::invalid_argument("KripkeModel: order is not transitive");
        if (leq_[x][y] && !std::includes(val_[y].begin(), val_[y].end(), val_[x].begin(), val_[x].end()))
          throw std::invalid_argument("KripkeModel: valuation is not persistent");
      }
    }
  }

  std::size_t worlds() const { return leq_.size(); }
  bool leq(std::size_t x, std::size_t y) const { return leq_[x][y] != 0; }
  const std::set<std::string>& valuation(std::size_t w) const { return val_[w]; }

 private:
  std::vector<std::vector<char>> leq_;
  std::vector<std::set<std::string>> val_;
};

class Forcing {
 public:
  explicit Forcing(const KripkeModel& m) : m_(m) {}

  bool operator()(std::size_t w, const Formula& f) {
    if (w >= m_.worlds()) throw std::out_of_range("forces: unknown world");
    return mask(f)[w] != 0;
  }

 private:
  const std::vector<char>& mask(const Formula& f) {
    auto it = memo_.find(f.id());
    if (it != memo_.end()) return it->second;
    std::vector<char> out(m_.worlds(), 0);
    if (f.is_var()) {
      for (std::size_t w = 0; w < m_.worlds(); ++w) out[w] = m_.valuation(w).count(f.name()) ? 1 : 0;
    } else {
      std::vector<char> a = mask(f.lhs());
      std::vector<char> b = mask(f.rhs());
      for (std::size_t w = 0; w < m_.worlds(); ++w) {
        bool ok = true;
        for (std::size_t y = 0; y < m_.worlds() && ok; ++y)
          if (m_.leq(w, y) && a[y] && !b[y]) ok = false;
        out[w] = ok ? 1 : 0;
      }
    }
    pins_.push_back(f);
    return memo_.emplace(f.id(), std::move(out)).first->second;
  }

  const KripkeModel& m_;
  std::unordered_map<const void*, std::vector<char>> memo_;
  std::vector<Formula> pins_;
};

inline bool forces(const KripkeModel& m, std::size_t w, const Formula& f) { return Forcing(m)(w, f); }

inline bool holds(const KripkeModel& m, const Formula& f) {
  Forcing fc(m);
  for (std::size_t w = 0; w < m.worlds(); ++w)
    if (!fc(w, f)) return false;
  return true;
}

// Text form: "worlds N", then "order x y" for every x ≤ y, then "val w name..." lines.
inline void write_kripke(std::ostream& out, const KripkeModel& m) {
  out << "worlds " << m.worlds() << '\n';
  for (std::size_t x = 0; x < m.worlds(); ++x)
    for (std::size_t y = 0; y < m.worlds(); ++y)
      if (m.leq(x, y)) out << "order " << x << ' ' << y << '\n';
  for (std::size_t w = 0; w < m.worlds(); ++w) {
    out << "val " << w;
    for (const auto& v : m.valuation(w)) out << ' ' << v;
    out << '\n';
  }
}

inline KripkeModel read_kripke(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<std::vector<char>> leq;
  std::vector<std::set<std::string>> val;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw) || kw[0] == '#') continue;
    if (kw == "worlds") {
      if (!(ls >> n) || have_n) throw FormatError("bad worlds record");
      have_n = true;
      leq.assign(n, std::vector<char>(n, 0));
      val.assign(n, {});
    } else if (kw == "order") {
      std::size_t x, y;
      if (!have_n || !(ls >> x >> y) || x >= n || y >= n) throw FormatError("bad order record");
      leq[x][y] = 1;
    } else if (kw == "val") {
      std::size_t w;
      if (!have_n || !(ls >> w) || w >= n) throw FormatError("bad val record");
      std::string v;
      while (ls >> v) {
        if (!valid_identifier(v)) throw FormatError("bad variable name " + v);
        val[w].insert(v);
      }
    } else {
      throw FormatError("unknown record " + kw);
    }
  }
  try {
    return KripkeModel(std::move(leq), std::move(val));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

// ---- classical evaluation ----

using Assignment = std::map<std::string, bool>;

inline bool classical_eval(const Assignment& a, const Formula& f) {
  if (f.is_var()) {
    auto it = a.find(f.name());
    if (it == a.end()) throw std::invalid_argument("classical_eval: no value for " + f.name());
    return it->second;
  }
  return !classical_eval(a, f.lhs()) || classical_eval(a, f.rhs());
}

// ---- decision procedure ----

enum class Verdict { Valid, Invalid, Budget };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    default: return "budget";
  }
}

struct DecisionResult {
  Verdict verdict = Verdict::Budget;
  std::optional<NmDerivation> proof;
  std::optional<KripkeModel> countermodel;
  std::size_t countermodel_world = 0;  // world forcing Γ but not φ
  std::uint64_t states = 0;
};

namespace detail {

// Searches for a classical valuation making every ctx formula true and goal false. Such a
// valuation refutes the sequent intuitionistically as well, so the prover uses it to abandon
// hopeless branches early. Gives up (returns false) after `budget` case splits.
class ClassicalRefuter {
 public:
  explicit ClassicalRefuter(std::size_t budget) : budget_(budget) {}

  bool refutes(const std::vector<Formula>& ctx, const Formula& goal) {
    splits_ = 0;
    State s;
    for (const auto& f : ctx)
      if (!assert_true(s, f)) return false;
    if (!assert_false(s, goal)) return false;
    return solve(s);
  }

  // The refuting valuation as the set of true variables (unconstrained ones false).
  std::optional<std::set<std::string>> valuation(const std::vector<Formula>& ctx, const Formula& goal) {
    if (!refutes(ctx, goal)) return std::nullopt;
    std::set<std::string> out;
    for (const auto& [atom, value] : solution_)
      if (value) out.insert(atom);
    return out;
  }

 private:
  enum Val : signed char { kF = 0, kT = 1, kU = 2 };
  // Truth values of every formula asserted so far, atoms and implications alike.
  struct State {
    std::unordered_map<const void*, bool> known;
    std::vector<Formula> pending;  // implications asserted true, not yet satisfied
  };

  static Val eval(const State& s, const Formula& f) {
    auto it = s.known.find(f.id());
    if (it != s.known.end()) return it->second ? kT : kF;
    if (f.is_var()) return kU;
    Val a = eval(s, f.lhs());
    if (a == kF) return kT;
    Val b = eval(s, f.rhs());
    if (b == kT) return kT;
    if (a == kT && b == kF) return kF;
    return kU;
  }

  // Records f = value; false on conflict. `fresh` reports whether it was new.
  static bool assign(State& s, const Formula& f, bool value, bool& fresh) {
    auto [it, ins] = s.known.emplace(f.id(), value);
    fresh = ins;
    return ins || it->second == value;
  }

  static bool assert_true(State& s, const Formula& f) {
    bool fresh;
    if (!assign(s, f, true, fresh)) return false;
    if (fresh && f.is_imp()) s.pending.push_back(f);
    return true;
  }

  static bool assert_false(State& s, const Formula& f) {
    bool fresh;
    if (!assign(s, f, false, fresh)) return false;
    if (!fresh || f.is_var()) return true;
    return assert_true(s, f.lhs()) && assert_false(s, f.rhs());
  }

  // Unit propagation over the pending implications; false on conflict.
  static bool propagate(State& s) {
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<Formula> rest;
      for (std::size_t i = 0; i < s.pending.size(); ++i) {
        const Formula f = s.pending[i];
        Val a = eval(s, f.lhs()), b = eval(s, f.rhs());
        if (a == kF || b == kT) continue;
        if (a == kT && b == kF) return false;
        if (a == kT) {
          if (!assert_true(s, f.rhs())) return false;
          changed = true;
        } else if (b == kF) {
          if (!assert_false(s, f.lhs())) return false;
          changed = true;
        } else {
          rest.push_back(f);
        }
      }
      // entries appended by assert_true during the scan were visited by the same loop
      s.pending = std::move(rest);
    }
    return true;
  }

  bool solve(State s) {
    if (!propagate(s)) return false;
    if (s.pending.empty()) {
      solution_.clear();
      for (const auto& [id, value] : s.known) {
        const auto* node = static_cast<const FNode*>(id);
        if (node->is_var) solution_[node->name] = value;
      }
      return true;
    }
    if (++splits_ > budget_) return false;
    const Formula f = s.pending.front();
    State left = s;
    if (assert_false(left, f.lhs()) && solve(std::move(left))) return true;
    s.pending.erase(s.pending.begin());
    return assert_true(s, f.rhs()) && solve(std::move(s));
  }

  std::size_t budget_;
  std::size_t splits_ = 0;
  std::map<std::string, bool> solution_;
};

// Contraction-free sequent search (Dyckhoff's calculus restricted to →). Invertible steps
// (→R, and p, p→B ⟹ B) are applied eagerly; the remaining choice is the rule for a left
// formula (C→D)→B. Results are memoised per saturated sequent, which is sound because the
// calculus needs no loop check. Successful searches produce NM nodes in a shared builder, so a
// sequent reached twice reuses its subproof.
class Prover {
 public:
  explicit Prover(std::uint64_t budget) : budget_(budget) {}

  // Index of a builder node proving goal from ctx, or nullopt.
  std::optional<std::size_t> prove(std::vector<Formula> ctx, const Formula& goal) {
    normalize(ctx);
    return search(std::move(ctx), goal);
  }

  bool provable(std::vector<Formula> ctx, const Formula& goal) { return prove(std::move(ctx), goal).has_value(); }

  DagBuilder& builder() { return b_; }
  std::uint64_t states() const { return states_; }

 private:
  using Key = std::vector<const void*>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0x84222325cbf29ce4ULL;
      for (const void* p : k) h = mix64(h ^ reinterpret_cast<std::uintptr_t>(p));
      return static_cast<std::size_t>(h);
    }
  };
  struct Memo {
    bool ok = false;
    std::size_t node = 0;
  };

  static void normalize(std::vector<Formula>& ctx) {
    std::sort(ctx.begin(), ctx.end(), FormulaLess());
    ctx.erase(std::unique(ctx.begin(), ctx.end()), ctx.end());
  }

  static bool contains(const std::vector<Formula>& ctx, const Formula& f) {
    return std::binary_search(ctx.begin(), ctx.end(), f, FormulaLess());
  }

  static void insert(std::vector<Formula>& ctx, const Formula& f) {
    auto it = std::lower_bound(ctx.begin(), ctx.end(), f, FormulaLess());
    if (it == ctx.end() || *it != f) ctx.insert(it, f);
  }

  static void erase(std::vector<Formula>& ctx, const Formula& f) {
    auto it = std::lower_bound(ctx.begin(), ctx.end(), f, FormulaLess());
    if (it != ctx.end() && *it == f) ctx.erase(it);
  }

  struct Cut {
    Formula atom, major;  // p and p → B
  };

  std::optional<std::size_t> search(std::vector<Formula> ctx, Formula goal) {
    // →R until the goal is atomic.
    RecentScope scope(recent_);
    std::vector<Formula> intro;
    while (goal.is_imp()) {
      intro.push_back(goal.lhs());
      if (goal.lhs().is_var() && !contains(ctx, goal.lhs())) scope.push(goal.lhs());
      insert(ctx, goal.lhs());
      goal = goal.rhs();
    }
    // p, p → B  ⟹  p, B
    std::vector<Cut> cuts;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < ctx.size(); ++i) {
        const Formula f = ctx[i];
        if (f.is_imp() && f.lhs().is_var() && contains(ctx, f.lhs())) {
          cuts.push_back({f.lhs(), f});
          erase(ctx, f);
          if (f.rhs().is_var() && !contains(ctx, f.rhs())) scope.push(f.rhs());
          insert(ctx, f.rhs());
          changed = true;
          break;
        }
      }
    }
    auto core = search_core(ctx, goal);
    if (!core) return std::nullopt;
    std::size_t node = *core;
    for (std::size_t i = cuts.size(); i-- > 0;) {
      const Cut& c = cuts[i];
      std::size_t b = b_.mp(b_.leaf(c.atom), b_.leaf(c.major));
      node = b_.mp(b, b_.intro(node, c.major.rhs()));
    }
    for (std::size_t i = intro.size(); i-- > 0;) node = b_.intro(node, intro[i]);
    return node;
  }

  std::optional<std::size_t> search_core(const std::vector<Formula>& ctx, const Formula& goal) {
    if (contains(ctx, goal)) return b_.leaf(goal);
    if (refuter_.refutes(ctx, goal)) return std::nullopt;
    Key key;
    key.reserve(ctx.size() + 1);
    for (const auto& f : ctx) key.push_back(f.id());
    key.push_back(goal.id());
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      if (it->second.ok) return it->second.node;
      return std::nullopt;
    }
    if (++states_ > budget_) throw BudgetExceeded("decide exceeded " + std::to_string(budget_) + " search states");
    for (const auto& f : ctx) pins_.push_back(f);
    pins_.push_back(goal);

    std::optional<std::size_t> result;
    for (std::size_t idx : candidates(ctx)) {
      const Formula x = ctx[idx];  // (C → D) → B
      const Formula& c = x.lhs().lhs();
      const Formula& d = x.lhs().rhs();
      const Formula& bb = x.rhs();
      Formula db = imp(d, bb);
      std::vector<Formula> left = ctx;
      erase(left, x);
      std::vector<Formula> right = left;
      insert(left, db);
      auto p1 = search(std::move(left), x.lhs());
      if (!p1) continue;
      insert(right, bb);
      auto p2 = search(std::move(right), goal);
      if (!p2) continue;
      // D → B from (C → D) → B: [D] ⟹ C → D ⟹ B ⟹ D → B.
      std::size_t lx = b_.leaf(x);
      std::size_t cd0 = b_.intro(b_.leaf(d), c);
      std::size_t db_node = b_.intro(b_.mp(cd0, lx), d);
      // Discharge D → B in the first premise, then B in the second.
      std::size_t cd = b_.mp(db_node, b_.intro(*p1, db));
      std::size_t b_node = b_.mp(cd, b_.leaf(x));
      result = b_.mp(b_node, b_.intro(*p2, bb));
      break;
    }
    memo_[key] = result ? Memo{true, *result} : Memo{false, 0};
    return result;
  }

  // Left formulas of shape (C → D) → B. Those mentioning the most recently added atoms come
  // first: after a case split on p, the formulas about p are the ones likely to close the branch
  // quickly, and trying unrelated splits first multiplies the proof size.
  std::vector<std::size_t> candidates(const std::vector<Formula>& ctx) {
    std::vector<std::pair<std::ptrdiff_t, std::size_t>> scored;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (!ctx[i].is_imp() || !ctx[i].lhs().is_imp()) continue;
      const auto& vs = vars_cached(ctx[i]);
      std::ptrdiff_t score = -1;
      for (std::size_t r = recent_.size(); r-- > 0;) {
        if (std::binary_search(vs.begin(), vs.end(), recent_[r].name())) {
          score = static_cast<std::ptrdiff_t>(r);
          break;
        }
      }
      scored.push_back({score, i});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> out;
    for (const auto& s : scored) out.push_back(s.second);
    return out;
  }

  const std::vector<std::string>& vars_cached(const Formula& f) {
    auto it = vars_.find(f.id());
    if (it != vars_.end()) return it->second;
    auto vs = vars_of(f);
    pins_.push_back(f);
    return vars_.emplace(f.id(), std::vector<std::string>(vs.begin(), vs.end())).first->second;
  }

  struct RecentScope {
    explicit RecentScope(std::vector<Formula>& s) : stack(s), base(s.size()) {}
    ~RecentScope() { stack.resize(base); }
    void push(const Formula& a) { stack.push_back(a); }
    std::vector<Formula>& stack;
    std::size_t base;
  };

  static std::uint64_t mix64(std::uint64_t x) { return nmx::detail::mix64(x); }

  std::uint64_t budget_;
  std::uint64_t states_ = 0;
  DagBuilder b_;
  std::unordered_map<Key, Memo, KeyHash> memo_;
  std::vector<Formula> pins_;
  ClassicalRefuter refuter_{64};
  std::vector<Formula> recent_;  // atoms in the order they entered the context on the current branch
  std::unordered_map<const void*, std::vector<std::string>> vars_;
};

inline void collect_subformulas(const Formula& f, FormulaSet& out) {
  if (!out.insert(f).second) return;
  if (f.is_imp()) {
    collect_subformulas(f.lhs(), out);
    collect_subformulas(f.rhs(), out);
  }
}

// Finite model whose worlds are the subformula-closed theories reachable from Γ's; a world
// forces a subformula exactly when it contains it.
inline std::pair<KripkeModel, std::size_t> build_countermodel(Prover& prover, const std::vector<Formula>& gamma,
                                                              const Formula& phi, std::size_t max_worlds) {
  FormulaSet subs;
  for (const auto& g : gamma) collect_subformulas(g, subs);
  collect_subformulas(phi, subs);
  std::vector<Formula> sub(subs.begin(), subs.end());

  auto close = [&](const std::vector<Formula>& base) {
    std::vector<char> in(sub.size(), 0);
    for (std::size_t i = 0; i < sub.size(); ++i) in[i] = prover.provable(base, sub[i]) ? 1 : 0;
    return in;
  };
  auto members = [&](const std::vector<char>& in) {
    std::vector<Formula> out;
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (in[i]) out.push_back(sub[i]);
    return out;
  };

  std::map<std::vector<char>, std::size_t> index;
  std::vector<std::vector<char>> worlds;
  auto add = [&](std::vector<char> in) {
    auto it = index.find(in);
    if (it != index.end()) return false;
    if (worlds.size() >= max_worlds) throw BudgetExceeded("countermodel exceeded " + std::to_string(max_worlds) + " worlds");
    index.emplace(in, worlds.size());
    worlds.push_back(std::move(in));
    return true;
  };
  add(close(gamma));
  for (std::size_t w = 0; w < worlds.size(); ++w) {
    for (std::size_t i = 0; i < sub.size(); ++i) {
      if (worlds[w][i] || !sub[i].is_imp()) continue;
      std::vector<Formula> base = members(worlds[w]);
      base.push_back(sub[i].lhs());
      add(close(base));
    }
  }
  const std::size_t n = worlds.size();
  std::vector<std::vector<char>> leq(n, std::vector<char>(n, 0));
  std::vector<std::set<std::string>> val(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      bool sub_of = true;
      for (std::size_t i = 0; i < sub.size() && sub_of; ++i)
        if (worlds[x][i] && !worlds[y][i]) sub_of = false;
      leq[x][y] = sub_of ? 1 : 0;
    }
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (worlds[x][i] && sub[i].is_var()) val[x].insert(sub[i].name());
  }
  return {KripkeModel(std::move(leq), std::move(val)), 0};
}

// Greedily drops worlds other than the refuting one while the rest still refutes Γ ⇒ φ there.
// Any subset of worlds with the inherited order and valuation is again a model.
inline std::pair<KripkeModel, std::size_t> shrink_countermodel(const KripkeModel& m, std::size_t root,
                                                               const std::vector<Formula>& gamma, const Formula& phi) {
  std::vector<std::size_t> keep(m.worlds());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  auto restrict = [&](const std::vector<std::size_t>& ws) {
    std::vector<std::vector<char>> leq(ws.size(), std::vector<char>(ws.size(), 0));
    std::vector<std::set<std::string>> val(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
      val[i] = m.valuation(ws[i]);
      for (std::size_t j = 0; j < ws.size(); ++j) leq[i][j] = m.leq(ws[i], ws[j]) ? 1 : 0;
    }
    return KripkeModel(std::move(leq), std::move(val));
  };
  auto refutes = [&](const std::vector<std::size_t>& ws) {
    std::size_t r = std::find(ws.begin(), ws.end(), root) - ws.begin();
    KripkeModel k = restrict(ws);
    Forcing fc(k);
    for (const auto& g : gamma)
      if (!fc(r, g)) return false;
    return !fc(r, phi);
  };
  if (m.worlds() <= 12) {
    // Smallest refuting subset, found by increasing size.
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < m.worlds(); ++i)
      if (i != root) others.push_back(i);
    for (std::size_t size = 0; size <= others.size(); ++size) {
      for (std::uint32_t mask = 0; mask < (1u << others.size()); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
        std::vector<std::size_t> ws{root};
        for (std::size_t i = 0; i < others.size(); ++i)
          if (mask >> i & 1u) ws.push_back(others[i]);
        std::sort(ws.begin(), ws.end());
        if (refutes(ws)) {
          std::size_t r = std::find(ws.begin(), ws.end(), root) - ws.begin();
          return {restrict(ws), r};
        }
      }
    }
  }
  for (std::size_t i = keep.size(); i-- > 0;) {
    if (keep[i] == root) continue;
    std::vector<std::size_t> trial = keep;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (refutes(trial)) keep = std::move(trial);
  }
  std::size_t r = std::find(keep.begin(), keep.end(), root) - keep.begin();
  return {restrict(keep), r};
}

}  // namespace detail

struct DecideOptions {
  std::uint64_t budget = 1'000'000;
  std::size_t max_countermodel_worlds = 4096;
  std::size_t shrink_limit = 256;
  bool want_countermodel = true;
  // The search shares the subproof of a sequent reached twice, so its raw witness is a dag.
  // By default it is unravelled into the tree the contract asks for; callers that want the
  // compact dag (the interpolation pipeline) switch this off.
  bool tree_witness = true;
};

inline DecisionResult decide(const std::vector<Formula>& gamma, const Formula& phi, const DecideOptions& opt = {}) {
  DecisionResult r;
  detail::Prover prover(opt.budget);
  try {
    auto node = prover.prove(gamma, phi);
    if (node) {
      r.verdict = Verdict::Valid;
      r.proof = prover.builder().finish(*node, "d");
      if (opt.tree_witness) r.proof = unravel(*r.proof, opt.budget * 64);
    } else {
      r.verdict = Verdict::Invalid;
      if (opt.want_countermodel) {
        // A classically false sequent is refuted by a single world.
        if (auto val = detail::ClassicalRefuter(100000).valuation(gamma, phi)) {
          r.countermodel = KripkeModel({{1}}, {*val});
          r.countermodel_world = 0;
          r.states = prover.states();
          return r;
        }
        auto [m, w] = detail::build_countermodel(prover, gamma, phi, opt.max_countermodel_worlds);
        if (m.worlds() <= opt.shrink_limit) std::tie(m, w) = detail::shrink_countermodel(m, w, gamma, phi);
        r.countermodel = std::move(m);
        r.countermodel_world = w;
      }
    }
  } catch (const BudgetExceeded&) {
    r.verdict = Verdict::Budget;
    r.proof.reset();
    r.countermodel.reset();
  }
  r.states = prover.states();
  return r;
}

inline DecisionResult decide(const FormulaSet& gamma, const Formula& phi, const DecideOptions& opt = {}) {
  return decide(std::vector<Formula>(gamma.begin(), gamma.end()), phi, opt);
}

inline bool is_tautology(const Formula& phi, std::uint64_t budget = 1'000'000) {
  DecideOptions opt;
  opt.budget = budget;
  opt.want_countermodel = false;
  auto r = decide(std::vector<Formula>{}, phi, opt);
  if (r.verdict == Verdict::Budget) throw BudgetExceeded("is_tautology: budget exhausted");
  return r.verdict == Verdict::Valid;
}

}  // namespace nmx
