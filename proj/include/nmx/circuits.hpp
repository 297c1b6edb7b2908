#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"
#include "nmx/semantics.hpp"

namespace nmx {

enum class GateKind { Var, And, Or };

struct Gate {
  GateKind kind = GateKind::Var;
  std::string name;                 // Var gates only
  std::vector<std::size_t> inputs;  // And / Or; every input index is smaller than the gate's own
};

// Gates are stored in topological order, so every gate comes after its inputs. An empty And is
// the constant 1 and an empty Or the constant 0.
struct MonotoneCircuit {
  std::vector<Gate> gates;
  std::size_t root = 0;

  std::size_t gate_count() const { return gates.size(); }

  // Number of wires, Σ fan-in.
  std::uint64_t size() const {
    std::uint64_t s = 0;
    for (const auto& g : gates) s += g.inputs.size();
    return s;
  }

  std::size_t max_fanin() const {
    std::size_t m = 0;
    for (const auto& g : gates) m = std::max(m, g.inputs.size());
    return m;
  }

  std::vector<std::string> variables() const {
    std::set<std::string> s;
    for (const auto& g : gates)
      if (g.kind == GateKind::Var) s.insert(g.name);
    return {s.begin(), s.end()};
  }
};

inline void validate_circuit(const MonotoneCircuit& c) {
  if (c.gates.empty()) throw std::invalid_argument("circuit has no gates");
  if (c.root >= c.gates.size()) throw std::invalid_argument("circuit root out of range");
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::Var) {
      if (!g.inputs.empty()) throw std::invalid_argument("variable gate with inputs");
      if (!valid_identifier(g.name)) throw std::invalid_argument("bad variable name '" + g.name + "'");
    }
    for (std::size_t j : g.inputs)
      if (j >= i) throw std::invalid_argument("circuit gates are not in topological order");
  }
}

// Builds circuits gate by gate. With folding on, constants are propagated, single-input gates
// collapse to their input, inputs are sorted and deduplicated, and structurally equal gates are
// shared. With folding off every call appends a gate exactly as requested.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(bool fold = true) : fold_(fold) {}

  std::size_t var(const std::string& name) {
    if (fold_) {
      auto it = vars_.find(name);
      if (it != vars_.end()) return it->second;
    }
    std::size_t id = push({GateKind::Var, name, {}});
    if (fold_) vars_[name] = id;
    return id;
  }

  std::size_t constant(bool value) {
    if (fold_ && konst_[value] != kNone) return konst_[value];
    std::size_t id = push({value ? GateKind::And : GateKind::Or, "", {}});
    if (fold_) konst_[value] = id;
    return id;
  }

  std::size_t and_gate(std::vector<std::size_t> in) { return gate(GateKind::And, std::move(in)); }
  std::size_t or_gate(std::vector<std::size_t> in) { return gate(GateKind::Or, std::move(in)); }

  std::size_t gate(GateKind kind, std::vector<std::size_t> in) {
    if (kind == GateKind::Var) throw std::invalid_argument("use var() for variable gates");
    for (std::size_t j : in)
      if (j >= gates_.size()) throw std::invalid_argument("gate input out of range");
    if (!fold_) return push({kind, "", std::move(in)});
    const bool absorbing = kind == GateKind::Or;  // the constant that decides the gate
    std::vector<std::size_t> kept;
    for (std::size_t j : in) {
      bool v;
      if (is_constant(j, v)) {
        if (v == absorbing) return constant(absorbing);
        continue;
      }
      kept.push_back(j);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    if (kept.empty()) return constant(!absorbing);
    if (kept.size() == 1) return kept[0];
    Key key{kind, kept};
    auto it = shared_.find(key);
    if (it != shared_.end()) return it->second;
    std::size_t id = push({kind, "", std::move(kept)});
    shared_.emplace(std::move(key), id);
    return id;
  }

  bool is_constant(std::size_t id, bool& value) const {
    const Gate& g = gates_[id];
    if (g.kind == GateKind::Var || !g.inputs.empty()) return false;
    value = g.kind == GateKind::And;
    return true;
  }

  std::size_t size() const { return gates_.size(); }
  std::uint64_t wires() const {
    std::uint64_t s = 0;
    for (const auto& g : gates_) s += g.inputs.size();
    return s;
  }

  // The sub-circuit reachable from root, renumbered in the same relative order.
  MonotoneCircuit finish(std::size_t root) const {
    std::vector<char> live(gates_.size(), 0);
    live[root] = 1;
    for (std::size_t i = root + 1; i-- > 0;)
      if (live[i])
        for (std::size_t j : gates_[i].inputs) live[j] = 1;
    std::vector<std::size_t> renum(gates_.size(), 0);
    MonotoneCircuit c;
    for (std::size_t i = 0; i <= root; ++i) {
      if (!live[i]) continue;
      renum[i] = c.gates.size();
      Gate g = gates_[i];
      for (auto& j : g.inputs) j = renum[j];
      c.gates.push_back(std::move(g));
    }
    c.root = renum[root];
    return c;
  }

  // Copies c into this builder and returns the index of its root. Var gates can be renamed or
  // replaced by an arbitrary existing gate through `map_var`.
  template <class MapVar>
  std::size_t import(const MonotoneCircuit& c, MapVar map_var) {
    std::vector<std::size_t> renum(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
      const Gate& g = c.gates[i];
      if (g.kind == GateKind::Var) {
        renum[i] = map_var(g.name);
        continue;
      }
      std::vector<std::size_t> in;
      for (std::size_t j : g.inputs) in.push_back(renum[j]);
      renum[i] = gate(g.kind, std::move(in));
    }
    return renum[c.root];
  }

  std::size_t import(const MonotoneCircuit& c) {
    return import(c, [this](const std::string& n) { return var(n); });
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  using Key = std::pair<GateKind, std::vector<std::size_t>>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = static_cast<std::uint64_t>(k.first) + 0x9e3779b97f4a7c15ULL;
      for (std::size_t j : k.second) h = detail::mix64(h ^ j);
      return static_cast<std::size_t>(h);
    }
  };

  std::size_t push(Gate g) {
    gates_.push_back(std::move(g));
    return gates_.size() - 1;
  }

  bool fold_;
  std::vector<Gate> gates_;
  std::unordered_map<std::string, std::size_t> vars_;
  std::size_t konst_[2] = {kNone, kNone};
  std::unordered_map<Key, std::size_t, KeyHash> shared_;
};

inline MonotoneCircuit circuit_var(const std::string& name) {
  CircuitBuilder b;
  return b.finish(b.var(name));
}

inline MonotoneCircuit circuit_constant(bool value) {
  CircuitBuilder b;
  return b.finish(b.constant(value));
}

// ---- evaluation ----

inline bool eval_circuit(const MonotoneCircuit& c, const Assignment& a) {
  std::vector<char> val(c.gates.size(), 0);
  for (std::size_t i = 0; i <= c.root; ++i) {
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Var: {
        auto it = a.find(g.name);
        if (it == a.end()) throw std::invalid_argument("eval_circuit: no value for '" + g.name + "'");
        val[i] = it->second;
        break;
      }
      case GateKind::And:
        val[i] = 1;
        for (std::size_t j : g.inputs) val[i] &= val[j];
        break;
      case GateKind::Or:
        val[i] = 0;
        for (std::size_t j : g.inputs) val[i] |= val[j];
        break;
    }
  }
  return val[c.root] != 0;
}

// 64 assignments at once: bit b of the result is the output under the assignment formed by
// bit b of every input word.
inline std::uint64_t eval_circuit_words(const MonotoneCircuit& c,
                                        const std::unordered_map<std::string, std::uint64_t>& words) {
  std::vector<std::uint64_t> val(c.gates.size(), 0);
  for (std::size_t i = 0; i <= c.root; ++i) {
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Var: {
        auto it = words.find(g.name);
        if (it == words.end()) throw std::invalid_argument("eval_circuit: no value for '" + g.name + "'");
        val[i] = it->second;
        break;
      }
      case GateKind::And:
        val[i] = ~std::uint64_t{0};
        for (std::size_t j : g.inputs) val[i] &= val[j];
        break;
      case GateKind::Or:
        val[i] = 0;
        for (std::size_t j : g.inputs) val[i] |= val[j];
        break;
    }
  }
  return val[c.root];
}

// Truth table over `vars` (variable i is bit i of the assignment index), packed 64 entries per
// word. Variables of c missing from `vars` are an error.
inline std::vector<std::uint64_t> truth_table(const MonotoneCircuit& c, const std::vector<std::string>& vars) {
  if (vars.size() > 30) throw std::invalid_argument("truth_table: too many variables");
  const std::uint64_t rows = std::uint64_t{1} << vars.size();
  const std::uint64_t words = (rows + 63) / 64;
  static const std::uint64_t low[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                       0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  std::vector<std::uint64_t> out(words, 0);
  std::unordered_map<std::string, std::uint64_t> in;
  for (std::uint64_t w = 0; w < words; ++w) {
    for (std::size_t i = 0; i < vars.size(); ++i)
      in[vars[i]] = i < 6 ? low[i] : (((w << 6) >> i) & 1 ? ~std::uint64_t{0} : 0);
    std::uint64_t r = eval_circuit_words(c, in);
    if (rows < 64) r &= (std::uint64_t{1} << rows) - 1;
    out[w] = r;
  }
  return out;
}

// ---- transformations ----

// Replaces every gate of fan-in d > 2 by a chain of d − 1 binary gates (2(d − 1) wires).
inline MonotoneCircuit to_bounded_fanin(const MonotoneCircuit& c) {
  CircuitBuilder b(false);
  std::vector<std::size_t> renum(c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::Var) {
      renum[i] = b.var(g.name);
      continue;
    }
    if (g.inputs.size() <= 2) {
      std::vector<std::size_t> in;
      for (std::size_t j : g.inputs) in.push_back(renum[j]);
      renum[i] = b.gate(g.kind, std::move(in));
      continue;
    }
    std::size_t acc = b.gate(g.kind, {renum[g.inputs[0]], renum[g.inputs[1]]});
    for (std::size_t k = 2; k < g.inputs.size(); ++k) acc = b.gate(g.kind, {acc, renum[g.inputs[k]]});
    renum[i] = acc;
  }
  return b.finish(renum[c.root]);
}

// Renames or substitutes variables; `map_var` returns a replacement circuit for each variable.
template <class MapVar>
MonotoneCircuit substitute_circuit(const MonotoneCircuit& c, MapVar map_var, bool fold = true) {
  CircuitBuilder b(fold);
  std::size_t root = b.import(c, [&](const std::string& name) { return b.import(map_var(name)); });
  return b.finish(root);
}

inline MonotoneCircuit fold_constants(const MonotoneCircuit& c) {
  CircuitBuilder b(true);
  return b.finish(b.import(c));
}

// ---- circuit file format ----
//   id = VAR name | AND id,... | OR id,...
//   root id

inline MonotoneCircuit read_circuit(std::istream& in) {
  struct Rec {
    GateKind kind;
    std::string name;
    std::vector<std::string> inputs;
    std::size_t line;
  };
  std::map<std::string, Rec> recs;
  std::vector<std::string> order;
  std::string root_id, line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw FormatError("line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("root", 0) == 0 && (t.size() == 4 || t[4] == ' ' || t[4] == '\t')) {
      if (!root_id.empty()) fail("second root declaration");
      root_id = trim(t.substr(4));
      if (!valid_node_id(root_id)) fail("bad root id");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail("unrecognised record");
    std::string id = trim(t.substr(0, eq));
    if (!valid_node_id(id)) fail("bad gate id '" + id + "'");
    if (recs.count(id)) fail("duplicate gate id '" + id + "'");
    std::istringstream body(t.substr(eq + 1));
    std::string kind, rest;
    body >> kind;
    std::getline(body, rest);
    rest = trim(rest);
    Rec r{GateKind::Var, "", {}, lineno};
    if (kind == "VAR") {
      if (!valid_identifier(rest)) fail("bad variable name '" + rest + "'");
      r.name = rest;
    } else if (kind == "AND" || kind == "OR") {
      r.kind = kind == "AND" ? GateKind::And : GateKind::Or;
      std::string item;
      std::istringstream items(rest);
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!valid_node_id(item)) fail("bad input id '" + item + "'");
        r.inputs.push_back(item);
      }
    } else {
      fail("unknown gate kind '" + kind + "'");
    }
    recs.emplace(id, std::move(r));
    order.push_back(id);
  }
  if (root_id.empty()) throw FormatError("missing root declaration");
  if (!recs.count(root_id)) throw FormatError("root names unknown gate '" + root_id + "'");
  for (const auto& [id, r] : recs)
    for (const auto& j : r.inputs)
      if (!recs.count(j)) {
        lineno = r.line;
        fail("unknown input gate '" + j + "'");
      }
  // Depth-first topological numbering; a gate on the current path again is a cycle.
  std::map<std::string, std::size_t> index;
  std::map<std::string, int> state;
  MonotoneCircuit c;
  for (const auto& start : order) {
    if (state[start] == 2) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [id, k] = stack.back();
      const Rec& r = recs.at(id);
      if (k < r.inputs.size()) {
        const std::string next = r.inputs[k++];
        if (state[next] == 1) {
          lineno = r.line;
          fail("cycle through gate '" + next + "'");
        }
        if (state[next] == 0) {
          state[next] = 1;
          stack.push_back({next, 0});
        }
        continue;
      }
      Gate g{r.kind, r.name, {}};
      for (const auto& j : r.inputs) g.inputs.push_back(index.at(j));
      index[id] = c.gates.size();
      c.gates.push_back(std::move(g));
      state[id] = 2;
      stack.pop_back();
    }
  }
  c.root = index.at(root_id);
  return c;
}

inline MonotoneCircuit read_circuit_string(const std::string& s) {
  std::istringstream in(s);
  return read_circuit(in);
}

// Canonical form: gates named g<index> with zero padding, so sorting by id keeps the
// topological order.
inline void write_circuit(std::ostream& out, const MonotoneCircuit& c) {
  std::size_t width = std::to_string(c.gates.empty() ? 0 : c.gates.size() - 1).size();
  auto id = [&](std::size_t i) {
    std::string s = std::to_string(i);
    return "g" + std::string(width - s.size(), '0') + s;
  };
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    out << id(i) << " = ";
    if (g.kind == GateKind::Var) {
      out << "VAR " << g.name << '\n';
      continue;
    }
    out << (g.kind == GateKind::And ? "AND" : "OR");
    for (std::size_t k = 0; k < g.inputs.size(); ++k) out << (k ? "," : " ") << id(g.inputs[k]);
    out << '\n';
  }
  out << "root " << id(c.root) << '\n';
}

inline std::string circuit_to_string(const MonotoneCircuit& c) {
  std::ostringstream out;
  write_circuit(out, c);
  return out.str();
}

// ---- Clique–Colouring pair ----

inline std::string edge_var(int i, int j) {
  if (i > j) std::swap(i, j);
  return "e_" + std::to_string(i) + "_" + std::to_string(j);
}

struct CliqueColouringPair {
  int n = 0;
  int k = 0;
  std::vector<std::pair<int, int>> edges;  // X_n, lexicographic
  std::vector<std::string> vars;           // edge_var of each entry of edges
};

inline int cc_k(int n) {
  int k = 0;
  while ((k + 1) * (k + 1) <= n) ++k;
  return k;
}

inline CliqueColouringPair make_cc(int n) {
  if (n < 2) throw std::invalid_argument("CC_n needs n >= 2");
  CliqueColouringPair cc;
  cc.n = n;
  cc.k = cc_k(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      cc.edges.push_back({i, j});
      cc.vars.push_back(edge_var(i, j));
    }
  return cc;
}

inline constexpr int kCcBruteForceLimit = 8;

namespace detail {

inline std::vector<std::vector<char>> adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw std::invalid_argument("bad edge");
    adj[i][j] = adj[j][i] = 1;
  }
  return adj;
}

inline bool colour_from(const std::vector<std::vector<char>>& adj, int k, std::vector<int>& col, int v) {
  const int n = static_cast<int>(adj.size());
  if (v == n) return true;
  for (int c = 0; c < k; ++c) {
    bool ok = true;
    for (int u = 0; u < v && ok; ++u)
      if (adj[u][v] && col[u] == c) ok = false;
    if (!ok) continue;
    col[v] = c;
    if (colour_from(adj, k, col, v + 1)) return true;
  }
  return false;
}

inline bool clique_from(const std::vector<std::vector<char>>& adj, int need, std::vector<int>& chosen, int next) {
  if (static_cast<int>(chosen.size()) == need) return true;
  const int n = static_cast<int>(adj.size());
  for (int v = next; v < n; ++v) {
    bool ok = true;
    for (int u : chosen)
      if (!adj[u][v]) ok = false;
    if (!ok) continue;
    chosen.push_back(v);
    if (clique_from(adj, need, chosen, v + 1)) return true;
    chosen.pop_back();
  }
  return false;
}

}  // namespace detail

// side 0: the graph is k-colourable; side 1: it contains a (k+1)-clique.
inline bool cc_membership(int n, const std::vector<std::pair<int, int>>& edges, int side,
                          int limit = kCcBruteForceLimit) {
  if (n < 2) throw std::invalid_argument("CC_n needs n >= 2");
  if (n > limit) throw std::invalid_argument("cc_membership: n exceeds the brute-force bound " + std::to_string(limit));
  if (side != 0 && side != 1) throw std::invalid_argument("side must be 0 or 1");
  auto adj = detail::adjacency(n, edges);
  const int k = cc_k(n);
  if (side == 0) {
    std::vector<int> col(n, -1);
    return detail::colour_from(adj, k, col, 0);
  }
  std::vector<int> chosen;
  return detail::clique_from(adj, k + 1, chosen, 0);
}

struct SeparationReport {
  bool ok = true;
  bool exhaustive = true;
  std::uint64_t side0 = 0, side1 = 0;  // graphs checked on each side
  std::string message;
  explicit operator bool() const { return ok; }
};

// C must output 0 on every k-colourable graph and 1 on every graph with a (k+1)-clique.
// Exhaustive when |X_n| <= max_bits, otherwise `samples` random edge sets from `seed`.
inline SeparationReport check_separates(const MonotoneCircuit& c, int n, int max_bits = 21,
                                        std::uint64_t samples = 100000, std::uint64_t seed = 1) {
  auto cc = make_cc(n);
  SeparationReport rep;
  for (const auto& v : c.variables())
    if (std::find(cc.vars.begin(), cc.vars.end(), v) == cc.vars.end()) {
      rep.ok = false;
      rep.message = "variable '" + v + "' is not an edge of K_" + std::to_string(n);
      return rep;
    }
  const std::size_t m = cc.edges.size();
  rep.exhaustive = m <= static_cast<std::size_t>(max_bits);
  std::mt19937_64 rng(seed);
  const std::uint64_t total = rep.exhaustive ? (std::uint64_t{1} << m) : samples;
  for (std::uint64_t it = 0; it < total; ++it) {
    std::vector<char> bits(m);
    for (std::size_t e = 0; e < m; ++e) bits[e] = rep.exhaustive ? (it >> e & 1) : (rng() & 1);
    std::vector<std::pair<int, int>> es;
    Assignment a;
    for (std::size_t e = 0; e < m; ++e) {
      a[cc.vars[e]] = bits[e] != 0;
      if (bits[e]) es.push_back(cc.edges[e]);
    }
    bool in0 = cc_membership(n, es, 0, 64), in1 = cc_membership(n, es, 1, 64);
    if (!in0 && !in1) continue;
    bool out = eval_circuit(c, a);
    std::string graph;
    for (auto [i, j] : es) graph += " " + std::to_string(i) + "-" + std::to_string(j);
    if (in0) {
      ++rep.side0;
      if (out) {
        rep.ok = false;
        rep.message = "outputs 1 on the " + std::to_string(cc.k) + "-colourable graph {" + graph + " }";
        return rep;
      }
    }
    if (in1) {
      ++rep.side1;
      if (!out) {
        rep.ok = false;
        rep.message = "outputs 0 on the graph {" + graph + " } containing a " + std::to_string(cc.k + 1) + "-clique";
        return rep;
      }
    }
  }
  return rep;
}

// ---- interpolation ----

// A target ⟨(p_i → u) → (p'_i → u) → u⟩_i → (α → u) → (β → u) → u with α over p, q and β over
// p', r. Variables of α (β) outside p (p') live in q and alpha_aux (r and beta_aux); the
// auxiliaries are the side variables that are not part of the named tuples, such as v and w.
struct InterpolationShape {
  std::size_t n = 0;
  std::vector<std::string> p, pp, q, r;
  std::vector<std::string> alpha_aux, beta_aux;
  std::string u = "u";
  Formula alpha, beta;

  Formula target() const {
    std::vector<Formula> blocks;
    Formula uu = var(u);
    for (std::size_t i = 0; i < n; ++i) blocks.push_back(imps({imp(var(p[i]), uu), imp(var(pp[i]), uu), uu}));
    return fold_imp(blocks, imps({imp(alpha, uu), imp(beta, uu), uu}));
  }
};

inline void validate_shape(const InterpolationShape& s) {
  if (s.p.size() != s.n || s.pp.size() != s.n) throw std::invalid_argument("shape: p and p' must have n entries");
  if (!s.alpha.valid() || !s.beta.valid()) throw std::invalid_argument("shape: alpha and beta must be set");
  std::set<std::string> seen;
  auto add = [&](const std::vector<std::string>& vs) {
    for (const auto& v : vs)
      if (!seen.insert(v).second) throw std::invalid_argument("shape: variable '" + v + "' listed twice");
  };
  for (const auto* l : {&s.p, &s.pp, &s.q, &s.r, &s.alpha_aux, &s.beta_aux}) add(*l);
  add({s.u});
  auto within = [](const Formula& f, std::initializer_list<const std::vector<std::string>*> lists) {
    for (const auto& v : vars_of(f)) {
      bool found = false;
      for (const auto* l : lists)
        if (std::find(l->begin(), l->end(), v) != l->end()) found = true;
      if (!found) return v;
    }
    return std::string();
  };
  std::string bad = within(s.alpha, {&s.p, &s.q, &s.alpha_aux});
  if (!bad.empty()) throw std::invalid_argument("shape: alpha mentions '" + bad + "' outside p, q");
  bad = within(s.beta, {&s.pp, &s.r, &s.beta_aux});
  if (!bad.empty()) throw std::invalid_argument("shape: beta mentions '" + bad + "' outside p', r");
}

struct InterpolationReport {
  bool ok = true;
  std::uint64_t alpha_checked = 0, beta_checked = 0;  // assignments examined on each side
  std::string message;
  explicit operator bool() const { return ok; }
};

// C(p) interpolates ¬β(¬p, r) → α(p, q): C(a) = 1 forces α(a, q) for every q, and C(a) = 0
// forces β(¬a, r) for every r. Exhaustive; each side's bit count must be at most max_bits.
inline InterpolationReport check_interpolates(const MonotoneCircuit& c, const InterpolationShape& s,
                                              std::size_t max_bits = 24) {
  validate_shape(s);
  InterpolationReport rep;
  for (const auto& v : c.variables())
    if (std::find(s.p.begin(), s.p.end(), v) == s.p.end()) {
      rep.ok = false;
      rep.message = "circuit variable '" + v + "' is not in p";
      return rep;
    }
  std::vector<std::string> qs = s.q, rs = s.r;
  qs.insert(qs.end(), s.alpha_aux.begin(), s.alpha_aux.end());
  rs.insert(rs.end(), s.beta_aux.begin(), s.beta_aux.end());
  if (s.n + qs.size() > max_bits || s.n + rs.size() > max_bits)
    throw BudgetExceeded("check_interpolates: more than " + std::to_string(max_bits) + " bits per side");
  auto tt = truth_table(c, s.p);
  auto describe = [&](std::uint64_t pa) {
    std::string out;
    for (std::size_t i = 0; i < s.n; ++i) out += (pa >> i & 1) ? " " + s.p[i] : "";
    return "{" + out + " }";
  };
  for (std::uint64_t pa = 0; pa < (std::uint64_t{1} << s.n); ++pa) {
    const bool out = tt[pa >> 6] >> (pa & 63) & 1;
    Assignment a;
    for (std::size_t i = 0; i < s.n; ++i) {
      a[s.p[i]] = pa >> i & 1;
      a[s.pp[i]] = !(pa >> i & 1);  // p' ↦ ¬p on the β side
    }
    const auto& side = out ? qs : rs;
    const Formula& f = out ? s.alpha : s.beta;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << side.size()); ++x) {
      for (std::size_t i = 0; i < side.size(); ++i) a[side[i]] = x >> i & 1;
      ++(out ? rep.alpha_checked : rep.beta_checked);
      if (!classical_eval(a, f)) {
        rep.ok = false;
        rep.message = out ? "C = 1 on true p " + describe(pa) + " but alpha fails"
                          : "C = 0 on true p " + describe(pa) + " but beta(not p) fails";
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace nmx
