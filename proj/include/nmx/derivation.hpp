#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/formula.hpp"

namespace nmx {

// A labelled proof dag shared by natural deduction and dag-like Frege proofs.
// premises[v] lists the nodes with an edge into v.
struct Derivation {
  std::vector<std::string> ids;
  std::vector<Formula> labels;
  std::vector<std::vector<std::size_t>> premises;
  std::size_t root = 0;

  std::size_t node_count() const { return labels.size(); }
};

struct CheckReport {
  bool ok = true;
  std::string node;  // offending node id, or line number for sequence proofs
  std::string message;

  static CheckReport accept() { return {}; }
  static CheckReport reject(std::string node, std::string message) { return {false, std::move(node), std::move(message)}; }
  explicit operator bool() const { return ok; }

  std::string describe() const {
    if (ok) return "accept";
    return node.empty() ? "reject: " + message : "reject at " + node + ": " + message;
  }
};

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProofMetrics {
  std::uint64_t lines = 0;
  std::uint64_t size = 0;
  std::uint64_t height = 0;
  std::uint64_t formula_size = 0;
  std::uint64_t inferential_size = 0;
};

inline std::vector<std::vector<std::size_t>> successors(const Derivation& d) {
  std::vector<std::vector<std::size_t>> succ(d.node_count());
  for (std::size_t v = 0; v < d.node_count(); ++v)
    for (std::size_t u : d.premises[v]) succ[u].push_back(v);
  return succ;
}

// Structural sanity shared by all dag-like systems: unique ids, premises in range, no repeated
// edge, acyclic, exactly one node without successors and it is the root. On success fills a
// topological order (premises before conclusions, ties broken by node index).
inline CheckReport check_structure(const Derivation& d, std::size_t max_indegree, std::vector<std::size_t>* topo = nullptr) {
  const std::size_t n = d.node_count();
  if (n == 0) return CheckReport::reject("", "empty derivation");
  if (d.ids.size() != n || d.premises.size() != n) return CheckReport::reject("", "inconsistent node tables");
  if (d.root >= n) return CheckReport::reject("", "root out of range");
  {
    std::map<std::string, std::size_t> seen;
    for (std::size_t v = 0; v < n; ++v)
      if (!seen.emplace(d.ids[v], v).second) return CheckReport::reject(d.ids[v], "duplicate node id");
  }
  std::vector<std::size_t> outdeg(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!d.labels[v].valid()) return CheckReport::reject(d.ids[v], "missing label");
    if (d.premises[v].size() > max_indegree)
      return CheckReport::reject(d.ids[v], "in-degree " + std::to_string(d.premises[v].size()) + " not allowed");
    for (std::size_t i = 0; i < d.premises[v].size(); ++i) {
      std::size_t u = d.premises[v][i];
      if (u >= n) return CheckReport::reject(d.ids[v], "premise out of range");
      if (u == v) return CheckReport::reject(d.ids[v], "self loop");
      for (std::size_t j = 0; j < i; ++j)
        if (d.premises[v][j] == u) return CheckReport::reject(d.ids[v], "repeated edge from " + d.ids[u]);
      ++outdeg[u];
    }
  }
  std::vector<std::size_t> sinks;
  for (std::size_t v = 0; v < n; ++v)
    if (outdeg[v] == 0) sinks.push_back(v);
  for (std::size_t v : sinks)
    if (v != d.root) return CheckReport::reject(d.ids[v], "node has no successor but is not the root");
  if (outdeg[d.root] != 0) return CheckReport::reject(d.ids[d.root], "root has a successor");

  auto succ = successors(d);
  std::vector<std::size_t> indeg(n);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v) {
    indeg[v] = d.premises[v].size();
    if (indeg[v] == 0) ready.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t w : succ[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (order.size() != n) {
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] != 0) return CheckReport::reject(d.ids[v], "node lies on a cycle");
  }
  if (topo) *topo = std::move(order);
  return CheckReport::accept();
}

inline std::vector<std::size_t> topological_order(const Derivation& d) {
  std::vector<std::size_t> order;
  auto rep = check_structure(d, static_cast<std::size_t>(-1), &order);
  if (!rep) throw std::invalid_argument("malformed derivation: " + rep.describe());
  return order;
}

inline bool is_tree(const Derivation& d) {
  std::vector<std::size_t> outdeg(d.node_count(), 0);
  for (const auto& ps : d.premises)
    for (std::size_t u : ps)
      if (++outdeg[u] > 1) return false;
  return true;
}

inline ProofMetrics derivation_metrics(const Derivation& d) {
  ProofMetrics m;
  auto order = topological_order(d);
  std::vector<std::uint64_t> h(d.node_count(), 0);
  m.lines = d.node_count();
  for (std::size_t v : order) {
    std::uint64_t s = d.labels[v].size();
    m.size += s;
    m.formula_size = std::max(m.formula_size, s);
    std::uint64_t inf = s;
    for (std::size_t u : d.premises[v]) {
      inf += d.labels[u].size();
      h[v] = std::max(h[v], h[u] + 1);
    }
    m.inferential_size += inf;
    m.height = std::max(m.height, h[v]);
  }
  return m;
}

// Appends nodes; finish() keeps the nodes the root depends on, in creation order.
class DagBuilder {
 public:
  std::size_t leaf(const Formula& f) { return add(f, {}); }

  std::size_t add(const Formula& f, std::vector<std::size_t> premises) {
    labels_.push_back(f);
    premises_.push_back(std::move(premises));
    return labels_.size() - 1;
  }

  // Modus ponens / →E: from minor α and major α → β conclude β.
  std::size_t mp(std::size_t minor, std::size_t major) {
    const Formula& maj = labels_.at(major);
    if (!maj.is_imp() || maj.lhs() != labels_.at(minor))
      throw std::logic_error("DagBuilder::mp: premises do not match: " + render(labels_[minor]) + " and " + render(maj));
    return add(maj.rhs(), {minor, major});
  }

  // →I: from β conclude α → β.
  std::size_t intro(std::size_t premise, const Formula& antecedent) {
    return add(imp(antecedent, labels_.at(premise)), {premise});
  }

  const Formula& label(std::size_t v) const { return labels_.at(v); }
  std::size_t size() const { return labels_.size(); }

  Derivation finish(std::size_t root, const std::string& prefix = "n") const {
    std::vector<char> keep(labels_.size(), 0);
    std::vector<std::size_t> stack{root};
    keep[root] = 1;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t u : premises_[v])
        if (!keep[u]) {
          keep[u] = 1;
          stack.push_back(u);
        }
    }
    std::vector<std::size_t> remap(labels_.size(), static_cast<std::size_t>(-1));
    std::size_t count = 0;
    for (std::size_t v = 0; v < labels_.size(); ++v)
      if (keep[v]) remap[v] = count++;
    std::size_t width = std::to_string(count == 0 ? 0 : count - 1).size();
    Derivation d;
    d.ids.reserve(count);
    for (std::size_t v = 0; v < labels_.size(); ++v) {
      if (!keep[v]) continue;
      std::ostringstream id;
      id << prefix << std::setw(static_cast<int>(width)) << std::setfill('0') << remap[v];
      d.ids.push_back(id.str());
      d.labels.push_back(labels_[v]);
      std::vector<std::size_t> ps;
      for (std::size_t u : premises_[v]) ps.push_back(remap[u]);
      d.premises.push_back(std::move(ps));
    }
    d.root = remap[root];
    return d;
  }

  // Copies a finished derivation in; returns the new index of its root.
  std::size_t import(const Derivation& d) {
    auto order = topological_order(d);
    std::vector<std::size_t> at(d.node_count());
    for (std::size_t v : order) {
      std::vector<std::size_t> ps;
      for (std::size_t u : d.premises[v]) ps.push_back(at[u]);
      at[v] = add(d.labels[v], std::move(ps));
    }
    return at[d.root];
  }

 private:
  std::vector<Formula> labels_;
  std::vector<std::vector<std::size_t>> premises_;
};

// ---- proof file format ----
//   id | formula
//   premise -> conclusion
//   root id

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool valid_node_id(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '@')) return false;
  return true;
}

inline Derivation read_proof(std::istream& in) {
  Derivation d;
  std::map<std::string, std::size_t> index;
  std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> edges;
  std::string root_id;
  std::string line;
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
    std::size_t bar = t.find('|');
    if (bar != std::string::npos) {
      std::string id = trim(t.substr(0, bar));
      if (!valid_node_id(id)) fail("bad node id '" + id + "'");
      if (index.count(id)) fail("duplicate node id '" + id + "'");
      Formula f;
      try {
        f = parse_formula(t.substr(bar + 1), true);
      } catch (const ParseError& e) {
        fail(e.what());
      }
      index[id] = d.labels.size();
      d.ids.push_back(id);
      d.labels.push_back(f);
      d.premises.emplace_back();
      continue;
    }
    std::size_t arrow = t.find("->");
    if (arrow != std::string::npos) {
      std::string a = trim(t.substr(0, arrow));
      std::string b = trim(t.substr(arrow + 2));
      if (!valid_node_id(a) || !valid_node_id(b)) fail("bad edge");
      edges.push_back({{a, b}, lineno});
      continue;
    }
    fail("unrecognised record");
  }
  for (const auto& [e, ln] : edges) {
    lineno = ln;
    auto a = index.find(e.first);
    auto b = index.find(e.second);
    if (a == index.end()) fail("edge mentions unknown node '" + e.first + "'");
    if (b == index.end()) fail("edge mentions unknown node '" + e.second + "'");
    d.premises[b->second].push_back(a->second);
  }
  lineno = 0;
  if (root_id.empty()) throw FormatError("missing root declaration");
  auto r = index.find(root_id);
  if (r == index.end()) throw FormatError("root names unknown node '" + root_id + "'");
  d.root = r->second;
  return d;
}

inline Derivation read_proof_string(const std::string& s) {
  std::istringstream in(s);
  return read_proof(in);
}

// Canonical form: nodes sorted by id, edges sorted by (premise, conclusion), then the root.
inline void write_proof(std::ostream& out, const Derivation& d) {
  std::vector<std::size_t> order(d.node_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.ids[a] < d.ids[b]; });
  for (std::size_t v : order) out << d.ids[v] << " | " << render(d.labels[v]) << '\n';
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t v = 0; v < d.node_count(); ++v)
    for (std::size_t u : d.premises[v]) edges.push_back({d.ids[u], d.ids[v]});
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) out << e.first << " -> " << e.second << '\n';
  out << "root " << d.ids[d.root] << '\n';
}

inline std::string proof_to_string(const Derivation& d) {
  std::ostringstream out;
  write_proof(out, d);
  return out.str();
}

// One formula per line; '#' starts a comment line.
inline std::vector<Formula> read_formula_lines(std::istream& in, bool allow_reserved = false) {
  std::vector<Formula> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      out.push_back(parse_formula(t, allow_reserved));
    } catch (const ParseError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_formula_lines(std::ostream& out, const std::vector<Formula>& fs) {
  for (const auto& f : fs) out << render(f) << '\n';
}

}  // namespace nmx
