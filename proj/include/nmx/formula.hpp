#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nmx {

namespace detail {
struct FNode;
}

// Implicational formula: a variable or an implication. Nodes are interned, so two
// formulas are structurally equal exactly when they share the same node.
class Formula {
 public:
  Formula() = default;

  static Formula var(std::string_view name);
  static Formula imp(const Formula& a, const Formula& b);

  bool valid() const { return node_ != nullptr; }
  bool is_var() const;
  bool is_imp() const { return valid() && !is_var(); }
  const std::string& name() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  // Number of variable and connective occurrences (tree count, not shared nodes).
  std::uint64_t size() const;
  // Structural hash, stable across runs.
  std::uint64_t hash() const;
  const void* id() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b) { return a.node_ == b.node_; }
  friend bool operator!=(const Formula& a, const Formula& b) { return a.node_ != b.node_; }

 private:
  explicit Formula(std::shared_ptr<const detail::FNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::FNode> node_;
};

namespace detail {

struct FNode {
  bool is_var = true;
  std::string name;
  Formula lhs, rhs;
  std::uint64_t size = 1;
  std::uint64_t shash = 0;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct PtrPairHash {
  std::size_t operator()(const std::pair<const void*, const void*>& p) const {
    auto a = reinterpret_cast<std::uintptr_t>(p.first);
    auto b = reinterpret_cast<std::uintptr_t>(p.second);
    return static_cast<std::size_t>(mix64(a * 0x9e3779b97f4a7c15ULL ^ b));
  }
};

class InternTable {
 public:
  static InternTable& get() {
    static InternTable* table = new InternTable();  // never destroyed: formulas may outlive statics
    return *table;
  }

  std::shared_ptr<const FNode> var(std::string_view name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = vars_.find(std::string(name));
    if (it != vars_.end()) {
      if (auto sp = it->second.lock()) return sp;
    }
    auto* n = new FNode();
    n->is_var = true;
    n->name = std::string(name);
    n->size = 1;
    n->shash = mix64(fnv1a(name) ^ 0x5bd1e995ULL);
    std::shared_ptr<const FNode> sp(n, [this](const FNode* p) { release(p); });
    vars_[n->name] = sp;
    return sp;
  }

  std::shared_ptr<const FNode> imp(const Formula& a, const Formula& b) {
    std::pair<const void*, const void*> key{a.id(), b.id()};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = imps_.find(key);
    if (it != imps_.end()) {
      if (auto sp = it->second.lock()) return sp;
    }
    auto* n = new FNode();
    n->is_var = false;
    n->lhs = a;
    n->rhs = b;
    n->size = 1 + a.size() + b.size();
    n->shash = mix64(a.hash() * 0x9e3779b97f4a7c15ULL + mix64(b.hash() + 0x632be59bd9b4e019ULL));
    std::shared_ptr<const FNode> sp(n, [this](const FNode* p) { release(p); });
    imps_[key] = sp;
    return sp;
  }

  std::size_t live_count() {
    std::lock_guard<std::mutex> lock(mu_);
    return vars_.size() + imps_.size();
  }

 private:
  void release(const FNode* p) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (p->is_var) {
        auto it = vars_.find(p->name);
        if (it != vars_.end() && it->second.expired()) vars_.erase(it);
      } else {
        auto it = imps_.find({p->lhs.id(), p->rhs.id()});
        if (it != imps_.end() && it->second.expired()) imps_.erase(it);
      }
    }
    delete p;  // children are released after the lock is dropped
  }

  std::mutex mu_;
  std::unordered_map<std::string, std::weak_ptr<const FNode>> vars_;
  std::unordered_map<std::pair<const void*, const void*>, std::weak_ptr<const FNode>, PtrPairHash> imps_;
};

}  // namespace detail

inline Formula Formula::var(std::string_view name) { return Formula(detail::InternTable::get().var(name)); }

inline Formula Formula::imp(const Formula& a, const Formula& b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("implication with an empty operand");
  return Formula(detail::InternTable::get().imp(a, b));
}

inline bool Formula::is_var() const { return valid() && node_->is_var; }
inline const std::string& Formula::name() const { return node_->name; }
inline const Formula& Formula::lhs() const { return node_->lhs; }
inline const Formula& Formula::rhs() const { return node_->rhs; }
inline std::uint64_t Formula::size() const { return node_ ? node_->size : 0; }
inline std::uint64_t Formula::hash() const { return node_ ? node_->shash : 0; }

inline Formula var(std::string_view name) { return Formula::var(name); }
inline Formula imp(const Formula& a, const Formula& b) { return Formula::imp(a, b); }

// Right-nested implication a0 -> a1 -> ... -> last.
inline Formula imps(std::initializer_list<Formula> parts) {
  std::vector<Formula> v(parts);
  if (v.empty()) throw std::invalid_argument("imps: no parts");
  Formula acc = v.back();
  for (std::size_t i = v.size() - 1; i-- > 0;) acc = imp(v[i], acc);
  return acc;
}

inline std::uint64_t formula_size(const Formula& f) { return f.size(); }

// Deterministic total order: by size, then hash, then structure.
inline int formula_compare(const Formula& a, const Formula& b) {
  if (a == b) return 0;
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
  if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
  if (a.is_var()) return a.name() < b.name() ? -1 : 1;
  int c = formula_compare(a.lhs(), b.lhs());
  if (c != 0) return c;
  return formula_compare(a.rhs(), b.rhs());
}

struct FormulaLess {
  bool operator()(const Formula& a, const Formula& b) const { return formula_compare(a, b) < 0; }
};

using FormulaSet = std::set<Formula, FormulaLess>;

// ---- rendering and parsing ----

inline std::string render(const Formula& f) {
  std::string out;
  const Formula* cur = &f;
  while (cur->is_imp()) {
    const Formula& l = cur->lhs();
    if (l.is_imp()) {
      out += '(';
      out += render(l);
      out += ')';
    } else {
      out += l.name();
    }
    out += " -> ";
    cur = &cur->rhs();
  }
  out += cur->name();
  return out;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error("syntax error at position " + std::to_string(pos) + ": " + msg), position(pos) {}
  std::size_t position;
};

inline constexpr std::string_view kReservedTop = "_t";

inline bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\''; }

inline bool valid_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, bool allow_reserved) : s_(text), allow_reserved_(allow_reserved) {}

  Formula parse_all() {
    Formula f = formula();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return f;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' || s_[pos_] == '\n')) ++pos_;
  }

  bool at_arrow() {
    skip_ws();
    return pos_ + 1 < s_.size() && s_[pos_] == '-' && s_[pos_ + 1] == '>';
  }

  Formula formula() {
    std::vector<Formula> parts{atom()};
    while (at_arrow()) {
      pos_ += 2;
      parts.push_back(atom());
    }
    Formula acc = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) acc = imp(parts[i], acc);
    return acc;
  }

  Formula atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      Formula f = formula();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') throw ParseError("unclosed '(' opened at " + std::to_string(open), pos_);
      ++pos_;
      return f;
    }
    if (!is_ident_start(c)) throw ParseError("expected identifier or '('", pos_);
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    std::string_view name = s_.substr(start, pos_ - start);
    if (!allow_reserved_ && name == kReservedTop) throw ParseError("variable name _t is reserved", start);
    return var(name);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  bool allow_reserved_;
};

}  // namespace detail

inline Formula parse_formula(std::string_view text, bool allow_reserved = false) {
  return detail::Parser(text, allow_reserved).parse_all();
}

// Internal shorthand for formulas written in code (templates use the reserved _t).
inline Formula F(std::string_view text) { return parse_formula(text, true); }

inline void collect_vars(const Formula& f, std::set<std::string>& out) {
  const Formula* cur = &f;
  while (cur->is_imp()) {
    collect_vars(cur->lhs(), out);
    cur = &cur->rhs();
  }
  out.insert(cur->name());
}

inline std::set<std::string> vars_of(const Formula& f) {
  std::set<std::string> out;
  collect_vars(f, out);
  return out;
}

inline bool occurs(const std::string& name, const Formula& f) {
  const Formula* cur = &f;
  while (cur->is_imp()) {
    if (occurs(name, cur->lhs())) return true;
    cur = &cur->rhs();
  }
  return cur->name() == name;
}

// ---- indexed sequences ----

struct SeqEntry {
  std::int64_t index;
  Formula formula;
};

class FormulaSeq {
 public:
  FormulaSeq() = default;

  static FormulaSeq from_list(const std::vector<Formula>& fs) {
    FormulaSeq s;
    for (std::size_t i = 0; i < fs.size(); ++i) s.push(static_cast<std::int64_t>(i), fs[i]);
    return s;
  }

  void push(std::int64_t index, const Formula& f) {
    if (index < 0) throw std::invalid_argument("FormulaSeq: negative index");
    if (!entries_.empty() && index <= entries_.back().index)
      throw std::invalid_argument("FormulaSeq: indices must be strictly increasing");
    entries_.push_back({index, f});
  }

  const std::vector<SeqEntry>& entries() const { return entries_; }
  std::size_t length() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::uint64_t total_size() const {
    std::uint64_t s = 0;
    for (const auto& e : entries_) s += e.formula.size();
    return s;
  }

  std::vector<std::int64_t> domain() const {
    std::vector<std::int64_t> d;
    for (const auto& e : entries_) d.push_back(e.index);
    return d;
  }

  std::vector<Formula> formulas() const {
    std::vector<Formula> v;
    for (const auto& e : entries_) v.push_back(e.formula);
    return v;
  }

  const Formula* at(std::int64_t index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const SeqEntry& e, std::int64_t i) { return e.index < i; });
    if (it == entries_.end() || it->index != index) return nullptr;
    return &it->formula;
  }

  FormulaSeq restrict(const std::set<std::int64_t>& J) const {
    FormulaSeq out;
    for (const auto& e : entries_)
      if (J.count(e.index)) out.entries_.push_back(e);
    return out;
  }

  // this ⊆ other: every index of this is an index of other carrying the same formula.
  bool subseq_of(const FormulaSeq& other) const {
    for (const auto& e : entries_) {
      const Formula* f = other.at(e.index);
      if (!f || *f != e.formula) return false;
    }
    return true;
  }

  friend bool operator==(const FormulaSeq& a, const FormulaSeq& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i)
      if (a.entries_[i].index != b.entries_[i].index || a.entries_[i].formula != b.entries_[i].formula) return false;
    return true;
  }

 private:
  std::vector<SeqEntry> entries_;
};

// Γ → ψ: the entry with the largest index becomes the outermost antecedent.
inline Formula fold_imp(const FormulaSeq& gamma, const Formula& psi) {
  Formula acc = psi;
  for (const auto& e : gamma.entries()) acc = imp(e.formula, acc);
  return acc;
}

inline Formula fold_imp(const std::vector<Formula>& gamma, const Formula& psi) {
  Formula acc = psi;
  for (const auto& f : gamma) acc = imp(f, acc);
  return acc;
}

// ---- substitution ----

using Substitution = std::map<std::string, Formula>;

class Substituter {
 public:
  explicit Substituter(const Substitution& s) : sigma_(s) {}

  Formula operator()(const Formula& f) {
    auto it = cache_.find(f.id());
    if (it != cache_.end()) return it->second;
    Formula out;
    if (f.is_var()) {
      auto b = sigma_.find(f.name());
      out = b == sigma_.end() ? f : b->second;
    } else {
      Formula l = (*this)(f.lhs());
      Formula r = (*this)(f.rhs());
      out = (l == f.lhs() && r == f.rhs()) ? f : imp(l, r);
    }
    cache_.emplace(f.id(), out);
    keep_.push_back(f);
    return out;
  }

 private:
  const Substitution& sigma_;
  std::unordered_map<const void*, Formula> cache_;
  std::vector<Formula> keep_;  // pins cache keys so node addresses are not reused
};

inline Formula apply_subst(const Substitution& sigma, const Formula& f) {
  Substituter s(sigma);
  return s(f);
}

// ---- relativized conjunction ----

inline Formula top() {
  static const Formula t = imp(var(kReservedTop), var(kReservedTop));
  return t;
}

// α^φ = (α → φ) → φ
inline Formula rel_pow(const Formula& a, const Formula& phi) { return imp(imp(a, phi), phi); }

// α ⋈_φ β = (α → β → φ) → φ
inline Formula rel_conj(const Formula& a, const Formula& b, const Formula& phi) {
  return imp(imp(a, imp(b, phi)), phi);
}

namespace detail {

inline int floor_log2(std::uint64_t x) {
  int k = -1;
  while (x) {
    x >>= 1;
    ++k;
  }
  return k;
}

// Entries sorted by index; indices are relative to the current subtree.
inline Formula ret_rec(const Formula& phi, std::vector<std::pair<std::uint64_t, Formula>> items) {
  if (items.size() == 1) return rel_pow(items[0].second, phi);
  for (;;) {
    std::uint64_t mx = items.back().first;
    int k = floor_log2(mx);
    std::uint64_t half = std::uint64_t{1} << k;
    if (items.front().first >= half) {
      for (auto& it : items) it.first -= half;
      continue;
    }
    std::vector<std::pair<std::uint64_t, Formula>> lo, hi;
    for (auto& it : items) {
      if (it.first < half)
        lo.push_back(it);
      else
        hi.push_back({it.first - half, it.second});
    }
    return rel_conj(ret_rec(phi, std::move(lo)), ret_rec(phi, std::move(hi)), phi);
  }
}

}  // namespace detail

// RET_φ Γ. When m > 0 is supplied, dom(Γ) must lie in [m].
inline Formula ret_build(const Formula& phi, const FormulaSeq& gamma, std::int64_t m = 0) {
  if (gamma.empty()) return top();
  if (m > 0 && gamma.entries().back().index >= m) throw std::invalid_argument("ret_build: index outside [m]");
  std::vector<std::pair<std::uint64_t, Formula>> items;
  for (const auto& e : gamma.entries()) items.push_back({static_cast<std::uint64_t>(e.index), e.formula});
  return detail::ret_rec(phi, std::move(items));
}

struct RetShape {
  std::size_t leaves = 0;
  std::size_t inner = 0;
};

// Leaf and inner-node counts of the ⋈ tree, read back from a built RET formula.
// f is either α^φ for a leaf α, or (x → y → φ) → φ for an inner node; the two are told
// apart by whether the body ends in φ after one or two antecedents.
inline void ret_shape_rec(const Formula& f, const Formula& phi, RetShape& out) {
  const Formula& body = f.lhs();
  if (body.rhs() == phi) {
    ++out.leaves;
    return;
  }
  ++out.inner;
  ret_shape_rec(body.lhs(), phi, out);
  ret_shape_rec(body.rhs().lhs(), phi, out);
}

inline RetShape ret_shape(const Formula& phi, const FormulaSeq& gamma) {
  RetShape out;
  if (gamma.empty()) return out;
  ret_shape_rec(ret_build(phi, gamma), phi, out);
  return out;
}

}  // namespace nmx

template <>
struct std::hash<nmx::Formula> {
  std::size_t operator()(const nmx::Formula& f) const { return static_cast<std::size_t>(f.hash()); }
};
