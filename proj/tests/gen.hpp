#pragma once

#include <random>
#include <string>
#include <vector>

#include "nmx/formula.hpp"

namespace nmx::testgen {

// Random formula with exactly `arrows` implications over the given variables.
inline Formula random_formula(std::mt19937_64& rng, int arrows, const std::vector<std::string>& vars) {
  if (arrows == 0) return var(vars[std::uniform_int_distribution<std::size_t>(0, vars.size() - 1)(rng)]);
  int left = std::uniform_int_distribution<int>(0, arrows - 1)(rng);
  Formula a = random_formula(rng, left, vars);
  Formula b = random_formula(rng, arrows - 1 - left, vars);
  return imp(a, b);
}

inline Formula random_formula_upto(std::mt19937_64& rng, int max_arrows, const std::vector<std::string>& vars) {
  return random_formula(rng, std::uniform_int_distribution<int>(0, max_arrows)(rng), vars);
}

inline std::vector<std::string> letters(int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('p' + i)));
  return v;
}

// Every formula with exactly `arrows` implications over vars, in a fixed order.
inline void all_formulas(int arrows, const std::vector<std::string>& vars, std::vector<Formula>& out) {
  if (arrows == 0) {
    for (const auto& v : vars) out.push_back(var(v));
    return;
  }
  for (int l = 0; l < arrows; ++l) {
    std::vector<Formula> ls, rs;
    all_formulas(l, vars, ls);
    all_formulas(arrows - 1 - l, vars, rs);
    for (const auto& a : ls)
      for (const auto& b : rs) out.push_back(imp(a, b));
  }
}

}  // namespace nmx::testgen

#include "nmx/derivation.hpp"

namespace nmx::testgen {

// Random well-formed NM dag: nodes are added as leaves, →I steps over any node, or →E steps over
// a matching (α, α → β) pair; the last node becomes the root and unreachable nodes are dropped.
inline Derivation random_nm_dag(std::mt19937_64& rng, std::size_t target_nodes, const std::vector<std::string>& vars) {
  DagBuilder b;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::size_t last = b.leaf(random_formula_upto(rng, 2, vars));
  while (b.size() < target_nodes) {
    int action = static_cast<int>(rng() % 4);
    if (action == 0) {
      // leaf: fresh formula, or an implication out of an existing label so →E becomes possible
      Formula f = random_formula_upto(rng, 2, vars);
      if (rng() % 2) f = imp(b.label(pick(b.size())), random_formula_upto(rng, 1, vars));
      last = b.leaf(f);
    } else if (action == 1) {
      std::size_t u = pick(b.size());
      Formula a = rng() % 2 ? b.label(pick(b.size())) : random_formula_upto(rng, 1, vars);
      last = b.intro(u, a);
    } else {
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t j = 0; j < b.size(); ++j) {
        const Formula& g = b.label(j);
        if (!g.is_imp()) continue;
        for (std::size_t i = 0; i < b.size(); ++i)
          if (i != j && b.label(i) == g.lhs()) pairs.push_back({i, j});
      }
      if (pairs.empty()) continue;
      auto [i, j] = pairs[pick(pairs.size())];
      last = b.mp(i, j);
    }
  }
  return b.finish(last);
}

}  // namespace nmx::testgen

#include "nmx/circuits.hpp"

namespace nmx::testgen {

// Random monotone circuit without folding: `gates` And/Or gates of fan-in 0..max_fanin over the
// variables and earlier gates.
inline MonotoneCircuit random_circuit(std::mt19937_64& rng, std::size_t gates, std::size_t max_fanin,
                                      const std::vector<std::string>& vars) {
  CircuitBuilder b(false);
  for (const auto& v : vars) b.var(v);
  std::size_t last = 0;
  for (std::size_t g = 0; g < gates; ++g) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, max_fanin)(rng);
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < k; ++i) in.push_back(std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng));
    last = rng() % 2 ? b.and_gate(std::move(in)) : b.or_gate(std::move(in));
  }
  return b.finish(last);
}

inline Assignment bits_to_assignment(const std::vector<std::string>& vars, std::uint64_t bits) {
  Assignment a;
  for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = bits >> i & 1;
  return a;
}

}  // namespace nmx::testgen

#include "nmx/frege.hpp"

namespace nmx::testgen {

// Random Frege sequence proof. A1 and A2 instances are built around earlier lines so that MP
// steps are frequent; the proof always ends with an MP step when one is available.
inline FregeSeq random_frege_seq(std::mt19937_64& rng, std::size_t steps, const std::vector<std::string>& vars,
                                 const std::vector<Formula>& gamma = {}) {
  FregeSeq lines;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto mp_pairs = [&] {
    std::vector<Formula> out;
    for (const auto& maj : lines)
      if (maj.is_imp() && std::find(lines.begin(), lines.end(), maj.lhs()) != lines.end()) out.push_back(maj.rhs());
    return out;
  };
  while (lines.size() < steps) {
    int action = static_cast<int>(rng() % 5);
    if (action == 0 && !gamma.empty()) {
      lines.push_back(gamma[pick(gamma.size())]);
    } else if (action <= 1 || lines.empty()) {
      Formula a = lines.empty() || rng() % 2 ? random_formula_upto(rng, 1, vars) : lines[pick(lines.size())];
      lines.push_back(axiom_a1(a, random_formula_upto(rng, 1, vars)));
    } else if (action == 2) {
      const Formula& l = lines[pick(lines.size())];
      if (l.is_imp() && l.rhs().is_imp()) lines.push_back(axiom_a2(l.lhs(), l.rhs().lhs(), l.rhs().rhs()));
      else lines.push_back(axiom_a2(random_formula_upto(rng, 1, vars), random_formula_upto(rng, 1, vars), random_formula_upto(rng, 1, vars)));
    } else {
      auto c = mp_pairs();
      if (!c.empty()) lines.push_back(c[pick(c.size())]);
    }
  }
  auto c = mp_pairs();
  if (!c.empty()) lines.push_back(c.back());
  return lines;
}

}  // namespace nmx::testgen
