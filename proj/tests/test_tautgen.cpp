#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "frozen.hpp"
#include "nmx/interp.hpp"
#include "nmx/semantics.hpp"
#include "nmx/tautgen.hpp"

using namespace nmx;

namespace {

// Splits fold_imp(Γ, ψ) with |Γ| = n back into Γ (in order) and ψ.
std::vector<Formula> unfold(Formula& f, std::size_t n) {
  std::vector<Formula> out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = f.lhs();
    f = f.rhs();
  }
  return out;
}

}  // namespace

TEST(BuildTau, TwoByHand) {
  auto t = build_tau(2);
  EXPECT_EQ(t.k, 1);
  Formula rest = t.alpha;
  auto guards = unfold(rest, 2);
  EXPECT_EQ(guards[0], parse_formula("(q_0_0 -> v) -> v"));
  EXPECT_EQ(guards[1], parse_formula("(q_1_0 -> v) -> v"));
  auto triples = unfold(rest, 4);
  EXPECT_EQ(triples[0], parse_formula("q_0_0 -> q_0_0 -> p_0_0 -> v"));
  EXPECT_EQ(triples[1], parse_formula("q_0_0 -> q_1_0 -> p_0_1 -> v"));
  EXPECT_EQ(triples[2], parse_formula("q_1_0 -> q_0_0 -> p_1_0 -> v"));
  EXPECT_EQ(triples[3], parse_formula("q_1_0 -> q_1_0 -> p_1_1 -> v"));
  EXPECT_EQ(rest, var("v"));
  // 2 guards of size 5, 4 triples of size 7, 6 folding arrows and v
  EXPECT_EQ(t.alpha.size(), 45u);
  EXPECT_EQ(t.beta.size(), 53u);
  EXPECT_EQ(t.tau.size(), 145u);
  // the last edge block is outermost
  EXPECT_EQ(render(t.tau).substr(0, 31), "((p_1_1 -> u) -> (pp_1_1 -> u) ");
}

TEST(BuildTau, Variables) {
  for (int n = 2; n <= 5; ++n) {
    auto t = build_tau(n);
    for (const auto& v : vars_of(t.alpha))
      EXPECT_TRUE(v == "v" || v[0] == 'q' || v.rfind("p_", 0) == 0) << v;
    for (const auto& v : vars_of(t.beta))
      EXPECT_TRUE(v == "w" || v[0] == 'r' || v.rfind("pp_", 0) == 0) << v;
  }
  EXPECT_THROW(build_tau(1), std::invalid_argument);
}

TEST(BuildTau, SizeGrowsCubically) {
  for (int n = 2; n <= 8; ++n) {
    double ratio = static_cast<double>(build_tau(n).tau.size()) / (n * n * n);
    EXPECT_LE(ratio, 2 * frozen::kTauSize) << n;
    EXPECT_GE(ratio, frozen::kTauSize / 2) << n;
  }
  auto t0 = std::chrono::steady_clock::now();
  build_tau(8);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(ValidateTau, SmallInstances) {
  for (int n : {2, 3}) {
    auto v = validate_tau(n);
    ASSERT_EQ(v.verdict, Verdict::Valid) << n;
    EXPECT_TRUE(check_nm(*v.proof, {}, build_tau(n).tau));
  }
}

TEST(ValidateTau, MutantIsRefuted) {
  // β₂ without its first triple block r_0_0 → r_1_0 → pp_0_0 → w
  auto t = build_tau(2);
  Formula w = var("w");
  std::vector<Formula> guards, triples;
  for (int m = 0; m <= 1; ++m)
    guards.push_back(fold_imp(std::vector<Formula>{imp(var(r_name(m, 0)), w), imp(var(r_name(m, 1)), w)}, w));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (i || j) triples.push_back(imps({var(r_name(0, i)), var(r_name(1, j)), var(pp_name(i, j)), w}));
  Formula beta = fold_imp(guards, fold_imp(triples, w));
  auto s = make_shape(t);
  s.beta = beta;
  Formula mutant = s.target();
  auto v = validate_formula(mutant);
  ASSERT_EQ(v.verdict, Verdict::Invalid);
  ASSERT_TRUE(v.countermodel.has_value());
  EXPECT_FALSE(holds(*v.countermodel, mutant));
}

TEST(MakeShape, Counts) {
  auto t2 = build_tau(2);
  auto s = make_shape(t2);
  EXPECT_EQ(s.p.size(), 4u);
  EXPECT_EQ(s.pp.size(), 4u);
  EXPECT_EQ(s.q.size(), 2u);
  EXPECT_EQ(s.r.size(), 4u);
  EXPECT_EQ(s.target(), t2.tau);
  EXPECT_NO_THROW(validate_shape(s));
  auto s3 = make_shape(build_tau(3));
  EXPECT_EQ(s3.q.size(), 3u);
  EXPECT_EQ(s3.target(), build_tau(3).tau);
}

TEST(SpecializeToCc, Renaming) {
  auto c = specialize_to_cc(circuit_var("p_0_1"), 2);
  ASSERT_EQ(c.gate_count(), 1u);
  EXPECT_EQ(c.gates[0].name, "e_0_1");
  auto d = specialize_to_cc(circuit_var("p_1_0"), 2);
  EXPECT_EQ(d.gates[0].name, "e_0_1");
  auto z = specialize_to_cc(circuit_var("p_0_0"), 2);
  EXPECT_FALSE(eval_circuit(z, {}));
  EXPECT_EQ(z.gates[z.root].kind, GateKind::Or);
  EXPECT_THROW(specialize_to_cc(circuit_var("q_0_0"), 2), std::invalid_argument);
}

TEST(SpecializeToCc, AgreesWithEdgeMap) {
  CircuitBuilder b;
  auto c = b.finish(b.or_gate({b.and_gate({b.var("p_0_1"), b.var("p_2_1")}), b.var("p_1_1")}));
  auto s = specialize_to_cc(c, 3);
  for (int x = 0; x < 8; ++x) {
    Assignment e{{"e_0_1", (x & 1) != 0}, {"e_0_2", (x & 2) != 0}, {"e_1_2", (x & 4) != 0}};
    Assignment p;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p[p_name(i, j)] = i != j && e[edge_var(i, j)];
    EXPECT_EQ(eval_circuit(s, e), eval_circuit(c, p));
  }
}

TEST(Pipeline, TauSeparatesCliqueColouring) {
  for (int n : {2, 3}) {
    auto inst = build_tau(n);
    auto v = validate_tau(n);
    ASSERT_EQ(v.verdict, Verdict::Valid);
    auto s = make_shape(inst);
    auto ex = extract_interpolant(*v.proof, s);
    auto itp = check_interpolates(ex.circuit, s);
    EXPECT_TRUE(itp) << itp.message;
    auto sep = check_separates(specialize_to_cc(ex.circuit, n), n);
    EXPECT_TRUE(sep) << sep.message;
    EXPECT_TRUE(sep.exhaustive);
  }
}

// A proper colouring falsifies α and a (k+1)-clique falsifies β(¬p), classically.
TEST(Semantics, ColouringAndCliqueAssignments) {
  for (int n = 2; n <= 4; ++n) {
    auto t = build_tau(n);
    auto cc = make_cc(n);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << cc.edges.size()); ++x) {
      std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
      std::vector<std::pair<int, int>> es;
      for (std::size_t e = 0; e < cc.edges.size(); ++e)
        if (x >> e & 1) {
          auto [i, j] = cc.edges[e];
          adj[i][j] = adj[j][i] = 1;
          es.push_back(cc.edges[e]);
        }
      Assignment base;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          base[p_name(i, j)] = adj[i][j];
          base[pp_name(i, j)] = !adj[i][j];
        }
      // every colouring with k colours
      std::vector<int> col(n, 0);
      for (;;) {
        bool proper = true;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) proper = proper && !(adj[i][j] && col[i] == col[j]);
        if (proper) {
          Assignment a = base;
          a["v"] = false;
          for (int i = 0; i < n; ++i)
            for (int l = 0; l < t.k; ++l) a[q_name(i, l)] = col[i] == l;
          ASSERT_FALSE(classical_eval(a, t.alpha));
        }
        int i = 0;
        while (i < n && ++col[i] == t.k) col[i++] = 0;
        if (i == n) break;
      }
      // every (k+1)-clique, enumerated increasingly
      for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << n); ++sub) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
          if (sub >> i & 1) members.push_back(i);
        if (static_cast<int>(members.size()) != t.k + 1) continue;
        bool clique = true;
        for (int a = 0; a < t.k + 1; ++a)
          for (int b = a + 1; b < t.k + 1; ++b) clique = clique && adj[members[a]][members[b]];
        if (!clique) continue;
        Assignment a = base;
        a["w"] = false;
        for (int m = 0; m <= t.k; ++m)
          for (int i = 0; i < n; ++i) a[r_name(m, i)] = members[m] == i;
        ASSERT_FALSE(classical_eval(a, t.beta));
      }
    }
  }
}
