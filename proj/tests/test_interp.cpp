#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "nmx/interp.hpp"
#include "nmx/semantics.hpp"
#include "nmx/tautgen.hpp"

using namespace nmx;

namespace {

Derivation mp_shape(const Formula& a, const Formula& c) {
  DagBuilder b;
  return b.finish(b.mp(b.leaf(a), b.leaf(imp(a, c))));
}

Derivation identity_nm(const Formula& a) {
  DagBuilder b;
  return b.finish(b.intro(b.leaf(a), a));
}

// (α₀ → u) → (α₁ → u) → u where α_i = p → p is proved and fed to the hypothesis α_i → u.
Derivation disjunct_proof(const Formula& a0, const Formula& a1, int proved) {
  Formula u = var("u"), p = var("p");
  Formula h[2] = {imp(a0, u), imp(a1, u)};
  DagBuilder b;
  std::size_t pp = b.intro(b.leaf(p), p);
  std::size_t uu = b.mp(pp, b.leaf(h[proved]));
  return b.finish(b.intro(b.intro(uu, h[1]), h[0]));
}

FormulaSet labels_of(const Derivation& d) { return FormulaSet(d.labels.begin(), d.labels.end()); }

}  // namespace

TEST(Closure, Examples) {
  Formula a = var("a"), b = var("b");
  auto d = mp_shape(a, b);
  auto tr = closure(d, {a, imp(a, b)});
  EXPECT_TRUE(tr.contains(b));
  EXPECT_EQ(tr.fixpoint(), 1u);

  auto e = identity_nm(a);
  EXPECT_EQ(closure(e, {}).result, FormulaSet{imp(a, a)});

  auto full = labels_of(d);
  full.insert(var("z"));
  auto t3 = closure(d, full);
  EXPECT_EQ(t3.result, full);
  EXPECT_EQ(t3.fixpoint(), 0u);
}

TEST(Closure, WorklistMatchesLiteralStages) {
  std::mt19937_64 rng(41);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 300; ++it) {
    auto d = testgen::random_nm_dag(rng, 10, vars);
    auto labels = labels_of(d);
    FormulaSet p;
    for (const auto& l : labels)
      if (rng() % 3 == 0) p.insert(l);
    auto fast = closure(d, p), slow = closure_literal(d, p);
    ASSERT_EQ(fast.result, slow.result);
    ASSERT_EQ(fast.added, slow.added);
    EXPECT_LE(fast.fixpoint(), d.node_count());
  }
}

TEST(Closure, Monotone) {
  std::mt19937_64 rng(43);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 200; ++it) {
    auto d = testgen::random_nm_dag(rng, 10, vars);
    FormulaSet p, q;
    for (const auto& l : d.labels) {
      int r = static_cast<int>(rng() % 3);
      if (r == 0) p.insert(l);
      if (r <= 1) q.insert(l);
    }
    auto cp = closure(d, p).result, cq = closure(d, q).result;
    ASSERT_TRUE(std::includes(cq.begin(), cq.end(), cp.begin(), cp.end(), FormulaLess()));
  }
}

TEST(Closure, AddedFormulasFollowFromP) {
  std::mt19937_64 rng(47);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 60; ++it) {
    auto d = testgen::random_nm_dag(rng, 8, vars);
    FormulaSet p;
    for (const auto& l : d.labels)
      if (rng() % 2) p.insert(l);
    auto tr = closure(d, p);
    std::vector<Formula> pv(p.begin(), p.end());
    for (const auto& f : tr.result) {
      if (p.count(f)) continue;
      ASSERT_EQ(decide(pv, f).verdict, Verdict::Valid) << render(f);
    }
  }
}

TEST(ClosureCircuit, MpShapeBruteForce) {
  Formula a = var("a"), b = var("b");
  auto d = mp_shape(a, b);
  std::vector<Formula> f{a, imp(a, b), b};
  for (bool literal : {false, true}) {
    ClosureCircuitOptions opt;
    opt.literal = literal;
    auto cc = closure_circuit(d, f, b, opt);
    for (std::uint64_t x = 0; x < 8; ++x) {
      FormulaSet p;
      Assignment as;
      for (std::size_t i = 0; i < 3; ++i) {
        as["x_" + std::to_string(i)] = x >> i & 1;
        if (x >> i & 1) p.insert(f[i]);
      }
      EXPECT_EQ(eval_circuit(cc.circuit, as), closure_literal(d, p).contains(b)) << x;
    }
    Assignment zero{{"x_0", false}, {"x_1", false}, {"x_2", false}};
    EXPECT_FALSE(eval_circuit(cc.circuit, zero));
    Assignment en{{"x_0", true}, {"x_1", true}, {"x_2", false}};
    EXPECT_TRUE(eval_circuit(cc.circuit, en));
  }
}

TEST(ClosureCircuit, TargetOutsideLabelsIsItsInput) {
  Formula a = var("a"), b = var("b"), z = var("z");
  auto cc = closure_circuit(mp_shape(a, b), {z, a, imp(a, b), b}, z);
  ASSERT_EQ(cc.circuit.gate_count(), 1u);
  EXPECT_EQ(cc.circuit.gates[0].kind, GateKind::Var);
  EXPECT_EQ(cc.circuit.gates[0].name, "x_0");
}

TEST(ClosureCircuit, Errors) {
  Formula a = var("a"), b = var("b");
  auto d = mp_shape(a, b);
  EXPECT_THROW(closure_circuit(d, {a, imp(a, b), b}, var("z")), std::invalid_argument);
  EXPECT_THROW(closure_circuit(d, {a, a, imp(a, b), b}, b), std::invalid_argument);
  EXPECT_THROW(closure_circuit(d, {a, b}, b), std::invalid_argument);
}

TEST(ClosureCircuit, RandomEquivalence) {
  std::mt19937_64 rng(53);
  auto vars = testgen::letters(3);
  int tested = 0;
  while (tested < 60) {
    auto d = testgen::random_nm_dag(rng, 7, vars);
    auto labels = labels_of(d);
    std::vector<Formula> f(labels.begin(), labels.end());
    if (f.size() > 10) continue;
    f.push_back(var("extra"));
    ++tested;
    const Formula phi = f[rng() % f.size()];
    for (bool literal : {false, true}) {
      ClosureCircuitOptions opt;
      opt.literal = literal;
      auto cc = closure_circuit(d, f, phi, opt);
      EXPECT_LE(cc.literal_wires, cc.bound);
      if (literal) {
        EXPECT_LE(cc.circuit.size(), cc.bound);
      }
      std::vector<std::string> names;
      for (std::size_t i = 0; i < f.size(); ++i) names.push_back("x_" + std::to_string(i));
      auto tt = truth_table(cc.circuit, names);
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.size()); ++x) {
        FormulaSet p;
        for (std::size_t i = 0; i < f.size(); ++i)
          if (x >> i & 1) p.insert(f[i]);
        ASSERT_EQ((tt[x >> 6] >> (x & 63) & 1) != 0, closure_literal(d, p).contains(phi));
      }
    }
  }
}

TEST(Slash, Examples) {
  SlashContext c;
  c.base["p"] = false;
  EXPECT_FALSE(slash(c, var("p")));
  // ‖p fails (p ∉ P), so p → q is slashed vacuously
  c.base["q"] = false;
  EXPECT_TRUE(slash(c, parse_formula("p -> q")));
  c.p.insert(var("p"));
  c.base["p"] = true;
  EXPECT_FALSE(slash(c, parse_formula("p -> q")));
  EXPECT_TRUE(strong_slash(c, var("p")));
  EXPECT_FALSE(strong_slash(c, var("q")));
  auto d = slash_context({}, "u");
  EXPECT_FALSE(slash(d, var("u")));
  EXPECT_TRUE(slash(d, var("x")));
}

// |(Γ → φ) iff ‖γ for every γ in Γ implies |φ.
TEST(Slash, FoldedSequences) {
  std::mt19937_64 rng(59);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 500; ++it) {
    std::vector<Formula> gamma;
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) gamma.push_back(testgen::random_formula_upto(rng, 2, vars));
    Formula phi = testgen::random_formula_upto(rng, 2, vars);
    SlashContext c;
    for (const auto& v : vars) c.base[v] = rng() % 2;
    for (const auto& g : gamma)
      if (rng() % 2) c.p.insert(g);
    for (int i = 0; i < 3; ++i) c.p.insert(testgen::random_formula_upto(rng, 2, vars));
    bool all = true;
    for (const auto& g : gamma) all = all && strong_slash(c, g);
    ASSERT_EQ(slash(c, fold_imp(gamma, phi)), !all || slash(c, phi));
  }
}

// A Π-closed P and any choice on variables give ‖φ for the conclusion φ of Π.
TEST(Slash, SoundForClosedSets) {
  std::mt19937_64 rng(61);
  auto vars = testgen::letters(3);
  int tested = 0;
  while (tested < 100) {
    Formula phi = testgen::random_formula_upto(rng, 4, vars);
    auto r = decide(std::vector<Formula>{}, phi);
    if (r.verdict != Verdict::Valid) continue;
    ++tested;
    const auto& d = *r.proof;
    for (int k = 0; k < 5; ++k) {
      FormulaSet seed;
      for (const auto& l : d.labels)
        if (rng() % 3 == 0) seed.insert(l);
      SlashContext c;
      c.p = closure(d, seed).result;
      for (const auto& v : vars) c.base[v] = rng() % 2;
      ASSERT_TRUE(c.p.count(phi));
      ASSERT_TRUE(slash(c, phi)) << render(phi);
    }
  }
}

TEST(ExtractDisjunct, Examples) {
  Formula pp = parse_formula("p -> p"), q = var("q"), u = var("u");
  auto d0 = disjunct_proof(pp, q, 0);
  EXPECT_EQ(extract_disjunct(d0, "u"), 0);
  auto d1 = disjunct_proof(q, pp, 1);
  EXPECT_EQ(extract_disjunct(d1, "u"), 1);
  auto both = disjunct_proof(pp, parse_formula("q -> q"), 0);
  EXPECT_EQ(extract_disjunct(both, "u"), 0);
}

TEST(ExtractDisjunct, Errors) {
  Formula a = var("a");
  EXPECT_THROW(extract_disjunct(identity_nm(a), "u"), std::invalid_argument);
  auto d = disjunct_proof(parse_formula("p -> p"), var("q"), 0);
  EXPECT_THROW(extract_disjunct(d, "p"), std::invalid_argument);
  auto bad = disjunct_proof(parse_formula("p -> p"), parse_formula("u -> q"), 0);
  EXPECT_THROW(extract_disjunct(bad, "u"), std::invalid_argument);
}

TEST(ExtractInterpolant, TauTwo) {
  auto inst = build_tau(2);
  auto v = validate_tau(2);
  ASSERT_EQ(v.verdict, Verdict::Valid);
  auto shape = make_shape(inst);
  auto ex = extract_interpolant(*v.proof, shape);
  EXPECT_LE(ex.folded_wires, ex.closure.circuit.size());
  EXPECT_LE(ex.closure.literal_wires, ex.closure.bound);
  auto rep = check_interpolates(ex.circuit, shape);
  EXPECT_TRUE(rep) << rep.message;
  // all p-inputs on: α follows from the full closure, so the circuit outputs 1
  Assignment all;
  for (const auto& p : shape.p) all[p] = true;
  EXPECT_TRUE(eval_circuit(ex.circuit, all));
}

// Either α ∈ P_{I,[n]} or β ∈ P_{[n],[n]∖I} for every I.
TEST(ExtractInterpolant, ClosureDichotomy) {
  auto inst = build_tau(2);
  auto v = validate_tau(2);
  ASSERT_EQ(v.verdict, Verdict::Valid);
  auto s = make_shape(inst);
  Formula u = var(s.u);
  FormulaSet base{imp(s.alpha, u), imp(s.beta, u)};
  for (std::size_t i = 0; i < s.n; ++i) base.insert(imps({imp(var(s.p[i]), u), imp(var(s.pp[i]), u), u}));
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << s.n); ++x) {
    FormulaSet left = base, right = base;
    for (std::size_t i = 0; i < s.n; ++i) {
      left.insert(var(s.pp[i]));
      if (x >> i & 1) left.insert(var(s.p[i]));
      right.insert(var(s.p[i]));
      if (!(x >> i & 1)) right.insert(var(s.pp[i]));
    }
    EXPECT_TRUE(closure(*v.proof, left).contains(s.alpha) || closure(*v.proof, right).contains(s.beta)) << x;
  }
}

TEST(ExtractInterpolant, ShapeErrors) {
  auto inst = build_tau(2);
  auto v = validate_tau(2);
  auto s = make_shape(inst);
  auto bad = s;
  bad.u = "v";
  EXPECT_THROW(extract_interpolant(*v.proof, bad), std::invalid_argument);
  auto other = s;
  other.alpha = imp(s.alpha, s.alpha);
  EXPECT_THROW(extract_interpolant(*v.proof, other), std::invalid_argument);
}
