#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "nmx/natded.hpp"

using namespace nmx;

namespace {

// α → α: a leaf α discharged by one →I node.
Derivation identity_proof(const Formula& a) {
  DagBuilder b;
  return b.finish(b.intro(b.leaf(a), a));
}

Derivation single_leaf(const Formula& f) {
  DagBuilder b;
  return b.finish(b.leaf(f));
}

Derivation mp_shape(const Formula& a, const Formula& c) {
  DagBuilder b;
  return b.finish(b.mp(b.leaf(a), b.leaf(imp(a, c))));
}

}  // namespace

TEST(Assumptions, Examples) {
  Formula phi = parse_formula("p -> q");
  auto a = assumptions(single_leaf(phi));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], FormulaSet{phi});

  Formula al = var("a");
  auto d = identity_proof(al);
  EXPECT_TRUE(assumptions(d)[d.root].empty());

  auto e = mp_shape(al, var("b"));
  EXPECT_EQ(assumptions(e)[e.root], (FormulaSet{al, imp(al, var("b"))}));
}

TEST(CheckNm, Examples) {
  Formula a = var("a");
  EXPECT_TRUE(check_nm(identity_proof(a), {}, imp(a, a)));
  Formula phi = parse_formula("p -> q");
  EXPECT_TRUE(check_nm(single_leaf(phi), {phi}, phi));
  auto rep = check_nm(single_leaf(phi), {}, phi);
  EXPECT_FALSE(rep);
  EXPECT_NE(rep.message.find("not in Γ"), std::string::npos);
  EXPECT_FALSE(check_nm(identity_proof(a), {}, imp(a, var("b"))));
}

TEST(CheckNm, LocalRuleViolations) {
  // →I whose consequent does not match the premise.
  Derivation d;
  d.ids = {"x", "y"};
  d.labels = {var("a"), parse_formula("a -> b")};
  d.premises = {{}, {0}};
  d.root = 1;
  auto rep = check_nm(d, {var("a")}, parse_formula("a -> b"));
  EXPECT_FALSE(rep);
  EXPECT_EQ(rep.node, "y");

  // →E with mismatched premises, in both orders.
  Derivation e;
  e.ids = {"m", "n", "o"};
  e.labels = {var("a"), parse_formula("b -> c"), var("c")};
  e.premises = {{}, {}, {0, 1}};
  e.root = 2;
  EXPECT_FALSE(check_nm(e, {var("a"), parse_formula("b -> c")}, var("c")));
  e.labels[0] = var("b");
  EXPECT_TRUE(check_nm(e, {var("b"), parse_formula("b -> c")}, var("c")));
  e.premises[2] = {1, 0};
  EXPECT_TRUE(check_nm(e, {var("b"), parse_formula("b -> c")}, var("c")));
}

TEST(CheckNm, StructuralErrors) {
  Derivation d;
  d.ids = {"a", "b"};
  d.labels = {var("p"), var("q")};
  d.premises = {{}, {}};
  d.root = 1;
  auto rep = check_nm(d, {var("p"), var("q")}, var("q"));
  EXPECT_FALSE(rep);
  EXPECT_EQ(rep.node, "a");  // second sink

  Derivation c;
  c.ids = {"a", "b", "c"};
  c.labels = {var("p"), parse_formula("q -> p"), parse_formula("r -> q -> p")};
  c.premises = {{1}, {0}, {1}};
  c.root = 2;
  EXPECT_FALSE(check_nm(c, {}, c.labels[2]));

  Derivation dup;
  dup.ids = {"a", "a"};
  dup.labels = {var("p"), parse_formula("q -> p")};
  dup.premises = {{}, {0}};
  dup.root = 1;
  EXPECT_FALSE(check_nm(dup, {var("p")}, dup.labels[1]));
}

TEST(Threads, Examples) {
  Formula a = var("a");
  EXPECT_TRUE(check_threads_naive(identity_proof(a), {}, imp(a, a)));
  EXPECT_FALSE(check_threads_naive(single_leaf(var("p")), {}, var("p")));
  EXPECT_TRUE(check_threads_naive(single_leaf(var("p")), {var("p")}, var("p")));
}

TEST(Threads, AgreesWithCheckerOnRandomDags) {
  std::mt19937_64 rng(21);
  auto vars = testgen::letters(2);
  int accepted = 0;
  for (int it = 0; it < 400; ++it) {
    Derivation d = testgen::random_nm_dag(rng, 2 + rng() % 9, vars);
    ASSERT_LE(d.node_count(), 10u);
    FormulaSet leaves;
    for (std::size_t v = 0; v < d.node_count(); ++v)
      if (d.premises[v].empty()) leaves.insert(d.labels[v]);
    for (int g = 0; g < 4; ++g) {
      FormulaSet gamma;
      for (const auto& f : leaves)
        if (rng() % 3) gamma.insert(f);
      bool a = static_cast<bool>(check_nm(d, gamma, d.labels[d.root]));
      bool b = check_threads_naive(d, gamma, d.labels[d.root]);
      EXPECT_EQ(a, b) << proof_to_string(d);
      accepted += a;
    }
  }
  EXPECT_GT(accepted, 100);
}

TEST(Unravel, TreeIsFixedPoint) {
  auto d = mp_shape(var("a"), var("b"));
  auto t = unravel(d);
  EXPECT_TRUE(is_tree(t));
  EXPECT_EQ(t.node_count(), d.node_count());
  EXPECT_EQ(nm_metrics(t).height, nm_metrics(d).height);
}

TEST(Unravel, DiamondDuplicatesSharedLeaf) {
  // a, a → a → b: the leaf a feeds two →E nodes.
  DagBuilder b;
  Formula a = var("a"), bb = var("b");
  std::size_t la = b.leaf(a);
  std::size_t maj = b.leaf(imp(a, imp(a, bb)));
  std::size_t e1 = b.mp(la, maj);
  std::size_t e2 = b.mp(la, e1);
  Derivation d = b.finish(e2);
  EXPECT_FALSE(is_tree(d));
  auto t = unravel(d);
  EXPECT_TRUE(is_tree(t));
  EXPECT_EQ(t.node_count(), d.node_count() + 1);
  EXPECT_EQ(nm_metrics(t).height, nm_metrics(d).height);
  FormulaSet gamma{a, imp(a, imp(a, bb))};
  EXPECT_TRUE(check_nm(t, gamma, bb));
}

TEST(Unravel, PreservesVerdictAndHeight) {
  std::mt19937_64 rng(22);
  auto vars = testgen::letters(2);
  for (int it = 0; it < 200; ++it) {
    Derivation d = testgen::random_nm_dag(rng, 2 + rng() % 9, vars);
    auto t = unravel(d);
    EXPECT_TRUE(is_tree(t));
    EXPECT_EQ(nm_metrics(t).height, nm_metrics(d).height);
    auto ad = assumptions(d)[d.root];
    auto at = assumptions(t)[t.root];
    EXPECT_EQ(ad, at);
  }
}

TEST(Metrics, Examples) {
  auto m = nm_metrics(single_leaf(var("p")));
  EXPECT_EQ(m.lines, 1u);
  EXPECT_EQ(m.size, 1u);
  EXPECT_EQ(m.height, 0u);
  EXPECT_EQ(m.formula_size, 1u);
  EXPECT_EQ(m.inferential_size, 1u);
  auto i = nm_metrics(identity_proof(var("p")));
  EXPECT_EQ(i.lines, 2u);
  EXPECT_EQ(i.size, 4u);
  EXPECT_EQ(i.height, 1u);
  EXPECT_EQ(i.inferential_size, 1u + 3u + 1u);
}

TEST(Metrics, Invariants) {
  std::mt19937_64 rng(23);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 300; ++it) {
    auto m = nm_metrics(testgen::random_nm_dag(rng, 1 + rng() % 12, vars));
    EXPECT_LE(m.size, m.formula_size * m.lines);
    EXPECT_GE(m.size, std::max(m.formula_size, m.lines));
    EXPECT_LT(m.lines, std::uint64_t{1} << (m.height + 1));
  }
}

TEST(ProofFile, RoundTripCanonical) {
  std::mt19937_64 rng(24);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 100; ++it) {
    auto d = testgen::random_nm_dag(rng, 1 + rng() % 12, vars);
    std::string s = proof_to_string(d);
    auto e = read_proof_string(s);
    EXPECT_EQ(proof_to_string(e), s);
    EXPECT_EQ(static_cast<bool>(check_nm(d, {}, d.labels[d.root])), static_cast<bool>(check_nm(e, {}, e.labels[e.root])));
  }
}

TEST(ProofFile, FormatErrors) {
  EXPECT_THROW(read_proof_string("a | p\nb | p -> p\na -> c\nroot b\n"), FormatError);
  EXPECT_THROW(read_proof_string("a | p ->\nroot a\n"), FormatError);
  EXPECT_THROW(read_proof_string("a | p\n"), FormatError);
  EXPECT_THROW(read_proof_string("a | p\na | q\nroot a\n"), FormatError);
  EXPECT_THROW(read_proof_string("a | p\nroot z\n"), FormatError);
  auto d = read_proof_string("# identity\nx | a\ny | a -> a\nx -> y\nroot y\n");
  EXPECT_TRUE(check_nm(d, {}, parse_formula("a -> a")));
}
