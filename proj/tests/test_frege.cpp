#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "nmx/frege.hpp"
#include "nmx/schemas.hpp"
#include "nmx/semantics.hpp"

using namespace nmx;

namespace {

// (A2), (A1), MP, (A1), MP.
FregeSeq identity_seq(const Formula& p) {
  Formula pp = imp(p, p);
  return {axiom_a2(p, pp, p), axiom_a1(p, pp), imp(imp(p, pp), pp), axiom_a1(p, p), pp};
}

}  // namespace

TEST(Axioms, Recognition) {
  EXPECT_TRUE(is_axiom_a1(parse_formula("p -> q -> p")));
  EXPECT_FALSE(is_axiom_a1(parse_formula("p -> q -> q")));
  EXPECT_TRUE(is_axiom_a2(parse_formula("(p -> q -> r) -> (p -> q) -> p -> r")));
  EXPECT_FALSE(is_axiom_a2(parse_formula("(p -> q -> r) -> (p -> q) -> q -> r")));
}

TEST(CheckFregeSeq, Examples) {
  Formula a1 = parse_formula("p -> q -> p");
  EXPECT_TRUE(check_frege_seq({a1}, {}, a1));
  Formula p = var("p");
  EXPECT_TRUE(check_frege_seq(identity_seq(p), {}, imp(p, p)));
  EXPECT_FALSE(check_frege_seq({p}, {}, p));
  EXPECT_TRUE(check_frege_seq({p}, {p}, p));
  EXPECT_FALSE(check_frege_seq(identity_seq(p), {}, p));
  EXPECT_FALSE(check_frege_seq({}, {}, p));
}

TEST(CheckFregeSeq, EarliestJustification) {
  Formula p = var("p"), q = var("q");
  FregeSeq lines{p, imp(p, q), p, q};
  std::vector<LineJust> j;
  ASSERT_EQ(justify_seq(lines, {p, imp(p, q)}, j), lines.size());
  EXPECT_EQ(j[3].kind, Just::MP);
  EXPECT_EQ(j[3].minor, 0u);
  EXPECT_EQ(j[3].major, 1u);
}

TEST(CheckFregeDag, MirrorsSequenceChecker) {
  Formula p = var("p");
  Formula a1 = parse_formula("p -> q -> p");
  EXPECT_TRUE(check_frege_dag(seq_to_dag({a1}, {}), {}, a1));
  auto d = seq_to_dag(identity_seq(p), {});
  EXPECT_TRUE(check_frege_dag(d, {}, imp(p, p)));
  EXPECT_THROW(seq_to_dag({p}, {}), std::invalid_argument);
  EXPECT_FALSE(check_frege_dag(seq_to_dag({p}, {p}), {}, p));
}

TEST(CheckFregeDag, RejectsBadShapes) {
  DagBuilder b;
  Formula p = var("p"), q = var("q");
  std::size_t l = b.leaf(p);
  auto d = b.finish(b.intro(l, q));  // in-degree 1
  EXPECT_FALSE(check_frege_dag(d, {p}, imp(q, p)));
  DagBuilder c;
  auto e = c.finish(c.add(q, {c.leaf(p), c.leaf(imp(q, p))}));  // labels do not fit MP
  EXPECT_FALSE(check_frege_dag(e, {p, imp(q, p)}, q));
}

TEST(Conversion, IdentityRoundTrip) {
  Formula p = var("p");
  auto d = seq_to_dag(identity_seq(p), {});
  EXPECT_LE(d.node_count(), 5u);
  auto s = dag_to_seq(d);
  EXPECT_LE(s.size(), 5u);
  EXPECT_TRUE(check_frege_seq(s, {}, imp(p, p)));
}

TEST(Conversion, SingleAxiomAndUnusedLine) {
  Formula a1 = parse_formula("p -> q -> p");
  EXPECT_EQ(seq_to_dag({a1}, {}).node_count(), 1u);
  Formula p = var("p");
  FregeSeq lines = identity_seq(p);
  lines.insert(lines.begin() + 1, parse_formula("r -> s -> r"));
  ASSERT_TRUE(check_frege_seq(lines, {}, imp(p, p)));
  auto d = seq_to_dag(lines, {});
  EXPECT_LT(d.node_count(), lines.size());
  EXPECT_TRUE(check_frege_dag(d, {}, imp(p, p)));
}

TEST(Conversion, RandomRoundTripsNeverGrow) {
  std::mt19937_64 rng(17);
  auto vars = testgen::letters(3);
  std::vector<Formula> gamma{var("p"), parse_formula("p -> q")};
  FormulaSet gs(gamma.begin(), gamma.end());
  for (int it = 0; it < 200; ++it) {
    auto lines = testgen::random_frege_seq(rng, 12, vars, gamma);
    const Formula phi = lines.back();
    ASSERT_TRUE(check_frege_seq(lines, gs, phi));
    auto d = seq_to_dag(lines, gs);
    ASSERT_TRUE(check_frege_dag(d, gs, phi));
    auto s = dag_to_seq(d);
    ASSERT_TRUE(check_frege_seq(s, gs, phi));
    auto ms = frege_metrics(lines, gs), md = frege_metrics(d), ms2 = frege_metrics(s, gs);
    EXPECT_LE(md.lines, ms.lines);
    EXPECT_LE(md.size, ms.size);
    EXPECT_LE(md.formula_size, ms.formula_size);
    EXPECT_LE(ms2.lines, md.lines);
    EXPECT_LE(ms2.size, md.size);
  }
}

TEST(Dedup, Examples) {
  Formula p = var("p");
  FregeSeq lines = identity_seq(p);
  lines.insert(lines.begin() + 2, lines[1]);
  ASSERT_TRUE(check_frege_seq(lines, {}, imp(p, p)));
  auto d = dedup(lines);
  EXPECT_LT(d.size(), lines.size());
  EXPECT_TRUE(check_frege_seq(d, {}, imp(p, p)));
  EXPECT_TRUE(is_non_redundant(d));
  EXPECT_EQ(dedup(identity_seq(p)), identity_seq(p));
}

// In a non-redundant proof a major premise α → β justifies only the single line β, so the
// inferential size is at most 3 · size.
TEST(Dedup, InferentialSizeLinearInSize) {
  std::mt19937_64 rng(23);
  auto vars = testgen::letters(3);
  for (int it = 0; it < 200; ++it) {
    auto lines = dedup(testgen::random_frege_seq(rng, 20, vars));
    ASSERT_TRUE(check_frege_seq(lines, {}, lines.back()));
    auto m = frege_metrics(lines, {});
    EXPECT_LE(m.inferential_size, 3 * m.size);
  }
}

TEST(FregeMetrics, IdentityByHand) {
  Formula p = var("p");
  auto m = frege_metrics(identity_seq(p), {});
  EXPECT_EQ(m.lines, 5u);
  EXPECT_EQ(m.size, 17u + 7u + 9u + 5u + 3u);
  EXPECT_EQ(m.formula_size, 17u);
  EXPECT_EQ(m.height, 2u);
  EXPECT_EQ(m.inferential_size, 29u + (9u + 7u + 17u) + (3u + 5u + 9u));
  auto md = frege_metrics(seq_to_dag(identity_seq(p), {}));
  EXPECT_EQ(md.lines, 5u);
  EXPECT_EQ(md.height, 2u);
}

TEST(Soundness, ClosedRandomProofsAreTautologies) {
  std::mt19937_64 rng(29);
  auto vars = testgen::letters(2);
  for (int it = 0; it < 60; ++it) {
    auto lines = testgen::random_frege_seq(rng, 10, vars);
    if (lines.back().size() > 25) continue;
    EXPECT_EQ(decide(std::vector<Formula>{}, lines.back()).verdict, Verdict::Valid) << render(lines.back());
  }
}

TEST(Schemas, CatalogueTemplatesCheck) {
  for (const auto& s : schema_catalogue()) {
    const auto& t = named_schema(s.name);
    FormulaSet gamma(t.premises.begin(), t.premises.end());
    EXPECT_TRUE(check_frege_dag(t.proof, gamma, t.conclusion)) << s.name;
    EXPECT_TRUE(is_tree(t.proof)) << s.name;
    ASSERT_EQ(t.premise_leaf.size(), t.premises.size());
    // each premise used exactly once
    std::size_t premise_leaves = 0;
    for (std::size_t v = 0; v < t.proof.node_count(); ++v)
      if (t.proof.premises[v].empty() && gamma.count(t.proof.labels[v]) && !is_axiom(t.proof.labels[v])) ++premise_leaves;
    EXPECT_EQ(premise_leaves, t.premises.size()) << s.name;
  }
  EXPECT_EQ(named_schema("identity").proof.node_count(), 5u);
  EXPECT_THROW(named_schema("no_such_schema"), std::invalid_argument);
}

TEST(Schemas, InstantiateIdentity) {
  const auto& t = named_schema("identity");
  Formula pq = parse_formula("p -> q");
  auto d = instantiate_schema(t, {{"a", pq}});
  EXPECT_TRUE(check_frege_dag(d, {}, imp(pq, pq)));
  EXPECT_EQ(d.node_count(), t.proof.node_count());
  auto e = instantiate_schema(t, {{"a", parse_formula("(p -> q) -> r -> s")}});
  EXPECT_EQ(e.node_count(), t.proof.node_count());
}

TEST(Schemas, InstantiateChain) {
  const auto& t = named_schema("chain");
  Substitution s{{"a", var("x")}, {"b", var("y")}, {"c", var("z")}};
  auto d = instantiate_schema(t, s);
  FormulaSet gamma{parse_formula("x -> y"), parse_formula("y -> z")};
  EXPECT_TRUE(check_frege_dag(d, gamma, parse_formula("x -> z")));
  EXPECT_TRUE(is_tree(d));
  auto uses = assumption_uses(d, gamma);
  for (const auto& g : gamma) EXPECT_EQ(uses[g], 1u);

  // size stays within template size times the largest instantiated metavariable
  Substitution big{{"a", parse_formula("p -> p -> p")}, {"b", var("q")}, {"c", parse_formula("r -> r")}};
  auto e = instantiate_schema(t, big);
  EXPECT_LE(derivation_metrics(e).size, derivation_metrics(t.proof).size * 5);
}

TEST(Schemas, Errors) {
  const auto& t = named_schema("chain");
  EXPECT_THROW(instantiate_schema(t, {{"a", var("x")}, {"b", var("y")}}), std::invalid_argument);
  DagBuilder b;
  std::size_t l0 = b.leaf(parse_formula("x -> y")), l1 = b.leaf(parse_formula("z -> z"));
  Substitution s{{"a", var("x")}, {"b", var("y")}, {"c", var("z")}};
  EXPECT_THROW(use_schema(b, t, s, {l0, l1}), std::logic_error);
  EXPECT_THROW(use_schema(b, t, s, {l0}), std::invalid_argument);
}

TEST(Schemas, AdhocTemplatesAreCached) {
  Formula c = F("(a -> b) -> (b -> c) -> a -> c");
  const auto& t1 = schema(c, "compose");
  const auto& t2 = schema(c, "compose");
  EXPECT_EQ(&t1, &t2);
  EXPECT_TRUE(check_frege_dag(t1.proof, {}, c));
}

TEST(Deduction, NmTranslation) {
  // ⊢ (a → b → c) → b → a → c, proved by decide and translated through the deduction route.
  Formula f = F("(a -> b -> c) -> b -> a -> c");
  auto r = decide(std::vector<Formula>{}, f);
  ASSERT_EQ(r.verdict, Verdict::Valid);
  auto d = nm_to_frege_by_deduction(*r.proof);
  EXPECT_TRUE(check_frege_dag(d, {}, f));
  EXPECT_TRUE(is_tree(d));
  auto n = normalize_nm_tree(*r.proof);
  EXPECT_TRUE(check_nm(n, {}, f));
  EXPECT_LE(n.node_count(), r.proof->node_count());
}
