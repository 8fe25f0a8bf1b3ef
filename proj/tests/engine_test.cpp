#include <doctest.h>

#include <random>

#include "prooflog/engine.hpp"
#include "prooflog/parser.hpp"
#include "prooflog/proof.hpp"
#include "prooflog/unify.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace prooflog;

namespace {

KnowledgeBase kb_of(const std::string& text) {
  const ParseResult r = parse_program({text, "test"});
  REQUIRE_MESSAGE(r.ok(), text);
  return r.kb;
}

std::vector<Goal> query_of(const std::string& text) {
  const QueryParseResult q = parse_query(text);
  REQUIRE_MESSAGE(q.ok(), text);
  return q.goals;
}

SearchConfig dfs_config() {
  SearchConfig cfg;
  cfg.strategy = Strategy::dfs;
  return cfg;
}

SearchConfig ids_config() {
  SearchConfig cfg;
  cfg.strategy = Strategy::ids;
  return cfg;
}

// For the randomized corpora: minimal proofs there are shallow, so a small
// budget only trims fruitless deep search of underivable goals.
SearchConfig corpus_config() {
  SearchConfig cfg;
  cfg.strategy = Strategy::ids;
  cfg.step_budget = 50'000;
  return cfg;
}

}  // namespace

TEST_CASE("a fact query yields a single fact-node proof") {
  const KnowledgeBase kb = kb_of("green(fiona).");
  const SolveResult r = solve(kb, query_of("green(fiona)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const Solution& s = r.solutions[0];
  CHECK(s.proof->kind == ProofNode::Kind::fact);
  CHECK(canonical_render(s.proof->head) == "green(fiona)");
  CHECK(s.depth_found == 1);
  CHECK(s.answer_bindings.empty());
  CHECK(check_proof(kb, s.proof, ids_config()).accepted);
}

TEST_CASE("rule resolution records one child per body goal") {
  const KnowledgeBase kb = kb_of(
      "red(fiona). rough(fiona). quiet(X) :- red(X), rough(X).");
  const SolveResult r = solve(kb, query_of("quiet(fiona)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const ProofTree& proof = r.solutions[0].proof;
  CHECK(proof->kind == ProofNode::Kind::rule);
  CHECK(canonical_render(proof->head) == "quiet(fiona)");
  REQUIRE(proof->children.size() == 2);
  CHECK(canonical_render(proof->children[0]->head) == "red(fiona)");
  CHECK(canonical_render(proof->children[1]->head) == "rough(fiona)");
  CHECK(r.solutions[0].depth_found == 2);
  CHECK(check_proof(kb, proof, ids_config()).accepted);

  // Cross-check derivability with the forward-chaining oracle.
  const oracle::ForwardChaining fc(kb);
  CHECK(fc.derivable(Term::compound("quiet", {Term::atom("fiona")})));
  CHECK_FALSE(fc.derivable(Term::compound("quiet", {Term::atom("bob")})));
}

TEST_CASE("overtime wage evaluates to exactly 27") {
  const KnowledgeBase kb = kb_of(
      "wage(18.00). overtime_wage(W) :- wage(W1), W is 1.5 * W1.");
  const SolveResult r = solve(kb, query_of("overtime_wage(W)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const auto w = r.solutions[0].answer_bindings.lookup({"W", 0});
  REQUIRE(w.has_value());
  CHECK(w->number_value() == Rational(27));
  CHECK(render_rational(w->number_value()) == "27");
  // The builtin child re-evaluates during replay.
  CHECK(check_proof(kb, r.solutions[0].proof, ids_config()).accepted);
}

TEST_CASE("left recursion: DFS exhausts its budget, IDS answers at depth 1") {
  const KnowledgeBase kb = kb_of("p(X) :- p(X). p(a).");
  SearchConfig dfs = dfs_config();
  dfs.step_budget = 20'000;
  const SolveResult d = solve(kb, query_of("p(a)."), dfs);
  CHECK(d.budget_exhausted);
  CHECK(d.solutions.empty());

  const SolveResult i = solve(kb, query_of("p(a)."), ids_config());
  REQUIRE(i.solutions.size() == 1);
  CHECK(i.solutions[0].depth_found == 1);
  CHECK(i.solutions[0].proof->kind == ProofNode::Kind::fact);
}

TEST_CASE("depth-limited search counts resolution nodes only") {
  const KnowledgeBase kb = kb_of("natural(0). natural(s(X)) :- natural(X).");
  const auto query = query_of("natural(s(s(0))).");
  const SolveResult too_shallow =
      depth_limited_solve(kb, query, 2, dfs_config());
  CHECK(too_shallow.solutions.empty());
  CHECK(too_shallow.depth_capped);
  const SolveResult deep_enough =
      depth_limited_solve(kb, query, 3, dfs_config());
  REQUIRE(deep_enough.solutions.size() == 1);
  CHECK(deep_enough.solutions[0].depth_found == 3);
}

TEST_CASE("a non-binding limit reproduces the unlimited DFS proof") {
  const KnowledgeBase kb = kb_of(
      "edge(a, b). edge(b, c). path(X, Y) :- edge(X, Y)."
      "path(X, Z) :- edge(X, Y), path(Y, Z).");
  const auto query = query_of("path(a, c).");
  const SolveResult unlimited = solve(kb, query, dfs_config());
  const SolveResult limited = depth_limited_solve(kb, query, 10, dfs_config());
  REQUIRE_FALSE(unlimited.solutions.empty());
  REQUIRE_FALSE(limited.solutions.empty());
  CHECK(proof_equal(unlimited.solutions[0].proof, limited.solutions[0].proof));
}

TEST_CASE("limit 1 on a rule-only kb finds nothing") {
  const KnowledgeBase kb = kb_of("p(X) :- q(X). q(X) :- r(X).");
  const SolveResult r = depth_limited_solve(kb, query_of("p(a)."), 1,
                                            dfs_config());
  CHECK(r.solutions.empty());
}

TEST_CASE("ids equals dfs on loop-free programs") {
  const KnowledgeBase kb = kb_of(
      "edge(a, b). edge(b, c). edge(a, c)."
      "path(X, Y) :- edge(X, Y)."
      "path(X, Z) :- edge(X, Y), path(Y, Z).");
  const auto query = query_of("path(a, c).");
  const SolveResult ids = ids_solve(kb, query, ids_config());
  const SolveResult dfs = solve(kb, query, dfs_config());
  REQUIRE_FALSE(ids.solutions.empty());
  REQUIRE_FALSE(dfs.solutions.empty());
  // IDS returns the minimal-depth solutions; its first proof depth is the
  // minimum over all DFS solutions.
  int min_depth = dfs.solutions[0].depth_found;
  for (const auto& s : dfs.solutions) {
    min_depth = std::min(min_depth, s.depth_found);
  }
  CHECK(ids.solutions[0].depth_found == min_depth);
}

TEST_CASE("a query needing depth 21 is depth-capped at max_depth 20") {
  std::string text = "n0.\n";
  for (int i = 1; i <= 21; ++i) {
    text += "n" + std::to_string(i) + " :- n" + std::to_string(i - 1) + ".\n";
  }
  const KnowledgeBase kb = kb_of(text);
  // n19's proof chain has exactly 20 resolution nodes: inside the ceiling.
  const SolveResult inside = ids_solve(kb, query_of("n19."), ids_config());
  REQUIRE(inside.solutions.size() == 1);
  CHECK(inside.solutions[0].depth_found == 20);
  // n20 needs 21: the bound is binding.
  const SolveResult r = ids_solve(kb, query_of("n20."), ids_config());
  CHECK(r.solutions.empty());
  CHECK(r.depth_capped);
  CHECK_FALSE(r.budget_exhausted);
}

TEST_CASE("call_builtin covers is, comparisons, and identity") {
  Substitution empty;
  const Goal is_goal = Goal::builtin(
      BuiltinOp::eval_is, Term::var("W"),
      Term::compound("*", {Term::number(Rational(3, 2)),
                           Term::number(Rational(18))}));
  const auto bound = call_builtin(is_goal, empty);
  REQUIRE(bound.has_value());
  CHECK(bound->lookup({"W", 0})->number_value() == Rational(27));

  const Goal cmp = Goal::builtin(
      BuiltinOp::arith_eq, Term::number(Rational(3)),
      Term::compound("/", {Term::number(Rational(6)), Term::number(Rational(2))}));
  CHECK(call_builtin(cmp, empty).has_value());

  const Goal lt = Goal::builtin(BuiltinOp::less, Term::var("X"),
                                Term::number(Rational(3)));
  CHECK_THROWS_AS(call_builtin(lt, empty), BuiltinError);

  const Goal div0 = Goal::builtin(
      BuiltinOp::eval_is, Term::var("X"),
      Term::compound("/", {Term::number(Rational(1)), Term::number(Rational(0))}));
  CHECK_THROWS_AS(call_builtin(div0, empty), BuiltinError);

  const Goal eq = Goal::builtin(BuiltinOp::unify_terms, Term::var("X"),
                                Term::atom("a"));
  const auto unified = call_builtin(eq, empty);
  REQUIRE(unified.has_value());
  CHECK(*unified->lookup({"X", 0}) == Term::atom("a"));

  const Goal ident = Goal::builtin(BuiltinOp::struct_eq, Term::var("X"),
                                   Term::var("X"));
  const auto same = call_builtin(ident, empty);
  REQUIRE(same.has_value());
  CHECK(same->empty());  // == never binds

  const Goal not_ident = Goal::builtin(BuiltinOp::struct_ne, Term::var("X"),
                                       Term::atom("a"));
  CHECK(call_builtin(not_ident, empty).has_value());
}

TEST_CASE("exact arithmetic is drift-free under repetition") {
  const Term expr = Term::compound(
      "-", {Term::compound("*", {Term::number(Rational(1, 3)),
                                 Term::number(Rational(3))}),
            Term::number(Rational(1))});
  const Rational first = eval_arith(expr);
  for (int i = 0; i < 100; ++i) CHECK(eval_arith(expr) == first);
  CHECK(first == Rational(0));
}

TEST_CASE("solve_naf follows the closed-branch rule") {
  const KnowledgeBase kb = kb_of("green(fiona).");
  const Goal provable = Goal::naf(
      Goal::call(Term::compound("green", {Term::atom("fiona")})));
  CHECK_FALSE(solve_naf(provable, kb, 20, ids_config()).succeeded);

  const Goal open = Goal::naf(
      Goal::call(Term::compound("blue", {Term::atom("fiona")})));
  const NafResult r = solve_naf(open, kb, 20, ids_config());
  CHECK(r.succeeded);
  REQUIRE(r.node);
  CHECK(r.node->kind == ProofNode::Kind::naf);
  CHECK(r.node->naf_depth_limit == 20);

  const Goal floundering =
      Goal::naf(Goal::call(Term::compound("p", {Term::var("X")})));
  CHECK_THROWS_AS(solve_naf(floundering, kb, 20, ids_config()),
                  FlounderingError);
}

TEST_CASE("naf inside a rule body is recorded and replayed") {
  const KnowledgeBase kb = kb_of(
      "bird(tweety). penguin(opus). bird(opus)."
      "flies(X) :- bird(X), \\+ penguin(X).");
  const SolveResult r = solve(kb, query_of("flies(tweety)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const ProofTree& proof = r.solutions[0].proof;
  REQUIRE(proof->children.size() == 2);
  CHECK(proof->children[1]->kind == ProofNode::Kind::naf);
  CHECK(check_proof(kb, proof, ids_config()).accepted);

  CHECK(solve(kb, query_of("flies(opus)."), ids_config()).solutions.empty());
}

TEST_CASE("floundering negation aborts only the offending branch") {
  const KnowledgeBase kb = kb_of(
      "p(X) :- \\+ q(X).\n"
      "p(a).\n");
  const SolveResult r = solve(kb, query_of("p(X)."), ids_config());
  REQUIRE(r.solutions.size() == 1);  // the fact still answers
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("arithmetic errors abort the branch and leave a diagnostic") {
  const KnowledgeBase kb = kb_of(
      "v(X) :- w(Y), X is Y / 0.\n"
      "v(42).\n"
      "w(1).\n");
  // DFS hits the failing branch before the fact (IDS would answer at limit 1
  // without ever evaluating the division).
  const SolveResult r = solve(kb, query_of("v(X)."), dfs_config());
  REQUIRE(r.solutions.size() == 1);
  CHECK(r.solutions[0].answer_bindings.lookup({"X", 0})->number_value() ==
        Rational(42));
  bool noted = false;
  for (const auto& d : r.diagnostics) {
    if (d.find("division by zero") != std::string::npos) noted = true;
  }
  CHECK(noted);
}

TEST_CASE("classify_answer covers the three-way open world") {
  SearchConfig cfg = ids_config();
  const KnowledgeBase green = kb_of("green(fiona).");
  const Classification t = classify_answer(
      green, Term::compound("green", {Term::atom("fiona")}), cfg);
  CHECK(t.label == AnswerLabel::true_);
  REQUIRE(t.proof);
  CHECK(t.proof->kind == ProofNode::Kind::fact);

  const KnowledgeBase neg = kb_of("neg_green(bob).");
  const Classification f = classify_answer(
      neg, Term::compound("green", {Term::atom("bob")}), cfg);
  CHECK(f.label == AnswerLabel::false_);
  REQUIRE(f.proof);
  CHECK(canonical_render(f.proof->head) == "neg_green(bob)");

  const Classification u = classify_answer(
      green, Term::compound("blue", {Term::atom("fiona")}), cfg);
  CHECK(u.label == AnswerLabel::unknown);
  CHECK_FALSE(u.proof);

  const KnowledgeBase both = kb_of("green(a). neg_green(a).");
  const Classification inconsistent = classify_answer(
      both, Term::compound("green", {Term::atom("a")}), cfg);
  CHECK(inconsistent.label == AnswerLabel::true_);
  CHECK(inconsistent.inconsistent);

  // A neg_-prefixed statement classifies against its positive counterpart.
  const Classification neg_stmt = classify_answer(
      green, Term::compound("neg_green", {Term::atom("fiona")}), cfg);
  CHECK(neg_stmt.label == AnswerLabel::false_);
}

TEST_CASE("check_proof rejects tampered proofs") {
  const KnowledgeBase kb = kb_of(
      "% id: t1\nred(fiona).\n% id: t2\nrough(fiona).\n"
      "% id: r1\nquiet(X) :- red(X), rough(X).\n");
  const SolveResult r = solve(kb, query_of("quiet(fiona)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const ProofTree good = r.solutions[0].proof;
  const SearchConfig cfg = ids_config();
  CHECK(check_proof(kb, good, cfg).accepted);

  SUBCASE("reordered rule children") {
    auto tampered = std::make_shared<ProofNode>(*good);
    std::swap(tampered->children[0], tampered->children[1]);
    const CheckOutcome outcome = check_proof(kb, tampered, cfg);
    CHECK_FALSE(outcome.accepted);
    CHECK_FALSE(outcome.reason.empty());
  }
  SUBCASE("fabricated fact") {
    const ProofTree fake = proof_fact(
        Term::compound("quiet", {Term::atom("fiona")}), "t9");
    CHECK_FALSE(check_proof(kb, fake, cfg).accepted);
  }
  SUBCASE("hallucinated label") {
    auto tampered = std::make_shared<ProofNode>(*good);
    tampered->head = Term::compound("loud", {Term::atom("fiona")});
    CHECK_FALSE(check_proof(kb, tampered, cfg).accepted);
  }
  SUBCASE("mutated provenance") {
    auto tampered = std::make_shared<ProofNode>(*good);
    tampered->provenance = "t1";
    CHECK_FALSE(check_proof(kb, tampered, cfg).accepted);
  }
  SUBCASE("tampered builtin result") {
    const KnowledgeBase wage = kb_of(
        "% id: w1\nwage(18.00).\n% id: w2\n"
        "overtime_wage(W) :- wage(W1), W is 1.5 * W1.\n");
    const SolveResult s = solve(wage, query_of("overtime_wage(W)."),
                                ids_config());
    REQUIRE(s.solutions.size() == 1);
    auto tampered = std::make_shared<ProofNode>(*s.solutions[0].proof);
    auto child = std::make_shared<ProofNode>(*tampered->children[1]);
    child->head = Term::compound(
        "is", {Term::number(Rational(26)),
               Term::compound("*", {Term::number(Rational(3, 2)),
                                    Term::number(Rational(18))})});
    child->builtin_result = Term::number(Rational(26));
    tampered->children[1] = child;
    CHECK_FALSE(check_proof(wage, tampered, ids_config()).accepted);
  }
}

TEST_CASE("proof serialization round-trips and replays") {
  const KnowledgeBase kb = kb_of(
      "% id: t1\nbird(tweety).\n% id: r1\n"
      "flies(X) :- bird(X), \\+ penguin(X).\n");
  const SolveResult r = solve(kb, query_of("flies(tweety)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  const ProofTree original = r.solutions[0].proof;
  const std::string json_text = proof_to_json(original);
  const ProofTree restored = proof_from_json(json_text);
  CHECK(proof_equal(original, restored));
  CHECK(proof_to_json(restored) == json_text);
  CHECK(check_proof(kb, restored, ids_config()).accepted);
}

TEST_CASE("multi-goal queries get a synthetic root") {
  const KnowledgeBase kb = kb_of("p(a). q(a).");
  const SolveResult r = solve(kb, query_of("p(X), q(X)."), ids_config());
  REQUIRE(r.solutions.size() == 1);
  CHECK(r.solutions[0].proof->kind == ProofNode::Kind::query);
  CHECK(r.solutions[0].proof->children.size() == 2);
  CHECK(check_proof(kb, r.solutions[0].proof, ids_config()).accepted);
  // The answer bindings reproduce the instantiated goals at the proof roots.
  const auto x = r.solutions[0].answer_bindings.lookup({"X", 0});
  REQUIRE(x.has_value());
  CHECK(canonical_render(r.solutions[0].proof->children[0]->head) ==
        "p(" + canonical_render(*x) + ")");
}

TEST_CASE("unknown predicates simply fail") {
  const KnowledgeBase kb = kb_of("p(a).");
  CHECK(solve(kb, query_of("mystery(a)."), ids_config()).solutions.empty());
}

TEST_CASE("max_solutions caps the enumeration") {
  const KnowledgeBase kb = kb_of("n(1). n(2). n(3). n(4). n(5).");
  SearchConfig cfg = ids_config();
  cfg.max_solutions = 3;
  const SolveResult r = solve(kb, query_of("n(X)."), cfg);
  CHECK(r.solutions.size() == 3);
  // Discovery order follows clause order.
  CHECK(r.solutions[0].answer_bindings.lookup({"X", 0})->number_value() ==
        Rational(1));
  CHECK(r.solutions[2].answer_bindings.lookup({"X", 0})->number_value() ==
        Rational(3));
}

// ---------------------------------------------------------------------------
// Randomized properties.

TEST_CASE("replay: every emitted proof passes check_proof") {
  std::mt19937 rng(20240812);
  const SearchConfig cfg = corpus_config();
  int proofs = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto program = trial % 2 == 0
                             ? testgen::random_propositional_program(rng)
                             : testgen::random_relational_program(rng);
    for (const Term& atom : program.universe) {
      const SolveResult r = solve(program.kb, {Goal::call(atom)}, cfg);
      for (const Solution& s : r.solutions) {
        ++proofs;
        const CheckOutcome outcome = check_proof(program.kb, s.proof, cfg);
        CHECK_MESSAGE(outcome.accepted, outcome.reason);
      }
    }
  }
  CHECK(proofs > 200);
}

TEST_CASE("oracle equivalence on random function-free programs") {
  std::mt19937 rng(31337);
  const SearchConfig cfg = corpus_config();
  for (int trial = 0; trial < 60; ++trial) {
    const auto program = trial % 2 == 0
                             ? testgen::random_propositional_program(rng)
                             : testgen::random_relational_program(rng);
    const oracle::ForwardChaining fc(program.kb);
    for (const Term& atom : program.universe) {
      const Classification cls = classify_answer(program.kb, atom, cfg);
      const bool derivable = fc.derivable(atom);
      CHECK_MESSAGE((cls.label == AnswerLabel::true_) == derivable,
                    canonical_render(atom));
    }
  }
}

TEST_CASE("distractor invariance: unreachable clauses never change a proof") {
  std::mt19937 rng(555);
  const SearchConfig cfg = corpus_config();
  for (int trial = 0; trial < 20; ++trial) {
    const auto program = testgen::random_relational_program(rng);
    // Find one provable atom to compare on.
    ProofTree baseline;
    Term provable;
    for (const Term& atom : program.universe) {
      const SolveResult r = solve(program.kb, {Goal::call(atom)}, cfg);
      if (!r.solutions.empty()) {
        baseline = r.solutions[0].proof;
        provable = atom;
        break;
      }
    }
    if (!baseline) continue;
    KnowledgeBase extended;
    for (const Clause& c : program.kb.clauses()) extended.add(c);
    for (int d = 0; d < 50; ++d) {
      Clause distractor;
      distractor.head = Term::compound(
          "distractor" + std::to_string(d),
          {Term::atom("c" + std::to_string(testgen::pick(rng, 0, 2)))});
      distractor.provenance = "d" + std::to_string(d);
      extended.add(std::move(distractor));
    }
    const SolveResult r = solve(extended, {Goal::call(provable)}, cfg);
    REQUIRE_FALSE(r.solutions.empty());
    CHECK(proof_to_json(r.solutions[0].proof) == proof_to_json(baseline));
  }
}

TEST_CASE("identical runs produce byte-identical solution dumps") {
  std::mt19937 rng(808);
  const auto program = testgen::random_relational_program(rng);
  const SearchConfig cfg = corpus_config();
  for (const Term& atom : program.universe) {
    const SolveResult a = solve(program.kb, {Goal::call(atom)}, cfg);
    const SolveResult b = solve(program.kb, {Goal::call(atom)}, cfg);
    REQUIRE(a.solutions.size() == b.solutions.size());
    for (std::size_t i = 0; i < a.solutions.size(); ++i) {
      CHECK(proof_to_json(a.solutions[i].proof) ==
            proof_to_json(b.solutions[i].proof));
    }
  }
}
