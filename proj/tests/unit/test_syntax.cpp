#include "common.hpp"

using namespace sla;

TEST_SUITE("syntax") {

TEST_CASE("assertions print back to equivalent text") {
  for (const char *src : {"emp", "true", "1 |-> 2 * 2 |-> 0", "exists j. i |-> j * lst(j)",
                          "(i = 0 /\\ emp) \\/ i != 0", "forall k. ~(k |-> 0)"}) {
    AssertionPtr a = parse_assertion(src);
    CHECK(alpha_equal(parse_assertion(to_string(a)), a));
  }
}

TEST_CASE("points-to-anything is an existential over a fresh binder") {
  AssertionPtr a = parse_assertion("i |-> -");
  REQUIRE(a->kind == Assertion::Kind::Exists);
  CHECK(is_fresh_name(a->name));
  CHECK(alpha_equal(a, parse_assertion("exists v. i |-> v")));
  CHECK(to_string(a) == "i |-> -");
}

TEST_CASE("alpha equality flattens associative chains") {
  CHECK(alpha_equal(parse_assertion("(a |-> 1 * b |-> 2) * c |-> 3"), parse_assertion("a |-> 1 * (b |-> 2 * c |-> 3)")));
  CHECK_FALSE(alpha_equal(parse_assertion("a |-> 1 * b |-> 2"), parse_assertion("b |-> 2 * a |-> 1")));
  CHECK(alpha_equal(parse_type("pi i. {i |-> -}-{emp}"), parse_type("pi k. {k |-> -}-{emp}")));
}

TEST_CASE("free variables and capture-avoiding substitution") {
  AssertionPtr a = parse_assertion("exists j. i |-> j * lst(j)");
  CHECK(free_vars(a) == VarSet{"i"});
  AssertionPtr b = subst(a, mk::var("j"), "i");
  CHECK(free_vars(b) == VarSet{"j"});
  CHECK(alpha_equal(b, parse_assertion("exists k. j |-> k * lst(k)")));
  TypePtr t = subst_type(parse_type("pi i. {i |-> l}-{emp}"), mk::lit(3), "l");
  CHECK(to_string(t) == "pi i. {i |-> 3}-{emp}");
}

TEST_CASE("types and terms parse") {
  TypePtr t = parse_type("((pi i. {i |-> -}-{i |-> -}) -> (pi i. {i |-> -}-{emp})) @ inv(l)");
  CHECK(t->kind == TypeExpr::Kind::Otimes);
  CHECK(t->a->kind == TypeExpr::Kind::Arrow);
  TermPtr m = parse_term("let j = [i] in (f j); free(i)", {"f"});
  CHECK(m->kind == Term::Kind::Read);
  CHECK(m->m1->kind == Term::Kind::Seq);
  Script s = parse_script("(frame i |-> j) (distTriple) (consequence)");
  REQUIRE(s.size() == 3);
  CHECK(s[0].kind == ScriptStep::Kind::Frame);
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_program("def x : {emp}-{emp} := skip\n goal x : {emp}-{emp};");
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.pos().line >= 1);
  }
  CHECK_THROWS_AS(parse_assertion("i |->"), ParseError);
  CHECK_THROWS_AS(parse_type("{emp}"), ParseError);
}

TEST_CASE("programs keep predicates, stack variables and scripts") {
  Program p = parse_program("pred p(i) := i |-> 0;\nvars l;\nscript s := (frame emp);\n"
                            "def c : {emp}-{emp} := skip;\ngoal c : {emp}-{emp};");
  CHECK(p.preds.size() == 1);
  CHECK(p.delta == std::vector<std::string>{"l"});
  CHECK(p.scripts.count("s") == 1);
  CHECK(p.goal);
  CHECK_THROWS(parse_program("script s := (refl);\nscript s := (refl);"));
}

TEST_CASE("every corpus file parses and prints back to a program that parses") {
  for (auto &e : std::filesystem::recursive_directory_iterator(test::corpus)) {
    if (e.path().extension() != ".sla")
      continue;
    Program p = parse_program(test::slurp(e.path()));
    CHECK_NOTHROW(parse_program(to_string(p)));
  }
}

TEST_CASE("hygiene rejects double binding and bound/free clashes") {
  CHECK_THROWS_AS(check_hygiene(parse_term("\\i. \\i. skip")), HygieneError);
  CHECK_THROWS_AS(check_hygiene(parse_term("let j = new in let j = new in skip")), HygieneError);
  CHECK_THROWS_AS(check_hygiene(parse_term("let l = new in skip"), {"l"}), HygieneError);
  CHECK_NOTHROW(check_hygiene(parse_term("let j = new in free(j)")));
}

TEST_CASE("erasing annotations") {
  TermPtr m = parse_term("((skip : {emp}-{emp}) as {emp}-{emp} by (refl))");
  CHECK(erase_annotations(m)->kind == Term::Kind::Skip);
}

TEST_CASE("well-formedness names the offending variable") {
  CHECK_THROWS_WITH_AS(well_formed_assertion({"i"}, parse_assertion("i |-> k")), doctest::Contains("k"), SlaError);
  CHECK_NOTHROW(well_formed_type({}, parse_type("pi i. {i |-> -}-{emp}")));
}
}
