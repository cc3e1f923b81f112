#include "common.hpp"

using namespace sla;

TEST_SUITE("typecheck") {

struct Checker {
  std::shared_ptr<const PredDefs> defs = std::make_shared<const PredDefs>();
  Model model = Model::bounded(Universe{}, defs);
  SubtypeContext sub;
  ContextPtr gamma = std::make_shared<const TypeContext>();

  explicit Checker(Mode m = Mode::Precise) : sub(model, m) {}

  Derivation check(const std::string &term, const std::string &type, const VarSet &delta = {}) {
    Derivation d = check_term(gamma, delta, parse_term(term), parse_type(type), sub);
    verify_derivation(d, sub);
    return d;
  }
};

TEST_CASE("corpus derivations have the expected rule skeletons") {
  CHECK(rule_skeleton(test::def(test::load("dlist.sla"), "dlist")) ==
        "fix(lam(lamInt(ifz(subsume(skip), subsume(read(seq(subsume(appInt(var)), subsume(free))))))))");
  CHECK(rule_skeleton(test::def(test::load("client.sla"), "client")) ==
        "lam(appInt(app(var, lamInt(subsume(read(subsume(write)))))))");
  auto cm = test::load("client_mfree.sla");
  REQUIRE(cm.goal);
  CHECK(rule_skeleton(*cm.goal) == "app(subsume(var), var)");
  CHECK(to_string(cm.goal->type) == "{j |-> - * inv(l)}-{inv(l)}");
}

TEST_CASE("the mfree derivation uses the frame rule at every cast it should") {
  auto p = test::load("mfree.sla");
  const Derivation &d = test::def(p, "Mfree");
  size_t frames = 0;
  std::function<void(const Derivation &)> walk = [&](const Derivation &n) {
    if (n.subtype)
      frames += count_rule(*n.subtype, SubtypeStep::Rule::FrameAxiom);
    for (auto &c : n.children)
      walk(c);
  };
  walk(d);
  CHECK(frames == 4);
  CHECK(derivation_size(d) == rule_tags(d).size());
}

TEST_CASE("basic rules") {
  Checker c;
  CHECK(c.check("skip", "{emp}-{emp}").rule == "skip");
  CHECK(c.check("free(1)", "{1 |-> -}-{emp}").rule == "free");
  CHECK(c.check("[1] := 4", "{1 |-> -}-{1 |-> 4}").rule == "write");
  CHECK(c.check("let v = [1] in ([1] := v + 1 as {1 |-> v}-{1 |-> -} by (consequence))",
                "{exists v. 1 |-> v}-{1 |-> -}").rule == "read");
  CHECK(c.check("let j = new in (free(j) as {j |-> - * emp}-{emp} by (consequence))", "{emp}-{emp}").rule == "new");
  CHECK(c.check("\\i. free(i)", "pi i. {i |-> -}-{emp}").rule == "lamInt");
}

TEST_CASE("the read rule accepts the existential inside or outside the star") {
  Checker c;
  CHECK_NOTHROW(c.check("let v = [1] in ((skip : {1 |-> v * 2 |-> 0}-{1 |-> v * 2 |-> 0}) as {1 |-> v * 2 |-> 0}-{exists v. 1 |-> v * 2 |-> 0} by (consequence))",
                          "{exists v. 1 |-> v * 2 |-> 0}-{exists v. 1 |-> v * 2 |-> 0}"));
  CHECK_NOTHROW(c.check("let v = [1] in ((skip : {1 |-> v * 2 |-> 0}-{1 |-> v * 2 |-> 0}) as {1 |-> v * 2 |-> 0}-{(exists v. 1 |-> v) * 2 |-> 0} by (consequence))",
                          "{(exists v. 1 |-> v) * 2 |-> 0}-{(exists v. 1 |-> v) * 2 |-> 0}"));
}

TEST_CASE("errors name the failing side condition") {
  Checker c;
  CHECK_THROWS_WITH(c.check("(free(1) as {1 |-> -}-{emp}); (free(1) as {emp}-{emp} by (consequence))",
                            "{1 |-> -}-{emp}"),
                    doctest::Contains("emp does not entail"));
  CHECK_THROWS_WITH(c.check("skip; skip", "{emp}-{emp}"), doctest::Contains("midcondition"));
  CHECK_THROWS(c.check("free(2)", "{1 |-> -}-{emp}"));
  CHECK_THROWS(c.check("f", "{emp}-{emp}"));
}

TEST_CASE("frame(M, P) in each mode") {
  Checker precise, loose(Mode::Unrestricted);
  CHECK_THROWS_WITH(precise.check("frame([1] := 5, true)", "{1 |-> - * true}-{1 |-> 5 * true}"),
                    doctest::Contains("not precise"));
  CHECK_NOTHROW(loose.check("frame([1] := 5, true)", "{1 |-> - * true}-{1 |-> 5 * true}"));
  CHECK_NOTHROW(precise.check("frame([1] := 5, 2 |-> 0)", "{1 |-> - * 2 |-> 0}-{1 |-> 5 * 2 |-> 0}"));
}

TEST_CASE("conjunction only in precise mode") {
  Checker precise, loose(Mode::Unrestricted);
  const char *m = "conj([1] := 5, ([1] := 5 as {1 |-> -}-{1 |-> -}))";
  const char *t = "{1 |-> - /\\ 1 |-> -}-{1 |-> 5 /\\ 1 |-> -}";
  CHECK(precise.check(m, t).rule == "conj");
  CHECK_THROWS_WITH(loose.check(m, t), doctest::Contains("unrestricted mode"));
  CHECK_THROWS(precise.check("conj([1] := 5, [1] := 6)", "{1 |-> - /\\ 1 |-> -}-{1 |-> 5 /\\ 1 |-> 6}"));
}

TEST_CASE("precise mode checks invariants in annotations") {
  Checker precise;
  CHECK_THROWS_WITH(precise.check("(skip : {emp}-{emp} @ true)", "{true}-{true}"), doctest::Contains("not precise"));
}

TEST_CASE("tampering with a derivation is caught") {
  auto p = test::load("dlist.sla");
  Derivation d = test::def(p, "dlist");
  Model m = Model::bounded(Universe{}, p.defs);
  SubtypeContext sub(m, Mode::Precise);
  CHECK_NOTHROW(verify_derivation(d, sub));
  Derivation bad = d;
  bad.type = parse_type("pi i. {lst(i)}-{true}");
  CHECK_THROWS(verify_derivation(bad, sub));
  Derivation wrong_rule = d;
  wrong_rule.rule = "lam";
  CHECK_THROWS(verify_derivation(wrong_rule, sub));
}

TEST_CASE("rejected corpus files") {
  CHECK_THROWS_WITH(test::load("reject/double_free.sla"), doctest::Contains("emp does not entail 1 |-> -"));
  CHECK_THROWS_WITH(test::load("mode/frame_true.sla"), doctest::Contains("not precise"));
  CHECK_NOTHROW(test::load("mode/frame_true.sla", Mode::Unrestricted));
  CHECK_NOTHROW(test::load("mode/conj.sla"));
  CHECK_THROWS_WITH(test::load("mode/conj.sla", Mode::Unrestricted), doctest::Contains("unrestricted mode"));
}

TEST_CASE("pi binders must be fresh for the stack context") {
  Checker c;
  CHECK_THROWS(c.check("\\l. skip", "pi l. {emp}-{emp}", {"l"}));
}
}
