#include "common.hpp"

using namespace sla;
using R = SubtypeStep::Rule;

TEST_SUITE("subtype") {

struct Fixture {
  Model model = Model::bounded(Universe{}, std::make_shared<const PredDefs>(
                                               parse_program("pred lst(i) := (i = 0 /\\ emp) \\/ "
                                                             "(exists j. i |-> j * lst(j));\n"
                                                             "pred inv(l) := exists l'. l |-> l' * lst(l');")
                                                   .preds));
  SubtypeContext precise{model, Mode::Precise};
  SubtypeContext loose{model, Mode::Unrestricted};
};

std::string nf(const std::string &t, const VarSet &delta = {}) {
  return to_string(normalize_otimes(parse_type(t), delta).type);
}

TEST_CASE("normalization pushes invariants to the triple leaves") {
  CHECK(nf("{1 |-> -}-{emp} @ 2 |-> 0") == "{1 |-> - * 2 |-> 0}-{emp * 2 |-> 0}");
  CHECK(nf("({emp}-{emp} @ 1 |-> 0) @ 2 |-> 0") == "{emp * (1 |-> 0 * 2 |-> 0)}-{emp * (1 |-> 0 * 2 |-> 0)}");
  CHECK(nf("({emp}-{emp} -> {emp}-{emp}) @ inv(l)", {"l"}) ==
        "{emp * inv(l)}-{emp * inv(l)} -> {emp * inv(l)}-{emp * inv(l)}");
  CHECK(nf("(pi i. {i |-> -}-{emp}) @ inv(l)", {"l"}) == "pi i. {i |-> - * inv(l)}-{emp * inv(l)}");
  CHECK_FALSE(has_otimes(parse_type(nf("((pi i. {i |-> -}-{emp}) -> {emp}-{emp}) @ inv(l)", {"l"}))));
}

TEST_CASE("normalization renames a pi binder captured by the invariant") {
  TypePtr t = normalize_otimes(parse_type("(pi i. {i |-> -}-{emp}) @ i |-> 0"), {"i"}).type;
  REQUIRE(t->kind == TypeExpr::Kind::Pi);
  CHECK(t->var != "i");
  CHECK(free_vars(t) == VarSet{"i"});
}

TEST_CASE("normalization proofs verify and reverse") {
  Fixture f;
  for (const char *src : {"{1 |-> -}-{emp} @ 2 |-> 0", "((pi i. {i |-> -}-{emp}) -> {emp}-{emp}) @ 1 |-> 0",
                          "({emp}-{emp} @ 1 |-> 0) @ 2 |-> 0"}) {
    Normalized n = normalize_otimes(parse_type(src), {});
    CHECK_NOTHROW(verify_step({}, n.proof, f.loose));
    SubtypeStep back = reverse_step(n.proof);
    CHECK(alpha_equal(back.source, n.type));
    CHECK(alpha_equal(back.target, parse_type(src)));
    CHECK_NOTHROW(verify_step({}, back, f.loose));
  }
}

TEST_CASE("script-free subtyping uses consequence at the leaves") {
  Fixture f;
  SubtypeStep s = check_subtype({}, parse_type("{1 |-> -}-{1 |-> 5}"), parse_type("{1 |-> 5}-{1 |-> -}"), f.precise);
  CHECK(count_rule(s, R::Consequence) == 1);
  CHECK_NOTHROW(verify_step({}, s, f.precise));
  CHECK(check_subtype({}, parse_type("{emp}-{emp}"), parse_type("{emp}-{emp}"), f.precise).rule == R::Refl);
  SubtypeStep arrow = check_subtype({}, parse_type("{1 |-> 2}-{emp} -> {emp}-{emp}"),
                                    parse_type("{1 |-> -}-{emp} -> {emp}-{true}"), f.precise);
  REQUIRE(arrow.rule == R::ArrowStruct);
  CHECK(alpha_equal(arrow.children[0].source, parse_type("{1 |-> -}-{emp}")));
}

TEST_CASE("arrow arguments are contravariant") {
  Fixture f;
  CHECK_THROWS_AS(check_subtype({}, parse_type("{1 |-> -}-{emp} -> {emp}-{emp}"),
                                parse_type("{1 |-> 2}-{emp} -> {emp}-{emp}"), f.precise),
                  SubtypeError);
}

TEST_CASE("frames are never inferred without a script") {
  Fixture f;
  CHECK_THROWS_AS(check_subtype({}, parse_type("{1 |-> -}-{emp}"), parse_type("{1 |-> - * 2 |-> 0}-{2 |-> 0}"),
                                f.precise),
                  SubtypeError);
  Script s = parse_script("(frame 2 |-> 0) (distTriple) (consequence)");
  SubtypeStep st = check_subtype({}, parse_type("{1 |-> -}-{emp}"), parse_type("{1 |-> - * 2 |-> 0}-{2 |-> 0}"),
                                 f.precise, s);
  CHECK(count_rule(st, R::FrameAxiom) == 1);
  CHECK(count_rule(st, R::DistTriple) == 1);
  CHECK_NOTHROW(verify_step({}, st, f.precise));
}

TEST_CASE("failed consequence reports a witness") {
  Fixture f;
  CHECK_THROWS_AS(check_subtype({}, parse_type("{emp}-{emp}"), parse_type("{1 |-> -}-{emp}"), f.precise),
                  SubtypeError);
  try {
    check_subtype({}, parse_type("{1 |-> -}-{emp}"), parse_type("{emp}-{emp}"), f.precise);
    FAIL("expected failure");
  } catch (const SubtypeError &e) {
    REQUIRE(e.heap());
    CHECK(to_string(*e.heap()) == "[]");
  }
}

TEST_CASE("the frame gate follows the mode") {
  Fixture f;
  TypePtr t = parse_type("{1 |-> -}-{1 |-> 5}");
  CHECK_THROWS(apply_frame(t, parse_assertion("true"), {}, f.precise));
  CHECK_NOTHROW(apply_frame(t, parse_assertion("true"), {}, f.loose));
  CHECK_NOTHROW(apply_frame(t, parse_assertion("inv(2)"), {}, f.precise));
}

TEST_CASE("the third-order chain for the client") {
  Fixture f;
  VarSet d{"j", "l"};
  TypePtr client = parse_type("((pi i. {i |-> -}-{i |-> -}) -> (pi i. {i |-> -}-{emp})) -> {j |-> -}-{emp}");
  TypePtr target = parse_type(
      "((pi i. {i |-> -}-{i |-> -}) -> (pi i. {i |-> -}-{emp})) @ inv(l) -> {j |-> - * inv(l)}-{inv(l)}");
  Script s = parse_script("(frame inv(l)) (distArrow) (res (distTriple) (consequence))");
  SubtypeStep st = check_subtype(d, client, target, f.precise, s);
  CHECK(count_rule(st, R::FrameAxiom) == 1);
  CHECK(count_rule(st, R::DistArrow) >= 1);
  CHECK_NOTHROW(verify_step(d, st, f.precise));
}

TEST_CASE("tampered proofs are rejected") {
  Fixture f;
  SubtypeStep s = check_subtype({}, parse_type("{1 |-> -}-{emp}"), parse_type("{1 |-> 2}-{emp}"), f.precise);
  s.target = parse_type("{emp}-{emp}");
  CHECK_THROWS(verify_step({}, s, f.precise));
}

TEST_CASE("mode names") {
  CHECK(parse_mode("precise") == Mode::Precise);
  CHECK(to_string(Mode::Unrestricted) == "unrestricted");
  CHECK_THROWS(parse_mode("loose"));
}
}
