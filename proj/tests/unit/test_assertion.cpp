#include "common.hpp"

#include <functional>

using namespace sla;

TEST_SUITE("assertion") {

const char *kLst = "pred lst(i) := (i = 0 /\\ emp) \\/ (exists j. i |-> j * lst(j));\n"
                   "pred inv(l) := exists l'. l |-> l' * lst(l');";

std::shared_ptr<const PredDefs> lst_defs() { return std::make_shared<const PredDefs>(parse_program(kLst).preds); }

// Direct recursive reading of the list predicate; it terminates because
// each step removes a cell.
bool is_list(const Heap &h, Val i) {
  if (i == 0)
    return h.empty();
  auto v = h.get(i);
  return v && is_list(h.without(i), *v);
}

// Naive satisfaction for the quantifier-and-star fragment without named
// predicates; star tries every split.
bool sat(const Heap &h, const AssertionPtr &a, Env env, const std::vector<Val> &vals) {
  using K = Assertion::Kind;
  switch (a->kind) {
  case K::Emp: return h.empty();
  case K::True: return true;
  case K::Eq: return eval_expr(a->e1, env) == eval_expr(a->e2, env);
  case K::PointsTo: {
    Val l = eval_expr(a->e1, env);
    return l > 0 && h.size() == 1 && h.get(l) == eval_expr(a->e2, env);
  }
  case K::Star:
    for (auto &s : subheaps(h))
      if (sat(s, a->lhs, env, vals) && sat(difference(h, s), a->rhs, env, vals))
        return true;
    return false;
  case K::And: return sat(h, a->lhs, env, vals) && sat(h, a->rhs, env, vals);
  case K::Or: return sat(h, a->lhs, env, vals) || sat(h, a->rhs, env, vals);
  case K::Not: return !sat(h, a->lhs, env, vals);
  case K::Exists:
  case K::Forall: {
    bool ex = a->kind == K::Exists;
    for (Val v : vals) {
      env[a->name] = v;
      if (sat(h, a->lhs, env, vals) == ex)
        return ex;
    }
    return !ex;
  }
  case K::Named: break;
  }
  throw SlaError("oracle: unsupported");
}

TEST_CASE("lst(1) at locMax 2, values 0..2") {
  Universe u = test::universe(2, 0, 2);
  Model m = Model::bounded(u, lst_defs());
  Pred p = m.to_pred(m.eval(parse_assertion("lst(1)"), {}));
  CHECK(to_string(p) == "{[1->0], [1->2, 2->0]}");
  Pred oracle;
  for (auto &h : enumerate_heaps(u))
    if (is_list(h, 1))
      oracle.heaps.insert(h);
  CHECK(p == oracle);
}

TEST_CASE("list predicate agrees with the direct reading at the default universe") {
  Universe u;
  Model m = Model::bounded(u, lst_defs());
  for (Val i : u.values()) {
    Bits b = m.eval(parse_assertion("lst(i)"), {{"i", i}});
    for (size_t k = 0; k < m.space().size(); ++k)
      CHECK(b.test(k) == is_list(m.space().heap(k), i));
  }
}

TEST_CASE("bitset evaluation matches naive satisfaction") {
  Universe u = test::universe(2, 0, 2);
  Model m = Model::bounded(u, std::make_shared<const PredDefs>());
  for (const char *src : {"emp", "true", "1 |-> 2", "1 |-> - * 2 |-> -", "exists v. 1 |-> v * 2 |-> v",
                          "(1 |-> 0 * true) /\\ ~(2 |-> 1 * true)", "forall v. ~(1 |-> v) \\/ v = 0",
                          "i |-> - * true", "emp \\/ i |-> i", "true * 1 |-> 1"}) {
    AssertionPtr a = parse_assertion(src);
    for (auto &env : enumerate_envs({"i"}, u)) {
      Bits b = m.eval(a, env);
      for (size_t k = 0; k < m.space().size(); ++k)
        CHECK_MESSAGE(b.test(k) == sat(m.space().heap(k), a, env, u.values()), src);
    }
  }
}

TEST_CASE("points-to needs a positive location") {
  Model m = Model::bounded(Universe{}, std::make_shared<const PredDefs>());
  CHECK_FALSE(m.eval(parse_assertion("0 |-> -"), {}).any());
  CHECK_FALSE(m.eval(parse_assertion("i |-> -"), {{"i", -1}}).any());
}

TEST_CASE("fixpoint iterates form an increasing chain ending at the denotation") {
  Model m = Model::bounded(Universe{}, lst_defs());
  auto it = m.iterates("lst", {1});
  REQUIRE(it.size() >= 2);
  CHECK_FALSE(it.front().any());
  for (size_t i = 1; i < it.size(); ++i)
    CHECK(it[i - 1].subset_of(it[i]));
  CHECK(it.back() == m.call("lst", {1}));
}

TEST_CASE("predicate definitions are validated") {
  CHECK_THROWS(PredDefs(parse_program("pred p(i) := q(i);").preds));
  CHECK_THROWS(PredDefs(parse_program("pred p(i) := p(i, i);").preds));
  CHECK_THROWS(PredDefs(parse_program("pred p(i) := ~p(i);").preds));
  CHECK_NOTHROW(PredDefs(parse_program(kLst).preds));
}

TEST_CASE("precision") {
  Model m = Model::bounded(Universe{}, lst_defs());
  VarSet d{"i", "j", "l"};
  CHECK(is_precise(d, parse_assertion("emp"), m).precise);
  CHECK(is_precise(d, parse_assertion("i |-> j"), m).precise);
  CHECK(is_precise(d, parse_assertion("i |-> -"), m).precise);
  CHECK(is_precise(d, parse_assertion("lst(i)"), m).precise);
  CHECK(is_precise(d, parse_assertion("inv(l)"), m).precise);
  PrecisionResult t = is_precise(d, parse_assertion("true"), m);
  CHECK_FALSE(t.precise);
  REQUIRE(t.subheaps.size() == 2);
  CHECK(t.subheaps[0] != t.subheaps[1]);
  for (auto &s : t.subheaps)
    CHECK(combine(s, difference(t.heap, s)) == t.heap);
  CHECK_FALSE(is_precise(d, parse_assertion("emp \\/ 1 |-> -"), m).precise);
}

TEST_CASE("entailment with witnesses") {
  Model m = Model::bounded(Universe{}, lst_defs());
  CHECK(entails({}, parse_assertion("1 |-> 2"), parse_assertion("1 |-> -"), m).holds);
  EntailResult r = entails({}, parse_assertion("1 |-> -"), parse_assertion("1 |-> 2"), m);
  CHECK_FALSE(r.holds);
  CHECK(r.heap.get(1) != 2);
  EntailResult e = entails({}, parse_assertion("emp"), parse_assertion("1 |-> -"), m);
  CHECK_FALSE(e.holds);
  CHECK(to_string(e.heap) == "[]");
  CHECK(entails({"i"}, parse_assertion("lst(i) /\\ i != 0"), parse_assertion("exists j. i |-> j * lst(j)"), m).holds);
  CHECK_THROWS(entails({}, parse_assertion("i |-> 0"), parse_assertion("emp"), m));
}

TEST_CASE("direct satisfaction reaches outside the universe") {
  Universe u;
  auto defs = lst_defs();
  CHECK(satisfies(parse_heap("[1->7]"), parse_assertion("1 |-> 7"), {}, u, defs));
  CHECK(satisfies(parse_heap("[5->6, 6->0]"), parse_assertion("lst(5)"), {}, u, defs));
  CHECK_FALSE(satisfies(parse_heap("[5->6]"), parse_assertion("lst(5)"), {}, u, defs));
  CHECK(satisfies(parse_heap("[2->4, 4->0]"), parse_assertion("inv(2)"), {}, u, defs));
}

TEST_CASE("Pred operations") {
  Pred a{{parse_heap("[1->0]"), parse_heap("[]")}}, b{{parse_heap("[2->0]")}};
  CHECK(to_string(pred_star(a, b)) == "{[1->0, 2->0], [2->0]}");
  CHECK(pred_intersect(a, b).heaps.empty());
  CHECK(pred_union(a, b).heaps.size() == 3);
  CHECK(pred_subset(b, pred_union(a, b)));
}
}
