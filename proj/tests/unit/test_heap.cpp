#include "common.hpp"

using namespace sla;

TEST_SUITE("heap") {

// Independent count: each location is absent or holds one of the values.
size_t count_heaps(Loc loc_max, Val lo, Val hi) {
  size_t n = 1;
  for (Loc l = 0; l < loc_max; ++l)
    n *= static_cast<size_t>(hi - lo + 2);
  return n;
}

TEST_CASE("enumeration size matches the closed form") {
  CHECK(enumerate_heaps(test::universe(2, 0, 2)).size() == 16);
  CHECK(enumerate_heaps(test::universe(2, 0, 2)).size() == count_heaps(2, 0, 2));
  CHECK(enumerate_heaps(test::universe(3, 0, 3)).size() == count_heaps(3, 0, 3));
  CHECK(enumerate_heaps(test::universe(3, 0, 3)).size() == 125);
  CHECK(enumerate_heaps(test::universe(1, 0, 1)).size() == 3);
  CHECK(enumerate_envs({"i", "j"}, test::universe(2, 0, 2)).size() == 9);
  CHECK(enumerate_envs({}, test::universe(2, 0, 2)).size() == 1);
}

TEST_CASE("enumeration is sorted, duplicate-free and within bounds") {
  auto hs = enumerate_heaps(test::universe(3, 0, 3));
  CHECK(std::is_sorted(hs.begin(), hs.end()));
  CHECK(std::adjacent_find(hs.begin(), hs.end()) == hs.end());
  for (auto &h : hs)
    for (auto &[l, v] : h.cells()) {
      CHECK(l >= 1);
      CHECK(l <= 3);
      CHECK(v >= 0);
      CHECK(v <= 3);
    }
}

TEST_CASE("the cap refuses oversized universes") {
  Universe u = test::universe(3, 0, 3);
  u.cap = 10;
  CHECK_THROWS_AS(enumerate_heaps(u), CapError);
}

TEST_CASE("universe validation") {
  CHECK_THROWS(test::universe(0, 0, 3).validate());
  CHECK_THROWS(test::universe(3, 1, 3).validate());
  CHECK_THROWS(test::universe(3, 0, 2).validate());
  CHECK_NOTHROW(test::universe(3, -2, 3).validate());
}

TEST_CASE("combination and subheaps") {
  Heap a = parse_heap("[1->5]"), b = parse_heap("[2->0]");
  CHECK(disjoint(a, b));
  CHECK(to_string(*combine(a, b)) == "[1->5, 2->0]");
  CHECK_FALSE(combine(a, a));
  Heap h = parse_heap("[1->0, 2->1, 3->2]");
  auto subs = subheaps(h);
  CHECK(subs.size() == 8);
  for (auto &s : subs) {
    Heap rest = difference(h, s);
    CHECK(disjoint(s, rest));
    CHECK(*combine(s, rest) == h);
  }
}

TEST_CASE("printing and parsing are inverse and canonical") {
  CHECK(to_string(Heap{}) == "[]");
  CHECK(to_string(parse_heap("[2->0,1->5]")) == "[1->5, 2->0]");
  OutcomeSet o = parse_outcomes("{[1->6], WRONG, [1->5]}");
  CHECK(o.wrong);
  CHECK(to_string(o) == "{[1->5], [1->6], WRONG}");
  CHECK(to_string(parse_outcomes("{}")) == "{}");
  CHECK(to_string(parse_env("i=1, j=-2")) == "i=1, j=-2");
  CHECK_THROWS(parse_heap("[1->0, 1->2]"));
  CHECK_THROWS(parse_heap("[0->1]"));
  CHECK_THROWS(parse_env("i=1, i=2"));
}

TEST_CASE("arithmetic is checked") {
  Val big = std::numeric_limits<Val>::max();
  CHECK(checked_add(2, 3) == 5);
  CHECK_THROWS_AS(checked_add(big, 1), EvalError);
  CHECK_THROWS_AS(checked_sub(std::numeric_limits<Val>::min(), 1), EvalError);
  CHECK(eval_expr(parse_expr("i + 2 - j"), {{"i", 5}, {"j", 1}}) == 6);
  CHECK_THROWS(eval_expr(parse_expr("k"), {}));
}

TEST_CASE("heap updates") {
  Heap h = parse_heap("[1->0]");
  CHECK(to_string(h.with(1, 4)) == "[1->4]");
  CHECK(to_string(h.with(3, 1)) == "[1->0, 3->1]");
  CHECK(h.without(1).empty());
  CHECK(h.get(1) == 0);
  CHECK_FALSE(h.get(2));
}
}
