#include "common.hpp"

using namespace sla;

TEST_SUITE("interp") {

TEST_CASE("allocation ranges over free cells and initial values") {
  Den skipfam = Den::family([](Val) { return sem_skip(); });
  // sem_new does not validate, so a universe narrower than its locations is fine here.
  Universe u = test::universe(2, 0, 1);
  OutcomeSet oracle;
  for (Loc n = 1; n <= u.loc_max; ++n)
    for (Val v = u.val_min; v <= u.val_max; ++v)
      oracle.heaps.insert(Heap{}.with(n, v));
  CHECK(sem_new(skipfam, u)(Heap{}) == oracle);
  CHECK(to_string(oracle) == "{[1->0], [1->1], [2->0], [2->1]}");
  CHECK(test::outcomes(sem_new(skipfam, test::universe(2, 0, 2)), "[2->1]") ==
        "{[1->0, 2->1], [1->1, 2->1], [1->2, 2->1]}");
  CHECK(test::outcomes(sem_new(skipfam, u), "[1->0, 2->0]") == "{}");
}

TEST_CASE("the six constants") {
  CHECK(test::outcomes(sem_skip(), "[1->0]") == "{[1->0]}");
  CHECK(test::outcomes(sem_free(1), "[1->0, 2->3]") == "{[2->3]}");
  CHECK(test::outcomes(sem_free(1), "[2->3]") == "{WRONG}");
  CHECK(test::outcomes(sem_write(1, 4), "[1->0]") == "{[1->4]}");
  CHECK(test::outcomes(sem_write(2, 4), "[1->0]") == "{WRONG}");
  Den rd = sem_read(2, Den::family([](Val n) { return sem_write(1, n); }));
  CHECK(test::outcomes(rd, "[1->0, 2->9]") == "{[1->9, 2->9]}");
  CHECK(test::outcomes(rd, "[1->0]") == "{WRONG}");
  CHECK(test::outcomes(sem_seq(sem_free(1), sem_free(1)), "[1->0]") == "{WRONG}");
  CHECK(test::outcomes(sem_seq(sem_write(1, 2), sem_free(1)), "[1->0]") == "{[]}");
}

TEST_CASE("conjunction of commands") {
  Den a = Den::command([](const Heap &) { return parse_outcomes("{[1->5]}"); });
  Den b = Den::command([](const Heap &) { return parse_outcomes("{[1->5], [1->6]}"); });
  Den w = Den::command([](const Heap &) { return parse_outcomes("{[1->5], WRONG}"); });
  CHECK(test::outcomes(sem_con(a, b), "[]") == "{[1->5]}");
  CHECK(test::outcomes(sem_con(a, w), "[]") == "{[1->5], WRONG}");
  CHECK(test::outcomes(sem_con(sem_skip(), sem_skip()), "[1->1]") == "{[1->1]}");
}

TEST_CASE("dlist disposes of lists") {
  auto p = test::load("dlist.sla");
  for (const char *h : {"[1->0]", "[1->2, 2->3, 3->0]", "[1->3, 3->0, 2->1]"}) {
    RunResult r = run_program(p, "", {{"i", 1}}, parse_heap(h), Universe{});
    CHECK_FALSE(r.approximate);
    // Cells outside the list stay put.
    Heap rest = parse_heap(h);
    for (Val i = 1; i != 0;) {
      Val next = *rest.get(i);
      rest = rest.without(i);
      i = next;
    }
    CHECK(r.outcomes == OutcomeSet::single(rest));
  }
  CHECK(to_string(run_program(p, "", {{"i", 0}}, Heap{}, Universe{}).outcomes) == "{[]}");
  CHECK(to_string(run_program(p, "", {{"i", 1}}, parse_heap("[1->2]"), Universe{}).outcomes) == "{WRONG}");
}

TEST_CASE("the fixpoint converges quickly and reports exhaustion") {
  auto p = test::load("dlist.sla");
  Interpreter in(Universe{});
  ProgramDens d = interpret_program(p, in, {});
  CHECK(to_string(d.rho.at("dlist").at(1)(parse_heap("[1->0]"))) == "{[]}");
  CHECK_FALSE(in.approximate());
  CHECK(in.stats().max_iterations == 4);
  Universe tight;
  tight.fix_budget = 2;
  RunResult r = run_program(p, "", {{"i", 1}}, parse_heap("[1->2, 2->3, 3->0]"), tight);
  CHECK(r.approximate);
  CHECK(to_string(r.outcomes) == "{}");
}

TEST_CASE("least fixpoint of a constant function") {
  TypePtr t = parse_type("{emp}-{emp}");
  FixResult r = lfix(Den::func([](const Den &) { return sem_skip(); }), t, Universe{});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(den_equal(r.den, sem_skip(), t, Universe{}));
}

TEST_CASE("allocation decides which write happens") {
  auto p = test::load("alloc_choice.sla");
  CHECK(to_string(run_program(p, "", {}, parse_heap("[1->0]"), Universe{}).outcomes) == "{[1->5], [1->6]}");
  CHECK(to_string(run_program(p, "", {}, parse_heap("[1->0, 2->0]"), Universe{}).outcomes) == "{[1->6, 2->0]}");
}

TEST_CASE("client linked with mfree pushes the cell onto the free list") {
  auto p = test::load("client_mfree.sla");
  CHECK(to_string(run_program(p, "", {{"j", 1}, {"l", 2}}, parse_heap("[1->0, 2->0]"), Universe{}).outcomes) ==
        "{[1->0, 2->1]}");
  CHECK(to_string(run_program(p, "", {{"j", 1}, {"l", 2}}, parse_heap("[1->0, 2->3, 3->0]"), Universe{}).outcomes) ==
        "{[1->3, 2->1, 3->0]}");
}

TEST_CASE("runs widen the universe to cover the input") {
  auto p = test::load("alloc_choice.sla");
  RunResult r = run_program(p, "", {}, parse_heap("[1->9]"), Universe{});
  CHECK(to_string(r.outcomes) == "{[1->5], [1->6]}");
  Universe w = widen_for(Universe{}, parse_heap("[5->9]"), {{"i", -1}});
  CHECK(w.loc_max == 5);
  CHECK(w.val_max == 9);
  CHECK(w.val_min == -1);
}

TEST_CASE("denotation equality observes arrows through bottom and skip") {
  TypePtr t = parse_type("{emp}-{emp} -> {emp}-{emp}");
  Den id = Den::func([](const Den &c) { return c; });
  Den const_skip = Den::func([](const Den &) { return sem_skip(); });
  CHECK(den_equal(id, id, t, Universe{}));
  CHECK_FALSE(den_equal(id, const_skip, t, Universe{}));
  CHECK(den_shape(parse_type("{emp}-{emp} @ 1 |-> 0"))->kind == TypeExpr::Kind::Triple);
}
}
