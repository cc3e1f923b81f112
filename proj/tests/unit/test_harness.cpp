#include "common.hpp"

using namespace sla;

namespace {

Pred all_heaps(const Universe &u) {
  auto hs = enumerate_heaps(u);
  return Pred{{hs.begin(), hs.end()}};
}

Pred one(const std::string &h) { return Pred{{parse_heap(h)}}; }

// Goes wrong exactly when location 2 is allocated: safe on small heaps only.
Den unsafe_extension() {
  return Den::command([](const Heap &h) { return h.contains(2) ? OutcomeSet::fault() : OutcomeSet::single(h); });
}

// Always writes 1 into location 1, allocating it if absent.
Den fixed_allocator() {
  return Den::command([](const Heap &h) { return OutcomeSet::single(h.with(1, 1)); });
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("disjoint pairs cover every split") {
  Universe u = test::universe(2, 0, 2);
  // Oracle: each location is in h, in h0 or absent, with three values when present.
  size_t expected = 1;
  for (Loc l = 1; l <= u.loc_max; ++l)
    expected *= 1 + 2 * u.values().size();
  auto pairs = disjoint_pairs(u);
  CHECK(pairs.size() == expected);
  for (auto &[h, h0] : pairs)
    CHECK(disjoint(h, h0));
}

TEST_CASE("the constants are safety monotone and frame preserving") {
  Universe u = test::universe(2, 0, 2);
  for (auto &c : {sem_skip(), sem_free(1), sem_write(2, 1), sem_seq(sem_write(1, 0), sem_free(1)),
                  sem_read(1, Den::family([](Val v) { return sem_write(1, v); }))}) {
    CHECK(check_safety_mono(c, u, "c").status == Status::Pass);
    CHECK(check_frame_property(c, u, "c").status == Status::Pass);
  }
  Den alloc = sem_new(Den::family([](Val n) { return sem_free(n); }), u);
  CHECK(check_frame_property(alloc, u, "new").status == Status::Pass);
}

TEST_CASE("a command that fails on larger heaps is caught with a genuine witness") {
  Universe u;
  Den c = unsafe_extension();
  CheckReport r = check_safety_mono(c, u, "violator");
  REQUIRE(r.status == Status::Fail);
  Heap h = parse_heap(r.witness.at("h").get<std::string>());
  Heap h0 = parse_heap(r.witness.at("h0").get<std::string>());
  REQUIRE(disjoint(h, h0));
  CHECK_FALSE(c(h).wrong);
  CHECK(c(*combine(h, h0)).wrong);
  // The textbook pair is a violation too.
  CHECK_FALSE(c(parse_heap("[1->0]")).wrong);
  CHECK(c(parse_heap("[1->0, 2->0]")).wrong);
}

TEST_CASE("an allocator at a fixed address violates the frame property") {
  Universe u = test::universe(2, 0, 2);
  CheckReport r = check_frame_property(fixed_allocator(), u, "alloc");
  REQUIRE(r.status == Status::Fail);
  Heap h0 = parse_heap(r.witness.at("h0").get<std::string>());
  CHECK(h0.contains(1));
  CHECK(check_safety_mono(fixed_allocator(), u, "alloc").status == Status::Pass);
}

TEST_CASE("triple domains") {
  Universe u;
  Pred emp = one("[]");
  TripleObject p1{one("[1->0]"), emp};
  CHECK(in_triple_domain(sem_free(1), p1, emp));
  CHECK(in_triple_domain(sem_free(1), p1, one("[2->3]")));
  CHECK_FALSE(in_triple_domain(sem_free(1), TripleObject{emp, emp}, emp));
  CHECK(in_triple_domain(sem_free(1), p1, one("[1->0]"))); // p*p0 is empty
  CHECK(in_triple_domain(sem_skip(), TripleObject{one("[1->2]"), one("[1->2]")}, all_heaps(u)));
  CHECK(in_triple_domain(sem_write(1, 5), TripleObject{one("[1->0]"), one("[1->5]")}, one("[2->0]")));
  CHECK_FALSE(in_triple_domain(sem_write(1, 5), TripleObject{one("[1->0]"), one("[1->0]")}, emp));
}

TEST_CASE("per equivalence and monotonicity") {
  Universe u = test::universe(2, 0, 2);
  Pred emp = one("[]");
  Pred cell1{};
  for (Val v : u.values())
    cell1.heaps.insert(Heap{}.with(1, v));
  TripleObject t{cell1, one("[1->2]")};
  Den w = sem_write(1, 2);
  Den w2 = sem_seq(sem_write(1, 0), sem_write(1, 2));
  CHECK(per_equiv(w, w2, t, emp, u));
  CHECK(per_equiv(w, w, t, one("[2->1]"), u));
  CHECK_FALSE(per_equiv(w, sem_write(1, 1), t, emp, u));
  std::vector<Pred> pool{emp, one("[2->0]"), one("[2->1]")};
  CHECK(check_per_monotone(t, w, w2, pool, u, "m").status == Status::Pass);
  // Related to itself at emp, but unsafe once location 2 is framed in.
  Den bad = unsafe_extension();
  TripleObject keep{cell1, cell1};
  CHECK(per_equiv(bad, bad, keep, emp, u));
  CHECK_FALSE(per_equiv(bad, bad, keep, one("[2->0]"), u));
  CHECK(check_per_monotone(keep, bad, bad, pool, u, "m").status == Status::Fail);
}

TEST_CASE("distribution holds at precise frames and fails at true") {
  Universe u = test::universe(2, 0, 2);
  CHECK(check_distribution(one("[]"), u, "emp").status == Status::Pass);
  CHECK(check_distribution(one("[2->0]"), u, "2").status == Status::Pass);
  CheckReport r = check_distribution(all_heaps(u), u, "true");
  REQUIRE(r.status == Status::Fail);
  Pred p = one(r.witness.at("p").get<std::string>().substr(1, r.witness.at("p").get<std::string>().size() - 2));
  Pred q = one(r.witness.at("q").get<std::string>().substr(1, r.witness.at("q").get<std::string>().size() - 2));
  Pred top = all_heaps(u);
  Pred heap = one(r.witness.at("heap").get<std::string>());
  CHECK(pred_star(pred_intersect(p, q), top).heaps.empty());
  CHECK(pred_subset(heap, pred_intersect(pred_star(p, top), pred_star(q, top))));
}

TEST_CASE("con laws on concrete commands") {
  Universe u = test::universe(2, 0, 2);
  Pred emp = one("[]");
  TripleObject t1{one("[1->0]"), one("[1->2]")}, t2{one("[1->0]"), one("[1->2]")};
  CHECK(check_con_laws(sem_write(1, 2), sem_write(1, 2), t1, t2, emp, u, "c").status == Status::Pass);
  CHECK(check_con_laws(sem_write(1, 2), sem_write(1, 2), t1, t2, one("[2->1]"), u, "c").status == Status::Pass);
}

TEST_CASE("padding preserves typing and meaning") {
  auto p = test::load("dlist.sla");
  const Derivation &d = test::def(p, "dlist");
  TermPtr padded = pad_term(d);
  CHECK(to_string(padded).size() > to_string(d.term).size());
  Model m = Model::bounded(Universe{}, p.defs);
  SubtypeContext sub(m, Mode::Precise);
  Derivation d2 = check_term(p.gamma, p.delta, padded, d.type, sub);
  CHECK(derivation_size(d2) > derivation_size(d));
  CHECK(check_coherence(d, d2, p, Universe{}, "dlist").status == Status::Pass);
}

TEST_CASE("exit codes and report rendering") {
  std::vector<CheckReport> rs{{"a"}, {"b", Status::Inconclusive}};
  CHECK(exit_code(rs) == 2);
  rs.push_back({"c", Status::Fail, {{"h", "[]"}}, 3});
  CHECK(exit_code(rs) == 1);
  CHECK(exit_code({{"a"}}) == 0);
  CheckReport r{"c", Status::Fail, {{"h", "[]"}}, 3};
  r.elapsed_ms = 12.5;
  CHECK(to_json(r, false).dump() == R"({"cases":3,"check":"c","status":"fail","witness":{"h":"[]"}})");
  CHECK(to_json(r, true).contains("elapsed_ms"));
  CHECK_FALSE(to_json(CheckReport{"a"}, false).contains("witness"));
}

TEST_CASE("suites are named and validated") {
  HarnessConfig cfg;
  cfg.corpus_dir = test::corpus;
  CHECK_THROWS_WITH(run_suite("nope", cfg), doctest::Contains("unknown suite"));
  cfg.corpus_dir = test::corpus / "missing";
  CHECK_THROWS(run_suite("soundness", cfg));
  auto names = suite_names();
  CHECK(std::find(names.begin(), names.end(), "comm-laws") != names.end());
}

TEST_CASE("suite output is deterministic") {
  HarnessConfig cfg;
  cfg.corpus_dir = test::corpus;
  auto render = [&] {
    std::string s;
    for (auto &r : run_suite("normalize", cfg))
      s += to_json(r, false).dump() + "\n";
    return s;
  };
  std::string a = render();
  CHECK_FALSE(a.empty());
  CHECK(a == render());
}

TEST_CASE("a custom pool replaces the base frames") {
  HarnessConfig cfg;
  cfg.corpus_dir = test::corpus;
  cfg.pool = std::vector<AssertionPtr>{parse_assertion("emp")};
  for (auto &r : run_suite("triples", cfg))
    CHECK_MESSAGE(r.status == Status::Pass, r.check);
}
}
