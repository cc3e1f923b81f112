// One line per acceptance criterion; exit status 1 if any fails.
// Usage: sla_acceptance <path to sla binary>

#include "sla/harness.hpp"
#include "sla/parser.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace sla;

namespace {

const std::filesystem::path kCorpus = SLA_CORPUS_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;
};

void expect(Outcome &o, bool cond, const std::string &what) {
  if (!cond && o.ok) {
    o.ok = false;
    o.detail = what;
  }
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CheckedProgram load(const std::string &name, Mode mode = Mode::Precise) {
  return check_program(parse_program(slurp(kCorpus / name)), mode, Universe{});
}

const Derivation &def(const CheckedProgram &p, const std::string &name) {
  for (auto &d : p.decls)
    if (d.name == name && d.derivation)
      return *d.derivation;
  throw SlaError("no def " + name);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<CheckReport> suite(const std::string &name, bool demo = false) {
  HarnessConfig cfg;
  cfg.corpus_dir = kCorpus;
  cfg.imprecise_demo = demo;
  return run_suite(name, cfg);
}

const CheckReport *find(const std::vector<CheckReport> &rs, const std::string &check) {
  for (auto &r : rs)
    if (r.check == check)
      return &r;
  return nullptr;
}

void all_pass(Outcome &o, const std::vector<CheckReport> &rs) {
  expect(o, !rs.empty(), "suite produced no reports");
  for (auto &r : rs)
    expect(o, r.status == Status::Pass, r.check + " is " + to_string(r.status) + " " + r.witness.dump());
}

Outcome corpus_replay() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  CheckedProgram dl = load("dlist.sla"), mf = load("mfree.sla"), cl = load("client.sla"),
                 cm = load("client_mfree.sla");
  expect(o, rule_skeleton(def(dl, "dlist")) ==
                "fix(lam(lamInt(ifz(subsume(skip), subsume(read(seq(subsume(appInt(var)), subsume(free))))))))",
         "dlist skeleton");
  const std::string mfree = "subsume(lam(lamInt(seq(subsume(appInt(var)), subsume(read(ifz(subsume(free), "
                            "subsume(read(subsume(seq(subsume(write), subsume(write))))))))))))";
  expect(o, rule_skeleton(def(mf, "Mfree")) == mfree, "Mfree skeleton");
  expect(o, rule_skeleton(def(cm, "Mfree")) == mfree, "Mfree skeleton in the linked file");
  expect(o, rule_skeleton(def(cl, "client")) == "lam(appInt(app(var, lamInt(subsume(read(subsume(write)))))))",
         "client skeleton");
  expect(o, cm.goal && rule_skeleton(*cm.goal) == "app(subsume(var), var)", "linked goal skeleton");
  expect(o, cm.goal && to_string(cm.goal->type) == "{j |-> - * inv(l)}-{inv(l)}", "linked goal type");
  expect(o, cm.delta == VarSet{"j", "l"}, "linked goal stack context");
  if (cm.goal) {
    const SubtypeStep &s = *cm.goal->children.at(0).subtype;
    expect(o, count_rule(s, SubtypeStep::Rule::FrameAxiom) == 1, "one frame axiom in the client cast");
    expect(o, count_rule(s, SubtypeStep::Rule::DistArrow) >= 1, "arrow distribution in the client cast");
  }
  double t = seconds_since(t0);
  expect(o, t < 5, "took " + std::to_string(t) + " s");
  o.detail = o.ok ? "4 corpus judgments match, " + std::to_string(t) + " s" : o.detail;
  return o;
}

Outcome comm_laws() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto rs = suite("comm-laws");
  double t = seconds_since(t0);
  all_pass(o, rs);
  for (const char *c : {"skip", "seq(", "new(", "read(", "free(", "write("}) {
    bool seen = false;
    for (auto &r : rs)
      seen |= r.check.rfind(std::string("comm-laws/frame/") + c, 0) == 0;
    expect(o, seen, std::string("no frame check for ") + c);
  }
  size_t pairs = 0;
  for (auto &r : rs)
    pairs += r.cases;
  expect(o, t < 60, "took " + std::to_string(t) + " s");
  if (o.ok)
    o.detail = std::to_string(rs.size()) + " checks, " + std::to_string(pairs) + " (h, h0) cases, " +
               std::to_string(t) + " s";
  return o;
}

Outcome alloc_choice() {
  Outcome o;
  CheckedProgram p = load("alloc_choice.sla");
  std::string small = to_string(run_program(p, "", {}, parse_heap("[1->0]"), Universe{}).outcomes);
  std::string big = to_string(run_program(p, "", {}, parse_heap("[1->0, 2->0]"), Universe{}).outcomes);
  expect(o, small == "{[1->5], [1->6]}", "on [1->0]: " + small);
  expect(o, big == "{[1->6, 2->0]}", "on [1->0, 2->0]: " + big);
  if (o.ok)
    o.detail = small + " vs " + big;
  return o;
}

Outcome soundness() {
  Outcome o;
  auto rs = suite("soundness");
  all_pass(o, rs);
  size_t heaps = 0;
  for (auto &r : rs)
    heaps += r.cases;
  if (o.ok)
    o.detail = std::to_string(heaps) + " initial heaps across " + std::to_string(rs.size()) + " files";
  return o;
}

Outcome precision_gate() {
  Outcome o;
  Program preds = parse_program("pred lst(i) := (i = 0 /\\ emp) \\/ (exists j. i |-> j * lst(j));\n"
                                "pred inv(l) := exists l'. l |-> l' * lst(l');");
  Model m = Model::bounded(Universe{}, std::make_shared<const PredDefs>(preds.preds));
  VarSet d{"i", "j", "l"};
  expect(o, is_precise(d, parse_assertion("emp"), m).precise, "emp");
  expect(o, is_precise(d, parse_assertion("i |-> j"), m).precise, "i |-> j");
  expect(o, is_precise(d, parse_assertion("inv(l)"), m).precise, "inv(l)");
  PrecisionResult t = is_precise(d, parse_assertion("true"), m);
  expect(o, !t.precise && t.subheaps.size() == 2, "true must be imprecise with two subheaps");
  bool rejected = false;
  try {
    load("mode/frame_true.sla", Mode::Precise);
  } catch (const TypeError &e) {
    rejected = std::string(e.what()).find("not precise") != std::string::npos;
  }
  expect(o, rejected, "precise mode must reject frame(M, true)");
  try {
    load("mode/frame_true.sla", Mode::Unrestricted);
  } catch (const SlaError &e) {
    expect(o, false, std::string("unrestricted mode rejected frame(M, true): ") + e.what());
  }
  bool conj_rejected = false;
  try {
    load("mode/conj.sla", Mode::Unrestricted);
  } catch (const TypeError &) {
    conj_rejected = true;
  }
  expect(o, conj_rejected, "unrestricted mode must reject conjunction");
  try {
    load("mode/conj.sla", Mode::Precise);
  } catch (const SlaError &e) {
    expect(o, false, std::string("precise mode rejected conjunction: ") + e.what());
  }
  if (o.ok)
    o.detail = "true: heap " + to_string(t.heap) + " has " + to_string(t.subheaps[0]) + " and " +
               to_string(t.subheaps[1]);
  return o;
}

Outcome con_laws() {
  Outcome o;
  auto rs = suite("con");
  all_pass(o, rs);
  const CheckReport *idem = find(rs, "con/idempotent"), *cover = find(rs, "con/transfer-coverage"),
                    *counter = find(rs, "con/distribution-fails-at-true");
  expect(o, idem != nullptr, "idempotence check missing");
  expect(o, cover && cover->cases >= 10, "fewer than 10 transfer cases");
  for (const char *r : {"emp", "1 |-> -", "2 |-> 0"})
    expect(o, find(rs, std::string("con/distribution/") + r) != nullptr, std::string("no distribution at ") + r);
  expect(o, counter && counter->witness.value("p", "") == "{[1->1]}" &&
                counter->witness.value("q", "") == "{[1->1, 2->2]}" && counter->witness.value("left", "") == "{}",
         "counterexample at r = true");
  auto demo = suite("con", true);
  const CheckReport *shown = find(demo, "con/distribution/true");
  expect(o, shown && shown->status == Status::Fail, "--imprecise-demo must report the failure");
  if (o.ok)
    o.detail = std::to_string(cover->cases) + " transfer cases; r = true fails at p = {[1->1]}, q = {[1->1, 2->2]}";
  return o;
}

Outcome coherence() {
  Outcome o;
  auto rs = suite("coherence");
  all_pass(o, rs);
  size_t judgments = 0;
  for (auto &r : rs)
    judgments += r.check != "coherence/coverage";
  expect(o, judgments >= 5, "fewer than 5 judgments");
  if (o.ok)
    o.detail = std::to_string(judgments) + " padded/plain pairs agree";
  return o;
}

Outcome normalization() {
  Outcome o;
  auto rs = suite("normalize");
  all_pass(o, rs);
  size_t n = 0;
  for (auto &r : rs)
    n += r.cases;
  if (o.ok)
    o.detail = std::to_string(n) + " (type, env) leaf comparisons";
  return o;
}

std::string capture(const std::string &cmd) {
  std::string out;
  FILE *f = popen(cmd.c_str(), "r");
  if (!f)
    return out;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0)
    out.append(buf.data(), n);
  pclose(f);
  return out;
}

Outcome determinism(const std::string &exe) {
  Outcome o;
  if (exe.empty()) {
    expect(o, false, "no sla binary given");
    return o;
  }
  std::string cmd = "'" + exe + "' harness all 2>/dev/null";
  std::string a = capture(cmd), b = capture(cmd);
  expect(o, !a.empty(), "harness printed nothing");
  expect(o, a == b, "outputs differ");
  if (o.ok)
    o.detail = std::to_string(a.size()) + " identical bytes";
  return o;
}

} // namespace

int main(int argc, char **argv) {
  std::string exe = argc > 1 ? argv[1] : "";
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"corpus replay", corpus_replay},
      {"comm laws", comm_laws},
      {"allocation choice outcomes", alloc_choice},
      {"soundness suite", soundness},
      {"precision gate", precision_gate},
      {"con laws", con_laws},
      {"coherence differential", coherence},
      {"normalization soundness", normalization},
      {"determinism", [&] { return determinism(exe); }},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed ? 1 : 0;
}
