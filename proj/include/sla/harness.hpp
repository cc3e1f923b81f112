#pragma once

#include "sla/interp.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sla {

enum class Status { Pass, Fail, Inconclusive };

std::string to_string(Status s);

struct CheckReport {
  CheckReport(std::string name = {}, Status s = Status::Pass, nlohmann::json w = {}, size_t n = 0)
      : check(std::move(name)), status(s), witness(std::move(w)), cases(n) {}

  std::string check;
  Status status = Status::Pass;
  nlohmann::json witness; // null when there is nothing to show
  size_t cases = 0;       // quantified instances examined
  double elapsed_ms = 0;
};

// One JSON object per report; elapsed_ms only when timing is requested.
nlohmann::json to_json(const CheckReport &r, bool timing);

// Semantic triple object [p, q] over explicit heap sets.
struct TripleObject {
  Pred p, q;
};

// Pairs (h, h0) of disjoint universe heaps.
std::vector<std::pair<Heap, Heap>> disjoint_pairs(const Universe &u);

// wrong in c(h . h0) implies wrong in c(h).
CheckReport check_safety_mono(const Den &c, const Universe &u, const std::string &name);
// wrong not in c(h) implies c(h . h0) is contained in c(h) . h0.
CheckReport check_frame_property(const Den &c, const Universe &u, const std::string &name);

// Every h in p*p0 runs safely into q*p0.
bool in_triple_domain(const Den &c, const TripleObject &t, const Pred &p0);
// Both in the domain at p0, and equal on every universe heap in p*p0*true.
bool per_equiv(const Den &c, const Den &c2, const TripleObject &t, const Pred &p0, const Universe &u);
// per_equiv at p0 implies per_equiv at p0*q0, for all p0, q0 in the pool.
CheckReport check_per_monotone(const TripleObject &t, const Den &c, const Den &c2, const std::vector<Pred> &pool,
                               const Universe &u, const std::string &name);
// Conjunction of commands in the two domains lands in the intersected one.
CheckReport check_con_laws(const Den &c, const Den &c2, const TripleObject &t1, const TripleObject &t2,
                           const Pred &r, const Universe &u, const std::string &name);
// (p & q) * r = p*r & q*r for every pair of singleton predicates.
CheckReport check_distribution(const Pred &r, const Universe &u, const std::string &name);

// Equal denotations for two derivations of one judgment, at every env.
CheckReport check_coherence(const Derivation &d1, const Derivation &d2, const CheckedProgram &p,
                            const Universe &u, const std::string &name);

struct HarnessConfig {
  Universe universe;
  Mode mode = Mode::Precise;
  // Frame pool base; per-file frame and invariant assertions are added.
  std::optional<std::vector<AssertionPtr>> pool;
  bool imprecise_demo = false;
  std::filesystem::path corpus_dir;
};

const std::vector<std::string> &suite_names(); // without "all"

// Throws SlaError on an unknown suite or an unreadable corpus.
std::vector<CheckReport> run_suite(const std::string &suite, const HarnessConfig &cfg);

// 0 all pass, 1 any failure, 2 inconclusive without failures.
int exit_code(const std::vector<CheckReport> &reports);

// Inserts (M : T) as T by (refl) around every subterm of the derivation.
TermPtr pad_term(const Derivation &d);

} // namespace sla
