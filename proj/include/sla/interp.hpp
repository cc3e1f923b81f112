#pragma once

#include "sla/typecheck.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace sla {

using CommandFn = std::function<OutcomeSet(const Heap &)>;

// Standard meaning of a type: commands at triples, functions at arrows,
// integer-indexed families at pi types. Invariants are ignored.
class Den {
public:
  enum class Kind { Command, Func, IntFamily };

  // Commands and families cache their results; the cache is invisible.
  static Den command(CommandFn c);
  static Den func(std::function<Den(const Den &)> f);
  static Den family(std::function<Den(Val)> f);
  // Least element at the shape of t: the command with no outcomes.
  static Den bottom(const TypePtr &t);

  Kind kind() const;
  OutcomeSet operator()(const Heap &h) const;
  Den apply(const Den &arg) const;
  Den at(Val n) const;

private:
  struct Impl;
  explicit Den(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

using DenEnv = std::map<std::string, Den>;

Den sem_skip();
Den sem_seq(const Den &c1, const Den &c2);
// Fresh n ranges over 1..locMax outside dom(h), initial contents over vals.
Den sem_new(const Den &family, const Universe &u);
Den sem_read(Val m, const Den &family);
Den sem_free(Val m);
Den sem_write(Val m, Val v);
// wrong if either goes wrong; otherwise the common outcomes.
Den sem_con(const Den &c1, const Den &c2);

// Strips invariants: the shape the standard semantics sees.
TypePtr den_shape(const TypePtr &t);

// A non-bottom element at every shape: skip at triples.
Den skip_at(const TypePtr &t);

// Equality at every observation point: every universe heap at triples,
// every value at pi, bottom and skip arguments at arrows.
bool den_equal(const Den &a, const Den &b, const TypePtr &shape, const Universe &u);

struct FixStats {
  std::atomic<bool> approximate{false};
  std::atomic<int> fixpoints{0};
  std::atomic<int> max_iterations{0};
};

struct FixResult {
  Den den;
  bool converged = false;
  int iterations = 0; // iterates that differed from their predecessor
};

// Kleene iteration from bottom; at most u.fix_budget applications of f.
FixResult lfix(const Den &f, const TypePtr &shape, const Universe &u);

class Interpreter {
public:
  explicit Interpreter(Universe u) : u_(u), stats_(std::make_shared<FixStats>()) {}

  // The result refers into d, which must outlive it.
  Den interp(const Derivation &d, const Env &eta, const DenEnv &rho) const;

  const Universe &universe() const { return u_; }
  bool approximate() const { return stats_->approximate; }
  const FixStats &stats() const { return *stats_; }

private:
  Universe u_;
  std::shared_ptr<FixStats> stats_;
};

struct ProgramDens {
  DenEnv rho; // one entry per def
  std::optional<Den> goal;
};

// Interprets defs in order; a bare context entry has no denotation and must
// not be used by later code that gets run.
ProgramDens interpret_program(const CheckedProgram &p, const Interpreter &in, const Env &eta);

struct RunResult {
  OutcomeSet outcomes;
  bool approximate = false;
};

// Runs the goal, or the named def, on h. env binds Delta and the leading pi
// binders by name; the universe is widened to cover h and env.
RunResult run_program(const CheckedProgram &p, const std::string &def, const Env &env, const Heap &h,
                      const Universe &u);

// The smallest widening of u that covers the heap and stack values.
Universe widen_for(const Universe &u, const Heap &h, const Env &eta);

} // namespace sla
