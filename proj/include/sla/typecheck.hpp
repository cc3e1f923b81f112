#pragma once

#include "sla/subtype.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sla {

// Ordered term context; identifiers are distinct.
class TypeContext {
public:
  using Entry = std::pair<std::string, TypePtr>;

  const std::vector<Entry> &entries() const { return entries_; }
  const TypePtr *find(const std::string &x) const;
  TypeContext with(const std::string &x, TypePtr t) const;
  VarSet free_int_vars() const;

private:
  std::vector<Entry> entries_;
};

using ContextPtr = std::shared_ptr<const TypeContext>;

class TypeError : public SlaError {
public:
  TypeError(const std::string &msg, SourcePos pos = {}, std::optional<Env> env = {}, std::optional<Heap> heap = {})
      : SlaError(pos.line ? std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg : msg),
        pos_(pos), env_(std::move(env)), heap_(std::move(heap)) {}
  SourcePos pos() const { return pos_; }
  const std::optional<Env> &env() const { return env_; }
  const std::optional<Heap> &heap() const { return heap_; }

private:
  SourcePos pos_;
  std::optional<Env> env_;
  std::optional<Heap> heap_;
};

struct Derivation {
  // var lam app lamInt appInt fix ifz skip seq new free write read subsume conj
  std::string rule;
  ContextPtr ctx;
  VarSet delta;
  TermPtr term;
  TypePtr type;
  std::vector<Derivation> children;
  std::optional<SubtypeStep> subtype; // subsume only
  std::vector<std::string> side_conditions;
};

class TypeChecker {
public:
  explicit TypeChecker(SubtypeContext &ctx) : sub_(ctx) {}

  Derivation check(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, const TypePtr &t);
  std::optional<Derivation> synth(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m);

  // Well-formedness plus, in precise mode, precision of every invariant.
  void check_annotation(const VarSet &delta, const TypePtr &t, SourcePos pos = {});

  SubtypeContext &subtypes() { return sub_; }

private:
  Derivation check_read(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, const TypePtr &t);
  Derivation subsume(Derivation inner, const VarSet &delta, const TermPtr &m, const TypePtr &target,
                     const std::optional<Script> &script);
  [[noreturn]] void fail(const TermPtr &m, const std::string &msg);

  SubtypeContext &sub_;
};

Derivation check_term(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, const TypePtr &t,
                      SubtypeContext &ctx);

// Re-checks every node against its rule schema, recomputing side conditions.
void verify_derivation(const Derivation &d, SubtypeContext &ctx);

size_t derivation_size(const Derivation &d);
// Rule tags in preorder, with subtyping rules below subsume nodes omitted.
std::vector<std::string> rule_tags(const Derivation &d);
// Compact "rule(child, child)" rendering of the rule skeleton.
std::string rule_skeleton(const Derivation &d);

struct CheckedDecl {
  std::string name;
  TypePtr type;
  std::optional<Derivation> derivation; // absent for bare context entries
};

struct CheckedProgram {
  Program program;
  std::shared_ptr<const PredDefs> defs;
  VarSet delta;
  std::vector<CheckedDecl> decls;
  ContextPtr gamma;
  std::optional<Derivation> goal;
};

// Checks every def and the goal in order; later entries see earlier ones.
CheckedProgram check_program(const Program &p, Mode mode, const Universe &u);

} // namespace sla
