#pragma once

#include "sla/assertion.hpp"
#include "sla/syntax.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sla {

enum class Mode { Precise, Unrestricted };

std::string to_string(Mode m);
Mode parse_mode(const std::string &s);

struct SubtypeStep {
  enum class Rule {
    Refl,
    Trans,
    ArrowStruct,
    PiStruct,
    OtimesStruct,
    Consequence,
    FrameAxiom,
    DistTriple,
    DistPi,
    DistOtimes,
    DistArrow
  };
  Rule rule = Rule::Refl;
  TypePtr source, target;
  AssertionPtr frame;    // FrameAxiom
  bool reversed = false; // Dist*: the right-to-left half of the equivalence
  // Trans: the chain in order. ArrowStruct: {argument (target side to source
  // side), result}. PiStruct/OtimesStruct: {body}.
  std::vector<SubtypeStep> children;
};

std::string rule_name(SubtypeStep::Rule r);
// Number of nodes with the given rule.
size_t count_rule(const SubtypeStep &s, SubtypeStep::Rule r);

class SubtypeError : public SlaError {
public:
  SubtypeError(const std::string &msg, std::optional<Env> env = {}, std::optional<Heap> heap = {})
      : SlaError(msg), env_(std::move(env)), heap_(std::move(heap)) {}
  const std::optional<Env> &env() const { return env_; }
  const std::optional<Heap> &heap() const { return heap_; }

private:
  std::optional<Env> env_;
  std::optional<Heap> heap_;
};

// Semantic oracle for subtyping: bounded entailment and precision, cached.
class SubtypeContext {
public:
  SubtypeContext(PredEnv &model, Mode mode) : model_(model), mode_(mode) {}

  Mode mode() const { return mode_; }
  PredEnv &model() { return model_; }

  EntailResult entails(const VarSet &delta, const AssertionPtr &lhs, const AssertionPtr &rhs);
  PrecisionResult precise(const VarSet &delta, const AssertionPtr &p);

  // Named scripts for `(use label)` steps.
  std::map<std::string, Script> sidecar;

  size_t entailment_checks = 0;

private:
  PredEnv &model_;
  Mode mode_;
  std::map<std::string, EntailResult> entail_cache_;
  std::map<std::string, PrecisionResult> precise_cache_;
};

struct Normalized {
  TypePtr type;
  SubtypeStep proof; // type-in <= type-out, built from dist/struct/refl only
};

// Pushes every invariant inward: triple leaves absorb invariants with *,
// nested invariants fuse first, arrows and pi distribute.
Normalized normalize_otimes(const TypePtr &t, const VarSet &delta);
bool has_otimes(const TypePtr &t);

// theta @ p, gated on precision of p in precise mode.
TypePtr apply_frame(const TypePtr &t, const AssertionPtr &p, const VarSet &delta, SubtypeContext &ctx);

// Without a script: normalize both sides, then compare structurally with
// Consequence at triple leaves. Frames are never inferred.
SubtypeStep check_subtype(const VarSet &delta, const TypePtr &source, const TypePtr &target,
                          SubtypeContext &ctx, const std::optional<Script> &script = {});

// Re-checks every node against its rule schema and side conditions.
void verify_step(const VarSet &delta, const SubtypeStep &s, SubtypeContext &ctx);

// Inverse of a proof built from equivalence rules; throws otherwise.
SubtypeStep reverse_step(const SubtypeStep &s);

} // namespace sla
