#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sla {

using Val = std::int64_t;
using VarSet = std::set<std::string>;

struct SourcePos {
  int line = 0;
  int column = 0;
};

class SlaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public SlaError {
public:
  ParseError(const std::string &msg, SourcePos pos)
      : SlaError(std::to_string(pos.line) + ":" + std::to_string(pos.column) +
                 ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

private:
  SourcePos pos_;
};

class HygieneError : public SlaError {
public:
  HygieneError(const std::string &msg, std::string symbol)
      : SlaError(msg), symbol_(std::move(symbol)) {}
  const std::string &symbol() const { return symbol_; }

private:
  std::string symbol_;
};

// ----- expressions -----

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Lit, Add, Sub };
  Kind kind;
  std::string name;
  Val value = 0;
  ExprPtr lhs, rhs;
};

// ----- assertions -----

struct Assertion;
using AssertionPtr = std::shared_ptr<const Assertion>;

struct Assertion {
  enum class Kind {
    Eq,
    PointsTo,
    Emp,
    True,
    Star,
    And,
    Or,
    Not,
    Forall,
    Exists,
    Named
  };
  Kind kind;
  ExprPtr e1, e2;
  // Star/And/Or use both; Not/Forall/Exists keep their body in lhs.
  AssertionPtr lhs, rhs;
  // Quantifier binder or predicate name.
  std::string name;
  std::vector<ExprPtr> args;
};

// ----- types -----

struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

struct TypeExpr {
  enum class Kind { Triple, Otimes, Pi, Arrow };
  Kind kind;
  AssertionPtr pre, post; // Triple
  AssertionPtr inv;       // Otimes
  TypePtr a, b;           // Otimes/Pi body in a; Arrow a -> b
  std::string var;        // Pi binder
};

// ----- subtype scripts -----

// A script is a chain of rewrite steps applied to the source type of a cast.
struct ScriptStep {
  enum class Kind {
    Refl,
    Frame,
    DistTriple,
    DistPi,
    DistOtimes,
    DistArrow,
    UndistTriple,
    UndistPi,
    UndistOtimes,
    UndistArrow,
    Normalize,
    Consequence,
    Arg,
    Res,
    Body,
    Inner,
    Trans,
    Ref
  };
  Kind kind;
  AssertionPtr assertion;          // Frame / UndistTriple / UndistOtimes
  TypePtr target;                  // Consequence with explicit target
  std::vector<ScriptStep> children; // Arg/Res/Body/Inner/Trans
  std::string label;               // Ref to a sidecar script
};
using Script = std::vector<ScriptStep>;

// ----- terms -----

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind {
    Var,
    Lam,
    App,
    LamInt,
    AppInt,
    Fix,
    Ifz,
    Skip,
    Seq,
    New,
    Free,
    Write,
    Read,
    Cast,
    Frame,
    Ascribe,
    Conj
  };
  Kind kind;
  std::string name; // term variable or integer binder
  TypePtr type;     // Lam annotation, Cast target (null means "goal"), Ascribe
  TermPtr m1, m2;
  ExprPtr e1, e2;
  AssertionPtr frame;
  std::optional<Script> script;
  SourcePos pos;
};

// ----- programs -----

struct PredDef {
  std::string name;
  std::vector<std::string> params;
  AssertionPtr body;
};

struct Decl {
  std::string name;
  TypePtr type;
  TermPtr term; // null for a bare context assumption
};

struct Goal {
  TermPtr term;
  TypePtr type;
};

struct Program {
  std::vector<PredDef> preds;
  std::vector<std::string> delta;
  std::vector<Decl> decls;
  std::map<std::string, Script> scripts; // targets of (use name)
  std::optional<Goal> goal;
};

// ----- constructors -----

namespace mk {
ExprPtr var(std::string name);
ExprPtr lit(Val v);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);

AssertionPtr eq(ExprPtr a, ExprPtr b);
AssertionPtr neq(ExprPtr a, ExprPtr b);
AssertionPtr points_to(ExprPtr a, ExprPtr b);
// E |-> - as an existential over a fresh binder.
AssertionPtr points_to_any(ExprPtr a);
AssertionPtr emp();
AssertionPtr truth();
AssertionPtr falsity();
AssertionPtr star(AssertionPtr a, AssertionPtr b);
AssertionPtr conj(AssertionPtr a, AssertionPtr b);
AssertionPtr disj(AssertionPtr a, AssertionPtr b);
AssertionPtr neg(AssertionPtr a);
AssertionPtr forall(std::string v, AssertionPtr body);
AssertionPtr exists(std::string v, AssertionPtr body);
AssertionPtr named(std::string name, std::vector<ExprPtr> args);

TypePtr triple(AssertionPtr pre, AssertionPtr post);
TypePtr otimes(TypePtr t, AssertionPtr inv);
TypePtr pi(std::string v, TypePtr body);
TypePtr arrow(TypePtr a, TypePtr b);

TermPtr var_term(std::string name);
TermPtr lam(std::string x, TypePtr t, TermPtr body);
TermPtr app(TermPtr f, TermPtr arg);
TermPtr lam_int(std::string i, TermPtr body);
TermPtr app_int(TermPtr f, ExprPtr e);
TermPtr fix(TermPtr m);
TermPtr ifz(ExprPtr e, TermPtr then_branch, TermPtr else_branch);
TermPtr skip();
TermPtr seq(TermPtr a, TermPtr b);
TermPtr new_in(std::string i, TermPtr body);
TermPtr free_cell(ExprPtr e);
TermPtr write(ExprPtr loc, ExprPtr val);
TermPtr read_in(std::string i, ExprPtr loc, TermPtr body);
TermPtr cast(TermPtr m, TypePtr target, std::optional<Script> script = {});
TermPtr frame(TermPtr m, AssertionPtr p);
TermPtr ascribe(TermPtr m, TypePtr t);
TermPtr conj_term(TermPtr a, TermPtr b);
} // namespace mk

// Fresh binder names start with '_' and are never produced by the lexer for
// user variables in Delta.
std::string fresh_name(const std::string &hint = "");
bool is_fresh_name(const std::string &s);

// ----- free variables -----

VarSet free_vars(const ExprPtr &e);
VarSet free_vars(const AssertionPtr &p);
VarSet free_vars(const TypePtr &t);
// Integer variables occurring free in a term, including inside annotations.
VarSet free_int_vars(const TermPtr &m);
// Term variables occurring free in a term.
VarSet free_term_vars(const TermPtr &m);
std::set<std::string> named_preds(const AssertionPtr &p);

// ----- substitution (capture-avoiding) -----

ExprPtr subst(const ExprPtr &e, const ExprPtr &by, const std::string &v);
AssertionPtr subst(const AssertionPtr &p, const ExprPtr &by,
                   const std::string &v);
TypePtr subst_type(const TypePtr &t, const ExprPtr &by, const std::string &v);

// ----- equality -----

bool equal(const ExprPtr &a, const ExprPtr &b);
// Alpha-equivalence, treating *, /\ and \/ chains as associative.
bool alpha_equal(const AssertionPtr &a, const AssertionPtr &b);
bool alpha_equal(const TypePtr &a, const TypePtr &b);
// Structural term equality with embedded types compared up to alpha.
bool term_equal(const TermPtr &a, const TermPtr &b);
// Strip Cast/Frame/Ascribe/Conj annotations (Conj keeps its left premise).
TermPtr erase_annotations(const TermPtr &m);

// Flattened operand list of an associative chain of the given kind.
std::vector<AssertionPtr> flatten(const AssertionPtr &p, Assertion::Kind k);
AssertionPtr rebuild(const std::vector<AssertionPtr> &parts, Assertion::Kind k);

// ----- well-formedness and hygiene -----

// Throws SlaError naming the offender.
void well_formed_assertion(const VarSet &delta, const AssertionPtr &p);
void well_formed_type(const VarSet &delta, const TypePtr &t);
// No symbol binds twice in the term, nor is both bound and free.
void check_hygiene(const TermPtr &m, const VarSet &delta = {});

// ----- printing -----

std::string to_string(const ExprPtr &e);
std::string to_string(const AssertionPtr &p);
std::string to_string(const TypePtr &t);
std::string to_string(const TermPtr &m);
std::string to_string(const ScriptStep &s);
std::string to_string(const Script &s);
std::string to_string(const Program &p);

} // namespace sla
