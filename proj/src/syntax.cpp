#include "sla/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <sstream>
#include <utility>

namespace sla {

namespace mk {

ExprPtr var(std::string name) {
  return std::make_shared<Expr>(Expr{Expr::Kind::Var, std::move(name), 0, {}, {}});
}
ExprPtr lit(Val v) { return std::make_shared<Expr>(Expr{Expr::Kind::Lit, {}, v, {}, {}}); }
ExprPtr add(ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{Expr::Kind::Add, {}, 0, std::move(a), std::move(b)});
}
ExprPtr sub(ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{Expr::Kind::Sub, {}, 0, std::move(a), std::move(b)});
}

namespace {
AssertionPtr node(Assertion::Kind k) {
  auto a = std::make_shared<Assertion>();
  a->kind = k;
  return a;
}
} // namespace

AssertionPtr eq(ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<Assertion>();
  n->kind = Assertion::Kind::Eq;
  n->e1 = std::move(a);
  n->e2 = std::move(b);
  return n;
}
AssertionPtr neq(ExprPtr a, ExprPtr b) { return neg(eq(std::move(a), std::move(b))); }
AssertionPtr points_to(ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<Assertion>();
  n->kind = Assertion::Kind::PointsTo;
  n->e1 = std::move(a);
  n->e2 = std::move(b);
  return n;
}
AssertionPtr points_to_any(ExprPtr a) {
  auto v = fresh_name();
  return exists(v, points_to(std::move(a), var(v)));
}
AssertionPtr emp() { return node(Assertion::Kind::Emp); }
AssertionPtr truth() { return node(Assertion::Kind::True); }
AssertionPtr falsity() { return neg(truth()); }

namespace {
AssertionPtr binary(Assertion::Kind k, AssertionPtr a, AssertionPtr b) {
  auto n = std::make_shared<Assertion>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
AssertionPtr binder(Assertion::Kind k, std::string v, AssertionPtr body) {
  auto n = std::make_shared<Assertion>();
  n->kind = k;
  n->name = std::move(v);
  n->lhs = std::move(body);
  return n;
}
} // namespace

AssertionPtr star(AssertionPtr a, AssertionPtr b) {
  return binary(Assertion::Kind::Star, std::move(a), std::move(b));
}
AssertionPtr conj(AssertionPtr a, AssertionPtr b) {
  return binary(Assertion::Kind::And, std::move(a), std::move(b));
}
AssertionPtr disj(AssertionPtr a, AssertionPtr b) {
  return binary(Assertion::Kind::Or, std::move(a), std::move(b));
}
AssertionPtr neg(AssertionPtr a) {
  auto n = std::make_shared<Assertion>();
  n->kind = Assertion::Kind::Not;
  n->lhs = std::move(a);
  return n;
}
AssertionPtr forall(std::string v, AssertionPtr body) {
  return binder(Assertion::Kind::Forall, std::move(v), std::move(body));
}
AssertionPtr exists(std::string v, AssertionPtr body) {
  return binder(Assertion::Kind::Exists, std::move(v), std::move(body));
}
AssertionPtr named(std::string name, std::vector<ExprPtr> args) {
  auto n = std::make_shared<Assertion>();
  n->kind = Assertion::Kind::Named;
  n->name = std::move(name);
  n->args = std::move(args);
  return n;
}

TypePtr triple(AssertionPtr pre, AssertionPtr post) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Triple;
  t->pre = std::move(pre);
  t->post = std::move(post);
  return t;
}
TypePtr otimes(TypePtr body, AssertionPtr inv) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Otimes;
  t->a = std::move(body);
  t->inv = std::move(inv);
  return t;
}
TypePtr pi(std::string v, TypePtr body) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Pi;
  t->var = std::move(v);
  t->a = std::move(body);
  return t;
}
TypePtr arrow(TypePtr a, TypePtr b) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Arrow;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}

namespace {
std::shared_ptr<Term> term(Term::Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}
} // namespace

TermPtr var_term(std::string name) {
  auto t = term(Term::Kind::Var);
  t->name = std::move(name);
  return t;
}
TermPtr lam(std::string x, TypePtr ty, TermPtr body) {
  auto t = term(Term::Kind::Lam);
  t->name = std::move(x);
  t->type = std::move(ty);
  t->m1 = std::move(body);
  return t;
}
TermPtr app(TermPtr f, TermPtr arg) {
  auto t = term(Term::Kind::App);
  t->m1 = std::move(f);
  t->m2 = std::move(arg);
  return t;
}
TermPtr lam_int(std::string i, TermPtr body) {
  auto t = term(Term::Kind::LamInt);
  t->name = std::move(i);
  t->m1 = std::move(body);
  return t;
}
TermPtr app_int(TermPtr f, ExprPtr e) {
  auto t = term(Term::Kind::AppInt);
  t->m1 = std::move(f);
  t->e1 = std::move(e);
  return t;
}
TermPtr fix(TermPtr m) {
  auto t = term(Term::Kind::Fix);
  t->m1 = std::move(m);
  return t;
}
TermPtr ifz(ExprPtr e, TermPtr a, TermPtr b) {
  auto t = term(Term::Kind::Ifz);
  t->e1 = std::move(e);
  t->m1 = std::move(a);
  t->m2 = std::move(b);
  return t;
}
TermPtr skip() { return term(Term::Kind::Skip); }
TermPtr seq(TermPtr a, TermPtr b) {
  auto t = term(Term::Kind::Seq);
  t->m1 = std::move(a);
  t->m2 = std::move(b);
  return t;
}
TermPtr new_in(std::string i, TermPtr body) {
  auto t = term(Term::Kind::New);
  t->name = std::move(i);
  t->m1 = std::move(body);
  return t;
}
TermPtr free_cell(ExprPtr e) {
  auto t = term(Term::Kind::Free);
  t->e1 = std::move(e);
  return t;
}
TermPtr write(ExprPtr loc, ExprPtr val) {
  auto t = term(Term::Kind::Write);
  t->e1 = std::move(loc);
  t->e2 = std::move(val);
  return t;
}
TermPtr read_in(std::string i, ExprPtr loc, TermPtr body) {
  auto t = term(Term::Kind::Read);
  t->name = std::move(i);
  t->e1 = std::move(loc);
  t->m1 = std::move(body);
  return t;
}
TermPtr cast(TermPtr m, TypePtr target, std::optional<Script> script) {
  auto t = term(Term::Kind::Cast);
  t->m1 = std::move(m);
  t->type = std::move(target);
  t->script = std::move(script);
  return t;
}
TermPtr frame(TermPtr m, AssertionPtr p) {
  auto t = term(Term::Kind::Frame);
  t->m1 = std::move(m);
  t->frame = std::move(p);
  return t;
}
TermPtr ascribe(TermPtr m, TypePtr ty) {
  auto t = term(Term::Kind::Ascribe);
  t->m1 = std::move(m);
  t->type = std::move(ty);
  return t;
}
TermPtr conj_term(TermPtr a, TermPtr b) {
  auto t = term(Term::Kind::Conj);
  t->m1 = std::move(a);
  t->m2 = std::move(b);
  return t;
}

} // namespace mk

std::string fresh_name(const std::string &hint) {
  static std::atomic<unsigned> counter{0};
  std::string clean;
  for (char c : hint)
    if (std::isalnum(static_cast<unsigned char>(c)))
      clean += c;
  return "_" + clean + std::to_string(++counter);
}

bool is_fresh_name(const std::string &s) { return !s.empty() && s[0] == '_'; }

// ---------------------------------------------------------------- free vars

namespace {

void collect(const ExprPtr &e, VarSet &out) {
  switch (e->kind) {
  case Expr::Kind::Var: out.insert(e->name); break;
  case Expr::Kind::Lit: break;
  default:
    collect(e->lhs, out);
    collect(e->rhs, out);
  }
}

void collect(const AssertionPtr &p, VarSet &out) {
  using K = Assertion::Kind;
  switch (p->kind) {
  case K::Eq:
  case K::PointsTo:
    collect(p->e1, out);
    collect(p->e2, out);
    break;
  case K::Emp:
  case K::True: break;
  case K::Star:
  case K::And:
  case K::Or:
    collect(p->lhs, out);
    collect(p->rhs, out);
    break;
  case K::Not: collect(p->lhs, out); break;
  case K::Forall:
  case K::Exists: {
    VarSet inner;
    collect(p->lhs, inner);
    inner.erase(p->name);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case K::Named:
    for (auto &a : p->args)
      collect(a, out);
    break;
  }
}

void collect(const TypePtr &t, VarSet &out) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple:
    collect(t->pre, out);
    collect(t->post, out);
    break;
  case TypeExpr::Kind::Otimes:
    collect(t->a, out);
    collect(t->inv, out);
    break;
  case TypeExpr::Kind::Pi: {
    VarSet inner;
    collect(t->a, inner);
    inner.erase(t->var);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case TypeExpr::Kind::Arrow:
    collect(t->a, out);
    collect(t->b, out);
    break;
  }
}

void collect_script(const Script &s, VarSet &out);

void collect_step(const ScriptStep &s, VarSet &out) {
  if (s.assertion)
    collect(s.assertion, out);
  if (s.target)
    collect(s.target, out);
  collect_script(s.children, out);
}

void collect_script(const Script &s, VarSet &out) {
  for (auto &st : s)
    collect_step(st, out);
}

void collect_int(const TermPtr &m, VarSet &out) {
  using K = Term::Kind;
  auto under = [&](const std::string &b, const TermPtr &body) {
    VarSet inner;
    collect_int(body, inner);
    inner.erase(b);
    out.insert(inner.begin(), inner.end());
  };
  switch (m->kind) {
  case K::Var:
  case K::Skip: break;
  case K::Lam:
    collect(m->type, out);
    collect_int(m->m1, out);
    break;
  case K::App:
  case K::Seq:
  case K::Conj:
    collect_int(m->m1, out);
    collect_int(m->m2, out);
    break;
  case K::LamInt:
  case K::New: under(m->name, m->m1); break;
  case K::AppInt:
    collect_int(m->m1, out);
    collect(m->e1, out);
    break;
  case K::Fix: collect_int(m->m1, out); break;
  case K::Ifz:
    collect(m->e1, out);
    collect_int(m->m1, out);
    collect_int(m->m2, out);
    break;
  case K::Free: collect(m->e1, out); break;
  case K::Write:
    collect(m->e1, out);
    collect(m->e2, out);
    break;
  case K::Read:
    collect(m->e1, out);
    under(m->name, m->m1);
    break;
  case K::Cast:
    collect_int(m->m1, out);
    if (m->type)
      collect(m->type, out);
    if (m->script)
      collect_script(*m->script, out);
    break;
  case K::Frame:
    collect_int(m->m1, out);
    collect(m->frame, out);
    break;
  case K::Ascribe:
    collect_int(m->m1, out);
    collect(m->type, out);
    break;
  }
}

void collect_term(const TermPtr &m, VarSet &out) {
  using K = Term::Kind;
  switch (m->kind) {
  case K::Var: out.insert(m->name); break;
  case K::Lam: {
    VarSet inner;
    collect_term(m->m1, inner);
    inner.erase(m->name);
    out.insert(inner.begin(), inner.end());
    break;
  }
  default:
    if (m->m1)
      collect_term(m->m1, out);
    if (m->m2)
      collect_term(m->m2, out);
  }
}

void collect_names(const AssertionPtr &p, std::set<std::string> &out) {
  if (!p)
    return;
  if (p->kind == Assertion::Kind::Named)
    out.insert(p->name);
  collect_names(p->lhs, out);
  collect_names(p->rhs, out);
}

} // namespace

VarSet free_vars(const ExprPtr &e) {
  VarSet s;
  collect(e, s);
  return s;
}
VarSet free_vars(const AssertionPtr &p) {
  VarSet s;
  collect(p, s);
  return s;
}
VarSet free_vars(const TypePtr &t) {
  VarSet s;
  collect(t, s);
  return s;
}
VarSet free_int_vars(const TermPtr &m) {
  VarSet s;
  collect_int(m, s);
  return s;
}
VarSet free_term_vars(const TermPtr &m) {
  VarSet s;
  collect_term(m, s);
  return s;
}
std::set<std::string> named_preds(const AssertionPtr &p) {
  std::set<std::string> s;
  collect_names(p, s);
  return s;
}

// ------------------------------------------------------------- substitution

ExprPtr subst(const ExprPtr &e, const ExprPtr &by, const std::string &v) {
  switch (e->kind) {
  case Expr::Kind::Var: return e->name == v ? by : e;
  case Expr::Kind::Lit: return e;
  case Expr::Kind::Add: return mk::add(subst(e->lhs, by, v), subst(e->rhs, by, v));
  case Expr::Kind::Sub: return mk::sub(subst(e->lhs, by, v), subst(e->rhs, by, v));
  }
  return e;
}

AssertionPtr subst(const AssertionPtr &p, const ExprPtr &by, const std::string &v) {
  using K = Assertion::Kind;
  switch (p->kind) {
  case K::Eq: return mk::eq(subst(p->e1, by, v), subst(p->e2, by, v));
  case K::PointsTo: return mk::points_to(subst(p->e1, by, v), subst(p->e2, by, v));
  case K::Emp:
  case K::True: return p;
  case K::Star: return mk::star(subst(p->lhs, by, v), subst(p->rhs, by, v));
  case K::And: return mk::conj(subst(p->lhs, by, v), subst(p->rhs, by, v));
  case K::Or: return mk::disj(subst(p->lhs, by, v), subst(p->rhs, by, v));
  case K::Not: return mk::neg(subst(p->lhs, by, v));
  case K::Forall:
  case K::Exists: {
    if (p->name == v)
      return p;
    std::string b = p->name;
    AssertionPtr body = p->lhs;
    if (free_vars(by).count(b)) {
      std::string nb = fresh_name(b);
      body = subst(body, mk::var(nb), b);
      b = nb;
    }
    body = subst(body, by, v);
    return p->kind == K::Forall ? mk::forall(b, body) : mk::exists(b, body);
  }
  case K::Named: {
    std::vector<ExprPtr> args;
    for (auto &a : p->args)
      args.push_back(subst(a, by, v));
    return mk::named(p->name, std::move(args));
  }
  }
  return p;
}

TypePtr subst_type(const TypePtr &t, const ExprPtr &by, const std::string &v) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return mk::triple(subst(t->pre, by, v), subst(t->post, by, v));
  case TypeExpr::Kind::Otimes: return mk::otimes(subst_type(t->a, by, v), subst(t->inv, by, v));
  case TypeExpr::Kind::Arrow: return mk::arrow(subst_type(t->a, by, v), subst_type(t->b, by, v));
  case TypeExpr::Kind::Pi: {
    if (t->var == v)
      return t;
    std::string b = t->var;
    TypePtr body = t->a;
    if (free_vars(by).count(b)) {
      std::string nb = fresh_name(b);
      body = subst_type(body, mk::var(nb), b);
      b = nb;
    }
    return mk::pi(b, subst_type(body, by, v));
  }
  }
  return t;
}

// ----------------------------------------------------------------- equality

bool equal(const ExprPtr &a, const ExprPtr &b) {
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case Expr::Kind::Var: return a->name == b->name;
  case Expr::Kind::Lit: return a->value == b->value;
  default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

std::vector<AssertionPtr> flatten(const AssertionPtr &p, Assertion::Kind k) {
  std::vector<AssertionPtr> out;
  std::vector<AssertionPtr> stack{p};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (cur->kind == k) {
      stack.push_back(cur->rhs);
      stack.push_back(cur->lhs);
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

AssertionPtr rebuild(const std::vector<AssertionPtr> &parts, Assertion::Kind k) {
  if (parts.empty())
    throw SlaError("rebuild: empty operand list");
  AssertionPtr acc = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) {
    auto n = std::make_shared<Assertion>();
    n->kind = k;
    n->lhs = acc;
    n->rhs = parts[i];
    acc = n;
  }
  return acc;
}

namespace {

using Binders = std::vector<std::pair<std::string, std::string>>;

int lookup(const Binders &bs, const std::string &n, bool left) {
  for (int i = static_cast<int>(bs.size()) - 1; i >= 0; --i)
    if ((left ? bs[i].first : bs[i].second) == n)
      return i;
  return -1;
}

bool alpha_expr(const ExprPtr &a, const ExprPtr &b, const Binders &bs) {
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case Expr::Kind::Var: {
    int la = lookup(bs, a->name, true), lb = lookup(bs, b->name, false);
    if (la != lb)
      return false;
    return la != -1 || a->name == b->name;
  }
  case Expr::Kind::Lit: return a->value == b->value;
  default: return alpha_expr(a->lhs, b->lhs, bs) && alpha_expr(a->rhs, b->rhs, bs);
  }
}

bool alpha_assert(const AssertionPtr &a, const AssertionPtr &b, Binders &bs) {
  using K = Assertion::Kind;
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case K::Eq:
  case K::PointsTo: return alpha_expr(a->e1, b->e1, bs) && alpha_expr(a->e2, b->e2, bs);
  case K::Emp:
  case K::True: return true;
  case K::Star:
  case K::And:
  case K::Or: {
    auto fa = flatten(a, a->kind), fb = flatten(b, b->kind);
    if (fa.size() != fb.size())
      return false;
    for (size_t i = 0; i < fa.size(); ++i)
      if (!alpha_assert(fa[i], fb[i], bs))
        return false;
    return true;
  }
  case K::Not: return alpha_assert(a->lhs, b->lhs, bs);
  case K::Forall:
  case K::Exists: {
    bs.emplace_back(a->name, b->name);
    bool r = alpha_assert(a->lhs, b->lhs, bs);
    bs.pop_back();
    return r;
  }
  case K::Named: {
    if (a->name != b->name || a->args.size() != b->args.size())
      return false;
    for (size_t i = 0; i < a->args.size(); ++i)
      if (!alpha_expr(a->args[i], b->args[i], bs))
        return false;
    return true;
  }
  }
  return false;
}

bool alpha_type(const TypePtr &a, const TypePtr &b, Binders &bs) {
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case TypeExpr::Kind::Triple: return alpha_assert(a->pre, b->pre, bs) && alpha_assert(a->post, b->post, bs);
  case TypeExpr::Kind::Otimes: return alpha_type(a->a, b->a, bs) && alpha_assert(a->inv, b->inv, bs);
  case TypeExpr::Kind::Arrow: return alpha_type(a->a, b->a, bs) && alpha_type(a->b, b->b, bs);
  case TypeExpr::Kind::Pi: {
    bs.emplace_back(a->var, b->var);
    bool r = alpha_type(a->a, b->a, bs);
    bs.pop_back();
    return r;
  }
  }
  return false;
}

} // namespace

bool alpha_equal(const AssertionPtr &a, const AssertionPtr &b) {
  Binders bs;
  return alpha_assert(a, b, bs);
}

bool alpha_equal(const TypePtr &a, const TypePtr &b) {
  Binders bs;
  return alpha_type(a, b, bs);
}

bool term_equal(const TermPtr &a, const TermPtr &b) {
  if (!a || !b)
    return a == b;
  if (a->kind != b->kind || a->name != b->name)
    return false;
  auto same_type = [](const TypePtr &x, const TypePtr &y) {
    if (!x || !y)
      return x == y;
    return alpha_equal(x, y);
  };
  auto same_expr = [](const ExprPtr &x, const ExprPtr &y) {
    if (!x || !y)
      return x == y;
    return equal(x, y);
  };
  if (!same_type(a->type, b->type) || !same_expr(a->e1, b->e1) || !same_expr(a->e2, b->e2))
    return false;
  if ((a->frame == nullptr) != (b->frame == nullptr) || (a->frame && !alpha_equal(a->frame, b->frame)))
    return false;
  if (a->script.has_value() != b->script.has_value() ||
      (a->script && to_string(*a->script) != to_string(*b->script)))
    return false;
  return term_equal(a->m1, b->m1) && term_equal(a->m2, b->m2);
}

TermPtr erase_annotations(const TermPtr &m) {
  using K = Term::Kind;
  switch (m->kind) {
  case K::Cast:
  case K::Frame:
  case K::Ascribe:
  case K::Conj: return erase_annotations(m->m1);
  default: break;
  }
  auto copy = std::make_shared<Term>(*m);
  if (copy->m1)
    copy->m1 = erase_annotations(copy->m1);
  if (copy->m2)
    copy->m2 = erase_annotations(copy->m2);
  return copy;
}

// ------------------------------------------------------ formation, hygiene

void well_formed_assertion(const VarSet &delta, const AssertionPtr &p) {
  for (auto &v : free_vars(p))
    if (!delta.count(v))
      throw SlaError("variable '" + v + "' is not in the stack context (in " + to_string(p) + ")");
}

void well_formed_type(const VarSet &delta, const TypePtr &t) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple:
    well_formed_assertion(delta, t->pre);
    well_formed_assertion(delta, t->post);
    break;
  case TypeExpr::Kind::Otimes:
    well_formed_type(delta, t->a);
    well_formed_assertion(delta, t->inv);
    break;
  case TypeExpr::Kind::Arrow:
    well_formed_type(delta, t->a);
    well_formed_type(delta, t->b);
    break;
  case TypeExpr::Kind::Pi: {
    if (delta.count(t->var))
      throw SlaError("pi binder '" + t->var + "' is already in the stack context");
    VarSet d = delta;
    d.insert(t->var);
    well_formed_type(d, t->a);
    break;
  }
  }
}

namespace {
void binders_of(const TermPtr &m, std::vector<std::string> &ints, std::vector<std::string> &terms) {
  using K = Term::Kind;
  if (!m)
    return;
  if (m->kind == K::LamInt || m->kind == K::New || m->kind == K::Read)
    ints.push_back(m->name);
  if (m->kind == K::Lam)
    terms.push_back(m->name);
  binders_of(m->m1, ints, terms);
  binders_of(m->m2, ints, terms);
}
} // namespace

void check_hygiene(const TermPtr &m, const VarSet &delta) {
  std::vector<std::string> ints, terms;
  binders_of(m, ints, terms);
  VarSet seen;
  VarSet free = free_int_vars(m);
  for (auto &b : ints) {
    if (!seen.insert(b).second)
      throw HygieneError("symbol '" + b + "' is bound twice", b);
    if (free.count(b) || delta.count(b))
      throw HygieneError("symbol '" + b + "' is both bound and free", b);
  }
  VarSet tseen;
  VarSet tfree = free_term_vars(m);
  for (auto &b : terms) {
    if (!tseen.insert(b).second)
      throw HygieneError("term variable '" + b + "' is bound twice", b);
    if (tfree.count(b))
      throw HygieneError("term variable '" + b + "' is both bound and free", b);
  }
}

// ----------------------------------------------------------------- printing

namespace {

std::string print_expr(const ExprPtr &e, int level) {
  // level 0: full expression, 1: right operand of +/-, 2: atom
  switch (e->kind) {
  case Expr::Kind::Var: return e->name;
  case Expr::Kind::Lit:
    if (e->value < 0)
      return "(0 - " + std::to_string(-e->value) + ")";
    return std::to_string(e->value);
  default: {
    std::string s = print_expr(e->lhs, 0) + (e->kind == Expr::Kind::Add ? " + " : " - ") +
                    print_expr(e->rhs, 1);
    return level >= 1 ? "(" + s + ")" : s;
  }
  }
}

bool is_points_to_any(const AssertionPtr &p) {
  return p->kind == Assertion::Kind::Exists && is_fresh_name(p->name) &&
         p->lhs->kind == Assertion::Kind::PointsTo && p->lhs->e2->kind == Expr::Kind::Var &&
         p->lhs->e2->name == p->name && !free_vars(p->lhs->e1).count(p->name);
}

// Levels: 0 quantifier, 1 or, 2 and, 3 star, 4 atom.
std::string print_assert(const AssertionPtr &p, int level) {
  using K = Assertion::Kind;
  auto wrap = [&](int mine, std::string s) { return level > mine ? "(" + s + ")" : s; };
  switch (p->kind) {
  case K::Eq: return print_expr(p->e1, 0) + " = " + print_expr(p->e2, 0);
  case K::PointsTo: return print_expr(p->e1, 0) + " |-> " + print_expr(p->e2, 0);
  case K::Emp: return "emp";
  case K::True: return "true";
  case K::Star: return wrap(3, print_assert(p->lhs, 3) + " * " + print_assert(p->rhs, 4));
  case K::And: return wrap(2, print_assert(p->lhs, 2) + " /\\ " + print_assert(p->rhs, 3));
  case K::Or: return wrap(1, print_assert(p->lhs, 1) + " \\/ " + print_assert(p->rhs, 2));
  case K::Not:
    if (p->lhs->kind == K::Eq)
      return print_expr(p->lhs->e1, 0) + " != " + print_expr(p->lhs->e2, 0);
    if (p->lhs->kind == K::True)
      return "false";
    return "~" + print_assert(p->lhs, 4);
  case K::Forall:
  case K::Exists:
    if (is_points_to_any(p))
      return print_expr(p->lhs->e1, 0) + " |-> -";
    return wrap(0, std::string(p->kind == K::Forall ? "forall " : "exists ") + p->name + ". " +
                       print_assert(p->lhs, 0));
  case K::Named: {
    std::string s = p->name + "(";
    for (size_t i = 0; i < p->args.size(); ++i)
      s += (i ? ", " : "") + print_expr(p->args[i], 0);
    return s + ")";
  }
  }
  return "?";
}

// Levels: 0 pi, 1 arrow, 2 otimes, 3 atom.
std::string print_type(const TypePtr &t, int level) {
  auto wrap = [&](int mine, std::string s) { return level > mine ? "(" + s + ")" : s; };
  switch (t->kind) {
  case TypeExpr::Kind::Triple:
    return "{" + print_assert(t->pre, 0) + "}-{" + print_assert(t->post, 0) + "}";
  case TypeExpr::Kind::Otimes: {
    std::string inv = print_assert(t->inv, 4);
    return wrap(2, print_type(t->a, 2) + " @ " + inv);
  }
  case TypeExpr::Kind::Pi: return wrap(0, "pi " + t->var + ". " + print_type(t->a, 0));
  case TypeExpr::Kind::Arrow: return wrap(1, print_type(t->a, 2) + " -> " + print_type(t->b, 1));
  }
  return "?";
}

std::string print_step(const ScriptStep &s);

std::string print_chain(const Script &s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i)
    out += (i ? " " : "") + print_step(s[i]);
  return out;
}

std::string print_step(const ScriptStep &s) {
  using K = ScriptStep::Kind;
  auto sub = [&](const char *head) {
    std::string r = std::string("(") + head;
    if (!s.children.empty())
      r += " " + print_chain(s.children);
    return r + ")";
  };
  switch (s.kind) {
  case K::Refl: return "(refl)";
  case K::Frame: return "(frame " + print_assert(s.assertion, 0) + ")";
  case K::DistTriple: return "(distTriple)";
  case K::DistPi: return "(distPi)";
  case K::DistOtimes: return "(distOtimes)";
  case K::DistArrow: return "(distArrow)";
  case K::UndistTriple: return "(undistTriple " + print_assert(s.assertion, 0) + ")";
  case K::UndistPi: return "(undistPi)";
  case K::UndistOtimes: return "(undistOtimes " + print_assert(s.assertion, 0) + ")";
  case K::UndistArrow: return "(undistArrow)";
  case K::Normalize: return "(normalize)";
  case K::Consequence:
    return s.target ? "(consequence " + print_type(s.target, 0) + ")" : "(consequence)";
  case K::Arg: return sub("arg");
  case K::Res: return sub("res");
  case K::Body: return sub("body");
  case K::Inner: return sub("inner");
  case K::Trans: return sub("trans");
  case K::Ref: return "(use " + s.label + ")";
  }
  return "?";
}

std::string expr_arg(const ExprPtr &e) { return print_expr(e, 2); }

// Levels: 0 binding forms and seq, 1 unit (app, ifz, write, fix), 2 atom.
std::string print_term(const TermPtr &m, int level) {
  using K = Term::Kind;
  auto wrap = [&](int mine, std::string s) { return level > mine ? "(" + s + ")" : s; };
  switch (m->kind) {
  case K::Var: return m->name;
  case K::Skip: return "skip";
  case K::Lam: return wrap(0, "\\" + m->name + " : " + print_type(m->type, 3) + ". " + print_term(m->m1, 0));
  case K::LamInt: return wrap(0, "\\" + m->name + ". " + print_term(m->m1, 0));
  case K::App: return wrap(1, print_term(m->m1, 1) + " " + print_term(m->m2, 2));
  case K::AppInt: return wrap(1, print_term(m->m1, 1) + " " + expr_arg(m->e1));
  case K::Fix:
    return wrap(1, "fix " + print_term(m->m1, m->m1->kind == K::Lam ? 0 : 2));
  case K::Ifz:
    return wrap(1, "ifz " + expr_arg(m->e1) + " " + print_term(m->m1, 2) + " " + print_term(m->m2, 2));
  case K::Seq: return wrap(0, print_term(m->m1, 1) + "; " + print_term(m->m2, 0));
  case K::New: return wrap(0, "let " + m->name + " = new in " + print_term(m->m1, 0));
  case K::Read:
    return wrap(0, "let " + m->name + " = [" + print_expr(m->e1, 0) + "] in " + print_term(m->m1, 0));
  case K::Free: return "free(" + print_expr(m->e1, 0) + ")";
  case K::Write: return wrap(1, "[" + print_expr(m->e1, 0) + "] := " + print_expr(m->e2, 0));
  case K::Cast: {
    std::string s = "(" + print_term(m->m1, 0) + " as " + (m->type ? print_type(m->type, 0) : "_");
    if (m->script)
      s += " by " + print_chain(*m->script);
    return s + ")";
  }
  case K::Ascribe: return "(" + print_term(m->m1, 0) + " : " + print_type(m->type, 0) + ")";
  case K::Frame: return "frame(" + print_term(m->m1, 0) + ", " + print_assert(m->frame, 0) + ")";
  case K::Conj: return "conj(" + print_term(m->m1, 0) + ", " + print_term(m->m2, 0) + ")";
  }
  return "?";
}

} // namespace

std::string to_string(const ExprPtr &e) { return print_expr(e, 0); }
std::string to_string(const AssertionPtr &p) { return print_assert(p, 0); }
std::string to_string(const TypePtr &t) { return print_type(t, 0); }
std::string to_string(const TermPtr &m) { return print_term(m, 0); }
std::string to_string(const ScriptStep &s) { return print_step(s); }
std::string to_string(const Script &s) { return print_chain(s); }

std::string to_string(const Program &p) {
  std::ostringstream os;
  for (auto &d : p.preds) {
    os << "pred " << d.name << "(";
    for (size_t i = 0; i < d.params.size(); ++i)
      os << (i ? ", " : "") << d.params[i];
    os << ") := " << to_string(d.body) << ";\n";
  }
  if (!p.delta.empty()) {
    os << "vars ";
    for (size_t i = 0; i < p.delta.size(); ++i)
      os << (i ? ", " : "") << p.delta[i];
    os << ";\n";
  }
  for (auto &[name, sc] : p.scripts)
    os << "script " << name << " := " << to_string(sc) << ";\n";
  for (auto &d : p.decls) {
    if (d.term)
      os << "def " << d.name << " : " << to_string(d.type) << " := " << to_string(d.term) << ";\n";
    else
      os << "ctx " << d.name << " : " << to_string(d.type) << ";\n";
  }
  if (p.goal)
    os << "goal " << to_string(p.goal->term) << " : " << to_string(p.goal->type) << ";\n";
  return os.str();
}

} // namespace sla
