#include "sla/typecheck.hpp"

#include <algorithm>

namespace sla {

const TypePtr *TypeContext::find(const std::string &x) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == x)
      return &it->second;
  return nullptr;
}

TypeContext TypeContext::with(const std::string &x, TypePtr t) const {
  if (find(x))
    throw TypeError("term variable '" + x + "' is already in the context");
  TypeContext c = *this;
  c.entries_.emplace_back(x, std::move(t));
  return c;
}

VarSet TypeContext::free_int_vars() const {
  VarSet out;
  for (auto &[x, t] : entries_)
    for (auto &v : free_vars(t))
      out.insert(v);
  return out;
}

namespace {

using TK = Term::Kind;

Derivation node(std::string rule, const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, TypePtr t,
                std::vector<Derivation> children = {}) {
  Derivation d;
  d.rule = std::move(rule);
  d.ctx = gamma;
  d.delta = delta;
  d.term = m;
  d.type = std::move(t);
  d.children = std::move(children);
  return d;
}

ContextPtr extend(const ContextPtr &gamma, const std::string &x, const TypePtr &t) {
  return std::make_shared<const TypeContext>(gamma->with(x, t));
}

VarSet with(VarSet s, const std::string &v) {
  s.insert(v);
  return s;
}

bool subset(const VarSet &a, const VarSet &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string join(const VarSet &s) {
  std::string out;
  for (auto &v : s)
    out += (out.empty() ? "" : ", ") + v;
  return "{" + out + "}";
}

AssertionPtr zero_test(const ExprPtr &e) { return mk::eq(e, mk::lit(0)); }
AssertionPtr nonzero_test(const ExprPtr &e) { return mk::neq(e, mk::lit(0)); }

bool is_points_to_var(const AssertionPtr &a, const ExprPtr &loc, const std::string &v) {
  return a->kind == Assertion::Kind::PointsTo && equal(a->e1, loc) && a->e2->kind == Expr::Kind::Var &&
         a->e2->name == v && !free_vars(loc).count(v);
}

// Precondition of a read body: from (exists b. E |-> b * P) or
// ((exists b. E |-> b) * P), the assertion E |-> i * P[i/b].
AssertionPtr open_read_pre(const AssertionPtr &pre, const ExprPtr &loc, const std::string &i) {
  if (pre->kind == Assertion::Kind::Exists) {
    const std::string &b = pre->name;
    auto parts = flatten(pre->lhs, Assertion::Kind::Star);
    if (is_points_to_var(parts.front(), loc, b))
      return subst(pre->lhs, mk::var(i), b);
  }
  auto parts = flatten(pre, Assertion::Kind::Star);
  const AssertionPtr &head = parts.front();
  if (head->kind != Assertion::Kind::Exists || !is_points_to_var(head->lhs, loc, head->name))
    return nullptr;
  VarSet rest_fv;
  for (size_t k = 1; k < parts.size(); ++k)
    for (auto &v : free_vars(parts[k]))
      rest_fv.insert(v);
  if (rest_fv.count(i))
    return nullptr;
  parts.front() = mk::points_to(loc, mk::var(i));
  return rebuild(parts, Assertion::Kind::Star);
}

void collect_invariants(const TypePtr &t, const VarSet &delta,
                        std::vector<std::pair<VarSet, AssertionPtr>> &out) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return;
  case TypeExpr::Kind::Otimes:
    out.emplace_back(delta, t->inv);
    collect_invariants(t->a, delta, out);
    return;
  case TypeExpr::Kind::Pi: collect_invariants(t->a, with(delta, t->var), out); return;
  case TypeExpr::Kind::Arrow:
    collect_invariants(t->a, delta, out);
    collect_invariants(t->b, delta, out);
    return;
  }
}

} // namespace

void TypeChecker::fail(const TermPtr &m, const std::string &msg) { throw TypeError(msg, m ? m->pos : SourcePos{}); }

void TypeChecker::check_annotation(const VarSet &delta, const TypePtr &t, SourcePos pos) {
  try {
    well_formed_type(delta, t);
  } catch (const TypeError &) {
    throw;
  } catch (const SlaError &e) {
    throw TypeError(e.what(), pos);
  }
  if (sub_.mode() != Mode::Precise)
    return;
  std::vector<std::pair<VarSet, AssertionPtr>> invs;
  collect_invariants(t, delta, invs);
  for (auto &[d, p] : invs) {
    auto r = sub_.precise(d, p);
    if (!r.precise)
      throw TypeError("invariant " + to_string(p) + " in " + to_string(t) +
                          " is not precise (heap " + to_string(r.heap) + ")",
                      pos, r.env, r.heap);
  }
}

Derivation TypeChecker::subsume(Derivation inner, const VarSet &delta, const TermPtr &m, const TypePtr &target,
                                const std::optional<Script> &script) {
  SubtypeStep step;
  try {
    step = check_subtype(delta, inner.type, target, sub_, script);
  } catch (const SubtypeError &e) {
    throw TypeError(std::string(e.what()) + " (in " + to_string(inner.type) + " <= " + to_string(target) + ")",
                    m->pos, e.env(), e.heap());
  }
  ContextPtr gamma = inner.ctx;
  Derivation d = node("subsume", gamma, delta, m, target);
  d.children.push_back(std::move(inner));
  d.subtype = std::move(step);
  return d;
}

std::optional<Derivation> TypeChecker::synth(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m) {
  auto expr_ok = [&](const ExprPtr &e) {
    VarSet fv = free_vars(e);
    if (!subset(fv, delta))
      fail(m, "expression " + to_string(e) + " mentions variables outside the stack context " + join(delta));
  };
  switch (m->kind) {
  case TK::Var: {
    const TypePtr *t = gamma->find(m->name);
    if (!t)
      fail(m, "unbound term variable '" + m->name + "'");
    return node("var", gamma, delta, m, *t);
  }
  case TK::App: {
    auto f = synth(gamma, delta, m->m1);
    if (!f)
      fail(m, "the function in an application must synthesize a type; add a cast or ascription");
    if (f->type->kind != TypeExpr::Kind::Arrow)
      fail(m, "applying a term of non-arrow type " + to_string(f->type) + "; cast it to an arrow first");
    TypePtr res = f->type->b;
    Derivation arg = check(gamma, delta, m->m2, f->type->a);
    return node("app", gamma, delta, m, res, {std::move(*f), std::move(arg)});
  }
  case TK::AppInt: {
    expr_ok(m->e1);
    auto f = synth(gamma, delta, m->m1);
    if (!f)
      fail(m, "the function in an integer application must synthesize a type; add a cast or ascription");
    if (f->type->kind != TypeExpr::Kind::Pi)
      fail(m, "applying an integer to a term of non-pi type " + to_string(f->type));
    TypePtr res = subst_type(f->type->a, m->e1, f->type->var);
    return node("appInt", gamma, delta, m, res, {std::move(*f)});
  }
  case TK::Free:
    expr_ok(m->e1);
    return node("free", gamma, delta, m, mk::triple(mk::points_to_any(m->e1), mk::emp()));
  case TK::Write:
    expr_ok(m->e1);
    expr_ok(m->e2);
    return node("write", gamma, delta, m, mk::triple(mk::points_to_any(m->e1), mk::points_to(m->e1, m->e2)));
  case TK::Cast: {
    if (!m->type)
      return std::nullopt;
    check_annotation(delta, m->type, m->pos);
    auto inner = synth(gamma, delta, m->m1);
    if (!inner)
      fail(m, "the source of a cast must synthesize a type; ascribe it with (M : T)");
    return subsume(std::move(*inner), delta, m, m->type, m->script);
  }
  case TK::Frame: {
    auto inner = synth(gamma, delta, m->m1);
    if (!inner)
      fail(m, "the body of frame(...) must synthesize a type; ascribe it with (M : T)");
    TypePtr framed;
    try {
      framed = apply_frame(inner->type, m->frame, delta, sub_);
    } catch (const SubtypeError &e) {
      throw TypeError(e.what(), m->pos, e.env(), e.heap());
    } catch (const SlaError &e) {
      throw TypeError(e.what(), m->pos);
    }
    TypePtr target = normalize_otimes(framed, delta).type;
    ScriptStep fr{ScriptStep::Kind::Frame, m->frame, nullptr, {}, {}};
    ScriptStep nf{ScriptStep::Kind::Normalize, nullptr, nullptr, {}, {}};
    return subsume(std::move(*inner), delta, m, target, Script{fr, nf});
  }
  case TK::Ascribe:
    check_annotation(delta, m->type, m->pos);
    return check(gamma, delta, m->m1, m->type);
  case TK::Lam: {
    check_annotation(delta, m->type, m->pos);
    auto body = synth(extend(gamma, m->name, m->type), delta, m->m1);
    if (!body)
      return std::nullopt;
    TypePtr t = mk::arrow(m->type, body->type);
    return node("lam", gamma, delta, m, t, {std::move(*body)});
  }
  case TK::LamInt: {
    const std::string &i = m->name;
    if (delta.count(i) || gamma->free_int_vars().count(i))
      fail(m, "binder '" + i + "' must not occur in the context or the stack context");
    auto body = synth(gamma, with(delta, i), m->m1);
    if (!body)
      return std::nullopt;
    TypePtr t = mk::pi(i, body->type);
    Derivation d = node("lamInt", gamma, delta, m, t, {std::move(*body)});
    d.side_conditions.push_back(i + " not in fv(Gamma, Delta)");
    return d;
  }
  case TK::Seq: {
    auto left = synth(gamma, delta, m->m1);
    if (!left)
      return std::nullopt;
    if (left->type->kind != TypeExpr::Kind::Triple)
      fail(m, "left of ';' has non-triple type " + to_string(left->type));
    auto right = synth(gamma, delta, m->m2);
    if (!right)
      return std::nullopt;
    if (right->type->kind != TypeExpr::Kind::Triple || !alpha_equal(right->type->pre, left->type->post))
      fail(m, "right of ';' has type " + to_string(right->type) + " but the midcondition is " +
                  to_string(left->type->post));
    TypePtr t = mk::triple(left->type->pre, right->type->post);
    return node("seq", gamma, delta, m, t, {std::move(*left), std::move(*right)});
  }
  case TK::Conj: {
    if (sub_.mode() != Mode::Precise)
      fail(m, "the conjunction rule is unavailable in unrestricted mode");
    auto a = synth(gamma, delta, m->m1);
    auto b = synth(gamma, delta, m->m2);
    if (!a || !b)
      fail(m, "both premises of conj(...) must synthesize types");
    if (!term_equal(erase_annotations(m->m1), erase_annotations(m->m2)))
      fail(m, "conjunction premises are about different terms");
    if (a->type->kind != TypeExpr::Kind::Triple || b->type->kind != TypeExpr::Kind::Triple)
      fail(m, "conjunction premises must have triple types");
    TypePtr t = mk::triple(mk::conj(a->type->pre, b->type->pre), mk::conj(a->type->post, b->type->post));
    return node("conj", gamma, delta, m, t, {std::move(*a), std::move(*b)});
  }
  default: return std::nullopt;
  }
}

Derivation TypeChecker::check_read(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m,
                                   const TypePtr &t) {
  const std::string &i = m->name;
  if (!subset(free_vars(m->e1), delta))
    fail(m, "expression " + to_string(m->e1) + " mentions variables outside the stack context");
  AssertionPtr body_pre = open_read_pre(t->pre, m->e1, i);
  if (!body_pre)
    fail(m, "a read of [" + to_string(m->e1) + "] needs a precondition of the form exists b. " +
                to_string(m->e1) + " |-> b * P, got " + to_string(t->pre));
  VarSet avoid = gamma->free_int_vars();
  for (auto &v : delta)
    avoid.insert(v);
  for (auto &v : free_vars(m->e1))
    avoid.insert(v);
  for (auto &v : free_vars(t->post))
    avoid.insert(v);
  if (avoid.count(i))
    fail(m, "binder '" + i + "' must not occur in the context, stack context, address or postcondition");
  Derivation body = check(gamma, with(delta, i), m->m1, mk::triple(body_pre, t->post));
  Derivation d = node("read", gamma, delta, m, t, {std::move(body)});
  d.side_conditions.push_back(i + " not in fv(Gamma, Delta, E, Q)");
  return d;
}

Derivation TypeChecker::check(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, const TypePtr &t) {
  auto need_triple = [&](const char *what) {
    if (t->kind != TypeExpr::Kind::Triple)
      fail(m, std::string(what) + " is typed only at triples, not at " + to_string(t));
  };
  switch (m->kind) {
  case TK::Lam: {
    if (t->kind != TypeExpr::Kind::Arrow)
      fail(m, "lambda checked against non-arrow type " + to_string(t));
    check_annotation(delta, m->type, m->pos);
    if (!alpha_equal(m->type, t->a))
      fail(m, "lambda annotation " + to_string(m->type) + " differs from the expected domain " + to_string(t->a));
    Derivation body = check(extend(gamma, m->name, t->a), delta, m->m1, t->b);
    return node("lam", gamma, delta, m, t, {std::move(body)});
  }
  case TK::LamInt: {
    if (t->kind != TypeExpr::Kind::Pi)
      fail(m, "integer abstraction checked against non-pi type " + to_string(t));
    const std::string &i = m->name;
    if (delta.count(i) || gamma->free_int_vars().count(i))
      fail(m, "binder '" + i + "' must not occur in the context or the stack context");
    TypePtr body_t = subst_type(t->a, mk::var(i), t->var);
    Derivation body = check(gamma, with(delta, i), m->m1, body_t);
    Derivation d = node("lamInt", gamma, delta, m, mk::pi(i, body_t), {std::move(body)});
    d.side_conditions.push_back(i + " not in fv(Gamma, Delta)");
    return d;
  }
  case TK::Fix: {
    Derivation body = check(gamma, delta, m->m1, mk::arrow(t, t));
    return node("fix", gamma, delta, m, t, {std::move(body)});
  }
  case TK::Ifz: {
    need_triple("ifz");
    if (!subset(free_vars(m->e1), delta))
      fail(m, "ifz test " + to_string(m->e1) + " mentions variables outside the stack context");
    Derivation a = check(gamma, delta, m->m1, mk::triple(mk::conj(t->pre, zero_test(m->e1)), t->post));
    Derivation b = check(gamma, delta, m->m2, mk::triple(mk::conj(t->pre, nonzero_test(m->e1)), t->post));
    return node("ifz", gamma, delta, m, t, {std::move(a), std::move(b)});
  }
  case TK::Skip:
    need_triple("skip");
    if (!alpha_equal(t->pre, t->post))
      fail(m, "skip has type {P}-{P}; got " + to_string(t) + " (add a cast)");
    return node("skip", gamma, delta, m, t);
  case TK::Seq: {
    need_triple("';'");
    auto left = synth(gamma, delta, m->m1);
    if (!left || left->type->kind != TypeExpr::Kind::Triple)
      fail(m, "midcondition required: annotate the left of ';' with a cast or ascription giving its triple");
    if (!alpha_equal(left->type->pre, t->pre))
      fail(m, "left of ';' has precondition " + to_string(left->type->pre) + ", expected " + to_string(t->pre));
    Derivation right = check(gamma, delta, m->m2, mk::triple(left->type->post, t->post));
    return node("seq", gamma, delta, m, t, {std::move(*left), std::move(right)});
  }
  case TK::New: {
    need_triple("allocation");
    const std::string &i = m->name;
    VarSet avoid = gamma->free_int_vars();
    for (auto &v : delta)
      avoid.insert(v);
    for (auto &v : free_vars(t))
      avoid.insert(v);
    if (avoid.count(i))
      fail(m, "binder '" + i + "' must not occur in the context, stack context or the triple");
    Derivation body = check(gamma, with(delta, i), m->m1,
                            mk::triple(mk::star(mk::points_to_any(mk::var(i)), t->pre), t->post));
    Derivation d = node("new", gamma, delta, m, t, {std::move(body)});
    d.side_conditions.push_back(i + " not in fv(Gamma, Delta, P, Q)");
    return d;
  }
  case TK::Read: need_triple("lookup"); return check_read(gamma, delta, m, t);
  case TK::Cast:
    if (!m->type) {
      auto inner = synth(gamma, delta, m->m1);
      if (!inner)
        fail(m, "the source of a cast must synthesize a type; ascribe it with (M : T)");
      return subsume(std::move(*inner), delta, m, t, m->script);
    }
    break;
  default: break;
  }
  auto d = synth(gamma, delta, m);
  if (!d)
    fail(m, "cannot determine the type of " + to_string(m) + "; add an annotation");
  if (!alpha_equal(d->type, t))
    fail(m, "term has type " + to_string(d->type) + " but " + to_string(t) + " is expected; add a cast");
  return std::move(*d);
}

Derivation check_term(const ContextPtr &gamma, const VarSet &delta, const TermPtr &m, const TypePtr &t,
                      SubtypeContext &ctx) {
  TypeChecker tc(ctx);
  return tc.check(gamma, delta, m, t);
}

// ------------------------------------------------------------ verification

namespace {

class Verifier {
public:
  explicit Verifier(SubtypeContext &ctx) : ctx_(ctx) {}

  void run(const Derivation &d) {
    at_ = &d;
    const VarSet &delta = d.delta;
    auto kids = [&](size_t n) {
      if (d.children.size() != n)
        bad("expects " + std::to_string(n) + " premise(s)");
      for (auto &c : d.children)
        if (!c.ctx)
          bad("premise without a context");
    };
    auto same_ctx = [&](const Derivation &c, const VarSet &dl) {
      if (c.ctx->entries().size() != d.ctx->entries().size() || c.delta != dl)
        bad("premise context differs from the conclusion");
    };
    auto type_is = [&](const auto &a, const auto &b, const char *what) {
      if (!alpha_equal(a, b))
        bad(std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
    };
    auto triple = [&](const TypePtr &t) {
      if (t->kind != TypeExpr::Kind::Triple)
        bad("expects a triple type");
    };
    auto expr_in_delta = [&](const ExprPtr &e) {
      if (!subset(free_vars(e), delta))
        bad("expression outside the stack context");
    };
    auto kind = [&](TK k) {
      if (d.term->kind != k)
        bad("term form does not match the rule");
    };
    VarSet gamma_fv = d.ctx->free_int_vars();
    const TermPtr &m = d.term;

    if (d.rule == "var") {
      kids(0);
      kind(TK::Var);
      const TypePtr *t = d.ctx->find(m->name);
      if (!t)
        bad("variable not in context");
      type_is(*t, d.type, "variable type");
    } else if (d.rule == "lam") {
      kids(1);
      kind(TK::Lam);
      const Derivation &b = d.children[0];
      if (d.type->kind != TypeExpr::Kind::Arrow)
        bad("lambda at non-arrow type");
      type_is(m->type, d.type->a, "lambda domain");
      const TypePtr *bound = b.ctx->find(m->name);
      if (!bound || b.ctx->entries().size() != d.ctx->entries().size() + 1 || b.delta != delta)
        bad("lambda premise must extend the context by the binder");
      type_is(*bound, d.type->a, "lambda binder");
      type_is(b.type, d.type->b, "lambda body");
      term_is(b, m->m1);
    } else if (d.rule == "app") {
      kids(2);
      kind(TK::App);
      const Derivation &f = d.children[0], &a = d.children[1];
      same_ctx(f, delta);
      same_ctx(a, delta);
      type_is(f.type, mk::arrow(a.type, d.type), "application");
      term_is(f, m->m1);
      term_is(a, m->m2);
    } else if (d.rule == "lamInt") {
      kids(1);
      kind(TK::LamInt);
      const std::string &i = m->name;
      if (delta.count(i) || gamma_fv.count(i))
        bad("side condition " + i + " not in fv(Gamma, Delta) fails");
      const Derivation &b = d.children[0];
      same_ctx(b, with(delta, i));
      type_is(mk::pi(i, b.type), d.type, "integer abstraction");
      term_is(b, m->m1);
    } else if (d.rule == "appInt") {
      kids(1);
      kind(TK::AppInt);
      expr_in_delta(m->e1);
      const Derivation &f = d.children[0];
      same_ctx(f, delta);
      if (f.type->kind != TypeExpr::Kind::Pi)
        bad("integer application of a non-pi type");
      type_is(subst_type(f.type->a, m->e1, f.type->var), d.type, "instantiated type");
      term_is(f, m->m1);
    } else if (d.rule == "fix") {
      kids(1);
      kind(TK::Fix);
      same_ctx(d.children[0], delta);
      type_is(d.children[0].type, mk::arrow(d.type, d.type), "fixpoint body");
      term_is(d.children[0], m->m1);
    } else if (d.rule == "ifz") {
      kids(2);
      kind(TK::Ifz);
      triple(d.type);
      expr_in_delta(m->e1);
      for (auto &c : d.children)
        same_ctx(c, delta);
      type_is(d.children[0].type, mk::triple(mk::conj(d.type->pre, zero_test(m->e1)), d.type->post), "ifz zero");
      type_is(d.children[1].type, mk::triple(mk::conj(d.type->pre, nonzero_test(m->e1)), d.type->post),
              "ifz nonzero");
      term_is(d.children[0], m->m1);
      term_is(d.children[1], m->m2);
    } else if (d.rule == "skip") {
      kids(0);
      kind(TK::Skip);
      triple(d.type);
      type_is(d.type->pre, d.type->post, "skip");
    } else if (d.rule == "seq") {
      kids(2);
      kind(TK::Seq);
      triple(d.type);
      const Derivation &a = d.children[0], &b = d.children[1];
      same_ctx(a, delta);
      same_ctx(b, delta);
      triple(a.type);
      type_is(a.type->pre, d.type->pre, "sequence precondition");
      type_is(b.type, mk::triple(a.type->post, d.type->post), "sequence midcondition");
      term_is(a, m->m1);
      term_is(b, m->m2);
    } else if (d.rule == "new") {
      kids(1);
      kind(TK::New);
      triple(d.type);
      const std::string &i = m->name;
      if (delta.count(i) || gamma_fv.count(i) || free_vars(d.type).count(i))
        bad("side condition " + i + " not in fv(Gamma, Delta, P, Q) fails");
      const Derivation &b = d.children[0];
      same_ctx(b, with(delta, i));
      type_is(b.type, mk::triple(mk::star(mk::points_to_any(mk::var(i)), d.type->pre), d.type->post),
              "allocation body");
      term_is(b, m->m1);
    } else if (d.rule == "free") {
      kids(0);
      kind(TK::Free);
      expr_in_delta(m->e1);
      type_is(d.type, mk::triple(mk::points_to_any(m->e1), mk::emp()), "free axiom");
    } else if (d.rule == "write") {
      kids(0);
      kind(TK::Write);
      expr_in_delta(m->e1);
      expr_in_delta(m->e2);
      type_is(d.type, mk::triple(mk::points_to_any(m->e1), mk::points_to(m->e1, m->e2)), "write axiom");
    } else if (d.rule == "read") {
      kids(1);
      kind(TK::Read);
      triple(d.type);
      const std::string &i = m->name;
      if (delta.count(i) || gamma_fv.count(i) || free_vars(m->e1).count(i) || free_vars(d.type->post).count(i))
        bad("side condition " + i + " not in fv(Gamma, Delta, E, Q) fails");
      expr_in_delta(m->e1);
      const Derivation &b = d.children[0];
      same_ctx(b, with(delta, i));
      triple(b.type);
      type_is(b.type->post, d.type->post, "lookup postcondition");
      auto parts = flatten(b.type->pre, Assertion::Kind::Star);
      if (!is_points_to_var(parts.front(), m->e1, i))
        bad("lookup body precondition must start with " + to_string(m->e1) + " |-> " + i);
      AssertionPtr closed = mk::exists(i, b.type->pre);
      if (!alpha_equal(closed, d.type->pre) && !alpha_equal(closed, pull_exists(d.type->pre)))
        bad("lookup precondition " + to_string(d.type->pre) + " is not " + to_string(closed));
      term_is(b, m->m1);
    } else if (d.rule == "subsume") {
      kids(1);
      if (m->kind != TK::Cast && m->kind != TK::Frame)
        bad("subsumption needs an annotation");
      if (!d.subtype)
        bad("subsumption without a subtyping proof");
      const Derivation &c = d.children[0];
      same_ctx(c, delta);
      type_is(d.subtype->source, c.type, "subtyping source");
      type_is(d.subtype->target, d.type, "subtyping target");
      verify_step(delta, *d.subtype, ctx_);
      term_is(c, m->m1);
    } else if (d.rule == "conj") {
      kids(2);
      kind(TK::Conj);
      if (ctx_.mode() != Mode::Precise)
        bad("conjunction in unrestricted mode");
      const Derivation &a = d.children[0], &b = d.children[1];
      same_ctx(a, delta);
      same_ctx(b, delta);
      if (!term_equal(erase_annotations(a.term), erase_annotations(b.term)))
        bad("conjunction premises are about different terms");
      triple(a.type);
      triple(b.type);
      type_is(d.type, mk::triple(mk::conj(a.type->pre, b.type->pre), mk::conj(a.type->post, b.type->post)),
              "conjunction");
    } else {
      bad("unknown rule");
    }
    for (auto &c : d.children)
      run(c);
  }

private:
  static AssertionPtr pull_exists(const AssertionPtr &pre) {
    auto parts = flatten(pre, Assertion::Kind::Star);
    if (parts.front()->kind != Assertion::Kind::Exists)
      return pre;
    std::string b = parts.front()->name;
    parts.front() = parts.front()->lhs;
    return mk::exists(b, rebuild(parts, Assertion::Kind::Star));
  }

  // Ascriptions leave no node of their own.
  void term_is(const Derivation &c, TermPtr m) {
    while (m->kind == TK::Ascribe)
      m = m->m1;
    if (c.term != m && !term_equal(c.term, m))
      bad("premise is about a different subterm");
  }

  [[noreturn]] void bad(const std::string &msg) {
    throw TypeError("derivation check failed at " + at_->rule + " node for " + to_string(at_->term) + ": " + msg,
                    at_->term ? at_->term->pos : SourcePos{});
  }

  SubtypeContext &ctx_;
  const Derivation *at_ = nullptr;
};

} // namespace

void verify_derivation(const Derivation &d, SubtypeContext &ctx) { Verifier(ctx).run(d); }

size_t derivation_size(const Derivation &d) {
  size_t n = 1;
  for (auto &c : d.children)
    n += derivation_size(c);
  return n;
}

std::vector<std::string> rule_tags(const Derivation &d) {
  std::vector<std::string> out{d.rule};
  for (auto &c : d.children)
    for (auto &t : rule_tags(c))
      out.push_back(t);
  return out;
}

std::string rule_skeleton(const Derivation &d) {
  if (d.children.empty())
    return d.rule;
  std::string s = d.rule + "(";
  for (size_t i = 0; i < d.children.size(); ++i)
    s += (i ? ", " : "") + rule_skeleton(d.children[i]);
  return s + ")";
}

CheckedProgram check_program(const Program &p, Mode mode, const Universe &u) {
  CheckedProgram out;
  out.program = p;
  out.defs = std::make_shared<const PredDefs>(p.preds);
  for (auto &v : p.delta) {
    if (!out.delta.insert(v).second)
      throw TypeError("stack variable '" + v + "' declared twice");
  }
  Model model = Model::bounded(u, out.defs);
  SubtypeContext sub(model, mode);
  sub.sidecar = p.scripts;
  TypeChecker tc(sub);
  auto gamma = std::make_shared<const TypeContext>();
  for (auto &decl : p.decls) {
    tc.check_annotation(out.delta, decl.type);
    CheckedDecl cd{decl.name, decl.type, std::nullopt};
    if (decl.term) {
      check_hygiene(decl.term, out.delta);
      cd.derivation = tc.check(gamma, out.delta, decl.term, decl.type);
      verify_derivation(*cd.derivation, sub);
    }
    gamma = extend(gamma, decl.name, decl.type);
    out.decls.push_back(std::move(cd));
  }
  out.gamma = gamma;
  if (p.goal) {
    tc.check_annotation(out.delta, p.goal->type);
    check_hygiene(p.goal->term, out.delta);
    out.goal = tc.check(gamma, out.delta, p.goal->term, p.goal->type);
    verify_derivation(*out.goal, sub);
  }
  return out;
}

} // namespace sla
