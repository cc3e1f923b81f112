#include "sla/interp.hpp"

#include <mutex>
#include <variant>

namespace sla {

struct Den::Impl {
  struct Command {
    CommandFn fn;
    mutable std::mutex mu;
    mutable std::map<Heap, OutcomeSet> memo;
  };
  struct Func {
    std::function<Den(const Den &)> fn;
  };
  struct Family {
    std::function<Den(Val)> fn;
    mutable std::mutex mu;
    mutable std::map<Val, Den> memo;
  };
  std::variant<Command, Func, Family> v;

  template <class T>
  explicit Impl(std::in_place_type_t<T> t, auto fn) : v(t) {
    std::get<T>(v).fn = std::move(fn);
  }
};

Den Den::command(CommandFn c) {
  return Den(std::make_shared<const Impl>(std::in_place_type<Impl::Command>, std::move(c)));
}

Den Den::func(std::function<Den(const Den &)> f) {
  return Den(std::make_shared<const Impl>(std::in_place_type<Impl::Func>, std::move(f)));
}

Den Den::family(std::function<Den(Val)> f) {
  return Den(std::make_shared<const Impl>(std::in_place_type<Impl::Family>, std::move(f)));
}

Den::Kind Den::kind() const {
  switch (impl_->v.index()) {
  case 0: return Kind::Command;
  case 1: return Kind::Func;
  default: return Kind::IntFamily;
  }
}

OutcomeSet Den::operator()(const Heap &h) const {
  auto *c = std::get_if<Impl::Command>(&impl_->v);
  if (!c)
    throw SlaError("internal: running a non-command denotation");
  {
    std::lock_guard lock(c->mu);
    auto it = c->memo.find(h);
    if (it != c->memo.end())
      return it->second;
  }
  OutcomeSet out = c->fn(h);
  std::lock_guard lock(c->mu);
  c->memo.emplace(h, out);
  return out;
}

Den Den::apply(const Den &arg) const {
  auto *f = std::get_if<Impl::Func>(&impl_->v);
  if (!f)
    throw SlaError("internal: applying a non-function denotation");
  return f->fn(arg);
}

Den Den::at(Val n) const {
  auto *f = std::get_if<Impl::Family>(&impl_->v);
  if (!f)
    throw SlaError("internal: instantiating a non-family denotation");
  {
    std::lock_guard lock(f->mu);
    auto it = f->memo.find(n);
    if (it != f->memo.end())
      return it->second;
  }
  Den d = f->fn(n);
  std::lock_guard lock(f->mu);
  return f->memo.emplace(n, d).first->second;
}

TypePtr den_shape(const TypePtr &t) {
  switch (t->kind) {
  case TypeExpr::Kind::Otimes: return den_shape(t->a);
  case TypeExpr::Kind::Pi: return mk::pi(t->var, den_shape(t->a));
  case TypeExpr::Kind::Arrow: return mk::arrow(den_shape(t->a), den_shape(t->b));
  case TypeExpr::Kind::Triple: return t;
  }
  return t;
}

Den Den::bottom(const TypePtr &t) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return command([](const Heap &) { return OutcomeSet{}; });
  case TypeExpr::Kind::Otimes: return bottom(t->a);
  case TypeExpr::Kind::Pi: {
    Den body = bottom(t->a);
    return family([body](Val) { return body; });
  }
  case TypeExpr::Kind::Arrow: {
    Den res = bottom(t->b);
    return func([res](const Den &) { return res; });
  }
  }
  throw SlaError("internal: bad type shape");
}

Den skip_at(const TypePtr &t) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return sem_skip();
  case TypeExpr::Kind::Otimes: return skip_at(t->a);
  case TypeExpr::Kind::Pi: {
    Den body = skip_at(t->a);
    return Den::family([body](Val) { return body; });
  }
  case TypeExpr::Kind::Arrow: {
    Den res = skip_at(t->b);
    return Den::func([res](const Den &) { return res; });
  }
  }
  throw SlaError("internal: bad type shape");
}

// ---------------------------------------------------------------- constants

Den sem_skip() {
  return Den::command([](const Heap &h) { return OutcomeSet::single(h); });
}

Den sem_seq(const Den &c1, const Den &c2) {
  return Den::command([c1, c2](const Heap &h) {
    OutcomeSet first = c1(h);
    OutcomeSet out;
    out.wrong = first.wrong;
    for (auto &mid : first.heaps)
      out.merge(c2(mid));
    return out;
  });
}

Den sem_new(const Den &family, const Universe &u) {
  Loc loc_max = u.loc_max;
  std::vector<Val> vals = u.values();
  return Den::command([family, loc_max, vals](const Heap &h) {
    OutcomeSet out;
    for (Loc n = 1; n <= loc_max; ++n) {
      if (h.contains(n))
        continue;
      Den body = family.at(n);
      for (Val v : vals)
        out.merge(body(h.with(n, v)));
    }
    return out;
  });
}

Den sem_read(Val m, const Den &family) {
  return Den::command([m, family](const Heap &h) {
    auto v = h.get(m);
    if (!v)
      return OutcomeSet::fault();
    return family.at(*v)(h);
  });
}

Den sem_free(Val m) {
  return Den::command([m](const Heap &h) {
    if (!h.contains(m))
      return OutcomeSet::fault();
    return OutcomeSet::single(h.without(m));
  });
}

Den sem_write(Val m, Val v) {
  return Den::command([m, v](const Heap &h) {
    if (!h.contains(m))
      return OutcomeSet::fault();
    return OutcomeSet::single(h.with(m, v));
  });
}

Den sem_con(const Den &c1, const Den &c2) {
  return Den::command([c1, c2](const Heap &h) {
    OutcomeSet a = c1(h), b = c2(h);
    OutcomeSet out;
    out.wrong = a.wrong || b.wrong;
    for (auto &x : a.heaps)
      if (b.heaps.count(x))
        out.heaps.insert(x);
    return out;
  });
}

// ----------------------------------------------------------------- fixpoint

bool den_equal(const Den &a, const Den &b, const TypePtr &shape, const Universe &u) {
  switch (shape->kind) {
  case TypeExpr::Kind::Triple: {
    for (auto &h : enumerate_heaps(u))
      if (a(h) != b(h))
        return false;
    return true;
  }
  case TypeExpr::Kind::Otimes: return den_equal(a, b, shape->a, u);
  case TypeExpr::Kind::Pi:
    for (Val n : u.values())
      if (!den_equal(a.at(n), b.at(n), shape->a, u))
        return false;
    return true;
  case TypeExpr::Kind::Arrow:
    for (const Den &arg : {Den::bottom(shape->a), skip_at(shape->a)})
      if (!den_equal(a.apply(arg), b.apply(arg), shape->b, u))
        return false;
    return true;
  }
  return false;
}

FixResult lfix(const Den &f, const TypePtr &shape, const Universe &u) {
  Den cur = Den::bottom(shape);
  int changed = 0;
  for (int k = 0; k < u.fix_budget; ++k) {
    Den next = f.apply(cur);
    if (den_equal(cur, next, shape, u))
      return {next, true, changed};
    cur = next;
    ++changed;
  }
  return {cur, false, changed};
}

// ------------------------------------------------------------- interpreter

namespace {

Env bind(Env eta, const std::string &i, Val n) {
  eta[i] = n;
  return eta;
}

} // namespace

Den Interpreter::interp(const Derivation &d, const Env &eta, const DenEnv &rho) const {
  const TermPtr &m = d.term;
  const std::string &r = d.rule;
  if (r == "var") {
    auto it = rho.find(m->name);
    if (it == rho.end())
      throw SlaError("no denotation for '" + m->name + "'; it is assumed but never defined");
    return it->second;
  }
  if (r == "subsume")
    return interp(d.children[0], eta, rho);
  if (r == "lam") {
    const Derivation *body = &d.children[0];
    std::string x = m->name;
    return Den::func([*this, body, x, eta, rho](const Den &arg) {
      DenEnv inner = rho;
      inner.insert_or_assign(x, arg);
      return interp(*body, eta, inner);
    });
  }
  if (r == "app")
    return interp(d.children[0], eta, rho).apply(interp(d.children[1], eta, rho));
  if (r == "lamInt") {
    const Derivation *body = &d.children[0];
    std::string i = m->name;
    return Den::family([*this, body, i, eta, rho](Val n) { return interp(*body, bind(eta, i, n), rho); });
  }
  if (r == "appInt")
    return interp(d.children[0], eta, rho).at(eval_expr(m->e1, eta));
  if (r == "fix") {
    FixResult fr = lfix(interp(d.children[0], eta, rho), den_shape(d.type), u_);
    stats_->fixpoints++;
    int prev = stats_->max_iterations;
    while (fr.iterations > prev && !stats_->max_iterations.compare_exchange_weak(prev, fr.iterations)) {
    }
    if (!fr.converged)
      stats_->approximate = true;
    return fr.den;
  }
  if (r == "ifz")
    return eval_expr(m->e1, eta) == 0 ? interp(d.children[0], eta, rho) : interp(d.children[1], eta, rho);
  if (r == "skip")
    return sem_skip();
  if (r == "seq")
    return sem_seq(interp(d.children[0], eta, rho), interp(d.children[1], eta, rho));
  if (r == "new" || r == "read") {
    const Derivation *body = &d.children[0];
    std::string i = m->name;
    Den family =
        Den::family([*this, body, i, eta, rho](Val n) { return interp(*body, bind(eta, i, n), rho); });
    if (r == "new")
      return sem_new(family, u_);
    return sem_read(eval_expr(m->e1, eta), family);
  }
  if (r == "free")
    return sem_free(eval_expr(m->e1, eta));
  if (r == "write")
    return sem_write(eval_expr(m->e1, eta), eval_expr(m->e2, eta));
  if (r == "conj")
    return sem_con(interp(d.children[0], eta, rho), interp(d.children[1], eta, rho));
  throw SlaError("internal: no interpretation for rule '" + r + "'");
}

ProgramDens interpret_program(const CheckedProgram &p, const Interpreter &in, const Env &eta) {
  ProgramDens out;
  for (auto &d : p.decls) {
    if (d.derivation)
      out.rho.insert_or_assign(d.name, in.interp(*d.derivation, eta, out.rho));
  }
  if (p.goal)
    out.goal = in.interp(*p.goal, eta, out.rho);
  return out;
}

RunResult run_program(const CheckedProgram &p, const std::string &def, const Env &env, const Heap &h,
                      const Universe &u) {
  Env eta;
  for (auto &v : p.delta) {
    auto it = env.find(v);
    if (it == env.end())
      throw SlaError("the environment must bind stack variable '" + v + "'");
    eta[v] = it->second;
  }
  Interpreter in(widen_for(u, h, env));
  ProgramDens dens = interpret_program(p, in, eta);
  std::optional<Den> den;
  TypePtr type;
  if (def.empty()) {
    if (!p.goal)
      throw SlaError("the program has no goal; name a definition to run");
    den = dens.goal;
    type = p.goal->type;
  } else {
    for (auto &d : p.decls)
      if (d.name == def && d.derivation) {
        den = dens.rho.at(d.name);
        type = d.type;
      }
    if (!den)
      throw SlaError("no definition named '" + def + "'");
  }
  type = den_shape(type);
  while (type->kind == TypeExpr::Kind::Pi) {
    auto it = env.find(type->var);
    if (it == env.end())
      throw SlaError("the environment must bind pi binder '" + type->var + "'");
    den = den->at(it->second);
    type = type->a;
  }
  if (type->kind != TypeExpr::Kind::Triple)
    throw SlaError("only commands can run; the selected term has type " + to_string(type));
  OutcomeSet out = (*den)(h);
  return {out, in.approximate()};
}

Universe widen_for(const Universe &u, const Heap &h, const Env &eta) {
  Universe w = u;
  for (auto &[l, v] : h.cells()) {
    w.loc_max = std::max(w.loc_max, l);
    w.val_min = std::min(w.val_min, v);
    w.val_max = std::max(w.val_max, v);
  }
  for (auto &[k, v] : eta) {
    w.val_min = std::min(w.val_min, v);
    w.val_max = std::max(w.val_max, v);
  }
  w.val_max = std::max<Val>(w.val_max, w.loc_max);
  return w;
}

} // namespace sla
