#include "sla/assertion.hpp"

#include <algorithm>
#include <bit>
#include <mutex>

namespace sla {

// ---------------------------------------------------------------- Pred ops

Pred pred_star(const Pred &a, const Pred &b) {
  Pred out;
  for (auto &x : a.heaps)
    for (auto &y : b.heaps)
      if (auto c = combine(x, y))
        out.heaps.insert(*c);
  return out;
}

Pred pred_intersect(const Pred &a, const Pred &b) {
  Pred out;
  std::set_intersection(a.heaps.begin(), a.heaps.end(), b.heaps.begin(), b.heaps.end(),
                        std::inserter(out.heaps, out.heaps.end()));
  return out;
}

Pred pred_union(const Pred &a, const Pred &b) {
  Pred out = a;
  out.heaps.insert(b.heaps.begin(), b.heaps.end());
  return out;
}

bool pred_subset(const Pred &a, const Pred &b) {
  return std::includes(b.heaps.begin(), b.heaps.end(), a.heaps.begin(), a.heaps.end());
}

std::string to_string(const Pred &p) {
  std::string s = "{";
  bool first = true;
  for (auto &h : p.heaps) {
    s += (first ? "" : ", ") + to_string(h);
    first = false;
  }
  return s + "}";
}

// -------------------------------------------------------------------- Bits

Bits::Bits(size_t n, bool fill) : n_(n), w_((n + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
  if (fill && (n & 63))
    w_.back() &= (std::uint64_t{1} << (n & 63)) - 1;
}

size_t Bits::count() const {
  size_t c = 0;
  for (auto w : w_)
    c += static_cast<size_t>(std::popcount(w));
  return c;
}

bool Bits::any() const {
  return std::any_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w != 0; });
}

bool Bits::subset_of(const Bits &o) const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & ~o.w_[i])
      return false;
  return true;
}

Bits &Bits::operator|=(const Bits &o) {
  for (size_t i = 0; i < w_.size(); ++i)
    w_[i] |= o.w_[i];
  return *this;
}

Bits &Bits::operator&=(const Bits &o) {
  for (size_t i = 0; i < w_.size(); ++i)
    w_[i] &= o.w_[i];
  return *this;
}

Bits Bits::operator~() const {
  Bits r(n_, true);
  for (size_t i = 0; i < w_.size(); ++i)
    r.w_[i] &= ~w_[i];
  return r;
}

// --------------------------------------------------------------- HeapSpace

HeapSpace::HeapSpace(std::vector<Heap> heaps) : heaps_(std::move(heaps)) {
  std::sort(heaps_.begin(), heaps_.end());
  heaps_.erase(std::unique(heaps_.begin(), heaps_.end()), heaps_.end());
  for (size_t i = 0; i < heaps_.size(); ++i)
    index_[heaps_[i]] = i;
  auto e = index_.find(Heap{});
  if (e == index_.end())
    throw SlaError("heap space must contain the empty heap");
  empty_ = e->second;
  splits_.resize(heaps_.size());
  for (size_t k = 0; k < heaps_.size(); ++k) {
    for (auto &s : subheaps(heaps_[k])) {
      auto a = index_.find(s);
      auto b = index_.find(difference(heaps_[k], s));
      if (a == index_.end() || b == index_.end())
        throw SlaError("heap space is not closed under subheaps");
      splits_[k].emplace_back(static_cast<std::uint32_t>(a->second), static_cast<std::uint32_t>(b->second));
    }
  }
}

std::shared_ptr<const HeapSpace> HeapSpace::of_universe(const Universe &u) {
  static std::mutex mu;
  static std::map<std::tuple<Loc, Val, Val>, std::shared_ptr<const HeapSpace>> cache;
  auto key = std::make_tuple(u.loc_max, u.val_min, u.val_max);
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end())
      return it->second;
  }
  auto space = std::make_shared<const HeapSpace>(enumerate_heaps(u));
  std::lock_guard<std::mutex> lk(mu);
  cache[key] = space;
  return space;
}

std::shared_ptr<const HeapSpace> HeapSpace::below(const Heap &h) {
  return std::make_shared<const HeapSpace>(subheaps(h));
}

std::optional<size_t> HeapSpace::find(const Heap &h) const {
  auto it = index_.find(h);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------- PredDefs

namespace {

void negative_calls(const AssertionPtr &p, bool negative, std::set<std::string> &out) {
  if (!p)
    return;
  if (p->kind == Assertion::Kind::Named && negative)
    out.insert(p->name);
  bool flip = p->kind == Assertion::Kind::Not;
  negative_calls(p->lhs, negative != flip, out);
  negative_calls(p->rhs, negative, out);
}

void check_calls(const AssertionPtr &p, const std::map<std::string, size_t> &index,
                 const std::vector<PredDef> &defs, const std::string &where) {
  if (!p)
    return;
  if (p->kind == Assertion::Kind::Named) {
    auto it = index.find(p->name);
    if (it == index.end())
      throw SlaError("unknown predicate '" + p->name + "' in " + where);
    if (defs[it->second].params.size() != p->args.size())
      throw SlaError("predicate '" + p->name + "' applied to the wrong number of arguments in " + where);
  }
  check_calls(p->lhs, index, defs, where);
  check_calls(p->rhs, index, defs, where);
}

} // namespace

PredDefs::PredDefs(std::vector<PredDef> defs) : defs_(std::move(defs)) {
  size_t n = defs_.size();
  for (size_t i = 0; i < n; ++i) {
    if (!index_.emplace(defs_[i].name, i).second)
      throw SlaError("predicate '" + defs_[i].name + "' defined twice");
  }
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i) {
    check_calls(defs_[i].body, index_, defs_, "predicate " + defs_[i].name);
    for (auto &c : named_preds(defs_[i].body))
      reach[i][index_.at(c)] = true;
  }
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (size_t j = 0; j < n; ++j)
          if (reach[k][j])
            reach[i][j] = true;
  scc_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    scc_[i] = i;
    for (size_t j = 0; j < i; ++j)
      if (reach[i][j] && reach[j][i]) {
        scc_[i] = scc_[j];
        break;
      }
  }
  for (size_t i = 0; i < n; ++i) {
    std::set<std::string> neg;
    negative_calls(defs_[i].body, false, neg);
    for (auto &c : neg) {
      size_t j = index_.at(c);
      if (scc_[j] == scc_[i])
        throw SlaError("predicate '" + defs_[i].name + "' recurses under negation through '" + c + "'");
    }
  }
}

std::optional<size_t> PredDefs::index(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

// ------------------------------------------------------------------- Model

struct Model::Solve {
  size_t component;
  std::map<Key, Bits> current;
};

Model::Model(std::shared_ptr<const HeapSpace> space, std::vector<Val> values,
             std::shared_ptr<const PredDefs> defs)
    : space_(std::move(space)), values_(std::move(values)), defs_(std::move(defs)) {
  if (!defs_)
    defs_ = std::make_shared<const PredDefs>();
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
}

Model Model::bounded(const Universe &u, std::shared_ptr<const PredDefs> defs) {
  u.validate();
  return Model(HeapSpace::of_universe(u), u.values(), std::move(defs));
}

Model Model::around(const Heap &h, const Universe &u, const Env &env, std::shared_ptr<const PredDefs> defs) {
  std::vector<Val> vals = u.values();
  for (auto &[l, v] : h.cells()) {
    vals.push_back(l);
    vals.push_back(v);
  }
  for (auto &[k, v] : env)
    vals.push_back(v);
  return Model(HeapSpace::below(h), std::move(vals), std::move(defs));
}

Bits Model::eval(const AssertionPtr &p, const Env &env) {
  Env e = env;
  return eval_in(p, e, nullptr);
}

Bits Model::call(const std::string &name, const std::vector<Val> &args) {
  auto i = defs_->index(name);
  if (!i)
    throw SlaError("unknown predicate '" + name + "'");
  if (defs_->defs()[*i].params.size() != args.size())
    throw SlaError("predicate '" + name + "' applied to the wrong number of arguments");
  return lookup({*i, args}, nullptr);
}

Bits Model::star(const Bits &a, const Bits &b) const {
  Bits out(space_->size());
  for (size_t k = 0; k < space_->size(); ++k)
    for (auto [x, y] : space_->splits(k))
      if (a.test(x) && b.test(y)) {
        out.set(k);
        break;
      }
  return out;
}

Pred Model::to_pred(const Bits &b) const {
  Pred p;
  for (size_t i = 0; i < space_->size(); ++i)
    if (b.test(i))
      p.heaps.insert(space_->heap(i));
  return p;
}

Bits Model::from_pred(const Pred &p) const {
  Bits b(space_->size());
  for (auto &h : p.heaps)
    if (auto i = space_->find(h))
      b.set(*i);
  return b;
}

Bits Model::eval_in(const AssertionPtr &p, Env &env, Solve *ctx) {
  using K = Assertion::Kind;
  const size_t n = space_->size();
  switch (p->kind) {
  case K::Eq: return Bits(n, eval_expr(p->e1, env) == eval_expr(p->e2, env));
  case K::PointsTo: {
    Val l = eval_expr(p->e1, env);
    Val v = eval_expr(p->e2, env);
    Bits b(n);
    if (l > 0)
      if (auto i = space_->find(Heap({{l, v}})))
        b.set(*i);
    return b;
  }
  case K::Emp: {
    Bits b(n);
    b.set(space_->empty_index());
    return b;
  }
  case K::True: return Bits(n, true);
  case K::Star: {
    Bits a = eval_in(p->lhs, env, ctx);
    if (!a.any())
      return a;
    return star(a, eval_in(p->rhs, env, ctx));
  }
  case K::And: {
    Bits a = eval_in(p->lhs, env, ctx);
    if (!a.any())
      return a;
    a &= eval_in(p->rhs, env, ctx);
    return a;
  }
  case K::Or: {
    Bits a = eval_in(p->lhs, env, ctx);
    a |= eval_in(p->rhs, env, ctx);
    return a;
  }
  case K::Not: return ~eval_in(p->lhs, env, ctx);
  case K::Forall:
  case K::Exists: {
    bool all = p->kind == K::Forall;
    auto it = env.find(p->name);
    bool shadowed = it != env.end();
    Val saved = shadowed ? it->second : 0;
    Bits acc(n, all);
    for (Val v : values_) {
      env[p->name] = v;
      Bits b = eval_in(p->lhs, env, ctx);
      if (all)
        acc &= b;
      else
        acc |= b;
    }
    if (shadowed)
      env[p->name] = saved;
    else
      env.erase(p->name);
    return acc;
  }
  case K::Named: {
    auto i = defs_->index(p->name);
    if (!i)
      throw SlaError("unknown predicate '" + p->name + "'");
    std::vector<Val> args;
    for (auto &a : p->args)
      args.push_back(eval_expr(a, env));
    if (defs_->defs()[*i].params.size() != args.size())
      throw SlaError("predicate '" + p->name + "' applied to the wrong number of arguments");
    return lookup({*i, std::move(args)}, ctx);
  }
  }
  return Bits(n);
}

Bits Model::lookup(const Key &k, Solve *ctx) {
  auto d = done_.find(k);
  if (d != done_.end())
    return d->second;
  if (ctx && defs_->component(k.first) == ctx->component) {
    auto c = ctx->current.find(k);
    if (c != ctx->current.end())
      return c->second;
    if (ctx->current.size() >= max_table)
      throw CapError("predicate argument table exceeds cap");
    Bits empty(space_->size());
    ctx->current.emplace(k, empty);
    return empty;
  }
  solve(k, nullptr);
  return done_.at(k);
}

void Model::solve(const Key &k, std::vector<Bits> *trace) {
  Solve ctx{defs_->component(k.first), {}};
  ctx.current.emplace(k, Bits(space_->size()));
  if (trace)
    trace->push_back(ctx.current.at(k));
  for (;;) {
    std::vector<Key> keys;
    for (auto &[key, _] : ctx.current)
      keys.push_back(key);
    std::map<Key, Bits> next;
    for (auto &key : keys) {
      const PredDef &def = defs_->defs()[key.first];
      Env env;
      for (size_t a = 0; a < def.params.size(); ++a)
        env[def.params[a]] = key.second[a];
      next.emplace(key, eval_in(def.body, env, &ctx));
    }
    // Keys discovered during this round enter at the empty denotation.
    for (auto &[key, val] : ctx.current)
      next.emplace(key, val);
    bool stable = ctx.current.size() == keys.size() && next == ctx.current;
    ctx.current = std::move(next);
    if (trace)
      trace->push_back(ctx.current.at(k));
    if (stable)
      break;
  }
  for (auto &[key, val] : ctx.current)
    done_.emplace(key, std::move(val));
}

std::vector<Bits> Model::iterates(const std::string &name, const std::vector<Val> &args) {
  auto i = defs_->index(name);
  if (!i)
    throw SlaError("unknown predicate '" + name + "'");
  Model fresh(space_, values_, defs_);
  std::vector<Bits> trace;
  fresh.solve({*i, args}, &trace);
  return trace;
}

// ------------------------------------------------------------ entry points

PredEnv build_pred_env(const std::vector<PredDef> &defs, const Universe &u) {
  return Model::bounded(u, std::make_shared<const PredDefs>(defs));
}

Pred eval_assertion(const AssertionPtr &p, const Env &env, PredEnv &model) {
  return model.to_pred(model.eval(p, env));
}

bool satisfies(const Heap &h, const AssertionPtr &p, const Env &env, const Universe &u,
               std::shared_ptr<const PredDefs> defs) {
  Model m = Model::around(h, u, env, std::move(defs));
  return m.eval(p, env).test(*m.space().find(h));
}

std::vector<Env> relevant_envs(const VarSet &delta, const VarSet &mentioned, const std::vector<Val> &values,
                               size_t cap) {
  for (auto &v : mentioned)
    if (!delta.count(v))
      throw SlaError("variable '" + v + "' is not in the stack context");
  std::vector<Env> out{Env{}};
  for (auto &v : mentioned) {
    if (out.size() * values.size() > cap)
      throw CapError("environment enumeration exceeds cap");
    std::vector<Env> next;
    for (auto &e : out)
      for (Val x : values) {
        Env f = e;
        f[v] = x;
        next.push_back(std::move(f));
      }
    out = std::move(next);
  }
  return out;
}

EntailResult entails(const VarSet &delta, const AssertionPtr &lhs, const AssertionPtr &rhs, PredEnv &model) {
  VarSet fv = free_vars(lhs);
  for (auto &v : free_vars(rhs))
    fv.insert(v);
  EntailResult r;
  for (auto &env : relevant_envs(delta, fv, model.values())) {
    Bits a = model.eval(lhs, env);
    if (!a.any())
      continue;
    Bits b = model.eval(rhs, env);
    if (a.subset_of(b))
      continue;
    for (size_t i = 0; i < a.size(); ++i)
      if (a.test(i) && !b.test(i)) {
        r.holds = false;
        r.env = env;
        r.heap = model.space().heap(i);
        return r;
      }
  }
  return r;
}

PrecisionResult is_precise(const VarSet &delta, const AssertionPtr &p, PredEnv &model) {
  PrecisionResult r;
  const HeapSpace &space = model.space();
  for (auto &env : relevant_envs(delta, free_vars(p), model.values())) {
    Bits b = model.eval(p, env);
    if (b.count() < 2)
      continue;
    for (size_t k = 0; k < space.size(); ++k) {
      std::vector<Heap> hits;
      for (auto [sub, rest] : space.splits(k))
        if (b.test(sub))
          hits.push_back(space.heap(sub));
      if (hits.size() >= 2) {
        r.precise = false;
        r.env = env;
        r.heap = space.heap(k);
        r.subheaps = {hits[0], hits[1]};
        return r;
      }
    }
  }
  return r;
}

} // namespace sla
