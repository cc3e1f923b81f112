#include "sla/harness.hpp"

#include "sla/json.hpp"
#include "sla/parser.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace sla {

using nlohmann::json;

std::string to_string(Status s) {
  switch (s) {
  case Status::Pass: return "pass";
  case Status::Fail: return "fail";
  case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

json to_json(const CheckReport &r, bool timing) {
  json j;
  j["check"] = r.check;
  j["status"] = to_string(r.status);
  j["cases"] = r.cases;
  if (!r.witness.is_null())
    j["witness"] = r.witness;
  if (timing)
    j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

int exit_code(const std::vector<CheckReport> &reports) {
  bool inconclusive = false;
  for (auto &r : reports) {
    if (r.status == Status::Fail)
      return 1;
    inconclusive |= r.status == Status::Inconclusive;
  }
  return inconclusive ? 2 : 0;
}

namespace {

std::string show(const Pred &p) { return to_string(p); }

CheckReport fail_at(CheckReport r, json witness) {
  r.status = Status::Fail;
  r.witness = std::move(witness);
  return r;
}

// h . h0 for disjoint heaps.
Heap join(const Heap &a, const Heap &b) { return *combine(a, b); }

bool member_star(const Heap &h, const Pred &a, const Pred &b) {
  for (auto &s : subheaps(h))
    if (a.contains(s) && b.contains(difference(h, s)))
      return true;
  return false;
}

// Every universe heap with a subheap in p.
Pred upward(const Pred &p, const Universe &u) {
  Pred out;
  for (auto &h : enumerate_heaps(u))
    for (auto &s : subheaps(h))
      if (p.contains(s)) {
        out.heaps.insert(h);
        break;
      }
  return out;
}

std::optional<json> triple_domain_witness(const Den &c, const TripleObject &t, const Pred &p0) {
  for (auto &h : pred_star(t.p, p0).heaps) {
    OutcomeSet out = c(h);
    if (out.wrong)
      return json{{"heap", to_string(h)}, {"outcome", "WRONG"}};
    for (auto &o : out.heaps)
      if (!member_star(o, t.q, p0))
        return json{{"heap", to_string(h)}, {"outcome", to_string(o)}};
  }
  return std::nullopt;
}

std::optional<json> per_witness(const Den &c, const Den &c2, const TripleObject &t, const Pred &p0,
                                const Universe &u) {
  if (auto w = triple_domain_witness(c, t, p0))
    return json{{"side", "left"}, {"domain", *w}};
  if (auto w = triple_domain_witness(c2, t, p0))
    return json{{"side", "right"}, {"domain", *w}};
  for (auto &h : upward(pred_star(t.p, p0), u).heaps)
    if (c(h) != c2(h))
      return json{{"heap", to_string(h)}, {"left", to_string(c(h))}, {"right", to_string(c2(h))}};
  return std::nullopt;
}

} // namespace

std::vector<std::pair<Heap, Heap>> disjoint_pairs(const Universe &u) {
  std::vector<std::pair<Heap, Heap>> out;
  auto heaps = enumerate_heaps(u);
  for (auto &h : heaps)
    for (auto &h0 : heaps)
      if (disjoint(h, h0))
        out.emplace_back(h, h0);
  return out;
}

CheckReport check_safety_mono(const Den &c, const Universe &u, const std::string &name) {
  CheckReport r{name};
  for (auto &[h, h0] : disjoint_pairs(u)) {
    ++r.cases;
    if (c(join(h, h0)).wrong && !c(h).wrong)
      return fail_at(r, {{"h", to_string(h)}, {"h0", to_string(h0)}});
  }
  return r;
}

CheckReport check_frame_property(const Den &c, const Universe &u, const std::string &name) {
  CheckReport r{name};
  for (auto &[h, h0] : disjoint_pairs(u)) {
    OutcomeSet small = c(h);
    if (small.wrong)
      continue;
    ++r.cases;
    OutcomeSet big = c(join(h, h0));
    auto witness = [&](const std::string &o) {
      return json{{"h", to_string(h)}, {"h0", to_string(h0)}, {"outcome", o}};
    };
    if (big.wrong)
      return fail_at(r, witness("WRONG"));
    for (auto &o : big.heaps) {
      bool framed = std::any_of(small.heaps.begin(), small.heaps.end(), [&](const Heap &s) {
        auto j = combine(s, h0);
        return j && *j == o;
      });
      if (!framed)
        return fail_at(r, witness(to_string(o)));
    }
  }
  return r;
}

bool in_triple_domain(const Den &c, const TripleObject &t, const Pred &p0) {
  return !triple_domain_witness(c, t, p0);
}

bool per_equiv(const Den &c, const Den &c2, const TripleObject &t, const Pred &p0, const Universe &u) {
  return !per_witness(c, c2, t, p0, u);
}

CheckReport check_per_monotone(const TripleObject &t, const Den &c, const Den &c2, const std::vector<Pred> &pool,
                               const Universe &u, const std::string &name) {
  CheckReport r{name};
  for (auto &p0 : pool) {
    if (!per_equiv(c, c2, t, p0, u))
      continue;
    for (auto &q0 : pool) {
      ++r.cases;
      Pred bigger = pred_star(p0, q0);
      if (auto w = per_witness(c, c2, t, bigger, u))
        return fail_at(r, {{"p0", show(p0)}, {"q0", show(q0)}, {"failure", *w}});
    }
  }
  return r;
}

CheckReport check_con_laws(const Den &c, const Den &c2, const TripleObject &t1, const TripleObject &t2,
                           const Pred &r, const Universe &u, const std::string &name) {
  CheckReport rep{name};
  Den both = sem_con(c, c2);
  for (auto *law : {&check_safety_mono, &check_frame_property}) {
    CheckReport sub = (*law)(both, u, name);
    rep.cases += sub.cases;
    if (sub.status == Status::Fail)
      return fail_at(rep, sub.witness);
  }
  if (!in_triple_domain(c, t1, r) || !in_triple_domain(c2, t2, r))
    return rep;
  ++rep.cases;
  TripleObject meet{pred_intersect(t1.p, t2.p), pred_intersect(t1.q, t2.q)};
  if (auto w = triple_domain_witness(both, meet, r))
    return fail_at(rep, {{"r", show(r)}, {"domain", *w}});
  return rep;
}

CheckReport check_distribution(const Pred &r, const Universe &u, const std::string &name) {
  CheckReport rep{name};
  auto heaps = enumerate_heaps(u);
  rep.cases = heaps.size() * heaps.size();
  // h lies in {a}*r for each a = h minus an r-subheap; two distinct such a
  // make a right side strictly larger than ({a} & {b})*r, which is empty.
  for (auto &h : heaps) {
    std::vector<Heap> as;
    for (auto &s : subheaps(h))
      if (r.contains(s))
        as.push_back(difference(h, s));
    if (as.size() >= 2)
      return fail_at(rep, {{"p", show(Pred{{as[0]}})}, {"q", show(Pred{{as[1]}})}, {"heap", to_string(h)}});
  }
  return rep;
}

CheckReport check_coherence(const Derivation &d1, const Derivation &d2, const CheckedProgram &p,
                            const Universe &u, const std::string &name) {
  CheckReport rep{name};
  Interpreter in(u);
  TypePtr shape = den_shape(d1.type);
  for (auto &eta : enumerate_envs(p.delta, u)) {
    ++rep.cases;
    ProgramDens dens = interpret_program(p, in, eta);
    if (!den_equal(in.interp(d1, eta, dens.rho), in.interp(d2, eta, dens.rho), shape, u))
      return fail_at(rep, {{"env", to_json(eta)}});
  }
  if (in.approximate())
    rep.status = Status::Inconclusive;
  return rep;
}

// ------------------------------------------------------------------ padding

namespace {

// Alpha-renames pi binders that clash with the stack context.
TypePtr rename_pi_binders(const TypePtr &t, const VarSet &delta) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return t;
  case TypeExpr::Kind::Otimes: return mk::otimes(rename_pi_binders(t->a, delta), t->inv);
  case TypeExpr::Kind::Arrow: return mk::arrow(rename_pi_binders(t->a, delta), rename_pi_binders(t->b, delta));
  case TypeExpr::Kind::Pi: {
    if (!delta.count(t->var))
      return mk::pi(t->var, rename_pi_binders(t->a, delta));
    std::string v = fresh_name(t->var);
    return mk::pi(v, rename_pi_binders(subst_type(t->a, mk::var(v), t->var), delta));
  }
  }
  return t;
}

} // namespace

TermPtr pad_term(const Derivation &d) {
  using TK = Term::Kind;
  TermPtr m = d.term;
  while (m->kind == TK::Ascribe)
    m = m->m1;
  auto kid = [&](size_t i) { return pad_term(d.children.at(i)); };
  TermPtr inner;
  const std::string &r = d.rule;
  if (r == "lam")
    inner = mk::lam(m->name, m->type, kid(0));
  else if (r == "app")
    inner = mk::app(kid(0), kid(1));
  else if (r == "lamInt")
    inner = mk::lam_int(m->name, kid(0));
  else if (r == "appInt")
    inner = mk::app_int(kid(0), m->e1);
  else if (r == "fix")
    inner = mk::fix(kid(0));
  else if (r == "ifz")
    inner = mk::ifz(m->e1, kid(0), kid(1));
  else if (r == "seq")
    inner = mk::seq(kid(0), kid(1));
  else if (r == "new")
    inner = mk::new_in(m->name, kid(0));
  else if (r == "read")
    inner = mk::read_in(m->name, m->e1, kid(0));
  else if (r == "conj")
    inner = mk::conj_term(kid(0), kid(1));
  else if (r == "subsume" && m->kind == TK::Frame)
    inner = mk::frame(kid(0), m->frame);
  else if (r == "subsume")
    inner = mk::cast(kid(0), m->type, m->script);
  else
    inner = m;
  ScriptStep refl{ScriptStep::Kind::Refl, nullptr, nullptr, {}, {}};
  TypePtr t = rename_pi_binders(d.type, d.delta);
  return mk::cast(mk::ascribe(inner, t), t, Script{refl});
}

// ------------------------------------------------------------------- corpus

namespace {

struct Loaded {
  std::string name;
  CheckedProgram prog;
  std::vector<AssertionPtr> extras; // frame/invariant assertions over Delta
};

bool subset_of(const VarSet &a, const VarSet &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

void add_unique(std::vector<AssertionPtr> &out, const AssertionPtr &p) {
  for (auto &q : out)
    if (alpha_equal(p, q))
      return;
  out.push_back(p);
}

struct AssertionCollector {
  std::vector<AssertionPtr> found;

  void type(const TypePtr &t) {
    if (!t)
      return;
    if (t->kind == TypeExpr::Kind::Otimes)
      found.push_back(t->inv);
    type(t->a);
    type(t->b);
  }
  void script(const Script &s) {
    for (auto &st : s) {
      if (st.kind == ScriptStep::Kind::Frame)
        found.push_back(st.assertion);
      type(st.target);
      script(st.children);
    }
  }
  void term(const TermPtr &m) {
    if (!m)
      return;
    type(m->type);
    if (m->kind == Term::Kind::Frame)
      found.push_back(m->frame);
    if (m->script)
      script(*m->script);
    term(m->m1);
    term(m->m2);
  }
};

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in)
    throw SlaError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Loaded load_file(const std::filesystem::path &path, const std::string &display, Mode mode, const Universe &u) {
  Program prog = parse_program(read_file(path));
  Loaded l{display, check_program(prog, mode, u), {}};
  AssertionCollector col;
  for (auto &d : prog.decls) {
    col.type(d.type);
    col.term(d.term);
  }
  if (prog.goal) {
    col.type(prog.goal->type);
    col.term(prog.goal->term);
  }
  for (auto &[name, s] : prog.scripts)
    col.script(s);
  for (auto &p : col.found)
    if (subset_of(free_vars(p), l.prog.delta))
      add_unique(l.extras, p);
  return l;
}

std::vector<AssertionPtr> default_pool() {
  return {mk::emp(), mk::truth(), mk::points_to_any(mk::lit(1)), mk::points_to(mk::lit(2), mk::lit(0))};
}

// A command observed at a triple: the object the soundness check quantifies.
struct Obs {
  std::string label;
  Den cmd;
  AssertionPtr pre, post;
  Env eta;
};

struct Sample {
  std::string name;
  Den den;
};

bool first_order(const TypePtr &t) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return true;
  case TypeExpr::Kind::Pi:
  case TypeExpr::Kind::Otimes: return first_order(t->a);
  case TypeExpr::Kind::Arrow: return false;
  }
  return false;
}

bool same_shape(const TypePtr &a, const TypePtr &b) {
  if (a->kind == TypeExpr::Kind::Otimes)
    return same_shape(a->a, b);
  if (b->kind == TypeExpr::Kind::Otimes)
    return same_shape(a, b->a);
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case TypeExpr::Kind::Triple: return true;
  case TypeExpr::Kind::Pi: return same_shape(a->a, b->a);
  case TypeExpr::Kind::Arrow: return same_shape(a->a, b->a) && same_shape(a->b, b->b);
  default: return false;
  }
}

// Evaluates assertions for one file; outcomes outside the universe fall back
// to direct evaluation.
class Semantics {
public:
  Semantics(const Loaded &f, const Universe &u)
      : file_(f), u_(u), model_(Model::bounded(u, f.prog.defs)), sub_(model_, Mode::Unrestricted) {
    sub_.sidecar = f.prog.program.scripts;
  }

  Model &model() { return model_; }
  SubtypeContext &subtypes() { return sub_; }

  Pred pred(const AssertionPtr &p, const Env &eta) { return model_.to_pred(model_.eval(p, eta)); }

  bool holds(const Heap &h, const AssertionPtr &p, const Env &eta) {
    if (auto i = model_.space().find(h))
      return model_.eval(p, eta).test(*i);
    return satisfies(h, p, eta, u_, file_.prog.defs);
  }

  bool precise(const AssertionPtr &p, const Env &eta) {
    Bits b = model_.eval(p, eta);
    auto &sp = model_.space();
    for (size_t k = 0; k < sp.size(); ++k) {
      int n = 0;
      for (auto [s, rest] : sp.splits(k))
        n += b.test(s);
      if (n > 1)
        return false;
    }
    return true;
  }

  // Script-free subtyping, cached by printed types.
  bool subtype(const TypePtr &a, const TypePtr &b) {
    std::string key = to_string(a) + " <= " + to_string(b);
    auto it = subtype_cache_.find(key);
    if (it != subtype_cache_.end())
      return it->second;
    bool ok = true;
    try {
      check_subtype(file_.prog.delta, a, b, sub_);
    } catch (const SlaError &) {
      ok = false;
    }
    return subtype_cache_[key] = ok;
  }

  // First failing (p0, heap, outcome) for an observation.
  std::optional<json> unsound(const Obs &o, const AssertionPtr &p0) {
    AssertionPtr pre = mk::star(o.pre, p0), post = mk::star(o.post, p0);
    Pred in = pred(pre, o.eta);
    for (auto &h : in.heaps) {
      OutcomeSet out = o.cmd(h);
      auto witness = [&](const std::string &what) {
        return json{{"observation", o.label}, {"env", to_json(o.eta)}, {"p0", to_string(p0)},
                    {"heap", to_string(h)}, {"outcome", what}};
      };
      if (out.wrong)
        return witness("WRONG");
      for (auto &r : out.heaps)
        if (!holds(r, post, o.eta))
          return witness(to_string(r));
    }
    return std::nullopt;
  }

private:
  const Loaded &file_;
  Universe u_;
  Model model_;
  SubtypeContext sub_;
  std::map<std::string, bool> subtype_cache_;
};

// Denotations of every def at one environment, plus observation points.
class Observer {
public:
  Observer(const Loaded &f, Semantics &sem, const Interpreter &in, const std::vector<AssertionPtr> &pool,
           const Env &eta)
      : file_(f), sem_(sem), in_(in), pool_(pool), eta_(eta), dens_(interpret_program(f.prog, in, eta)) {}

  const ProgramDens &dens() const { return dens_; }

  void observe(const Den &d, const TypePtr &t, const std::string &label, std::vector<Obs> &out,
               const std::string &skip_self) {
    switch (t->kind) {
    case TypeExpr::Kind::Triple: out.push_back({label, d, t->pre, t->post, eta_}); return;
    case TypeExpr::Kind::Otimes: observe(d, t->a, label, out, skip_self); return;
    case TypeExpr::Kind::Pi:
      for (Val n : in_.universe().values())
        observe(d.at(n), subst_type(t->a, mk::lit(n), t->var), label + "[" + std::to_string(n) + "]", out,
                skip_self);
      return;
    case TypeExpr::Kind::Arrow:
      for (auto &s : samples(t->a, skip_self))
        observe(d.apply(s.den), t->b, label + "(" + s.name + ")", out, skip_self);
      return;
    }
  }

  // Defs usable as arguments at type a: script-free subtypes of a, or, for
  // first-order a, denotations that pass the soundness check at a.
  std::vector<Sample> samples(const TypePtr &a, const std::string &skip_self) {
    std::vector<Sample> out;
    for (auto &d : file_.prog.decls) {
      if (!d.derivation || d.name == skip_self || !same_shape(d.type, a))
        continue;
      auto it = dens_.rho.find(d.name);
      if (it == dens_.rho.end())
        continue;
      bool ok = sem_.subtype(d.type, a);
      if (!ok && first_order(a)) {
        std::vector<Obs> obs;
        observe(it->second, normalize_otimes(a, file_.prog.delta).type, d.name, obs, d.name);
        ok = true;
        for (auto &o : obs)
          for (auto &p0 : pool_)
            if (ok && subset_of(free_vars(p0), file_.prog.delta) && sem_.unsound(o, p0))
              ok = false;
      }
      if (ok)
        out.push_back({d.name, it->second});
    }
    return out;
  }

private:
  const Loaded &file_;
  Semantics &sem_;
  const Interpreter &in_;
  const std::vector<AssertionPtr> &pool_;
  Env eta_;
  ProgramDens dens_;
};

struct Judgment {
  std::string name;
  TypePtr type;
};

std::vector<Judgment> judgments(const Loaded &f) {
  std::vector<Judgment> out;
  for (auto &d : f.prog.decls)
    if (d.derivation)
      out.push_back({d.name, d.type});
  if (f.prog.goal) {
    const TermPtr &g = f.prog.goal->term;
    bool repeats = g->kind == Term::Kind::Var && std::any_of(out.begin(), out.end(), [&](const Judgment &j) {
                     return j.name == g->name && alpha_equal(j.type, f.prog.goal->type);
                   });
    if (!repeats)
      out.push_back({"goal", f.prog.goal->type});
  }
  return out;
}

class Harness {
public:
  explicit Harness(const HarnessConfig &cfg) : cfg_(cfg), u_(cfg.universe) {
    u_.validate();
    base_pool_ = cfg.pool ? *cfg.pool : default_pool();
    if (!std::filesystem::is_directory(cfg.corpus_dir))
      throw SlaError("corpus directory not found: " + cfg.corpus_dir.string());
    std::vector<std::filesystem::path> paths;
    for (auto &e : std::filesystem::directory_iterator(cfg.corpus_dir))
      if (e.is_regular_file() && e.path().extension() == ".sla")
        paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (auto &p : paths) {
      std::string name = p.filename().string();
      try {
        files_.push_back(load_file(p, name, cfg.mode, u_));
      } catch (const SlaError &e) {
        load_errors_.push_back(fail_at(CheckReport{"load/" + name}, json{{"error", e.what()}}));
      }
    }
  }

  std::vector<CheckReport> run(const std::string &suite) {
    std::vector<CheckReport> out = load_errors_;
    auto timed = [&](auto &&fn) {
      auto t0 = std::chrono::steady_clock::now();
      size_t before = out.size();
      fn(out);
      double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      size_t n = out.size() - before;
      for (size_t i = before; i < out.size(); ++i)
        out[i].elapsed_ms = n ? ms / static_cast<double>(n) : 0;
    };
    auto one = [&](const std::string &s) {
      if (s == "comm-laws")
        timed([&](auto &o) { comm_laws(o); });
      else if (s == "triples")
        timed([&](auto &o) { triples(o); });
      else if (s == "pers")
        timed([&](auto &o) { pers(o); });
      else if (s == "con")
        timed([&](auto &o) { con(o); });
      else if (s == "coherence")
        timed([&](auto &o) { coherence(o); });
      else if (s == "soundness")
        timed([&](auto &o) { soundness(o); });
      else if (s == "normalize")
        timed([&](auto &o) { normalize(o); });
      else
        throw SlaError("unknown suite '" + s + "'");
    };
    if (suite == "all") {
      for (auto &s : suite_names())
        one(s);
    } else {
      one(suite);
    }
    return out;
  }

private:
  // ------------------------------------------------------------- samples

  std::vector<AssertionPtr> pool_for(const Loaded &f) const {
    std::vector<AssertionPtr> pool;
    for (auto &p : base_pool_)
      if (subset_of(free_vars(p), f.prog.delta))
        add_unique(pool, p);
    for (auto &p : f.extras)
      add_unique(pool, p);
    return pool;
  }

  std::vector<Pred> closed_pool() const {
    std::vector<Pred> out;
    Model m = Model::bounded(u_, std::make_shared<const PredDefs>());
    for (auto &p : base_pool_)
      if (free_vars(p).empty() && named_preds(p).empty())
        out.push_back(m.to_pred(m.eval(p, {})));
    return out;
  }

  struct NamedCmd {
    std::string name;
    Den den;
  };

  std::vector<NamedCmd> constants() const {
    std::vector<NamedCmd> out;
    Val top = u_.loc_max;
    out.push_back({"skip", sem_skip()});
    for (Val m = 1; m <= top; ++m)
      out.push_back({"free(" + std::to_string(m) + ")", sem_free(m)});
    for (Val m = 1; m <= top; ++m)
      for (Val v : {Val{0}, top})
        out.push_back({"write(" + std::to_string(m) + ", " + std::to_string(v) + ")", sem_write(m, v)});
    for (Val m = 1; m <= top; ++m)
      out.push_back({"read(" + std::to_string(m) + ", n. write(1, n))",
                     sem_read(m, Den::family([](Val n) { return sem_write(1, n); }))});
    out.push_back({"read(1, n. free(n))", sem_read(1, Den::family([](Val n) { return sem_free(n); }))});
    out.push_back({"new(n. skip)", sem_new(Den::family([](Val) { return sem_skip(); }), u_)});
    out.push_back({"new(n. free(n))", sem_new(Den::family([](Val n) { return sem_free(n); }), u_)});
    out.push_back({"new(n. write(n, 0))", sem_new(Den::family([](Val n) { return sem_write(n, 0); }), u_)});
    out.push_back({"seq(free(1), free(2))", sem_seq(sem_free(1), sem_free(2))});
    out.push_back({"seq(write(1, 2), read(1, n. free(n)))",
                   sem_seq(sem_write(1, 2), sem_read(1, Den::family([](Val n) { return sem_free(n); })))});
    out.push_back({"seq(new(n. skip), free(1))",
                   sem_seq(sem_new(Den::family([](Val) { return sem_skip(); }), u_), sem_free(1))});
    return out;
  }

  struct FileObs {
    const Loaded *file;
    std::vector<Obs> obs;
    std::vector<AssertionPtr> pool;
    bool approximate = false;
  };

  // Observation points of every judgment at every environment over Delta.
  std::vector<FileObs> &observations() {
    if (obs_ready_)
      return obs_;
    obs_ready_ = true;
    for (auto &f : files_) {
      FileObs fo{&f, {}, pool_for(f)};
      sems_.push_back(std::make_unique<Semantics>(f, u_));
      Semantics &sem = *sems_.back();
      Interpreter in(u_);
      for (auto &eta : enumerate_envs(f.prog.delta, u_)) {
        Observer ob(f, sem, in, fo.pool, eta);
        for (auto &j : judgments(f)) {
          std::optional<Den> den;
          if (j.name == "goal")
            den = ob.dens().goal;
          else if (auto it = ob.dens().rho.find(j.name); it != ob.dens().rho.end())
            den = it->second;
          if (!den)
            continue;
          std::string label = f.name + "/" + j.name;
          if (!eta.empty())
            label += "{" + to_string(eta) + "}";
          ob.observe(*den, normalize_otimes(j.type, f.prog.delta).type, label, fo.obs, j.name);
        }
      }
      fo.approximate = in.approximate();
      obs_.push_back(std::move(fo));
    }
    return obs_;
  }

  Semantics &semantics(const Loaded &f) {
    observations();
    for (size_t i = 0; i < files_.size(); ++i)
      if (&files_[i] == &f)
        return *sems_[i];
    throw SlaError("internal: unknown corpus file");
  }

  struct SampledTriple {
    std::string name;
    Den cmd;
    TripleObject t;
  };

  // A few corpus observations per file, at Pred level.
  std::vector<SampledTriple> corpus_triples(size_t per_file) {
    std::vector<SampledTriple> out;
    for (auto &fo : observations()) {
      Semantics &sem = semantics(*fo.file);
      size_t step = std::max<size_t>(1, fo.obs.size() / per_file), taken = 0;
      for (size_t i = 0; i < fo.obs.size() && taken < per_file; i += step, ++taken) {
        const Obs &o = fo.obs[i];
        out.push_back({o.label, o.cmd, {sem.pred(o.pre, o.eta), sem.pred(o.post, o.eta)}});
      }
    }
    return out;
  }

  std::vector<NamedCmd> sample_commands() {
    std::vector<NamedCmd> out = constants();
    for (auto &st : corpus_triples(3))
      out.push_back({st.name, st.cmd});
    return out;
  }

  std::vector<std::pair<std::string, TripleObject>> sample_triples() {
    std::vector<std::pair<std::string, TripleObject>> out;
    auto names = pool_names();
    auto pool = closed_pool();
    for (size_t i = 0; i < pool.size(); ++i)
      out.push_back({"[" + names[i] + ", " + names[i] + "]", {pool[i], pool[i]}});
    for (auto &st : corpus_triples(2))
      out.push_back({st.name, st.t});
    return out;
  }

  std::vector<std::string> pool_names() const {
    std::vector<std::string> out;
    for (auto &p : base_pool_)
      if (free_vars(p).empty() && named_preds(p).empty())
        out.push_back(to_string(p));
    return out;
  }

  Pred closed(const std::string &src) const {
    Model m = Model::bounded(u_, std::make_shared<const PredDefs>());
    return m.to_pred(m.eval(parse_assertion(src), {}));
  }

  Status corpus_status() {
    for (auto &fo : observations())
      if (fo.approximate)
        return Status::Inconclusive;
    return Status::Pass;
  }

  // ------------------------------------------------------------- suites

  void comm_laws(std::vector<CheckReport> &out) {
    for (auto &c : constants()) {
      out.push_back(check_safety_mono(c.den, u_, "comm-laws/safety/" + c.name));
      out.push_back(check_frame_property(c.den, u_, "comm-laws/frame/" + c.name));
    }
    Status st = corpus_status();
    for (auto &fo : observations()) {
      CheckReport safety{"comm-laws/safety/" + fo.file->name}, frame{"comm-laws/frame/" + fo.file->name};
      for (auto &o : fo.obs) {
        for (auto [rep, law] : {std::pair{&safety, &check_safety_mono}, std::pair{&frame, &check_frame_property}}) {
          if (rep->status == Status::Fail)
            continue;
          CheckReport r = (*law)(o.cmd, u_, o.label);
          rep->cases += r.cases;
          if (r.status == Status::Fail)
            *rep = fail_at(*rep, {{"observation", o.label}, {"detail", r.witness}});
        }
      }
      for (auto *rep : {&safety, &frame}) {
        if (rep->status == Status::Pass)
          rep->status = st;
        out.push_back(*rep);
      }
    }
    // The checks must reject commands that break the laws.
    Den unsafe = Den::command([](const Heap &h) { return h.contains(2) ? OutcomeSet::fault() : OutcomeSet::single(h); });
    Den grab = Den::command([](const Heap &h) { return OutcomeSet::single(h.contains(1) ? h : h.with(1, 0)); });
    detects(out, "comm-laws/detects-unsafe-extension", check_safety_mono(unsafe, u_, ""));
    detects(out, "comm-laws/detects-fixed-address-allocator", check_frame_property(grab, u_, ""));
  }

  static void detects(std::vector<CheckReport> &out, const std::string &name, const CheckReport &inner) {
    CheckReport r{name};
    r.cases = inner.cases;
    r.witness = inner.witness;
    if (inner.status != Status::Fail)
      r.status = Status::Fail;
    out.push_back(r);
  }

  void triples(std::vector<CheckReport> &out) {
    auto pool = closed_pool();
    Pred emp = closed("emp"), cell1 = closed("1 |-> -"), one_two = closed("1 |-> 2");
    auto all_pool = [&](const std::string &name, const Den &c, const TripleObject &t, bool expect) {
      CheckReport r{name};
      for (auto &p0 : pool) {
        ++r.cases;
        if (in_triple_domain(c, t, p0) != expect) {
          r = fail_at(r, {{"p0", show(p0)}, {"expected", expect}});
          break;
        }
      }
      out.push_back(r);
    };
    {
      CheckReport r{"triples/skip-in-[p,p]"};
      for (auto &p : pool)
        for (auto &p0 : pool) {
          ++r.cases;
          if (r.status == Status::Pass && !in_triple_domain(sem_skip(), {p, p}, p0))
            r = fail_at(r, {{"p", show(p)}, {"p0", show(p0)}});
        }
      out.push_back(r);
    }
    all_pool("triples/write-in-[1|->-,1|->2]", sem_write(1, 2), {cell1, one_two}, true);
    all_pool("triples/free-in-[1|->-,emp]", sem_free(1), {cell1, emp}, true);
    {
      CheckReport r{"triples/free-not-in-[emp,emp]", Status::Pass, {}, 1};
      if (in_triple_domain(sem_free(1), {emp, emp}, emp))
        r = fail_at(r, {{"command", "free(1)"}});
      out.push_back(r);
    }
    // c in [p,q](p0) iff c in [p*p0, q*p0](emp).
    CheckReport lemma{"triples/framing"};
    for (auto &c : sample_commands())
      for (auto &[tn, t] : sample_triples())
        for (auto &p0 : pool) {
          if (lemma.status == Status::Fail)
            break;
          ++lemma.cases;
          bool a = in_triple_domain(c.den, t, p0);
          bool b = in_triple_domain(c.den, {pred_star(t.p, p0), pred_star(t.q, p0)}, emp);
          if (a != b)
            lemma = fail_at(lemma, {{"command", c.name}, {"triple", tn}, {"p0", show(p0)}, {"framed", a}});
        }
    out.push_back(lemma);
  }

  void pers(std::vector<CheckReport> &out) {
    auto pool = closed_pool();
    auto cmds = sample_commands();
    auto ts = sample_triples();
    CheckReport sym{"pers/symmetry"}, trans{"pers/transitivity"}, mono{"pers/monotone"};
    size_t n = cmds.size();
    for (auto &[tn, t] : ts)
      for (auto &p0 : pool) {
        std::vector<std::vector<char>> rel(n, std::vector<char>(n));
        for (size_t a = 0; a < n; ++a)
          for (size_t b = 0; b < n; ++b)
            rel[a][b] = per_equiv(cmds[a].den, cmds[b].den, t, p0, u_);
        auto where = [&](std::initializer_list<size_t> ids) {
          json names = json::array();
          for (size_t i : ids)
            names.push_back(cmds[i].name);
          return json{{"triple", tn}, {"p0", show(p0)}, {"commands", names}};
        };
        for (size_t a = 0; a < n; ++a)
          for (size_t b = 0; b < n; ++b) {
            ++sym.cases;
            if (sym.status == Status::Pass && rel[a][b] != rel[b][a])
              sym = fail_at(sym, where({a, b}));
            if (!rel[a][b])
              continue;
            for (size_t c = 0; c < n; ++c) {
              if (!rel[b][c])
                continue;
              ++trans.cases;
              if (trans.status == Status::Pass && !rel[a][c])
                trans = fail_at(trans, where({a, b, c}));
            }
          }
      }
    for (auto &[tn, t] : ts)
      for (size_t a = 0; a < n && mono.status == Status::Pass; ++a)
        for (size_t b = a; b < n && mono.status == Status::Pass; ++b) {
          CheckReport r = check_per_monotone(t, cmds[a].den, cmds[b].den, pool, u_, "");
          mono.cases += r.cases;
          if (r.status == Status::Fail)
            mono = fail_at(mono, {{"triple", tn}, {"left", cmds[a].name}, {"right", cmds[b].name},
                                  {"detail", r.witness}});
        }
    out.push_back(sym);
    out.push_back(trans);
    out.push_back(mono);

    // write(1,2) and a variant that differs only where no triple looks.
    Pred cell1 = closed("1 |-> -"), one_two = closed("1 |-> 2");
    Den variant = Den::command([](const Heap &h) {
      return h.contains(1) ? OutcomeSet::single(h.with(1, 2)) : OutcomeSet{{Heap{}}, true};
    });
    CheckReport wv{"pers/write-variant-related"};
    for (auto &p0 : pool) {
      ++wv.cases;
      if (wv.status == Status::Pass && !per_equiv(sem_write(1, 2), variant, {cell1, one_two}, p0, u_))
        wv = fail_at(wv, {{"p0", show(p0)}});
    }
    out.push_back(wv);
    // Related at emp, but the extension by 2 |-> 0 drives one of them wrong.
    Den shy = Den::command([](const Heap &h) { return h.contains(2) ? OutcomeSet::fault() : OutcomeSet::single(h); });
    detects(out, "pers/detects-monotonicity-violator",
            check_per_monotone({cell1, cell1}, shy, shy, {closed("emp"), closed("2 |-> 0")}, u_, ""));
  }

  void con(std::vector<CheckReport> &out) {
    auto cmds = sample_commands();
    size_t n = cmds.size();
    CheckReport idem{"con/idempotent"}, comm{"con/commutative"}, assoc{"con/associative"}, laws{"con/comm-laws"};
    TypePtr triple = mk::triple(mk::emp(), mk::emp());
    for (size_t a = 0; a < n; ++a) {
      ++idem.cases;
      if (idem.status == Status::Pass && !den_equal(sem_con(cmds[a].den, cmds[a].den), cmds[a].den, triple, u_))
        idem = fail_at(idem, {{"command", cmds[a].name}});
      for (size_t b = 0; b < n; ++b) {
        ++comm.cases;
        Den ab = sem_con(cmds[a].den, cmds[b].den);
        if (comm.status == Status::Pass && !den_equal(ab, sem_con(cmds[b].den, cmds[a].den), triple, u_))
          comm = fail_at(comm, {{"commands", {cmds[a].name, cmds[b].name}}});
        if (laws.status == Status::Pass && b >= a) {
          for (auto *law : {&check_safety_mono, &check_frame_property}) {
            CheckReport r = (*law)(ab, u_, "");
            laws.cases += r.cases;
            if (r.status == Status::Fail) {
              laws = fail_at(laws, {{"commands", {cmds[a].name, cmds[b].name}}, {"detail", r.witness}});
              break;
            }
          }
        }
        for (size_t c = 0; c < n && b % 4 == 0 && c % 4 == 0; ++c) {
          ++assoc.cases;
          Den l = sem_con(ab, cmds[c].den), r = sem_con(cmds[a].den, sem_con(cmds[b].den, cmds[c].den));
          if (assoc.status == Status::Pass && !den_equal(l, r, triple, u_))
            assoc = fail_at(assoc, {{"commands", {cmds[a].name, cmds[b].name, cmds[c].name}}});
        }
      }
    }
    for (auto *r : {&idem, &comm, &assoc, &laws})
      out.push_back(*r);
    {
      CheckReport r{"con/skip-with-skip", Status::Pass, {}, 1};
      if (!den_equal(sem_con(sem_skip(), sem_skip()), sem_skip(), triple, u_))
        r = fail_at(r, {{"command", "skip"}});
      out.push_back(r);
    }
    transfer(out);
    // Distribution of * over intersection, exhaustively, at precise frames.
    auto pool = closed_pool();
    auto names = pool_names();
    for (size_t i = 0; i < pool.size(); ++i)
      if (pred_precise(pool[i]))
        out.push_back(check_distribution(pool[i], u_, "con/distribution/" + names[i]));
    {
      // r = true: both sides differ on p = {[1->1]}, q = {[1->1, 2->2]}.
      Pred p{{parse_heap("[1->1]")}}, q{{parse_heap("[1->1, 2->2]")}}, r = closed("true");
      Pred lhs = pred_star(pred_intersect(p, q), r), rhs = pred_intersect(pred_star(p, r), pred_star(q, r));
      json w = {{"p", show(p)}, {"q", show(q)}, {"r", "true"}, {"left", show(lhs)}, {"right", show(rhs)}};
      CheckReport found{"con/distribution-fails-at-true", Status::Pass, w, 1};
      if (lhs == rhs)
        found.status = Status::Fail;
      out.push_back(found);
      if (cfg_.imprecise_demo) {
        CheckReport demo{"con/distribution/true", Status::Fail, w, 1};
        out.push_back(demo);
      }
    }
    // A conjunction of one derivation with itself means that derivation.
    if (cfg_.mode == Mode::Precise) {
      for (auto &f : files_) {
        for (auto &d : f.prog.decls) {
          if (!d.derivation || d.type->kind != TypeExpr::Kind::Triple)
            continue;
          out.push_back(self_conjunction(f, d));
        }
      }
    }
  }

  bool pred_precise(const Pred &r) const {
    for (auto &h : enumerate_heaps(u_)) {
      int k = 0;
      for (auto &s : subheaps(h))
        k += r.contains(s);
      if (k > 1)
        return false;
    }
    return true;
  }

  CheckReport self_conjunction(const Loaded &f, const CheckedDecl &d) {
    CheckReport r{"con/self-conjunction/" + f.name + "/" + d.name};
    Model model = Model::bounded(u_, f.prog.defs);
    SubtypeContext sub(model, Mode::Precise);
    sub.sidecar = f.prog.program.scripts;
    TypeChecker tc(sub);
    try {
      TermPtr premise = mk::ascribe(d.derivation->term, d.type);
      TermPtr both = mk::conj_term(premise, premise);
      auto dc = tc.synth(d.derivation->ctx, f.prog.delta, both);
      if (!dc)
        return fail_at(r, {{"error", "conjunction does not synthesize"}});
      verify_derivation(*dc, sub);
      Interpreter in(u_);
      for (auto &eta : enumerate_envs(f.prog.delta, u_)) {
        ++r.cases;
        ProgramDens dens = interpret_program(f.prog, in, eta);
        if (!den_equal(in.interp(*dc, eta, dens.rho), in.interp(*d.derivation, eta, dens.rho), d.type, u_))
          return fail_at(r, {{"env", to_json(eta)}});
      }
      if (in.approximate())
        r.status = Status::Inconclusive;
    } catch (const SlaError &e) {
      return fail_at(r, {{"error", e.what()}});
    }
    return r;
  }

  // con(c, c2) lands in [p & p', q & q'](r) at every precise pool frame r.
  void transfer(std::vector<CheckReport> &out) {
    size_t total = 0;
    for (auto &fo : observations()) {
      Semantics &sem = semantics(*fo.file);
      CheckReport rep{"con/transfer/" + fo.file->name};
      std::map<Env, std::vector<std::pair<const Obs *, TripleObject>>> by_env;
      for (auto &o : fo.obs)
        by_env[o.eta].push_back({&o, {sem.pred(o.pre, o.eta), sem.pred(o.post, o.eta)}});
      for (auto &[eta, group] : by_env) {
        std::vector<Pred> frames;
        for (auto &p0 : fo.pool)
          if (sem.precise(p0, eta))
            frames.push_back(sem.pred(p0, eta));
        for (size_t a = 0; a < group.size() && rep.status == Status::Pass; ++a)
          for (size_t b = a; b < group.size() && rep.status == Status::Pass; ++b)
            for (auto &r : frames) {
              auto &[oa, ta] = group[a];
              auto &[ob, tb] = group[b];
              if (!in_triple_domain(oa->cmd, ta, r) || !in_triple_domain(ob->cmd, tb, r))
                continue;
              ++rep.cases;
              TripleObject meet{pred_intersect(ta.p, tb.p), pred_intersect(ta.q, tb.q)};
              if (auto w = triple_domain_witness(sem_con(oa->cmd, ob->cmd), meet, r)) {
                rep = fail_at(rep, {{"left", oa->label}, {"right", ob->label}, {"r", show(r)}, {"domain", *w}});
                break;
              }
            }
      }
      total += rep.cases;
      out.push_back(rep);
    }
    CheckReport cover{"con/transfer-coverage", Status::Pass, {}, total};
    if (total < 10)
      cover.status = Status::Inconclusive;
    out.push_back(cover);
  }

  void coherence(std::vector<CheckReport> &out) {
    size_t judged = 0;
    for (auto &f : files_) {
      Model model = Model::bounded(u_, f.prog.defs);
      SubtypeContext sub(model, cfg_.mode);
      sub.sidecar = f.prog.program.scripts;
      for (auto &d : f.prog.decls) {
        if (!d.derivation)
          continue;
        std::string name = "coherence/" + f.name + "/" + d.name;
        try {
          TermPtr padded = pad_term(*d.derivation);
          Derivation d2 = check_term(d.derivation->ctx, f.prog.delta, padded, d.type, sub);
          verify_derivation(d2, sub);
          CheckReport r = check_coherence(*d.derivation, d2, f.prog, u_, name);
          if (derivation_size(d2) <= derivation_size(*d.derivation))
            r = fail_at(r, {{"error", "padding did not change the derivation"}});
          out.push_back(r);
          ++judged;
        } catch (const SlaError &e) {
          out.push_back(fail_at(CheckReport{name}, {{"error", e.what()}}));
        }
      }
    }
    {
      // skip at {emp}-{emp}, directly and through a weakened precondition.
      CheckReport r{"coherence/skip-by-consequence"};
      auto defs = std::make_shared<const PredDefs>();
      Model model = Model::bounded(u_, defs);
      SubtypeContext sub(model, cfg_.mode);
      TypePtr t = parse_type("{emp}-{emp}");
      auto gamma = std::make_shared<const TypeContext>();
      try {
        Derivation d1 = check_term(gamma, {}, mk::skip(), t, sub);
        Derivation d2 =
            check_term(gamma, {}, parse_term("((skip : {emp /\\ 0 = 0}-{emp /\\ 0 = 0}) as {emp}-{emp} by (consequence))"), t, sub);
        verify_derivation(d2, sub);
        CheckedProgram empty;
        empty.defs = defs;
        r = check_coherence(d1, d2, empty, u_, r.check);
      } catch (const SlaError &e) {
        r = fail_at(r, {{"error", e.what()}});
      }
      out.push_back(r);
      ++judged;
    }
    CheckReport cover{"coherence/coverage", Status::Pass, {}, judged};
    if (judged < 5)
      cover.status = Status::Inconclusive;
    out.push_back(cover);
  }

  void soundness(std::vector<CheckReport> &out) {
    for (auto &fo : observations()) {
      Semantics &sem = semantics(*fo.file);
      CheckReport rep{"soundness/" + fo.file->name};
      for (auto &o : fo.obs) {
        for (auto &p0 : fo.pool) {
          if (rep.status == Status::Fail)
            break;
          rep.cases += sem.pred(mk::star(o.pre, p0), o.eta).heaps.size();
          if (auto w = sem.unsound(o, p0))
            rep = fail_at(rep, *w);
        }
      }
      if (rep.status == Status::Pass && fo.approximate)
        rep.status = Status::Inconclusive;
      if (rep.status == Status::Pass && fo.obs.empty())
        rep.status = Status::Inconclusive;
      out.push_back(rep);
    }
  }

  // Leaf-by-leaf comparison of t (invariants applied by hand) with its
  // normal form, both evaluated in the bounded model.
  std::optional<json> leaves_differ(Model &m, const TypePtr &t, const TypePtr &nf, std::vector<Bits> invs,
                                    Env et, Env en) {
    if (t->kind == TypeExpr::Kind::Otimes) {
      invs.push_back(m.eval(t->inv, et));
      return leaves_differ(m, t->a, nf, std::move(invs), std::move(et), std::move(en));
    }
    if (t->kind != nf->kind)
      return json{{"error", "shapes differ"}, {"type", to_string(t)}, {"normal", to_string(nf)}};
    switch (t->kind) {
    case TypeExpr::Kind::Triple: {
      Bits pre = m.eval(t->pre, et), post = m.eval(t->post, et);
      for (auto &b : invs) {
        pre = m.star(pre, b);
        post = m.star(post, b);
      }
      if (pre != m.eval(nf->pre, en) || post != m.eval(nf->post, en))
        return json{{"leaf", to_string(t)}, {"normal", to_string(nf)}, {"env", to_json(et)}};
      return std::nullopt;
    }
    case TypeExpr::Kind::Pi:
      for (Val v : u_.values()) {
        Env a = et, b = en;
        a[t->var] = v;
        b[nf->var] = v;
        if (auto w = leaves_differ(m, t->a, nf->a, invs, a, b))
          return w;
      }
      return std::nullopt;
    case TypeExpr::Kind::Arrow:
      if (auto w = leaves_differ(m, t->a, nf->a, invs, et, en))
        return w;
      return leaves_differ(m, t->b, nf->b, invs, et, en);
    default: return json{{"error", "unexpected invariant in normal form"}};
    }
  }

  void normalize(std::vector<CheckReport> &out) {
    for (auto &f : files_) {
      std::vector<TypePtr> types;
      std::function<void(const TermPtr &)> walk = [&](const TermPtr &m) {
        if (!m)
          return;
        if (m->type)
          types.push_back(m->type);
        walk(m->m1);
        walk(m->m2);
      };
      for (auto &d : f.prog.program.decls) {
        types.push_back(d.type);
        walk(d.term);
      }
      if (f.prog.program.goal) {
        types.push_back(f.prog.program.goal->type);
        walk(f.prog.program.goal->term);
      }
      Model m = Model::bounded(u_, f.prog.defs);
      CheckReport rep{"normalize/" + f.name};
      for (auto &t : types) {
        if (rep.status == Status::Fail)
          break;
        VarSet fv = free_vars(t);
        fv.insert(f.prog.delta.begin(), f.prog.delta.end());
        TypePtr nf = normalize_otimes(t, fv).type;
        for (auto &eta : enumerate_envs(free_vars(t), u_)) {
          ++rep.cases;
          if (auto w = leaves_differ(m, t, nf, {}, eta, eta)) {
            rep = fail_at(rep, *w);
            break;
          }
        }
      }
      out.push_back(rep);
    }
  }

  HarnessConfig cfg_;
  Universe u_;
  std::vector<AssertionPtr> base_pool_;
  std::vector<Loaded> files_;
  std::vector<CheckReport> load_errors_;
  std::vector<std::unique_ptr<Semantics>> sems_;
  std::vector<FileObs> obs_;
  bool obs_ready_ = false;
};

} // namespace

const std::vector<std::string> &suite_names() {
  static const std::vector<std::string> names{"comm-laws", "triples",   "pers",     "con",
                                              "coherence", "soundness", "normalize"};
  return names;
}

std::vector<CheckReport> run_suite(const std::string &suite, const HarnessConfig &cfg) {
  if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw SlaError("unknown suite '" + suite + "'");
  return Harness(cfg).run(suite);
}

} // namespace sla
