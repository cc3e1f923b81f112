#include "sla/subtype.hpp"

#include <algorithm>

namespace sla {

using Rule = SubtypeStep::Rule;

std::string to_string(Mode m) { return m == Mode::Precise ? "precise" : "unrestricted"; }

Mode parse_mode(const std::string &s) {
  if (s == "precise")
    return Mode::Precise;
  if (s == "unrestricted")
    return Mode::Unrestricted;
  throw SlaError("unknown mode '" + s + "' (expected precise or unrestricted)");
}

std::string rule_name(Rule r) {
  switch (r) {
  case Rule::Refl: return "refl";
  case Rule::Trans: return "trans";
  case Rule::ArrowStruct: return "arrowStruct";
  case Rule::PiStruct: return "piStruct";
  case Rule::OtimesStruct: return "otimesStruct";
  case Rule::Consequence: return "consequence";
  case Rule::FrameAxiom: return "frameAxiom";
  case Rule::DistTriple: return "distTriple";
  case Rule::DistPi: return "distPi";
  case Rule::DistOtimes: return "distOtimes";
  case Rule::DistArrow: return "distArrow";
  }
  return "?";
}

size_t count_rule(const SubtypeStep &s, Rule r) {
  size_t n = s.rule == r ? 1 : 0;
  for (auto &c : s.children)
    n += count_rule(c, r);
  return n;
}

// ------------------------------------------------------------ oracle cache

namespace {
std::string delta_key(const VarSet &delta, const VarSet &fv) {
  std::string k;
  for (auto &v : fv)
    k += (delta.count(v) ? "+" : "!") + v + ",";
  return k;
}
} // namespace

EntailResult SubtypeContext::entails(const VarSet &delta, const AssertionPtr &lhs, const AssertionPtr &rhs) {
  VarSet fv = free_vars(lhs);
  for (auto &v : free_vars(rhs))
    fv.insert(v);
  std::string key = delta_key(delta, fv) + to_string(lhs) + " |= " + to_string(rhs);
  auto it = entail_cache_.find(key);
  if (it != entail_cache_.end())
    return it->second;
  ++entailment_checks;
  EntailResult r = sla::entails(delta, lhs, rhs, model_);
  entail_cache_.emplace(key, r);
  return r;
}

PrecisionResult SubtypeContext::precise(const VarSet &delta, const AssertionPtr &p) {
  std::string key = delta_key(delta, free_vars(p)) + to_string(p);
  auto it = precise_cache_.find(key);
  if (it != precise_cache_.end())
    return it->second;
  PrecisionResult r = is_precise(delta, p, model_);
  precise_cache_.emplace(key, r);
  return r;
}

// ------------------------------------------------------------- step helpers

namespace {

SubtypeStep refl(const TypePtr &t) {
  SubtypeStep s;
  s.rule = Rule::Refl;
  s.source = s.target = t;
  return s;
}

SubtypeStep make(Rule r, TypePtr src, TypePtr tgt, std::vector<SubtypeStep> children = {}) {
  SubtypeStep s;
  s.rule = r;
  s.source = std::move(src);
  s.target = std::move(tgt);
  s.children = std::move(children);
  return s;
}

// Chains proofs end to end, dropping reflexivity and flattening nested chains.
SubtypeStep compose(const TypePtr &source, const std::vector<SubtypeStep> &parts) {
  std::vector<SubtypeStep> flat;
  for (auto &p : parts) {
    if (p.rule == Rule::Refl)
      continue;
    if (p.rule == Rule::Trans)
      flat.insert(flat.end(), p.children.begin(), p.children.end());
    else
      flat.push_back(p);
  }
  if (flat.empty())
    return refl(parts.empty() ? source : parts.back().target);
  if (flat.size() == 1)
    return flat.front();
  TypePtr src = flat.front().source, tgt = flat.back().target;
  return make(Rule::Trans, std::move(src), std::move(tgt), std::move(flat));
}

// Renames a pi binder so that it avoids every name in `avoid`.
TypePtr fresh_pi(const TypePtr &pi, const VarSet &avoid) {
  if (!avoid.count(pi->var))
    return pi;
  std::string nb = fresh_name(pi->var);
  return mk::pi(nb, subst_type(pi->a, mk::var(nb), pi->var));
}

VarSet with(VarSet s, const std::string &v) {
  s.insert(v);
  return s;
}

// Left-to-right reading of a distribution axiom; nullptr if cur does not match.
TypePtr dist_forward(Rule r, const TypePtr &cur, const VarSet &delta) {
  if (cur->kind != TypeExpr::Kind::Otimes)
    return nullptr;
  const TypePtr &inner = cur->a;
  const AssertionPtr &p = cur->inv;
  switch (r) {
  case Rule::DistTriple:
    if (inner->kind != TypeExpr::Kind::Triple)
      return nullptr;
    return mk::triple(mk::star(inner->pre, p), mk::star(inner->post, p));
  case Rule::DistOtimes:
    if (inner->kind != TypeExpr::Kind::Otimes)
      return nullptr;
    return mk::otimes(inner->a, mk::star(inner->inv, p));
  case Rule::DistArrow:
    if (inner->kind != TypeExpr::Kind::Arrow)
      return nullptr;
    return mk::arrow(mk::otimes(inner->a, p), mk::otimes(inner->b, p));
  case Rule::DistPi: {
    if (inner->kind != TypeExpr::Kind::Pi)
      return nullptr;
    VarSet avoid = delta;
    for (auto &v : free_vars(p))
      avoid.insert(v);
    TypePtr pi = fresh_pi(inner, avoid);
    return mk::pi(pi->var, mk::otimes(pi->a, p));
  }
  default: return nullptr;
  }
}

// Splits `whole` as prefix * tail where tail matches `tail`.
AssertionPtr strip_suffix(const AssertionPtr &whole, const AssertionPtr &tail) {
  auto w = flatten(whole, Assertion::Kind::Star);
  auto t = flatten(tail, Assertion::Kind::Star);
  if (w.size() <= t.size())
    return nullptr;
  for (size_t i = 0; i < t.size(); ++i)
    if (!alpha_equal(w[w.size() - t.size() + i], t[i]))
      return nullptr;
  w.resize(w.size() - t.size());
  return rebuild(w, Assertion::Kind::Star);
}

TypePtr dist_backward(ScriptStep::Kind k, const TypePtr &cur, const AssertionPtr &p) {
  using SK = ScriptStep::Kind;
  switch (k) {
  case SK::UndistTriple: {
    if (cur->kind != TypeExpr::Kind::Triple)
      return nullptr;
    auto a = strip_suffix(cur->pre, p), b = strip_suffix(cur->post, p);
    if (!a || !b)
      return nullptr;
    return mk::otimes(mk::triple(a, b), p);
  }
  case SK::UndistOtimes: {
    if (cur->kind != TypeExpr::Kind::Otimes)
      return nullptr;
    auto q = strip_suffix(cur->inv, p);
    if (!q)
      return nullptr;
    return mk::otimes(mk::otimes(cur->a, q), p);
  }
  case SK::UndistArrow: {
    if (cur->kind != TypeExpr::Kind::Arrow || cur->a->kind != TypeExpr::Kind::Otimes ||
        cur->b->kind != TypeExpr::Kind::Otimes || !alpha_equal(cur->a->inv, cur->b->inv))
      return nullptr;
    return mk::otimes(mk::arrow(cur->a->a, cur->b->a), cur->a->inv);
  }
  case SK::UndistPi: {
    if (cur->kind != TypeExpr::Kind::Pi || cur->a->kind != TypeExpr::Kind::Otimes)
      return nullptr;
    if (free_vars(cur->a->inv).count(cur->var))
      return nullptr;
    return mk::otimes(mk::pi(cur->var, cur->a->a), cur->a->inv);
  }
  default: return nullptr;
  }
}

Rule dist_rule(ScriptStep::Kind k) {
  using SK = ScriptStep::Kind;
  switch (k) {
  case SK::DistTriple:
  case SK::UndistTriple: return Rule::DistTriple;
  case SK::DistPi:
  case SK::UndistPi: return Rule::DistPi;
  case SK::DistOtimes:
  case SK::UndistOtimes: return Rule::DistOtimes;
  default: return Rule::DistArrow;
  }
}

std::string entail_failure(const std::string &what, const AssertionPtr &l, const AssertionPtr &r,
                           const EntailResult &e) {
  return what + ": " + to_string(l) + " does not entail " + to_string(r) + " (bounded-model witness: env {" +
         to_string(e.env) + "}, heap " + to_string(e.heap) + ")";
}

void check_consequence(const VarSet &delta, const TypePtr &src, const TypePtr &tgt, SubtypeContext &ctx) {
  if (src->kind != TypeExpr::Kind::Triple || tgt->kind != TypeExpr::Kind::Triple)
    throw SubtypeError("consequence needs triples, got " + to_string(src) + " and " + to_string(tgt));
  auto pre = ctx.entails(delta, tgt->pre, src->pre);
  if (!pre.holds)
    throw SubtypeError(entail_failure("consequence precondition", tgt->pre, src->pre, pre), pre.env, pre.heap);
  auto post = ctx.entails(delta, src->post, tgt->post);
  if (!post.holds)
    throw SubtypeError(entail_failure("consequence postcondition", src->post, tgt->post, post), post.env,
                       post.heap);
}

void check_frame_gate(const VarSet &delta, const AssertionPtr &p, SubtypeContext &ctx) {
  well_formed_assertion(delta, p);
  if (ctx.mode() != Mode::Precise)
    return;
  auto r = ctx.precise(delta, p);
  if (!r.precise) {
    std::string subs;
    for (auto &h : r.subheaps)
      subs += (subs.empty() ? "" : " and ") + to_string(h);
    throw SubtypeError("frame " + to_string(p) + " is not precise: heap " + to_string(r.heap) +
                           " has subheaps " + subs + " satisfying it (env {" + to_string(r.env) + "})",
                       r.env, r.heap);
  }
}

// --------------------------------------------------------------- normalize

Normalized push(const TypePtr &t, const AssertionPtr &p, const VarSet &delta);

Normalized nf(const TypePtr &t, const VarSet &delta) {
  switch (t->kind) {
  case TypeExpr::Kind::Triple: return {t, refl(t)};
  case TypeExpr::Kind::Arrow: {
    Normalized a = nf(t->a, delta), b = nf(t->b, delta);
    TypePtr out = mk::arrow(a.type, b.type);
    if (a.proof.rule == Rule::Refl && b.proof.rule == Rule::Refl)
      return {t, refl(t)};
    return {out, make(Rule::ArrowStruct, t, out, {reverse_step(a.proof), b.proof})};
  }
  case TypeExpr::Kind::Pi: {
    TypePtr pi = fresh_pi(t, delta);
    Normalized b = nf(pi->a, with(delta, pi->var));
    if (b.proof.rule == Rule::Refl)
      return {pi, refl(pi)};
    TypePtr out = mk::pi(pi->var, b.type);
    return {out, make(Rule::PiStruct, pi, out, {b.proof})};
  }
  case TypeExpr::Kind::Otimes: return push(t->a, t->inv, delta);
  }
  return {t, refl(t)};
}

// Normal form of t @ p.
Normalized push(const TypePtr &t, const AssertionPtr &p, const VarSet &delta) {
  TypePtr whole = mk::otimes(t, p);
  Rule r;
  switch (t->kind) {
  case TypeExpr::Kind::Triple: r = Rule::DistTriple; break;
  case TypeExpr::Kind::Otimes: r = Rule::DistOtimes; break;
  case TypeExpr::Kind::Arrow: r = Rule::DistArrow; break;
  default: r = Rule::DistPi; break;
  }
  TypePtr next = dist_forward(r, whole, delta);
  SubtypeStep first = make(r, whole, next);
  Normalized rest = nf(next, delta);
  return {rest.type, compose(whole, {first, rest.proof})};
}

} // namespace

bool has_otimes(const TypePtr &t) {
  if (!t)
    return false;
  return t->kind == TypeExpr::Kind::Otimes || has_otimes(t->a) || has_otimes(t->b);
}

Normalized normalize_otimes(const TypePtr &t, const VarSet &delta) { return nf(t, delta); }

TypePtr apply_frame(const TypePtr &t, const AssertionPtr &p, const VarSet &delta, SubtypeContext &ctx) {
  check_frame_gate(delta, p, ctx);
  return mk::otimes(t, p);
}

SubtypeStep reverse_step(const SubtypeStep &s) {
  SubtypeStep r = s;
  std::swap(r.source, r.target);
  switch (s.rule) {
  case Rule::Refl: break;
  case Rule::Trans:
    r.children.clear();
    for (auto it = s.children.rbegin(); it != s.children.rend(); ++it)
      r.children.push_back(reverse_step(*it));
    break;
  case Rule::ArrowStruct:
  case Rule::PiStruct:
  case Rule::OtimesStruct:
    for (auto &c : r.children)
      c = reverse_step(c);
    break;
  case Rule::DistTriple:
  case Rule::DistPi:
  case Rule::DistOtimes:
  case Rule::DistArrow: r.reversed = !s.reversed; break;
  case Rule::Consequence:
  case Rule::FrameAxiom: throw SubtypeError("cannot reverse a " + rule_name(s.rule) + " step");
  }
  return r;
}

// ------------------------------------------------------------- structural

namespace {

SubtypeStep structural(const VarSet &delta, const TypePtr &s, const TypePtr &t, SubtypeContext &ctx) {
  if (alpha_equal(s, t))
    return refl(s);
  if (s->kind != t->kind)
    throw SubtypeError("shape mismatch: " + to_string(s) + " vs " + to_string(t));
  switch (s->kind) {
  case TypeExpr::Kind::Triple:
    check_consequence(delta, s, t, ctx);
    return make(Rule::Consequence, s, t);
  case TypeExpr::Kind::Arrow: {
    SubtypeStep arg = structural(delta, t->a, s->a, ctx);
    SubtypeStep res = structural(delta, s->b, t->b, ctx);
    return make(Rule::ArrowStruct, s, t, {arg, res});
  }
  case TypeExpr::Kind::Pi: {
    VarSet avoid = delta;
    if (s->var != t->var)
      for (auto &v : free_vars(t))
        avoid.insert(v);
    TypePtr sp = fresh_pi(s, avoid);
    TypePtr tb = subst_type(t->a, mk::var(sp->var), t->var);
    TypePtr tp = mk::pi(sp->var, tb);
    SubtypeStep body = structural(with(delta, sp->var), sp->a, tb, ctx);
    return make(Rule::PiStruct, sp, tp, {body});
  }
  case TypeExpr::Kind::Otimes: {
    if (!alpha_equal(s->inv, t->inv))
      throw SubtypeError("invariant mismatch: " + to_string(s->inv) + " vs " + to_string(t->inv));
    SubtypeStep body = structural(delta, s->a, t->a, ctx);
    return make(Rule::OtimesStruct, s, t, {body});
  }
  }
  throw SubtypeError("unreachable");
}

class Replayer {
public:
  explicit Replayer(SubtypeContext &ctx) : ctx_(ctx) {}

  // positive: the returned proof is cur <= result; otherwise result <= cur.
  std::pair<TypePtr, SubtypeStep> chain(const Script &steps, TypePtr cur, bool positive, const TypePtr &hint,
                                        const VarSet &delta) {
    std::vector<SubtypeStep> proofs;
    TypePtr start = cur;
    for (auto &st : steps) {
      auto [next, proof] = step(st, cur, positive, hint, delta);
      proofs.push_back(std::move(proof));
      cur = next;
    }
    if (!positive)
      std::reverse(proofs.begin(), proofs.end());
    return {cur, compose(positive ? start : cur, proofs)};
  }

private:
  SubtypeStep oriented(Rule r, const TypePtr &cur, const TypePtr &next, bool positive,
                       std::vector<SubtypeStep> children = {}) {
    return positive ? make(r, cur, next, std::move(children)) : make(r, next, cur, std::move(children));
  }

  [[noreturn]] void mismatch(const ScriptStep &st, const TypePtr &cur) {
    throw SubtypeError("script step " + to_string(st) + " does not apply to " + to_string(cur));
  }

  std::pair<TypePtr, SubtypeStep> step(const ScriptStep &st, const TypePtr &cur, bool positive,
                                       const TypePtr &hint, const VarSet &delta) {
    using SK = ScriptStep::Kind;
    switch (st.kind) {
    case SK::Refl: return {cur, refl(cur)};
    case SK::Frame: {
      check_frame_gate(delta, st.assertion, ctx_);
      if (positive) {
        TypePtr next = mk::otimes(cur, st.assertion);
        SubtypeStep s = make(Rule::FrameAxiom, cur, next);
        s.frame = st.assertion;
        return {next, s};
      }
      if (cur->kind != TypeExpr::Kind::Otimes || !alpha_equal(cur->inv, st.assertion))
        mismatch(st, cur);
      SubtypeStep s = make(Rule::FrameAxiom, cur->a, cur);
      s.frame = cur->inv;
      return {cur->a, s};
    }
    case SK::DistTriple:
    case SK::DistPi:
    case SK::DistOtimes:
    case SK::DistArrow: {
      Rule r = dist_rule(st.kind);
      TypePtr next = dist_forward(r, cur, delta);
      if (!next)
        mismatch(st, cur);
      SubtypeStep s = oriented(r, cur, next, positive);
      s.reversed = !positive;
      return {next, s};
    }
    case SK::UndistTriple:
    case SK::UndistPi:
    case SK::UndistOtimes:
    case SK::UndistArrow: {
      Rule r = dist_rule(st.kind);
      TypePtr next = dist_backward(st.kind, cur, st.assertion);
      if (!next)
        mismatch(st, cur);
      SubtypeStep s = oriented(r, cur, next, positive);
      s.reversed = positive;
      return {next, s};
    }
    case SK::Normalize: {
      Normalized n = normalize_otimes(cur, delta);
      return {n.type, positive ? n.proof : reverse_step(n.proof)};
    }
    case SK::Consequence: {
      TypePtr target = st.target ? st.target : hint;
      if (!target)
        throw SubtypeError("consequence step has no target here; give one explicitly");
      if (positive)
        check_consequence(delta, cur, target, ctx_);
      else
        check_consequence(delta, target, cur, ctx_);
      return {target, oriented(Rule::Consequence, cur, target, positive)};
    }
    case SK::Arg:
    case SK::Res: {
      if (cur->kind != TypeExpr::Kind::Arrow)
        mismatch(st, cur);
      TypePtr h = hint && hint->kind == TypeExpr::Kind::Arrow ? (st.kind == SK::Arg ? hint->a : hint->b) : nullptr;
      if (st.kind == SK::Arg) {
        auto [a2, inner] = chain(st.children, cur->a, !positive, h, delta);
        TypePtr next = mk::arrow(a2, cur->b);
        return {next, oriented(Rule::ArrowStruct, cur, next, positive, {inner, refl(cur->b)})};
      }
      auto [b2, inner] = chain(st.children, cur->b, positive, h, delta);
      TypePtr next = mk::arrow(cur->a, b2);
      return {next, oriented(Rule::ArrowStruct, cur, next, positive, {refl(cur->a), inner})};
    }
    case SK::Body: {
      if (cur->kind != TypeExpr::Kind::Pi)
        mismatch(st, cur);
      TypePtr pi = fresh_pi(cur, delta);
      TypePtr h;
      if (hint && hint->kind == TypeExpr::Kind::Pi)
        h = subst_type(hint->a, mk::var(pi->var), hint->var);
      auto [b2, inner] = chain(st.children, pi->a, positive, h, with(delta, pi->var));
      TypePtr next = mk::pi(pi->var, b2);
      return {next, oriented(Rule::PiStruct, pi, next, positive, {inner})};
    }
    case SK::Inner: {
      if (cur->kind != TypeExpr::Kind::Otimes)
        mismatch(st, cur);
      TypePtr h = hint && hint->kind == TypeExpr::Kind::Otimes ? hint->a : nullptr;
      auto [b2, inner] = chain(st.children, cur->a, positive, h, delta);
      TypePtr next = mk::otimes(b2, cur->inv);
      return {next, oriented(Rule::OtimesStruct, cur, next, positive, {inner})};
    }
    case SK::Trans: return chain(st.children, cur, positive, hint, delta);
    case SK::Ref: {
      auto it = ctx_.sidecar.find(st.label);
      if (it == ctx_.sidecar.end())
        throw SubtypeError("no script named '" + st.label + "'");
      return chain(it->second, cur, positive, hint, delta);
    }
    }
    mismatch(st, cur);
  }

  SubtypeContext &ctx_;
};

void expect_alpha(const TypePtr &a, const TypePtr &b, const std::string &what) {
  if (!alpha_equal(a, b))
    throw SubtypeError(what + ": expected " + to_string(b) + ", found " + to_string(a));
}

} // namespace

SubtypeStep check_subtype(const VarSet &delta, const TypePtr &source, const TypePtr &target, SubtypeContext &ctx,
                          const std::optional<Script> &script) {
  SubtypeStep proof;
  if (script) {
    Replayer rp(ctx);
    auto [end, p] = rp.chain(*script, source, true, target, delta);
    if (!alpha_equal(end, target))
      throw SubtypeError("script ends at " + to_string(end) + " but the cast expects " + to_string(target));
    proof = p;
  } else {
    Normalized ns = normalize_otimes(source, delta);
    Normalized nt = normalize_otimes(target, delta);
    SubtypeStep mid = structural(delta, ns.type, nt.type, ctx);
    proof = compose(source, {ns.proof, mid, reverse_step(nt.proof)});
  }
  if (!alpha_equal(proof.source, source) || !alpha_equal(proof.target, target))
    throw SubtypeError("internal: proof endpoints do not match the judgment");
  verify_step(delta, proof, ctx);
  return proof;
}

void verify_step(const VarSet &delta, const SubtypeStep &s, SubtypeContext &ctx) {
  auto need_children = [&](size_t n) {
    if (s.children.size() != n)
      throw SubtypeError(rule_name(s.rule) + " step has " + std::to_string(s.children.size()) + " premises");
  };
  switch (s.rule) {
  case Rule::Refl: expect_alpha(s.source, s.target, "refl"); break;
  case Rule::Trans: {
    if (s.children.empty())
      throw SubtypeError("empty trans chain");
    expect_alpha(s.children.front().source, s.source, "trans start");
    for (size_t i = 0; i + 1 < s.children.size(); ++i)
      expect_alpha(s.children[i + 1].source, s.children[i].target, "trans link");
    expect_alpha(s.children.back().target, s.target, "trans end");
    for (auto &c : s.children)
      verify_step(delta, c, ctx);
    break;
  }
  case Rule::ArrowStruct: {
    need_children(2);
    if (s.source->kind != TypeExpr::Kind::Arrow || s.target->kind != TypeExpr::Kind::Arrow)
      throw SubtypeError("arrowStruct needs arrow types");
    expect_alpha(s.children[0].source, s.target->a, "arrowStruct argument");
    expect_alpha(s.children[0].target, s.source->a, "arrowStruct argument");
    expect_alpha(s.children[1].source, s.source->b, "arrowStruct result");
    expect_alpha(s.children[1].target, s.target->b, "arrowStruct result");
    verify_step(delta, s.children[0], ctx);
    verify_step(delta, s.children[1], ctx);
    break;
  }
  case Rule::PiStruct: {
    need_children(1);
    if (s.source->kind != TypeExpr::Kind::Pi || s.target->kind != TypeExpr::Kind::Pi)
      throw SubtypeError("piStruct needs pi types");
    const std::string &i = s.source->var;
    if (delta.count(i))
      throw SubtypeError("piStruct binder '" + i + "' is in the stack context");
    expect_alpha(s.children[0].source, s.source->a, "piStruct body");
    expect_alpha(s.children[0].target, subst_type(s.target->a, mk::var(i), s.target->var), "piStruct body");
    verify_step(with(delta, i), s.children[0], ctx);
    break;
  }
  case Rule::OtimesStruct: {
    need_children(1);
    if (s.source->kind != TypeExpr::Kind::Otimes || s.target->kind != TypeExpr::Kind::Otimes ||
        !alpha_equal(s.source->inv, s.target->inv))
      throw SubtypeError("otimesStruct needs the same invariant on both sides");
    expect_alpha(s.children[0].source, s.source->a, "otimesStruct body");
    expect_alpha(s.children[0].target, s.target->a, "otimesStruct body");
    verify_step(delta, s.children[0], ctx);
    break;
  }
  case Rule::Consequence:
    need_children(0);
    check_consequence(delta, s.source, s.target, ctx);
    break;
  case Rule::FrameAxiom:
    need_children(0);
    if (!s.frame)
      throw SubtypeError("frameAxiom without a frame");
    expect_alpha(s.target, mk::otimes(s.source, s.frame), "frameAxiom");
    check_frame_gate(delta, s.frame, ctx);
    break;
  case Rule::DistTriple:
  case Rule::DistPi:
  case Rule::DistOtimes:
  case Rule::DistArrow: {
    need_children(0);
    const TypePtr &lhs = s.reversed ? s.target : s.source;
    const TypePtr &rhs = s.reversed ? s.source : s.target;
    TypePtr expect = dist_forward(s.rule, lhs, delta);
    if (!expect)
      throw SubtypeError(rule_name(s.rule) + " does not apply to " + to_string(lhs));
    expect_alpha(rhs, expect, rule_name(s.rule));
    if (s.rule == Rule::DistPi) {
      const TypePtr &pi = lhs->a;
      if (delta.count(pi->var) || free_vars(lhs->inv).count(pi->var))
        throw SubtypeError("distPi binder '" + pi->var + "' clashes with the stack context or invariant");
    }
    break;
  }
  }
}

} // namespace sla
