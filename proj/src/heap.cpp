#include "sla/heap.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace sla {

Heap::Heap(std::vector<Cell> cells) : cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  for (size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].first <= 0)
      throw EvalError("heap location " + std::to_string(cells_[i].first) + " is not positive");
    if (i && cells_[i].first == cells_[i - 1].first)
      throw EvalError("heap location " + std::to_string(cells_[i].first) + " mapped twice");
  }
}

namespace {
auto find_cell(const std::vector<Heap::Cell> &cells, Loc l) {
  return std::lower_bound(cells.begin(), cells.end(), l,
                          [](const Heap::Cell &c, Loc k) { return c.first < k; });
}
} // namespace

bool Heap::contains(Loc l) const {
  auto it = find_cell(cells_, l);
  return it != cells_.end() && it->first == l;
}

std::optional<Val> Heap::get(Loc l) const {
  auto it = find_cell(cells_, l);
  if (it != cells_.end() && it->first == l)
    return it->second;
  return std::nullopt;
}

Heap Heap::with(Loc l, Val v) const {
  if (l <= 0)
    throw EvalError("heap location " + std::to_string(l) + " is not positive");
  Heap h = *this;
  auto it = std::lower_bound(h.cells_.begin(), h.cells_.end(), l,
                             [](const Cell &c, Loc k) { return c.first < k; });
  if (it != h.cells_.end() && it->first == l)
    it->second = v;
  else
    h.cells_.insert(it, {l, v});
  return h;
}

Heap Heap::without(Loc l) const {
  Heap h = *this;
  auto it = std::lower_bound(h.cells_.begin(), h.cells_.end(), l,
                             [](const Cell &c, Loc k) { return c.first < k; });
  if (it != h.cells_.end() && it->first == l)
    h.cells_.erase(it);
  return h;
}

std::set<Loc> Heap::domain() const {
  std::set<Loc> d;
  for (auto &c : cells_)
    d.insert(c.first);
  return d;
}

bool disjoint(const Heap &a, const Heap &b) {
  auto i = a.cells().begin(), j = b.cells().begin();
  while (i != a.cells().end() && j != b.cells().end()) {
    if (i->first == j->first)
      return false;
    if (i->first < j->first)
      ++i;
    else
      ++j;
  }
  return true;
}

std::optional<Heap> combine(const Heap &a, const Heap &b) {
  if (!disjoint(a, b))
    return std::nullopt;
  std::vector<Heap::Cell> cells = a.cells();
  cells.insert(cells.end(), b.cells().begin(), b.cells().end());
  return Heap(std::move(cells));
}

std::vector<Heap> subheaps(const Heap &h) {
  const auto &cells = h.cells();
  if (cells.size() > 20)
    throw CapError("heap too large to enumerate subheaps");
  std::vector<Heap> out;
  size_t n = cells.size();
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::vector<Heap::Cell> part;
    for (size_t i = 0; i < n; ++i)
      if (mask & (size_t{1} << i))
        part.push_back(cells[i]);
    out.emplace_back(std::move(part));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Heap difference(const Heap &h, const Heap &sub) {
  std::vector<Heap::Cell> rest;
  for (auto &c : h.cells())
    if (!sub.contains(c.first))
      rest.push_back(c);
  return Heap(std::move(rest));
}

void Universe::validate() const {
  if (loc_max < 1)
    throw SlaError("universe: locMax must be at least 1");
  if (val_min > 0 || val_max < 0)
    throw SlaError("universe: the value range must contain 0");
  if (val_max < loc_max)
    throw SlaError("universe: the value range must contain every location 1..locMax");
  if (fix_budget < 1)
    throw SlaError("universe: fixBudget must be positive");
}

std::vector<Val> Universe::values() const {
  std::vector<Val> vs;
  for (Val v = val_min; v <= val_max; ++v)
    vs.push_back(v);
  return vs;
}

size_t Universe::heap_count() const {
  // (1 + |vals|)^locMax, saturating at cap + 1.
  size_t per = static_cast<size_t>(val_max - val_min + 2);
  size_t n = 1;
  for (Loc l = 0; l < loc_max; ++l)
    if (__builtin_mul_overflow(n, per, &n) || n > cap)
      return cap + 1;
  return n;
}

std::vector<Heap> enumerate_heaps(const Universe &u) {
  u.validate();
  if (u.heap_count() > u.cap)
    throw CapError("heap enumeration exceeds cap " + std::to_string(u.cap));
  std::vector<Heap> out{Heap{}};
  auto vals = u.values();
  for (Loc l = 1; l <= u.loc_max; ++l) {
    size_t n = out.size();
    for (size_t i = 0; i < n; ++i)
      for (Val v : vals)
        out.push_back(out[i].with(l, v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Env> enumerate_envs(const VarSet &delta, const Universe &u) {
  std::vector<Env> out{Env{}};
  auto vals = u.values();
  size_t total = 1;
  for (size_t k = 0; k < delta.size(); ++k) {
    total *= vals.size();
    if (total > u.cap)
      throw CapError("environment enumeration exceeds cap " + std::to_string(u.cap));
  }
  for (auto &v : delta) {
    std::vector<Env> next;
    next.reserve(out.size() * vals.size());
    for (auto &e : out)
      for (Val x : vals) {
        Env f = e;
        f[v] = x;
        next.push_back(std::move(f));
      }
    out = std::move(next);
  }
  return out;
}

void OutcomeSet::merge(const OutcomeSet &o) {
  wrong = wrong || o.wrong;
  heaps.insert(o.heaps.begin(), o.heaps.end());
}

Val checked_add(Val a, Val b) {
  Val r;
  if (__builtin_add_overflow(a, b, &r))
    throw EvalError("integer overflow in addition");
  return r;
}

Val checked_sub(Val a, Val b) {
  Val r;
  if (__builtin_sub_overflow(a, b, &r))
    throw EvalError("integer overflow in subtraction");
  return r;
}

Val eval_expr(const ExprPtr &e, const Env &env) {
  switch (e->kind) {
  case Expr::Kind::Var: {
    auto it = env.find(e->name);
    if (it == env.end())
      throw EvalError("unbound variable '" + e->name + "'");
    return it->second;
  }
  case Expr::Kind::Lit: return e->value;
  case Expr::Kind::Add: return checked_add(eval_expr(e->lhs, env), eval_expr(e->rhs, env));
  case Expr::Kind::Sub: return checked_sub(eval_expr(e->lhs, env), eval_expr(e->rhs, env));
  }
  return 0;
}

std::string to_string(const Heap &h) {
  std::string s = "[";
  bool first = true;
  for (auto &[l, v] : h.cells()) {
    if (!first)
      s += ", ";
    first = false;
    s += std::to_string(l) + "->" + std::to_string(v);
  }
  return s + "]";
}

std::string to_string(const OutcomeSet &o) {
  std::string s = "{";
  bool first = true;
  for (auto &h : o.heaps) {
    if (!first)
      s += ", ";
    first = false;
    s += to_string(h);
  }
  if (o.wrong)
    s += first ? "WRONG" : ", WRONG";
  return s + "}";
}

std::string to_string(const Env &env) {
  std::string s;
  for (auto &[k, v] : env) {
    if (!s.empty())
      s += ", ";
    s += k + "=" + std::to_string(v);
  }
  return s;
}

namespace {

class Scanner {
public:
  explicit Scanner(std::string_view t) : t_(t) {}
  void ws() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_])))
      ++i_;
  }
  bool accept(std::string_view s) {
    ws();
    if (t_.substr(i_, s.size()) == s) {
      i_ += s.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view s) {
    if (!accept(s))
      fail("expected '" + std::string(s) + "'");
  }
  Val integer() {
    ws();
    Val v = 0;
    const char *b = t_.data() + i_, *e = t_.data() + t_.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc())
      fail("expected integer");
    i_ += static_cast<size_t>(p - b);
    return v;
  }
  std::string ident() {
    ws();
    size_t j = i_;
    while (j < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[j])) || t_[j] == '_' || t_[j] == '\''))
      ++j;
    if (j == i_)
      fail("expected identifier");
    std::string s(t_.substr(i_, j - i_));
    i_ = j;
    return s;
  }
  bool done() {
    ws();
    return i_ == t_.size();
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg, SourcePos{1, static_cast<int>(i_) + 1});
  }
  Heap heap() {
    expect("[");
    std::vector<Heap::Cell> cells;
    if (!accept("]")) {
      do {
        Loc l = integer();
        expect("->");
        cells.emplace_back(l, integer());
      } while (accept(","));
      expect("]");
    }
    try {
      return Heap(std::move(cells));
    } catch (const EvalError &e) {
      fail(e.what());
    }
  }

private:
  std::string_view t_;
  size_t i_ = 0;
};

} // namespace

Heap parse_heap(std::string_view text) {
  Scanner s(text);
  Heap h = s.heap();
  if (!s.done())
    s.fail("trailing input after heap");
  return h;
}

OutcomeSet parse_outcomes(std::string_view text) {
  Scanner s(text);
  OutcomeSet o;
  s.expect("{");
  if (!s.accept("}")) {
    do {
      if (s.accept("WRONG"))
        o.wrong = true;
      else
        o.heaps.insert(s.heap());
    } while (s.accept(","));
    s.expect("}");
  }
  if (!s.done())
    s.fail("trailing input after outcome set");
  return o;
}

Env parse_env(std::string_view text) {
  Scanner s(text);
  Env env;
  if (s.done())
    return env;
  do {
    std::string k = s.ident();
    s.expect("=");
    bool neg = s.accept("-");
    Val v = s.integer();
    if (env.count(k))
      s.fail("variable '" + k + "' given twice");
    env[k] = neg ? -v : v;
  } while (s.accept(","));
  if (!s.done())
    s.fail("trailing input after environment");
  return env;
}

} // namespace sla
