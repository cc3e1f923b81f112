#pragma once

#include "sla/syntax.hpp"

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sla {

using Loc = Val;

class EvalError : public SlaError {
public:
  using SlaError::SlaError;
};

class CapError : public SlaError {
public:
  using SlaError::SlaError;
};

// Finite partial map from positive locations to values. Cells are kept
// sorted by location, so equal heaps have identical representations.
class Heap {
public:
  using Cell = std::pair<Loc, Val>;

  Heap() = default;
  explicit Heap(std::vector<Cell> cells);

  bool contains(Loc l) const;
  std::optional<Val> get(Loc l) const;
  Heap with(Loc l, Val v) const;
  Heap without(Loc l) const;

  size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const std::vector<Cell> &cells() const { return cells_; }
  std::set<Loc> domain() const;

  auto operator<=>(const Heap &) const = default;
  bool operator==(const Heap &) const = default;

private:
  std::vector<Cell> cells_;
};

bool disjoint(const Heap &a, const Heap &b);
// h1 . h2, defined only for disjoint heaps.
std::optional<Heap> combine(const Heap &a, const Heap &b);
// All subheaps in canonical order (including [] and h itself).
std::vector<Heap> subheaps(const Heap &h);
Heap difference(const Heap &h, const Heap &sub);

using Env = std::map<std::string, Val>;

struct Universe {
  Loc loc_max = 3;
  Val val_min = 0;
  Val val_max = 3;
  int fix_budget = 16;
  size_t cap = 1'000'000;

  // Throws on locMax < 1, valMin > 0, valMax < 0 or 1..locMax outside vals.
  void validate() const;
  std::vector<Val> values() const;
  size_t heap_count() const;
  bool operator==(const Universe &) const = default;
};

// Every heap with dom in 1..locMax and values in valMin..valMax, ascending.
std::vector<Heap> enumerate_heaps(const Universe &u);
// Every environment on delta with values in valMin..valMax.
std::vector<Env> enumerate_envs(const VarSet &delta, const Universe &u);

struct OutcomeSet {
  std::set<Heap> heaps;
  bool wrong = false;

  static OutcomeSet fault() { return {{}, true}; }
  static OutcomeSet single(Heap h) { return {{std::move(h)}, false}; }

  void merge(const OutcomeSet &o);
  bool operator==(const OutcomeSet &) const = default;
};

// Checked arithmetic; throws EvalError on overflow.
Val checked_add(Val a, Val b);
Val checked_sub(Val a, Val b);
Val eval_expr(const ExprPtr &e, const Env &env);

// Text forms: "[]", "[1->5, 2->0]"; outcome sets "{[1->5], WRONG}".
std::string to_string(const Heap &h);
std::string to_string(const OutcomeSet &o);
std::string to_string(const Env &env);
Heap parse_heap(std::string_view text);
OutcomeSet parse_outcomes(std::string_view text);
// "i=1, j=2"
Env parse_env(std::string_view text);

} // namespace sla
