#pragma once

#include "sla/heap.hpp"
#include "sla/syntax.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sla {

// Explicit finite set of heaps.
struct Pred {
  std::set<Heap> heaps;

  bool contains(const Heap &h) const { return heaps.count(h) > 0; }
  bool operator==(const Pred &) const = default;
};

Pred pred_star(const Pred &a, const Pred &b);
Pred pred_intersect(const Pred &a, const Pred &b);
Pred pred_union(const Pred &a, const Pred &b);
bool pred_subset(const Pred &a, const Pred &b);
std::string to_string(const Pred &p);

// Bitset over the heaps of a HeapSpace.
class Bits {
public:
  Bits() = default;
  explicit Bits(size_t n, bool fill = false);

  size_t size() const { return n_; }
  bool test(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
  void set(size_t i) { w_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  size_t count() const;
  bool any() const;
  bool subset_of(const Bits &o) const;

  Bits &operator|=(const Bits &o);
  Bits &operator&=(const Bits &o);
  Bits operator~() const;
  bool operator==(const Bits &) const = default;

private:
  size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// A downward-closed finite set of heaps with precomputed splittings.
class HeapSpace {
public:
  explicit HeapSpace(std::vector<Heap> heaps);

  static std::shared_ptr<const HeapSpace> of_universe(const Universe &u);
  static std::shared_ptr<const HeapSpace> below(const Heap &h);

  size_t size() const { return heaps_.size(); }
  const Heap &heap(size_t i) const { return heaps_[i]; }
  const std::vector<Heap> &heaps() const { return heaps_; }
  std::optional<size_t> find(const Heap &h) const;
  size_t empty_index() const { return empty_; }
  // All (sub, rest) index pairs with heap(sub) . heap(rest) == heap(k).
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> &splits(size_t k) const { return splits_[k]; }

private:
  std::vector<Heap> heaps_;
  std::map<Heap, size_t> index_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> splits_;
  size_t empty_ = 0;
};

// Validated predicate definitions. Construction rejects unknown names, arity
// mismatches and recursion under negation.
class PredDefs {
public:
  PredDefs() = default;
  explicit PredDefs(std::vector<PredDef> defs);

  const std::vector<PredDef> &defs() const { return defs_; }
  std::optional<size_t> index(const std::string &name) const;
  size_t component(size_t i) const { return scc_[i]; }

private:
  std::vector<PredDef> defs_;
  std::map<std::string, size_t> index_;
  std::vector<size_t> scc_;
};

// Assertion denotations over a heap space, with quantifiers ranging over a
// fixed value list. Named predicates are least fixpoints computed by Kleene
// iteration from the empty denotation, solved per strongly connected
// component and memoized per argument tuple.
class Model {
public:
  Model(std::shared_ptr<const HeapSpace> space, std::vector<Val> values,
        std::shared_ptr<const PredDefs> defs);

  // Pointer-to facts are confined to the universe.
  static Model bounded(const Universe &u, std::shared_ptr<const PredDefs> defs);
  // Exact membership for h and its subheaps; quantifiers also range over the
  // locations and values occurring in h and env.
  static Model around(const Heap &h, const Universe &u, const Env &env,
                      std::shared_ptr<const PredDefs> defs);

  const HeapSpace &space() const { return *space_; }
  const std::vector<Val> &values() const { return values_; }
  const PredDefs &defs() const { return *defs_; }

  Bits eval(const AssertionPtr &p, const Env &env);
  Bits call(const std::string &name, const std::vector<Val> &args);
  Pred to_pred(const Bits &b) const;
  // Heaps outside the space are dropped.
  Bits from_pred(const Pred &p) const;
  Bits star(const Bits &a, const Bits &b) const;

  // Iterates of the fixpoint computation for one argument tuple, starting
  // with the empty denotation; recorded on a fresh cache.
  std::vector<Bits> iterates(const std::string &name, const std::vector<Val> &args);

  size_t max_table = 100000;

private:
  using Key = std::pair<size_t, std::vector<Val>>;
  struct Solve;

  Bits eval_in(const AssertionPtr &p, Env &env, Solve *ctx);
  Bits lookup(const Key &k, Solve *ctx);
  void solve(const Key &k, std::vector<Bits> *trace);

  std::shared_ptr<const HeapSpace> space_;
  std::vector<Val> values_;
  std::shared_ptr<const PredDefs> defs_;
  std::map<Key, Bits> done_;
};

using PredEnv = Model;

PredEnv build_pred_env(const std::vector<PredDef> &defs, const Universe &u);

Pred eval_assertion(const AssertionPtr &p, const Env &env, PredEnv &model);

// h in [[p]]env via direct evaluation; h need not lie in the universe.
bool satisfies(const Heap &h, const AssertionPtr &p, const Env &env, const Universe &u,
               std::shared_ptr<const PredDefs> defs);

struct EntailResult {
  bool holds = true;
  std::string basis = "bounded-model";
  Env env;
  Heap heap;
};

// For every env on delta: [[lhs]]env is contained in [[rhs]]env.
EntailResult entails(const VarSet &delta, const AssertionPtr &lhs, const AssertionPtr &rhs, PredEnv &model);

struct PrecisionResult {
  bool precise = true;
  Env env;
  Heap heap;
  std::vector<Heap> subheaps;
};

// For every env and heap h at most one subheap of h satisfies p.
PrecisionResult is_precise(const VarSet &delta, const AssertionPtr &p, PredEnv &model);

// Environments over the part of delta that p actually mentions.
// Throws if mentioned is not contained in delta.
std::vector<Env> relevant_envs(const VarSet &delta, const VarSet &mentioned, const std::vector<Val> &values,
                               size_t cap = 1'000'000);

} // namespace sla
