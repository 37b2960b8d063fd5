#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "keyset/attribute_set.hpp"
#include "keyset/error.hpp"
#include "keyset/key_set.hpp"
#include "keyset/relation.hpp"

namespace keyset {

struct ImplicationInstance {
  Schema schema;
  KeySetFamily sigma;
  KeySet phi;
};

// A two-tuple relation that satisfies every member of sigma and violates phi,
// together with the key chosen from each member of sigma.
struct CounterexampleWitness {
  std::vector<AttributeSet> choice;
  Relation relation;
};

struct Decision {
  bool implied = false;
  std::optional<CounterexampleWitness> witness;  // present iff !implied
  std::uint64_t choices_examined = 0;
};

struct ImplicationOptions {
  // Largest |X1| * ... * |Xn| the exact decider will enumerate.
  std::uint64_t product_cap = 1'000'000;
};

namespace detail {

inline std::uint64_t product_size(const KeySetFamily& sigma) {
  std::uint64_t total = 1;
  for (const auto& ks : sigma) {
    if (total > std::numeric_limits<std::uint64_t>::max() / ks.size())
      return std::numeric_limits<std::uint64_t>::max();
    total *= ks.size();
  }
  return total;
}

// Calls f(choice) for every element of the product of sigma's key sets in
// canonical order (first member most significant). Stops early when f
// returns false.
template <typename F>
void for_each_choice(const KeySetFamily& sigma, F&& f) {
  std::vector<std::size_t> idx(sigma.size(), 0);
  std::vector<AttributeSet> choice;
  choice.reserve(sigma.size());
  for (const auto& ks : sigma) choice.push_back(ks[0]);
  for (;;) {
    if (!f(static_cast<const std::vector<AttributeSet>&>(choice))) return;
    std::size_t pos = sigma.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < sigma[pos].size()) {
        choice[pos] = sigma[pos][idx[pos]];
        break;
      }
      idx[pos] = 0;
      choice[pos] = sigma[pos][0];
      if (pos == 0) return;
    }
    if (sigma.empty()) return;
  }
}

// Union of the keys of phi contained in `bound`.
inline AttributeSet covered_union(const KeySet& phi, const AttributeSet& bound) {
  AttributeSet z;
  for (const auto& y : phi)
    if (y.is_subset_of(bound)) z |= y;
  return z;
}

// A choice fails when no chosen key lies inside the union of the phi-keys
// contained in the union of the choice.
inline bool is_failing_choice(const std::vector<AttributeSet>& choice, const KeySet& phi) {
  AttributeSet u;
  for (const auto& x : choice) u |= x;
  auto z = covered_union(phi, u);
  return std::none_of(choice.begin(), choice.end(), [&](const AttributeSet& x) { return x.is_subset_of(z); });
}

inline void check_instance(const ImplicationInstance& inst) {
  auto fits = [&](const KeySet& ks) {
    return std::all_of(ks.begin(), ks.end(), [&](const AttributeSet& k) { return inst.schema.covers(k); });
  };
  if (!fits(inst.phi)) throw SchemaError("phi uses attributes outside the schema");
  for (const auto& ks : inst.sigma)
    if (!fits(ks)) throw SchemaError("sigma uses attributes outside the schema");
}

inline Relation equal_total_pair(const Schema& schema) {
  std::vector<Cell> zeros(schema.size(), Cell("0"));
  return Relation::from_rows(schema, {zeros, zeros});
}

}  // namespace detail

// Two-tuple counterexample for a failing choice: the first tuple is 0
// everywhere; the second is 1 on one attribute A_i (the smallest of
// X_i minus the covered union) per chosen key, 0 on the rest of the union of
// the choice, and null elsewhere. Throws RuleError if the choice is not
// failing or does not pick one key from each member of sigma.
inline Relation build_counterexample(const std::vector<AttributeSet>& choice, const ImplicationInstance& inst) {
  if (choice.size() != inst.sigma.size())
    throw RuleError("choice has " + std::to_string(choice.size()) + " keys but sigma has " +
                    std::to_string(inst.sigma.size()) + " members");
  for (std::size_t i = 0; i < choice.size(); ++i)
    if (!inst.sigma[i].contains(choice[i]))
      throw RuleError("choice " + std::to_string(i) + " is not a key of sigma member " + std::to_string(i));
  if (!detail::is_failing_choice(choice, inst.phi))
    throw RuleError("choice is not failing; the construction would not be a counterexample");
  if (choice.empty()) return detail::equal_total_pair(inst.schema);

  AttributeSet u;
  for (const auto& x : choice) u |= x;
  auto z = detail::covered_union(inst.phi, u);
  AttributeSet ones;
  for (const auto& x : choice) ones.insert(*(x - z).first());

  std::vector<Cell> t(inst.schema.size(), Cell("0"));
  std::vector<Cell> t2(inst.schema.size());
  for (std::size_t a = 0; a < inst.schema.size(); ++a) {
    if (ones.contains(a))
      t2[a] = "1";
    else if (u.contains(a))
      t2[a] = "0";
  }
  return Relation::from_rows(inst.schema, {t, t2});
}

// Exact decision by enumerating the choices X1 x ... x Xn. Returns the
// witness for the first failing choice in canonical order. An empty sigma
// implies nothing: two equal total tuples violate every phi.
inline Decision implies(const ImplicationInstance& inst, const ImplicationOptions& opts = {}) {
  detail::check_instance(inst);
  Decision d;
  if (inst.sigma.empty()) {
    d.witness = CounterexampleWitness{{}, detail::equal_total_pair(inst.schema)};
    return d;
  }
  auto total = detail::product_size(inst.sigma);
  if (total > opts.product_cap)
    throw CapExceeded("implication product has " +
                      (total == std::numeric_limits<std::uint64_t>::max() ? std::string("too many")
                                                                          : std::to_string(total)) +
                      " choices, cap is " + std::to_string(opts.product_cap));

  std::optional<std::vector<AttributeSet>> failing;
  detail::for_each_choice(inst.sigma, [&](const std::vector<AttributeSet>& choice) {
    ++d.choices_examined;
    if (detail::is_failing_choice(choice, inst.phi)) {
      failing = choice;
      return false;
    }
    return true;
  });
  d.implied = !failing;
  if (failing) d.witness = CounterexampleWitness{*failing, build_counterexample(*failing, inst)};
  return d;
}

// Unary phi: implied iff the union of some member of sigma lies inside the
// attributes of phi. O(|sigma| * |phi|).
inline bool implies_unary(const KeySetFamily& sigma, const KeySet& phi) {
  if (!phi.is_unary()) throw RuleError("phi is not a unary key set");
  auto attrs = phi.attributes();
  return std::any_of(sigma.begin(), sigma.end(),
                     [&](const KeySet& ks) { return ks.attributes().is_subset_of(attrs); });
}

struct BruteForceOptions {
  std::size_t max_attributes = 12;
};

// Per-attribute relationship of a tuple pair.
enum class PairPattern : std::uint8_t { kEqualTotal, kUnequalTotal, kNotBothTotal };

// Realizes a pattern as a two-tuple relation: equal-total as (0,0),
// unequal-total as (0,1), not-both-total as (0,null).
inline Relation realize_pattern(const Schema& schema, const std::vector<PairPattern>& pattern) {
  std::vector<Cell> t(schema.size(), Cell("0"));
  std::vector<Cell> t2(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (pattern[a] == PairPattern::kEqualTotal) t2[a] = "0";
    if (pattern[a] == PairPattern::kUnequalTotal) t2[a] = "1";
  }
  return Relation::from_rows(schema, {t, t2});
}

// Classifies each attribute of a tuple pair.
inline std::vector<PairPattern> pair_pattern(const Tuple& t, const Tuple& u) {
  std::vector<PairPattern> out(t.arity());
  for (std::size_t a = 0; a < t.arity(); ++a) {
    if (t.is_null(a) || u.is_null(a))
      out[a] = PairPattern::kNotBothTotal;
    else
      out[a] = t.value(a) == u.value(a) ? PairPattern::kEqualTotal : PairPattern::kUnequalTotal;
  }
  return out;
}

// Exhaustive search over all 3^|R| two-tuple pair patterns. Any
// counterexample can be shrunk to one violating pair, so sigma implies phi
// iff no pattern satisfies sigma while violating phi.
inline bool implies_bruteforce(const ImplicationInstance& inst, const BruteForceOptions& opts = {}) {
  detail::check_instance(inst);
  const auto n = inst.schema.size();
  if (n > opts.max_attributes)
    throw CapExceeded("schema has " + std::to_string(n) + " attributes, brute force cap is " +
                      std::to_string(opts.max_attributes));
  std::vector<PairPattern> pattern(n, PairPattern::kEqualTotal);
  for (;;) {
    auto r = realize_pattern(inst.schema, pattern);
    auto t = r[0];
    auto u = r[1];
    bool sigma_ok = std::all_of(inst.sigma.begin(), inst.sigma.end(),
                                [&](const KeySet& ks) { return !pair_violates(t, u, ks); });
    if (sigma_ok && pair_violates(t, u, inst.phi)) return false;
    std::size_t a = 0;
    while (a < n && pattern[a] == PairPattern::kNotBothTotal) pattern[a++] = PairPattern::kEqualTotal;
    if (a == n) return true;
    pattern[a] = static_cast<PairPattern>(static_cast<std::uint8_t>(pattern[a]) + 1);
  }
}

}  // namespace keyset
