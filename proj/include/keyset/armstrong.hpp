#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "keyset/attribute_set.hpp"
#include "keyset/error.hpp"
#include "keyset/key_set.hpp"
#include "keyset/relation.hpp"
#include "keyset/validation.hpp"

namespace keyset {

struct Hypergraph {
  Schema vertices;
  std::vector<AttributeSet> edges;
};

namespace detail {

// Keeps only inclusion-minimal sets, sorted and duplicate-free.
inline std::vector<AttributeSet> minimal_sets(std::vector<AttributeSet> sets) {
  std::sort(sets.begin(), sets.end(), [](const AttributeSet& a, const AttributeSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<AttributeSet> kept;
  for (auto& s : sets)
    if (std::none_of(kept.begin(), kept.end(), [&](const AttributeSet& k) { return k.is_subset_of(s); }))
      kept.push_back(std::move(s));
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Edge-by-edge expansion keeping only minimal partial transversals. With no
// edges the empty set is the only minimal transversal.
inline std::vector<AttributeSet> berge_transversals(const std::vector<AttributeSet>& edges) {
  std::vector<AttributeSet> current{AttributeSet{}};
  for (const auto& e : minimal_sets(edges)) {
    std::vector<AttributeSet> next;
    for (const auto& t : current) {
      if (t.intersects(e)) {
        next.push_back(t);
        continue;
      }
      e.for_each([&](AttributeIndex v) {
        auto grown = t;
        grown.insert(v);
        next.push_back(std::move(grown));
      });
    }
    current = minimal_sets(std::move(next));
  }
  return current;
}

inline std::vector<AttributeSet> sigma_edges(const KeySetFamily& sigma, const Schema& schema) {
  std::vector<AttributeSet> edges;
  for (const auto& ks : sigma) {
    auto u = ks.attributes();
    if (!schema.covers(u)) throw SchemaError("sigma uses attributes outside the schema");
    edges.push_back(std::move(u));
  }
  return edges;
}

inline std::vector<AttributeSet> complements(const std::vector<AttributeSet>& sets, const Schema& schema) {
  std::vector<AttributeSet> out;
  for (const auto& t : sets) out.push_back(schema.full_set() - t);
  std::sort(out.begin(), out.end());
  return out;
}

// Attributes on which the pair is not separated: not both total, or equal.
inline AttributeSet weak_agreement(const Tuple& t, const Tuple& u) {
  AttributeSet out;
  for (std::size_t a = 0; a < t.arity(); ++a)
    if (!pair_separated_by(t, u, AttributeSet{a})) out.insert(a);
  return out;
}

}  // namespace detail

// Minimal transversals in canonical order. Throws SchemaError on an empty
// edge or an edge outside the vertex set.
inline std::vector<AttributeSet> minimal_transversals(const Hypergraph& h) {
  for (const auto& e : h.edges) {
    if (e.empty()) throw SchemaError("hypergraph has an empty edge; no transversal exists");
    if (!h.vertices.covers(e)) throw SchemaError("hypergraph edge outside the vertex set");
  }
  return detail::berge_transversals(h.edges);
}

struct AntiKeyReport {
  std::vector<AttributeSet> edges;         // union of each member of sigma
  std::vector<AttributeSet> transversals;  // minimal, canonical order
  std::vector<AttributeSet> anti_keys;     // complements, canonical order
};

// A unary key set over S is implied by sigma iff S lies in no anti-key.
inline AntiKeyReport anti_keys(const KeySetFamily& sigma, const Schema& schema) {
  if (sigma.empty()) throw RuleError("sigma is empty; anti-keys are undefined");
  AntiKeyReport rep;
  rep.edges = detail::sigma_edges(sigma, schema);
  rep.transversals = minimal_transversals(Hypergraph{schema, rep.edges});
  rep.anti_keys = detail::complements(rep.transversals, schema);
  return rep;
}

// Total relation with one tuple per anti-key plus one: tuple 0 is fresh
// everywhere, tuple i repeats tuple i-1 on the i-th anti-key and is fresh
// elsewhere. Fresh values of attribute a are "v<a>_<n>", n counting per
// attribute from 0.
inline Relation generate_armstrong(const KeySetFamily& sigma, const Schema& schema) {
  auto rep = anti_keys(sigma, schema);
  std::vector<std::size_t> counter(schema.size(), 0);
  auto fresh = [&](std::size_t a) { return "v" + std::to_string(a) + "_" + std::to_string(counter[a]++); };
  std::vector<std::vector<Cell>> rows;
  std::vector<Cell> row(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) row[a] = fresh(a);
  rows.push_back(row);
  for (const auto& ak : rep.anti_keys) {
    for (std::size_t a = 0; a < schema.size(); ++a)
      if (!ak.contains(a)) row[a] = fresh(a);
    rows.push_back(row);
  }
  return Relation::from_rows(schema, rows);
}

// (a) every anti-key is the agreement set of some tuple pair, and (b) no
// pair agrees on the union of any member of sigma, where agreement means not
// separated. For null-free relations (b) is satisfaction of sigma; with nulls
// satisfaction of sigma is required as well. An empty sigma has the single
// anti-key R.
inline bool is_armstrong_unary(const Relation& r, const KeySetFamily& sigma) {
  const auto& schema = r.schema();
  auto edges = detail::sigma_edges(sigma, schema);
  auto wanted = detail::complements(detail::berge_transversals(edges), schema);
  std::vector<char> witnessed(wanted.size(), 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      auto agree = detail::weak_agreement(r[i], r[j]);
      for (const auto& e : edges)
        if (e.is_subset_of(agree)) return false;
      auto it = std::lower_bound(wanted.begin(), wanted.end(), agree);
      if (it != wanted.end() && *it == agree) witnessed[static_cast<std::size_t>(it - wanted.begin())] = 1;
    }
  }
  if (std::find(witnessed.begin(), witnessed.end(), 0) != witnessed.end()) return false;
  return satisfies_all(r, sigma);
}

struct SizeBounds {
  std::size_t lower = 0;
  std::size_t upper = 0;

  friend bool operator==(const SizeBounds&, const SizeBounds&) = default;
};

// Tuple-count range of an Armstrong relation with a anti-keys: at least the
// smallest m with m(m-1)/2 >= a pairs, at most a+1.
inline SizeBounds size_bounds(std::size_t num_anti_keys) {
  if (num_anti_keys == 0) throw RuleError("size bounds need at least one anti-key");
  std::size_t m = 2;
  while (m * (m - 1) / 2 < num_anti_keys) ++m;
  return {m, num_anti_keys + 1};
}

}  // namespace keyset
