#pragma once

// Fixtures, random generators and independent oracles shared by the unit and
// acceptance tests. The oracles deliberately avoid the library's algorithms:
// they work on cell strings and plain enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "keyset/keyset.hpp"

namespace keyset::testing {

inline Schema ward_schema() { return Schema({"room", "name", "address", "injury", "time"}); }

inline Relation ward_relation() {
  return Relation::from_rows(ward_schema(), {
                                                {"1", "Miller", Cell(), "cardiac infarct", "Sunday, 19"},
                                                {Cell(), Cell(), Cell(), "skull fracture", "Monday, 19"},
                                                {"2", "Maier", "Dresden", "leg fracture", "Sunday, 16"},
                                                {"1", "Miller", "Pirna", "leg fracture", "Sunday, 16"},
                                            });
}

inline Schema injuries_schema() { return Schema({"name", "address", "injury", "time"}); }

inline Relation injuries_relation() {
  return Relation::from_rows(injuries_schema(), {
                                                  {"Miller", "Dresden", "cardiac infarct", "Sunday, 19"},
                                                  {"Miller", Cell(), "skull fracture", "Sunday, 19"},
                                                  {"Maier", "Dresden", "cardiac infarct", "Sunday, 19"},
                                                  {"Maier", "Dresden", Cell(), "Monday, 20"},
                                              });
}

// A hand-written Armstrong relation for the two ward key sets.
inline Relation ward_armstrong_example() {
  return Relation::from_rows(ward_schema(), {
                                                {"1", "Miller", "24 Queen St", "leg fracture", "Sunday, 16"},
                                                {"1", "Miller", "24 Queen St", "leg fracture", "Monday, 19"},
                                                {"1", "Miller", "24 Queen St", "arm fracture", "Monday, 19"},
                                                {"2", "Maier", "24 Queen St", "arm fracture", "Monday, 19"},
                                            });
}

inline KeySet ks(const Schema& s, const char* text) { return parse_keyset(text, s); }

struct WardKeySets {
  Schema schema = ward_schema();
  KeySet x1 = ks(schema, "{{room,time},{injury,time}}");
  KeySet x2 = ks(schema, "{{name,time},{injury,time}}");
  KeySet x = ks(schema, "{{room,name,time},{injury,time}}");
  KeySet phi_prime = ks(schema, "{{room},{name},{address},{time}}");
};

inline Schema letters(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
  return Schema(names);
}

// ---------------------------------------------------------------------------
// Random generators.

class Gen {
 public:
  explicit Gen(std::uint32_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  AttributeSet key(std::size_t width, std::size_t max_size) {
    auto size = between(1, std::min(max_size, width));
    AttributeSet k;
    while (k.size() < size) k.insert(below(width));
    return k;
  }

  KeySet keyset(std::size_t width, std::size_t max_keys, std::size_t max_key_size) {
    std::vector<AttributeSet> keys;
    auto count = between(1, max_keys);
    for (std::size_t i = 0; i < count; ++i) keys.push_back(key(width, max_key_size));
    return KeySet(keys);
  }

  KeySetFamily family(std::size_t width, std::size_t max_members, std::size_t max_keys, std::size_t max_key_size,
                      std::size_t min_members = 1) {
    KeySetFamily f;
    auto count = between(min_members, max_members);
    for (std::size_t i = 0; i < count; ++i) f.push_back(keyset(width, max_keys, max_key_size));
    return f;
  }

  Relation relation(std::size_t rows, std::size_t cols, double null_rate, std::size_t domain) {
    Relation r(letters(cols));
    std::vector<Cell> row(cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (auto& c : row) c = chance(null_rate) ? Cell() : Cell(std::to_string(below(domain)));
      r.add_row(row);
    }
    return r;
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::mt19937 rng_;
};

// ---------------------------------------------------------------------------
// Oracles.

// Definition-level separation on cell strings.
inline bool oracle_separated(const std::vector<Cell>& t, const std::vector<Cell>& u, const AttributeSet& x) {
  bool differ = false;
  for (auto a : x.indices()) {
    if (!t[a] || !u[a]) return false;
    if (*t[a] != *u[a]) differ = true;
  }
  return differ;
}

inline bool oracle_pair_violates(const std::vector<Cell>& t, const std::vector<Cell>& u, const KeySet& k) {
  return std::none_of(k.begin(), k.end(), [&](const AttributeSet& x) { return oracle_separated(t, u, x); });
}

inline std::vector<RowId> oracle_violators(const Relation& r, const KeySet& k) {
  std::set<RowId> out;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = i + 1; j < r.size(); ++j)
      if (oracle_pair_violates(r.cells(i), r.cells(j), k)) {
        out.insert(r.row_id(i));
        out.insert(r.row_id(j));
      }
  return {out.begin(), out.end()};
}

inline bool oracle_satisfies(const Relation& r, const KeySet& k) { return oracle_violators(r, k).empty(); }

// Every pair inside each block violates k.
inline bool oracle_block_is_violating(const Relation& r, const Block& b, const KeySet& k) {
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j)
      if (!oracle_pair_violates(r.cells(*r.position_of(b[i])), r.cells(*r.position_of(b[j])), k)) return false;
  return true;
}

// All subsets of {0..n-1} as attribute sets.
inline std::vector<AttributeSet> all_subsets(std::size_t n) {
  std::vector<AttributeSet> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    AttributeSet s;
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1) s.insert(a);
    out.push_back(s);
  }
  return out;
}

// Minimal transversals by checking every vertex subset.
inline std::vector<AttributeSet> oracle_transversals(std::size_t n, const std::vector<AttributeSet>& edges) {
  auto hits = [&](const AttributeSet& t) {
    return std::all_of(edges.begin(), edges.end(), [&](const AttributeSet& e) { return t.intersects(e); });
  };
  std::vector<AttributeSet> out;
  for (const auto& t : all_subsets(n)) {
    if (!hits(t)) continue;
    bool minimal = true;
    t.for_each([&](AttributeIndex a) {
      auto smaller = t;
      smaller.erase(a);
      if (hits(smaller)) minimal = false;
    });
    if (minimal) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Elements of X1 x ... x Xn by recursion, in the order the members appear.
inline std::vector<std::vector<AttributeSet>> oracle_product(const KeySetFamily& family) {
  std::vector<std::vector<AttributeSet>> out;
  std::vector<AttributeSet> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == family.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& k : family[i]) {
      cur.push_back(k);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

inline bool oracle_satisfiable(const CnfFormula& f) {
  const auto n = f.variables.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    bool all = std::all_of(f.clauses.begin(), f.clauses.end(), [&](const Clause& c) {
      return std::any_of(c.begin(), c.end(),
                         [&](const Literal& l) { return ((mask >> l.variable & 1) != 0) != l.negated; });
    });
    if (all) return true;
  }
  return false;
}

inline CnfFormula random_cnf(Gen& g, std::size_t max_vars, std::size_t max_clauses) {
  CnfFormula f;
  auto vars = g.between(1, max_vars);
  for (std::size_t v = 0; v < vars; ++v) f.variables.push_back("p" + std::to_string(v + 1));
  auto clauses = g.between(1, max_clauses);
  for (std::size_t i = 0; i < clauses; ++i) {
    Clause c;
    auto len = g.between(1, 3);
    for (std::size_t k = 0; k < len; ++k) c.push_back({g.below(vars), g.chance(0.5)});
    f.add_clause(c);
  }
  return f;
}

// Unary key set {{a} : a in s}.
inline KeySet unary_of(const AttributeSet& s) {
  std::vector<AttributeSet> keys;
  s.for_each([&](AttributeIndex a) { keys.push_back(AttributeSet{a}); });
  return KeySet(keys);
}

inline std::size_t oracle_lower_bound(std::size_t a) {
  return static_cast<std::size_t>(std::ceil((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(a))) / 2.0));
}

}  // namespace keyset::testing
