#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "keyset/attribute_set.hpp"
#include "keyset/error.hpp"
#include "keyset/key_set.hpp"

namespace keyset {

using RowId = std::uint64_t;

// Per-column dictionary code of a cell. kNull marks the null marker; every
// other code stands for exactly one string in its column.
using ValueCode = std::uint32_t;
inline constexpr ValueCode kNull = 0;

using Cell = std::optional<std::string>;

class Relation;

// Read-only view of one row of a Relation.
class Tuple {
 public:
  Tuple(const Relation& relation, std::size_t position) : relation_(&relation), position_(position) {}

  RowId row_id() const;
  std::size_t position() const { return position_; }
  const Relation& relation() const { return *relation_; }
  std::size_t arity() const;

  bool is_null(AttributeIndex a) const { return code(a) == kNull; }
  ValueCode code(AttributeIndex a) const;
  // nullopt for the null marker.
  std::optional<std::string_view> value(AttributeIndex a) const;

 private:
  const Relation* relation_;
  std::size_t position_;
};

// A bag of row-identified tuples over a schema. Cells are dictionary-encoded
// per column, so value equality inside one relation is code equality.
class Relation {
 public:
  explicit Relation(Schema schema) : schema_(std::move(schema)) {
    columns_.resize(schema_.size());
    dictionaries_.resize(schema_.size());
    lookups_.resize(schema_.size());
  }

  // Row ids default to 1, 2, ... in row order.
  static Relation from_rows(Schema schema, const std::vector<std::vector<Cell>>& rows,
                            std::vector<RowId> row_ids = {});

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return row_ids_.size(); }
  bool empty() const { return row_ids_.empty(); }
  std::size_t arity() const { return schema_.size(); }

  Tuple tuple(std::size_t position) const { return Tuple(*this, position); }
  Tuple operator[](std::size_t position) const { return tuple(position); }
  RowId row_id(std::size_t position) const { return row_ids_[position]; }
  const std::vector<RowId>& row_ids() const { return row_ids_; }

  std::optional<std::size_t> position_of(RowId id) const {
    auto it = positions_.find(id);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  ValueCode code(std::size_t position, AttributeIndex a) const { return columns_[a][position]; }
  const std::vector<ValueCode>& column(AttributeIndex a) const { return columns_[a]; }

  std::optional<std::string_view> value(std::size_t position, AttributeIndex a) const {
    auto c = columns_[a][position];
    if (c == kNull) return std::nullopt;
    return std::string_view(dictionaries_[a][c - 1]);
  }

  // Appends a row; throws SchemaError on arity mismatch or a reused row id.
  void add_row(const std::vector<Cell>& cells, std::optional<RowId> id = std::nullopt) {
    if (cells.size() != arity())
      throw SchemaError("row has " + std::to_string(cells.size()) + " cells, schema has " +
                        std::to_string(arity()));
    RowId rid = id ? *id : next_id_;
    if (!positions_.emplace(rid, row_ids_.size()).second)
      throw SchemaError("duplicate row id " + std::to_string(rid));
    next_id_ = std::max(next_id_, rid + 1);
    row_ids_.push_back(rid);
    for (std::size_t a = 0; a < cells.size(); ++a) columns_[a].push_back(intern(a, cells[a]));
  }

  // New relation with the rows at the given positions, row ids preserved.
  Relation subset(const std::vector<std::size_t>& positions) const {
    Relation out(schema_);
    for (auto p : positions) out.add_row(cells(p), row_ids_[p]);
    return out;
  }

  std::vector<Cell> cells(std::size_t position) const {
    std::vector<Cell> out;
    out.reserve(arity());
    for (std::size_t a = 0; a < arity(); ++a) {
      auto v = value(position, a);
      out.push_back(v ? Cell(std::string(*v)) : Cell());
    }
    return out;
  }

  // Cell-wise equality including row ids and order.
  friend bool operator==(const Relation& x, const Relation& y) {
    if (!(x.schema_ == y.schema_) || x.row_ids_ != y.row_ids_) return false;
    for (std::size_t p = 0; p < x.size(); ++p)
      if (x.cells(p) != y.cells(p)) return false;
    return true;
  }

 private:
  ValueCode intern(AttributeIndex a, const Cell& cell) {
    if (!cell) return kNull;
    auto& lookup = lookups_[a];
    auto [it, inserted] = lookup.emplace(*cell, static_cast<ValueCode>(dictionaries_[a].size() + 1));
    if (inserted) dictionaries_[a].push_back(*cell);
    return it->second;
  }

  Schema schema_;
  std::vector<RowId> row_ids_;
  std::unordered_map<RowId, std::size_t> positions_;
  std::vector<std::vector<ValueCode>> columns_;
  std::vector<std::vector<std::string>> dictionaries_;
  std::vector<std::unordered_map<std::string, ValueCode>> lookups_;
  RowId next_id_ = 1;
};

inline Relation Relation::from_rows(Schema schema, const std::vector<std::vector<Cell>>& rows,
                                    std::vector<RowId> row_ids) {
  if (!row_ids.empty() && row_ids.size() != rows.size())
    throw SchemaError("row id count does not match row count");
  Relation r(std::move(schema));
  for (std::size_t i = 0; i < rows.size(); ++i)
    r.add_row(rows[i], row_ids.empty() ? std::nullopt : std::optional<RowId>(row_ids[i]));
  return r;
}

inline RowId Tuple::row_id() const { return relation_->row_id(position_); }
inline std::size_t Tuple::arity() const { return relation_->arity(); }
inline ValueCode Tuple::code(AttributeIndex a) const { return relation_->code(position_, a); }
inline std::optional<std::string_view> Tuple::value(AttributeIndex a) const {
  return relation_->value(position_, a);
}

// No attribute of x holds the null marker in t.
inline bool is_x_total(const Tuple& t, const AttributeSet& x) {
  bool total = true;
  x.for_each([&](AttributeIndex a) { total = total && !t.is_null(a); });
  return total;
}

namespace detail {

inline bool same_value(const Tuple& t, const Tuple& u, AttributeIndex a) {
  if (&t.relation() == &u.relation()) return t.code(a) == u.code(a);
  return t.value(a) == u.value(a);
}

}  // namespace detail

// Both tuples are x-total and differ on some attribute of x.
inline bool pair_separated_by(const Tuple& t, const Tuple& u, const AttributeSet& x) {
  bool total = true;
  bool differ = false;
  x.for_each([&](AttributeIndex a) {
    if (!total) return;
    if (t.is_null(a) || u.is_null(a)) {
      total = false;
      return;
    }
    differ = differ || !detail::same_value(t, u, a);
  });
  return total && differ;
}

// No key of ks separates the pair.
inline bool pair_violates(const Tuple& t, const Tuple& u, const KeySet& ks) {
  for (const auto& key : ks)
    if (pair_separated_by(t, u, key)) return false;
  return true;
}

}  // namespace keyset
