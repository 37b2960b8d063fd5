#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iterator>
#include <string>
#include <unordered_map>
#include <vector>

#include "keyset/key_set.hpp"
#include "keyset/relation.hpp"

namespace keyset {

// Row ids of all tuples that have a partner with which they violate every key.
struct ViolationSet {
  std::vector<RowId> row_ids;  // ascending

  bool empty() const { return row_ids.empty(); }
  std::size_t size() const { return row_ids.size(); }
  friend bool operator==(const ViolationSet&, const ViolationSet&) = default;
};

using Block = std::vector<RowId>;  // ascending, at least two rows

struct BlockSet {
  std::vector<Block> blocks;  // lexicographically sorted

  bool empty() const { return blocks.empty(); }
  std::size_t size() const { return blocks.size(); }

  // Row ids occurring in some block, ascending.
  std::vector<RowId> rows() const {
    std::vector<RowId> out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const BlockSet&, const BlockSet&) = default;
};

// Pairwise scan over all distinct tuple pairs; O(|r|^2 * ||ks||).
inline ViolationSet violating_tuples_naive(const Relation& r, const KeySet& ks) {
  std::vector<std::vector<const ValueCode*>> keys;
  for (const auto& key : ks) {
    std::vector<const ValueCode*> cols;
    key.for_each([&](AttributeIndex a) { cols.push_back(r.column(a).data()); });
    keys.push_back(std::move(cols));
  }
  auto separated = [](const std::vector<const ValueCode*>& key, std::size_t i, std::size_t j) {
    bool differ = false;
    for (const auto* col : key) {
      if (col[i] == kNull || col[j] == kNull) return false;
      differ = differ || col[i] != col[j];
    }
    return differ;
  };

  const auto n = r.size();
  std::vector<char> offending(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool violates = true;
      for (const auto& key : keys) {
        if (separated(key, i, j)) {
          violates = false;
          break;
        }
      }
      if (violates) offending[i] = offending[j] = 1;
    }
  }
  ViolationSet out;
  for (std::size_t i = 0; i < n; ++i)
    if (offending[i] != 0) out.row_ids.push_back(r.row_id(i));
  std::sort(out.row_ids.begin(), out.row_ids.end());
  return out;
}

namespace detail {

using Positions = std::vector<std::uint32_t>;
inline constexpr std::uint32_t kIncomplete = UINT32_MAX;

// Dense id per row for its complete projection on `key`, or kIncomplete.
// Rows share an id exactly when their projections are equal; ids are
// assigned by hashing the fixed-width sequence of per-column value codes.
inline std::uint32_t projection_ids(const Relation& r, const AttributeSet& key, std::vector<std::uint32_t>& ids) {
  const auto n = r.size();
  ids.assign(n, kIncomplete);
  auto attrs = key.indices();
  if (attrs.size() == 1) {
    const auto& col = r.column(attrs[0]);
    std::uint32_t max_code = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (col[p] == kNull) continue;
      ids[p] = col[p] - 1;
      max_code = std::max(max_code, col[p]);
    }
    return max_code;
  }
  std::unordered_map<std::string, std::uint32_t> dense;
  dense.reserve(n);
  std::string buf(attrs.size() * sizeof(ValueCode), '\0');
  for (std::size_t p = 0; p < n; ++p) {
    bool total = true;
    for (std::size_t k = 0; k < attrs.size(); ++k) {
      auto c = r.code(p, attrs[k]);
      if (c == kNull) {
        total = false;
        break;
      }
      std::memcpy(buf.data() + k * sizeof(ValueCode), &c, sizeof(ValueCode));
    }
    if (!total) continue;
    auto [it, inserted] = dense.emplace(buf, static_cast<std::uint32_t>(dense.size()));
    ids[p] = it->second;
  }
  return static_cast<std::uint32_t>(dense.size());
}

inline std::size_t hash_positions(const Positions& p) {
  std::size_t h = 1469598103934665603ULL ^ p.size();
  for (auto v : p) h = (h ^ v) * 1099511628211ULL;
  return h;
}

// One pass of the block refinement for a single key: every block is split by
// complete projection into images M[y] and the incomplete rows I; I is merged
// into every image, images of size > 1 are kept, and I alone is kept when M
// is empty and |I| > 1. Identical output blocks are merged.
class BlockRefiner {
 public:
  std::vector<Positions> refine(const std::vector<Positions>& blocks, const std::vector<std::uint32_t>& ids,
                                std::uint32_t id_count) {
    if (stamp_.size() < id_count) {
      stamp_.resize(id_count, 0);
      slot_.resize(id_count, 0);
    }
    std::vector<Positions> out;
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    auto emit = [&](Positions&& b) {
      auto& bucket = seen[hash_positions(b)];
      for (auto idx : bucket)
        if (out[idx] == b) return;
      bucket.push_back(out.size());
      out.push_back(std::move(b));
    };

    for (const auto& block : blocks) {
      // Counting sort of the complete rows by id into one flat buffer;
      // rows stay ascending within each group.
      ++epoch_;
      std::size_t used = 0;
      incomplete_.clear();
      counts_.clear();
      for (auto row : block) {
        auto id = ids[row];
        if (id == kIncomplete) {
          incomplete_.push_back(row);
          continue;
        }
        if (stamp_[id] != epoch_) {
          stamp_[id] = epoch_;
          slot_[id] = static_cast<std::uint32_t>(used++);
          counts_.push_back(0);
        }
        ++counts_[slot_[id]];
      }
      offsets_.assign(used + 1, 0);
      for (std::size_t g = 0; g < used; ++g) offsets_[g + 1] = offsets_[g] + counts_[g];
      flat_.resize(offsets_[used]);
      for (std::size_t g = 0; g < used; ++g) counts_[g] = offsets_[g];
      for (auto row : block) {
        auto id = ids[row];
        if (id != kIncomplete) flat_[counts_[slot_[id]]++] = row;
      }
      for (std::size_t g = 0; g < used; ++g) {
        auto first = flat_.begin() + offsets_[g], last = flat_.begin() + offsets_[g + 1];
        if (static_cast<std::size_t>(last - first) + incomplete_.size() < 2) continue;
        Positions merged;
        merged.reserve(static_cast<std::size_t>(last - first) + incomplete_.size());
        std::merge(first, last, incomplete_.begin(), incomplete_.end(), std::back_inserter(merged));
        emit(std::move(merged));
      }
      if (used == 0 && incomplete_.size() > 1) emit(Positions(incomplete_));
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> stamp_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::uint32_t> counts_, offsets_;
  Positions flat_, incomplete_;
  std::uint64_t epoch_ = 0;
};

// Runs the refinement over the keys of ks in canonical order. The observer,
// when set, sees the block state after every key.
inline std::vector<Positions> refine_blocks(
    const Relation& r, const KeySet& ks,
    const std::function<void(std::size_t, const AttributeSet&, const std::vector<Positions>&)>& observer = {}) {
  std::vector<Positions> blocks;
  if (r.size() >= 2) {
    Positions all(r.size());
    for (std::size_t p = 0; p < all.size(); ++p) all[p] = static_cast<std::uint32_t>(p);
    blocks.push_back(std::move(all));
  }
  BlockRefiner refiner;
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!blocks.empty()) {
      auto count = projection_ids(r, ks[i], ids);
      blocks = refiner.refine(blocks, ids, count);
    }
    if (observer) observer(i, ks[i], blocks);
  }
  return blocks;
}

// Drops blocks contained in another block.
inline std::vector<Positions> maximal_blocks(std::vector<Positions> blocks, std::size_t row_count) {
  std::sort(blocks.begin(), blocks.end(), [](const Positions& a, const Positions& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  std::vector<std::vector<std::uint32_t>> containing(row_count);
  std::vector<Positions> kept;
  for (auto& b : blocks) {
    const std::vector<std::uint32_t>* candidates = &containing[b.front()];
    for (auto row : b)
      if (containing[row].size() < candidates->size()) candidates = &containing[row];
    bool subsumed = std::any_of(candidates->begin(), candidates->end(), [&](std::uint32_t k) {
      return std::includes(kept[k].begin(), kept[k].end(), b.begin(), b.end());
    });
    if (subsumed) continue;
    for (auto row : b) containing[row].push_back(static_cast<std::uint32_t>(kept.size()));
    kept.push_back(std::move(b));
  }
  return kept;
}

inline BlockSet to_block_set(const Relation& r, const std::vector<Positions>& blocks) {
  BlockSet out;
  out.blocks.reserve(blocks.size());
  for (const auto& b : blocks) {
    Block ids;
    ids.reserve(b.size());
    for (auto p : b) ids.push_back(r.row_id(p));
    std::sort(ids.begin(), ids.end());
    out.blocks.push_back(std::move(ids));
  }
  std::sort(out.blocks.begin(), out.blocks.end());
  return out;
}

}  // namespace detail

// Maximal groups of rows whose pairs jointly violate every key of ks.
// Linear in |r| * ||ks|| when blocks stay small.
inline BlockSet violating_blocks(const Relation& r, const KeySet& ks) {
  auto raw = detail::refine_blocks(r, ks);
  return detail::to_block_set(r, detail::maximal_blocks(std::move(raw), r.size()));
}

// Block state after each key, before the maximality filter; entry i is the
// state once keys 0..i (canonical order) have been processed.
inline std::vector<BlockSet> violating_blocks_trace(const Relation& r, const KeySet& ks) {
  std::vector<BlockSet> trace;
  detail::refine_blocks(r, ks, [&](std::size_t, const AttributeSet&, const std::vector<detail::Positions>& b) {
    trace.push_back(detail::to_block_set(r, b));
  });
  return trace;
}

inline bool satisfies(const Relation& r, const KeySet& ks) { return detail::refine_blocks(r, ks).empty(); }

inline bool satisfies_all(const Relation& r, const KeySetFamily& family) {
  return std::all_of(family.begin(), family.end(), [&](const KeySet& ks) { return satisfies(r, ks); });
}

}  // namespace keyset
