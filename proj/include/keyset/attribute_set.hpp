#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "keyset/error.hpp"

namespace keyset {

using AttributeIndex = std::size_t;

// A set of attribute positions, stored as a bit vector. Trailing zero words
// are never kept, so equality does not depend on schema width.
class AttributeSet {
 public:
  AttributeSet() = default;
  AttributeSet(std::initializer_list<AttributeIndex> members) {
    for (auto a : members) insert(a);
  }

  static AttributeSet from_indices(const std::vector<AttributeIndex>& members) {
    AttributeSet s;
    for (auto a : members) s.insert(a);
    return s;
  }

  // {0, 1, ..., width - 1}
  static AttributeSet full(std::size_t width) {
    AttributeSet s;
    s.words_.assign((width + 63) / 64, ~std::uint64_t{0});
    if (width % 64 != 0) s.words_.back() = (std::uint64_t{1} << (width % 64)) - 1;
    s.trim();
    return s;
  }

  void insert(AttributeIndex a) {
    if (a / 64 >= words_.size()) words_.resize(a / 64 + 1, 0);
    words_[a / 64] |= std::uint64_t{1} << (a % 64);
  }

  void erase(AttributeIndex a) {
    if (a / 64 >= words_.size()) return;
    words_[a / 64] &= ~(std::uint64_t{1} << (a % 64));
    trim();
  }

  bool contains(AttributeIndex a) const {
    return a / 64 < words_.size() && ((words_[a / 64] >> (a % 64)) & 1U) != 0;
  }

  bool empty() const { return words_.empty(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  // One past the largest member, 0 when empty.
  std::size_t span() const {
    if (words_.empty()) return 0;
    return (words_.size() - 1) * 64 + (64 - static_cast<std::size_t>(std::countl_zero(words_.back())));
  }

  std::optional<AttributeIndex> first() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
    return std::nullopt;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits != 0) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  std::vector<AttributeIndex> indices() const {
    std::vector<AttributeIndex> out;
    out.reserve(size());
    for_each([&](AttributeIndex a) { out.push_back(a); });
    return out;
  }

  bool is_subset_of(const AttributeSet& other) const {
    if (words_.size() > other.words_.size()) return false;
    for (std::size_t w = 0; w < words_.size(); ++w)
      if ((words_[w] & ~other.words_[w]) != 0) return false;
    return true;
  }

  bool intersects(const AttributeSet& other) const {
    auto n = std::min(words_.size(), other.words_.size());
    for (std::size_t w = 0; w < n; ++w)
      if ((words_[w] & other.words_[w]) != 0) return true;
    return false;
  }

  AttributeSet& operator|=(const AttributeSet& other) {
    if (other.words_.size() > words_.size()) words_.resize(other.words_.size(), 0);
    for (std::size_t w = 0; w < other.words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
  }

  AttributeSet& operator&=(const AttributeSet& other) {
    words_.resize(std::min(words_.size(), other.words_.size()));
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    trim();
    return *this;
  }

  AttributeSet& operator-=(const AttributeSet& other) {
    auto n = std::min(words_.size(), other.words_.size());
    for (std::size_t w = 0; w < n; ++w) words_[w] &= ~other.words_[w];
    trim();
    return *this;
  }

  friend AttributeSet operator|(AttributeSet a, const AttributeSet& b) { return a |= b; }
  friend AttributeSet operator&(AttributeSet a, const AttributeSet& b) { return a &= b; }
  friend AttributeSet operator-(AttributeSet a, const AttributeSet& b) { return a -= b; }

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

  // Canonical order: lexicographic on the ascending index sequences, so a
  // proper prefix sorts first ({0} < {0,4} < {3,4}).
  friend std::strong_ordering operator<=>(const AttributeSet& a, const AttributeSet& b) {
    auto n = std::max(a.words_.size(), b.words_.size());
    for (std::size_t w = 0; w < n; ++w) {
      auto x = w < a.words_.size() ? a.words_[w] : 0;
      auto y = w < b.words_.size() ? b.words_[w] : 0;
      if (x == y) continue;
      // Lowest differing bit decides; whoever owns it has the smaller index
      // at that position, unless the other sequence has already ended.
      auto diff = x ^ y;
      auto low = std::uint64_t{1} << std::countr_zero(diff);
      bool a_has = (x & low) != 0;
      auto rest_a = a.has_bits_above(w, low);
      auto rest_b = b.has_bits_above(w, low);
      if (a_has) return rest_b ? std::strong_ordering::less : std::strong_ordering::greater;
      return rest_a ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return std::strong_ordering::equal;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ULL;
    for (auto w : words_) h = (h ^ w) * 1099511628211ULL;
    return h;
  }

 private:
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
  }

  // True when some member lies strictly above bit `low` of word `w`.
  bool has_bits_above(std::size_t w, std::uint64_t low) const {
    if (w < words_.size() && (words_[w] & ~((low << 1) - 1)) != 0) return true;
    return words_.size() > w + 1;
  }

  std::vector<std::uint64_t> words_;
};

struct AttributeSetHash {
  std::size_t operator()(const AttributeSet& s) const { return s.hash(); }
};

// Ordered, duplicate-free list of attribute names.
class Schema {
 public:
  Schema() = default;

  explicit Schema(std::vector<std::string> attributes) : attributes_(std::move(attributes)) {
    if (attributes_.empty()) throw SchemaError("schema must have at least one attribute");
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      if (!positions_.emplace(attributes_[i], i).second)
        throw SchemaError("duplicate attribute name '" + attributes_[i] + "'");
    }
  }

  Schema(std::initializer_list<std::string> attributes)
      : Schema(std::vector<std::string>(attributes)) {}

  std::size_t size() const { return attributes_.size(); }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::string& name(AttributeIndex a) const { return attributes_.at(a); }

  std::optional<AttributeIndex> index_of(std::string_view name) const {
    auto it = positions_.find(std::string(name));
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  AttributeSet full_set() const { return AttributeSet::full(size()); }

  // Resolves names; throws SchemaError on an unknown name.
  AttributeSet set_of(std::initializer_list<std::string_view> names) const {
    AttributeSet s;
    for (auto n : names) {
      auto i = index_of(n);
      if (!i) throw SchemaError("unknown attribute '" + std::string(n) + "'");
      s.insert(*i);
    }
    return s;
  }

  bool covers(const AttributeSet& s) const { return s.span() <= size(); }

  friend bool operator==(const Schema& a, const Schema& b) { return a.attributes_ == b.attributes_; }

 private:
  std::vector<std::string> attributes_;
  std::unordered_map<std::string, AttributeIndex> positions_;
};

}  // namespace keyset

template <>
struct std::hash<keyset::AttributeSet> {
  std::size_t operator()(const keyset::AttributeSet& s) const { return s.hash(); }
};
