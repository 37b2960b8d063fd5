#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "keyset/attribute_set.hpp"
#include "keyset/error.hpp"

namespace keyset {

// A finite non-empty collection of non-empty keys. Keys are kept sorted in
// canonical order without duplicates, so two KeySets are equal exactly when
// they denote the same collection.
class KeySet {
 public:
  KeySet(std::vector<AttributeSet> keys) : keys_(std::move(keys)) {  // NOLINT
    if (keys_.empty()) throw SchemaError("key set must contain at least one key");
    for (const auto& k : keys_)
      if (k.empty()) throw SchemaError("key set must not contain the empty key");
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  }
  KeySet(std::initializer_list<AttributeSet> keys) : KeySet(std::vector<AttributeSet>(keys)) {}

  const std::vector<AttributeSet>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  auto begin() const { return keys_.begin(); }
  auto end() const { return keys_.end(); }
  const AttributeSet& operator[](std::size_t i) const { return keys_[i]; }

  bool contains(const AttributeSet& key) const {
    return std::binary_search(keys_.begin(), keys_.end(), key);
  }

  bool is_unary() const {
    return std::all_of(keys_.begin(), keys_.end(), [](const auto& k) { return k.size() == 1; });
  }

  // Union of all keys.
  AttributeSet attributes() const {
    AttributeSet u;
    for (const auto& k : keys_) u |= k;
    return u;
  }

  // Total number of attribute occurrences.
  std::size_t weight() const {
    std::size_t w = 0;
    for (const auto& k : keys_) w += k.size();
    return w;
  }

  bool is_subset_of(const KeySet& other) const {
    return std::includes(other.keys_.begin(), other.keys_.end(), keys_.begin(), keys_.end());
  }

  friend bool operator==(const KeySet&, const KeySet&) = default;
  friend auto operator<=>(const KeySet& a, const KeySet& b) {
    return std::lexicographical_compare_three_way(a.keys_.begin(), a.keys_.end(), b.keys_.begin(),
                                                  b.keys_.end());
  }

 private:
  std::vector<AttributeSet> keys_;
};

using KeySetFamily = std::vector<KeySet>;

namespace detail {

inline bool is_word_char(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalnum(c) || c == '_';
}

// Names that may appear unquoted.
inline bool is_identifier(std::string_view s) { return !s.empty() && std::all_of(s.begin(), s.end(), is_word_char); }

class KeySetParser {
 public:
  KeySetParser(std::string_view text, const Schema& schema) : text_(text), schema_(schema) {}

  KeySet parse_keyset() {
    skip_ws();
    std::size_t start = pos_;
    expect('{');
    skip_ws();
    if (peek() == '}') throw ParseError("empty key set", start);
    std::vector<AttributeSet> keys;
    for (;;) {
      keys.push_back(parse_key());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      break;
    }
    return KeySet(std::move(keys));
  }

  AttributeSet parse_key() {
    skip_ws();
    std::size_t start = pos_;
    expect('{');
    skip_ws();
    if (peek() == '}') throw ParseError("empty key", start);
    AttributeSet key;
    for (;;) {
      skip_ws();
      key.insert(parse_attribute());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      break;
    }
    return key;
  }

  std::size_t position() const { return pos_; }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= text_.size())
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
    ++pos_;
  }

  AttributeIndex parse_attribute() {
    std::size_t start = pos_;
    std::string name;
    if (peek() == '"') {
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) throw ParseError("unterminated quoted attribute", start);
        char c = text_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos_ >= text_.size()) throw ParseError("dangling escape", pos_ - 1);
          c = text_[pos_++];
        }
        name.push_back(c);
      }
    } else {
      while (pos_ < text_.size() && is_word_char(text_[pos_])) name.push_back(text_[pos_++]);
      if (name.empty()) {
        if (pos_ >= text_.size()) throw ParseError("expected attribute name but input ended", pos_);
        throw ParseError(std::string("expected attribute name but found '") + text_[pos_] + "'", pos_);
      }
    }
    auto idx = schema_.index_of(name);
    if (!idx) throw ParseError("unknown attribute '" + name + "'", start);
    return *idx;
  }

  std::string_view text_;
  const Schema& schema_;
  std::size_t pos_ = 0;
};

inline std::string quote_attribute(const std::string& name) {
  if (is_identifier(name)) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

// keyset := '{' key (',' key)* '}'
// key    := '{' attr (',' attr)* '}'
// attr   := [A-Za-z0-9_]+ | '"' (char | '\' char)* '"'
inline KeySet parse_keyset(std::string_view text, const Schema& schema) {
  detail::KeySetParser p(text, schema);
  auto ks = p.parse_keyset();
  p.finish();
  return ks;
}

// Parses a single key, e.g. "{room,time}".
inline AttributeSet parse_key(std::string_view text, const Schema& schema) {
  detail::KeySetParser p(text, schema);
  auto key = p.parse_key();
  p.finish();
  return key;
}

inline std::string format_key(const AttributeSet& key, const Schema& schema) {
  std::string out = "{";
  bool first = true;
  key.for_each([&](AttributeIndex a) {
    if (!first) out.push_back(',');
    first = false;
    out += detail::quote_attribute(schema.name(a));
  });
  out.push_back('}');
  return out;
}

inline std::string format_keyset(const KeySet& ks, const Schema& schema) {
  std::string out = "{";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i != 0) out.push_back(',');
    out += format_key(ks[i], schema);
  }
  out.push_back('}');
  return out;
}

// Reads one key set per line. Blank lines and lines starting with '#' are
// skipped; errors carry the 1-based line number.
inline KeySetFamily parse_keyset_lines(std::string_view text, const Schema& schema) {
  KeySetFamily family;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      try {
        family.push_back(parse_keyset(line, schema));
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.detail(), e.position());
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return family;
}

}  // namespace keyset
