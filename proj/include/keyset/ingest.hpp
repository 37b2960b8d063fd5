#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "keyset/error.hpp"
#include "keyset/relation.hpp"

namespace keyset {

struct IngestConfig {
  char delimiter = ',';
  // Cells equal to one of these (after trimming whitespace) load as null.
  // Export writes nulls with the first token.
  std::vector<std::string> null_tokens = {"?", "", "NULL"};
  bool has_header = true;

  void validate() const {
    if (delimiter == '"' || delimiter == '\n' || delimiter == '\r')
      throw IngestError("delimiter must not be a quote or line break");
    if (null_tokens.empty()) throw IngestError("at least one null token is required");
    for (const auto& t : null_tokens)
      if (t.find(delimiter) != std::string::npos)
        throw IngestError("null token '" + t + "' contains the delimiter");
  }

  bool is_null_token(std::string_view cell) const {
    auto b = cell.find_first_not_of(" \t");
    auto trimmed = b == std::string_view::npos
                       ? std::string_view()
                       : cell.substr(b, cell.find_last_not_of(" \t") - b + 1);
    return std::find(null_tokens.begin(), null_tokens.end(), trimmed) != null_tokens.end();
  }
};

struct DatasetStats {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nulls = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

inline DatasetStats dataset_stats(const Relation& r) {
  DatasetStats s{r.size(), r.arity(), 0};
  for (std::size_t a = 0; a < r.arity(); ++a)
    s.nulls += static_cast<std::size_t>(std::count(r.column(a).begin(), r.column(a).end(), kNull));
  return s;
}

namespace detail {

// Splits CSV text into records. Quoted fields may contain delimiters, quotes
// (doubled) and line breaks. Blank lines are skipped.
class CsvReader {
 public:
  CsvReader(std::string_view text, char delimiter) : text_(text), delim_(delimiter) {}

  // Returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    record_line_ = line_;
    std::string field;
    for (;;) {
      if (pos_ < text_.size() && text_[pos_] == '"') {
        ++pos_;
        for (;;) {
          if (pos_ >= text_.size())
            throw IngestError("unterminated quoted field starting on line " + std::to_string(record_line_));
          char c = text_[pos_++];
          if (c == '"') {
            if (pos_ < text_.size() && text_[pos_] == '"') {
              field.push_back('"');
              ++pos_;
              continue;
            }
            break;
          }
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        if (pos_ < text_.size() && text_[pos_] != delim_ && text_[pos_] != '\n' && text_[pos_] != '\r')
          throw IngestError("unexpected character after closing quote on line " + std::to_string(line_));
      } else {
        while (pos_ < text_.size() && text_[pos_] != delim_ && text_[pos_] != '\n' && text_[pos_] != '\r')
          field.push_back(text_[pos_++]);
      }
      fields.push_back(std::move(field));
      field.clear();
      if (pos_ >= text_.size()) return true;
      char c = text_[pos_++];
      if (c == delim_) continue;
      if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
      ++line_;
      return true;
    }
  }

  std::size_t record_line() const { return record_line_; }

 private:
  std::string_view text_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

inline std::vector<std::string> unique_header(std::vector<std::string> names) {
  std::unordered_map<std::string, int> seen;
  for (const auto& n : names) seen[n] = 0;
  std::unordered_map<std::string, int> count;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (count[names[i]]++ == 0) continue;
    std::string candidate = names[i] + "_" + std::to_string(i);
    while (seen.count(candidate) != 0) candidate += "_";
    seen[candidate] = 0;
    names[i] = std::move(candidate);
  }
  return names;
}

inline bool needs_quotes(const std::string& v, char delimiter) {
  if (v.empty()) return false;
  if (v.front() == ' ' || v.front() == '\t' || v.back() == ' ' || v.back() == '\t') return true;
  return v.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
}

inline void write_field(std::ostream& os, const std::string& v, char delimiter, bool force_quotes) {
  if (!force_quotes && !needs_quotes(v, delimiter)) {
    os << v;
    return;
  }
  os << '"';
  for (char c : v) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

}  // namespace detail

inline Relation read_csv(std::string_view text, const IngestConfig& cfg = {}) {
  cfg.validate();
  detail::CsvReader reader(text, cfg.delimiter);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw IngestError("empty input: no header or rows");

  std::vector<std::vector<std::string>> pending;
  std::vector<std::string> names;
  if (cfg.has_header) {
    names = detail::unique_header(fields);
  } else {
    for (std::size_t i = 0; i < fields.size(); ++i) names.push_back(std::to_string(i));
    pending.push_back(fields);
  }
  Relation r{Schema(names)};
  std::vector<Cell> cells(names.size());
  auto add = [&](const std::vector<std::string>& row, std::size_t line) {
    if (row.size() != names.size())
      throw IngestError("line " + std::to_string(line) + ": expected " + std::to_string(names.size()) +
                        " fields, found " + std::to_string(row.size()));
    for (std::size_t a = 0; a < row.size(); ++a)
      cells[a] = cfg.is_null_token(row[a]) ? Cell() : Cell(row[a]);
    r.add_row(cells);
  };
  for (const auto& row : pending) add(row, reader.record_line());
  while (reader.next(fields)) add(fields, reader.record_line());
  return r;
}

inline Relation load_csv(const std::string& path, const IngestConfig& cfg = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IngestError("error while reading '" + path + "'");
  return read_csv(buf.str(), cfg);
}

// Writes the relation in the dialect read_csv accepts, LF line endings.
// Nulls are written as the first null token.
inline void write_csv(std::ostream& os, const Relation& r, const IngestConfig& cfg = {}) {
  cfg.validate();
  if (cfg.has_header) {
    for (std::size_t a = 0; a < r.arity(); ++a) {
      if (a != 0) os << cfg.delimiter;
      detail::write_field(os, r.schema().name(a), cfg.delimiter, false);
    }
    os << '\n';
  }
  const std::string& null_out = cfg.null_tokens.front();
  for (std::size_t p = 0; p < r.size(); ++p) {
    for (std::size_t a = 0; a < r.arity(); ++a) {
      if (a != 0) os << cfg.delimiter;
      auto v = r.value(p, a);
      std::string s = v ? std::string(*v) : null_out;
      // A blank record would be skipped on reload.
      detail::write_field(os, s, cfg.delimiter, s.empty() && r.arity() == 1);
    }
    os << '\n';
  }
}

inline std::string to_csv(const Relation& r, const IngestConfig& cfg = {}) {
  std::ostringstream os;
  write_csv(os, r, cfg);
  return os.str();
}

}  // namespace keyset
