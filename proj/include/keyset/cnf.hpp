#pragma once

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "keyset/error.hpp"
#include "keyset/implication.hpp"

namespace keyset {

struct Literal {
  std::size_t variable = 0;  // index into CnfFormula::variables
  bool negated = false;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

using Clause = std::vector<Literal>;  // sorted, duplicate-free, 1 to 3 literals

struct CnfFormula {
  std::vector<std::string> variables;
  std::vector<Clause> clauses;

  // Sorts and dedupes the literals; throws on an empty or oversized clause or
  // an unknown variable.
  void add_clause(Clause c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.empty()) throw IngestError("empty clause");
    if (c.size() > 3) throw IngestError("clause has " + std::to_string(c.size()) + " literals, at most 3 allowed");
    for (const auto& l : c)
      if (l.variable >= variables.size()) throw IngestError("literal uses unknown variable " + std::to_string(l.variable));
    clauses.push_back(std::move(c));
  }
};

inline std::string negated_name(const std::string& variable) { return "not_" + variable; }

// Reads DIMACS CNF: comment lines start with 'c', the header is
// "p cnf <vars> <clauses>", clauses are nonzero integers ended by 0.
// Variable k is named "x<k>".
inline CnfFormula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  long declared_clauses = 0;
  CnfFormula f;
  Clause current;
  while (std::getline(in, line)) {
    ++line_no;
    auto at = [&](const std::string& msg) { return IngestError("line " + std::to_string(line_no) + ": " + msg); };
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == 'c' || tok == "%") continue;
    if (tok == "p") {
      if (have_header) throw at("duplicate header");
      std::string fmt;
      long vars = -1;
      if (!(ls >> fmt >> vars >> declared_clauses) || fmt != "cnf" || vars < 0 || declared_clauses < 0)
        throw at("malformed header, expected 'p cnf <vars> <clauses>'");
      for (long v = 1; v <= vars; ++v) f.variables.push_back("x" + std::to_string(v));
      have_header = true;
      continue;
    }
    if (!have_header) throw at("clause before 'p cnf' header");
    do {
      char* end = nullptr;
      long v = std::strtol(tok.c_str(), &end, 10);
      if (end == tok.c_str() || *end != '\0') throw at("expected an integer literal, found '" + tok + "'");
      if (v == 0) {
        try {
          f.add_clause(std::move(current));
        } catch (const IngestError& e) {
          throw at(e.what());
        }
        current.clear();
        continue;
      }
      auto var = static_cast<std::size_t>(std::labs(v));
      if (var > f.variables.size()) throw at("variable " + std::to_string(var) + " exceeds declared count");
      current.push_back({var - 1, v < 0});
    } while (ls >> tok);
  }
  if (!have_header) throw IngestError("missing 'p cnf' header");
  if (!current.empty()) throw IngestError("last clause is not terminated by 0");
  if (static_cast<long>(f.clauses.size()) != declared_clauses)
    throw IngestError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                      std::to_string(f.clauses.size()));
  return f;
}

inline std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream os;
  os << "p cnf " << f.variables.size() << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (const auto& l : c) os << (l.negated ? "-" : "") << l.variable + 1 << ' ';
    os << "0\n";
  }
  return os.str();
}

// Schema with attributes p, not_p per variable; one key set {{p},{not_p}} per
// variable; phi has one key per clause made of its literal attributes.
// The result is implied iff f is unsatisfiable.
inline ImplicationInstance from_3sat(const CnfFormula& f) {
  if (f.clauses.empty()) throw RuleError("formula has no clauses; phi would be empty");
  std::vector<std::string> names;
  for (const auto& v : f.variables) {
    names.push_back(v);
    names.push_back(negated_name(v));
  }
  Schema schema(names);
  auto attr = [](const Literal& l) { return 2 * l.variable + (l.negated ? 1 : 0); };
  KeySetFamily sigma;
  for (std::size_t v = 0; v < f.variables.size(); ++v)
    sigma.push_back(KeySet{AttributeSet{2 * v}, AttributeSet{2 * v + 1}});
  std::vector<AttributeSet> clauses;
  for (const auto& c : f.clauses) {
    AttributeSet key;
    for (const auto& l : c) key.insert(attr(l));
    clauses.push_back(key);
  }
  return {std::move(schema), std::move(sigma), KeySet(std::move(clauses))};
}

}  // namespace keyset
