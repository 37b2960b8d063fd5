#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "keyset/attribute_set.hpp"
#include "keyset/error.hpp"
#include "keyset/implication.hpp"
#include "keyset/key_set.hpp"

namespace keyset {

// Chosen set Z per element of the product X1 x ... x Xn, keyed by the tuple of
// keys. Binary Composition uses pairs.
using CompositionChoice = std::map<std::vector<AttributeSet>, AttributeSet>;

namespace detail {

inline std::string debug_key(const AttributeSet& k) {
  std::string out = "{";
  bool first = true;
  k.for_each([&](AttributeIndex a) {
    if (!first) out.push_back(',');
    first = false;
    out += std::to_string(a);
  });
  return out + "}";
}

inline std::string debug_tuple(const std::vector<AttributeSet>& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + debug_key(t[i]);
  return out + ")";
}

}  // namespace detail

inline KeySet apply_upward_closure(const KeySet& x, const KeySet& extra) {
  std::vector<AttributeSet> keys(x.begin(), x.end());
  keys.insert(keys.end(), extra.begin(), extra.end());
  return KeySet(std::move(keys));
}

// Replaces target by left and right; left and right must be non-empty and
// cover target exactly.
inline KeySet apply_refinement(const KeySet& ks, const AttributeSet& target, const AttributeSet& left,
                               const AttributeSet& right) {
  if (!ks.contains(target)) throw RuleError("refinement target " + detail::debug_key(target) + " is not a key");
  if (left.empty() || right.empty()) throw RuleError("refinement part is empty");
  if ((left | right) != target)
    throw RuleError("refinement parts " + detail::debug_key(left) + " and " + detail::debug_key(right) +
                    " do not cover " + detail::debug_key(target) + " exactly");
  std::vector<AttributeSet> keys;
  for (const auto& k : ks)
    if (k != target) keys.push_back(k);
  keys.push_back(left);
  keys.push_back(right);
  return KeySet(std::move(keys));
}

// {Z_X : X in X1 x ... x Xn}. Every Z_X must lie inside the union of X and
// contain some member of X; the choice must cover the product exactly.
inline KeySet apply_nary_composition(const KeySetFamily& family, const CompositionChoice& choice) {
  if (family.empty()) throw RuleError("composition needs at least one key set");
  std::vector<AttributeSet> out;
  std::size_t seen = 0;
  detail::for_each_choice(family, [&](const std::vector<AttributeSet>& tuple) {
    auto it = choice.find(tuple);
    if (it == choice.end()) throw RuleError("choice has no entry for " + detail::debug_tuple(tuple));
    const auto& z = it->second;
    AttributeSet u;
    for (const auto& x : tuple) u |= x;
    if (!z.is_subset_of(u))
      throw RuleError("chosen " + detail::debug_key(z) + " for " + detail::debug_tuple(tuple) +
                      " is not inside the union of the tuple");
    if (std::none_of(tuple.begin(), tuple.end(), [&](const AttributeSet& x) { return x.is_subset_of(z); }))
      throw RuleError("chosen " + detail::debug_key(z) + " for " + detail::debug_tuple(tuple) +
                      " contains no member of the tuple");
    out.push_back(z);
    ++seen;
    return true;
  });
  if (seen != choice.size()) throw RuleError("choice has entries outside the product");
  return KeySet(std::move(out));
}

inline KeySet apply_composition(const KeySet& x1, const KeySet& x2, const CompositionChoice& choice) {
  return apply_nary_composition({x1, x2}, choice);
}

enum class Rule { kPremise, kUpwardClosure, kRefinement, kComposition, kNaryComposition };

inline std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::kPremise: return "premise";
    case Rule::kUpwardClosure: return "upward-closure";
    case Rule::kRefinement: return "refinement";
    case Rule::kComposition: return "composition";
    case Rule::kNaryComposition: return "nary-composition";
  }
  return "?";
}

struct UpwardClosureParams {
  KeySet extra;
};

struct RefinementParams {
  AttributeSet target;
  AttributeSet left;
  AttributeSet right;
};

struct CompositionParams {
  CompositionChoice choice;
};

using StepParams = std::variant<UpwardClosureParams, RefinementParams, CompositionParams>;

struct DerivationStep {
  Rule rule;
  std::vector<std::size_t> refs;  // indices of premises or earlier steps
  StepParams params;
  KeySet conclusion;
};

// Items are numbered premises first, then steps: item i >= premises.size()
// is steps[i - premises.size()].
struct Derivation {
  KeySetFamily premises;
  std::vector<DerivationStep> steps;
  std::optional<KeySet> goal;

  std::size_t item_count() const { return premises.size() + steps.size(); }
  const KeySet& item(std::size_t i) const {
    return i < premises.size() ? premises[i] : steps[i - premises.size()].conclusion;
  }
  // Last step's conclusion, or the last premise when there are no steps.
  const KeySet& conclusion() const { return item(item_count() - 1); }
};

struct DerivationCheck {
  bool valid = true;
  std::optional<std::size_t> failed_step;  // index into steps
  std::string reason;
};

namespace detail {

inline KeySet replay_step(const Derivation& d, const DerivationStep& s) {
  auto need = [&](std::size_t n) {
    if (s.refs.size() != n)
      throw RuleError(std::string(rule_name(s.rule)) + " takes " + std::to_string(n) + " input(s), got " +
                      std::to_string(s.refs.size()));
  };
  auto params = [&]<typename P>(std::type_identity<P>) -> const P& {
    const auto* p = std::get_if<P>(&s.params);
    if (p == nullptr) throw RuleError("parameters do not match rule " + std::string(rule_name(s.rule)));
    return *p;
  };
  switch (s.rule) {
    case Rule::kUpwardClosure:
      need(1);
      return apply_upward_closure(d.item(s.refs[0]), params(std::type_identity<UpwardClosureParams>{}).extra);
    case Rule::kRefinement: {
      need(1);
      const auto& p = params(std::type_identity<RefinementParams>{});
      return apply_refinement(d.item(s.refs[0]), p.target, p.left, p.right);
    }
    case Rule::kComposition:
      need(2);
      return apply_composition(d.item(s.refs[0]), d.item(s.refs[1]),
                               params(std::type_identity<CompositionParams>{}).choice);
    case Rule::kNaryComposition: {
      if (s.refs.empty()) throw RuleError("nary-composition needs at least one input");
      KeySetFamily inputs;
      for (auto r : s.refs) inputs.push_back(d.item(r));
      return apply_nary_composition(inputs, params(std::type_identity<CompositionParams>{}).choice);
    }
    case Rule::kPremise: break;
  }
  throw RuleError("a step cannot be a premise");
}

}  // namespace detail

// Valid iff every step cites only earlier items and its conclusion is exactly
// what its rule yields. A goal, when set, must be the final conclusion, or a
// premise when there are no steps.
inline DerivationCheck check_derivation(const Derivation& d) {
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const auto& s = d.steps[i];
    const auto self = d.premises.size() + i;
    auto fail = [&](const std::string& why) {
      return DerivationCheck{false, i, "item " + std::to_string(self) + ": " + why};
    };
    for (auto r : s.refs)
      if (r >= self) return fail("cites item " + std::to_string(r) + " which is not earlier");
    try {
      if (detail::replay_step(d, s) != s.conclusion) return fail("conclusion does not match the rule's result");
    } catch (const RuleError& e) {
      return fail(e.what());
    } catch (const SchemaError& e) {
      return fail(e.what());
    }
  }
  if (d.goal) {
    bool reached = d.steps.empty()
                       ? std::find(d.premises.begin(), d.premises.end(), *d.goal) != d.premises.end()
                       : d.steps.back().conclusion == *d.goal;
    if (!reached) return {false, std::nullopt, "goal is not the final conclusion"};
  }
  return {};
}

// Bound on the steps simulate_nary may emit: (n+1) * |X1 u ... u Xn| binary
// compositions plus one upward closure.
inline std::size_t nary_step_bound(const KeySetFamily& family) {
  std::vector<AttributeSet> all;
  for (const auto& ks : family) all.insert(all.end(), ks.begin(), ks.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return (family.size() + 1) * all.size() + 1;
}

// Derives the n-ary composition result K from the family using only binary
// composition and one final upward closure. After an initial pass building
// {U X : X in the product}, each round combines the current key set with
// X1..Xn in turn. Members of K stay fixed. A pending set X with maximal
// decomposition Y1..Yn is handled at the smallest i whose every Y in Yi is
// full in some Z_Y with Y as i-th component: pairs (X, Y in Yi) go to that
// Z_Y, pairs (X, Y outside Yi) to X u Y. Compositions that would change
// nothing are omitted.
inline Derivation simulate_nary(const KeySetFamily& family, const CompositionChoice& choice) {
  const auto target = apply_nary_composition(family, choice);
  const auto n = family.size();
  Derivation d;
  d.premises = family;
  d.goal = target;
  if (n == 1) {
    d.steps.push_back({Rule::kUpwardClosure, {0}, UpwardClosureParams{target},
                       apply_upward_closure(family[0], target)});
    return d;
  }
  if (n == 2) {
    d.steps.push_back({Rule::kComposition, {0, 1}, CompositionParams{choice}, target});
    return d;
  }

  KeySet current = family[0];
  std::size_t current_ref = 0;
  auto compose = [&](std::size_t j, const CompositionChoice& c) {
    current = apply_composition(current, family[j], c);
    d.steps.push_back({Rule::kComposition, {current_ref, j}, CompositionParams{c}, current});
    current_ref = d.item_count() - 1;
  };

  for (std::size_t j = 1; j < n; ++j) {
    CompositionChoice c;
    for (const auto& u : current)
      for (const auto& y : family[j]) c[{u, y}] = u | y;
    compose(j, c);
  }

  struct Plan {
    std::size_t step;
    std::map<AttributeSet, AttributeSet> replacement;  // Y in Y_step -> Z_Y
  };
  const auto max_rounds = nary_step_bound(family);
  for (std::size_t round = 0; !current.is_subset_of(target); ++round) {
    if (round > max_rounds) throw std::logic_error("n-ary simulation did not converge");
    std::map<AttributeSet, Plan> plans;
    for (const auto& x : current) {
      if (target.contains(x)) continue;
      std::vector<std::vector<AttributeSet>> parts(n);
      for (std::size_t i = 0; i < n; ++i)
        for (const auto& y : family[i])
          if (y.is_subset_of(x)) parts[i].push_back(y);
      KeySetFamily decomposition;
      bool complete = std::all_of(parts.begin(), parts.end(), [](const auto& p) { return !p.empty(); });
      if (!complete) throw std::logic_error("pending set without a full decomposition");
      for (const auto& p : parts) decomposition.push_back(KeySet(p));

      std::optional<Plan> plan;
      for (std::size_t i = 0; i < n && !plan; ++i) {
        Plan candidate{i, {}};
        detail::for_each_choice(decomposition, [&](const std::vector<AttributeSet>& tuple) {
          const auto& z = choice.at(tuple);
          if (tuple[i].is_subset_of(z)) candidate.replacement.emplace(tuple[i], z);
          return true;
        });
        if (candidate.replacement.size() == decomposition[i].size()) plan = std::move(candidate);
      }
      if (!plan) throw std::logic_error("no component is full for a pending set");
      plans.emplace(x, std::move(*plan));
    }

    for (std::size_t j = 0; j < n; ++j) {
      CompositionChoice c;
      bool changes = false;
      for (const auto& v : current) {
        auto it = plans.find(v);
        bool active = it != plans.end() && it->second.step == j;
        for (const auto& y : family[j]) {
          AttributeSet z = v;
          if (active) {
            auto r = it->second.replacement.find(y);
            z = r != it->second.replacement.end() ? r->second : v | y;
          }
          changes = changes || z != v;
          c[{v, y}] = z;
        }
      }
      if (changes) compose(j, c);
    }
  }
  d.steps.push_back({Rule::kUpwardClosure, {current_ref}, UpwardClosureParams{target},
                     apply_upward_closure(current, target)});
  return d;
}

struct ProofOptions {
  // Replace the n-ary composition by its binary simulation.
  bool binary_only = false;
  ImplicationOptions implication;
};

// Proof of an implied instance: one n-ary composition choosing, for each
// tuple X, the union of the phi-keys inside the union of X; single-split
// refinements down to phi-keys; one upward closure to phi. Throws RuleError
// when the instance is not implied.
inline Derivation derive_from_implication(const ImplicationInstance& inst, const ProofOptions& opts = {}) {
  auto decision = implies(inst, opts.implication);
  if (!decision.implied) throw RuleError("phi is not implied; no derivation exists");

  CompositionChoice choice;
  detail::for_each_choice(inst.sigma, [&](const std::vector<AttributeSet>& tuple) {
    AttributeSet u;
    for (const auto& x : tuple) u |= x;
    choice[tuple] = detail::covered_union(inst.phi, u);
    return true;
  });

  Derivation d;
  d.premises = inst.sigma;
  d.goal = inst.phi;
  const auto n = inst.sigma.size();
  if (opts.binary_only) {
    d.steps = simulate_nary(inst.sigma, choice).steps;
  } else {
    std::vector<std::size_t> refs(n);
    for (std::size_t i = 0; i < n; ++i) refs[i] = i;
    auto k = apply_nary_composition(inst.sigma, choice);
    d.steps.push_back({n == 2 ? Rule::kComposition : Rule::kNaryComposition, refs, CompositionParams{choice}, k});
  }

  for (;;) {
    const auto& current = d.conclusion();
    auto it = std::find_if(current.begin(), current.end(), [&](const AttributeSet& w) { return !inst.phi.contains(w); });
    if (it == current.end()) break;
    const auto w = *it;
    std::vector<AttributeSet> cover;
    for (const auto& y : inst.phi)
      if (y.is_subset_of(w)) cover.push_back(y);
    for (std::size_t i = 0; i < cover.size();) {
      AttributeSet rest;
      for (std::size_t k = 0; k < cover.size(); ++k)
        if (k != i) rest |= cover[k];
      if (rest == w)
        cover.erase(cover.begin() + static_cast<std::ptrdiff_t>(i));
      else
        ++i;
    }
    if (cover.size() < 2) throw std::logic_error("composition result is not a union of phi-keys");
    AttributeSet right;
    for (std::size_t k = 1; k < cover.size(); ++k) right |= cover[k];
    auto next = apply_refinement(current, w, cover[0], right);
    d.steps.push_back({Rule::kRefinement, {d.item_count() - 1}, RefinementParams{w, cover[0], right}, next});
  }
  auto last = d.item_count() - 1;
  d.steps.push_back({Rule::kUpwardClosure, {last}, UpwardClosureParams{inst.phi},
                     apply_upward_closure(d.conclusion(), inst.phi)});
  return d;
}

// ---------------------------------------------------------------------------
// Text form, one item per line:
//   schema: a,b,c
//   0: premise => {{a},{b}}
//   2: composition from 0,1 with ({a},{b}) -> {a,b}; ({a},{c}) -> {a} => {{a},{a,b}}
//   3: refinement from 2 with {a,b} -> {a} | {b} => {{a},{b}}
//   4: upward-closure from 3 with {{c}} => {{a},{b},{c}}
//   goal: {{a},{b},{c}}
// Blank lines and lines starting with '#' are ignored.

struct ParsedDerivation {
  Schema schema;
  Derivation derivation;
};

inline std::string format_derivation(const Derivation& d, const Schema& schema) {
  std::ostringstream os;
  os << "schema: ";
  for (std::size_t a = 0; a < schema.size(); ++a) os << (a ? "," : "") << detail::quote_attribute(schema.name(a));
  os << '\n';
  for (std::size_t i = 0; i < d.premises.size(); ++i)
    os << i << ": premise => " << format_keyset(d.premises[i], schema) << '\n';
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const auto& s = d.steps[i];
    os << d.premises.size() + i << ": " << rule_name(s.rule) << " from ";
    for (std::size_t r = 0; r < s.refs.size(); ++r) os << (r ? "," : "") << s.refs[r];
    os << " with ";
    if (const auto* p = std::get_if<UpwardClosureParams>(&s.params)) {
      os << format_keyset(p->extra, schema);
    } else if (const auto* p = std::get_if<RefinementParams>(&s.params)) {
      os << format_key(p->target, schema) << " -> " << format_key(p->left, schema) << " | "
         << format_key(p->right, schema);
    } else if (const auto* p = std::get_if<CompositionParams>(&s.params)) {
      bool first = true;
      for (const auto& [tuple, z] : p->choice) {
        if (!first) os << "; ";
        first = false;
        os << '(';
        for (std::size_t k = 0; k < tuple.size(); ++k) os << (k ? "," : "") << format_key(tuple[k], schema);
        os << ") -> " << format_key(z, schema);
      }
    }
    os << " => " << format_keyset(s.conclusion, schema) << '\n';
  }
  if (d.goal) os << "goal: " << format_keyset(*d.goal, schema) << '\n';
  return os.str();
}

namespace detail {

class DerivationLineReader {
 public:
  DerivationLineReader(std::string_view line, std::size_t line_no, const Schema* schema)
      : line_(line), line_no_(line_no), schema_(schema) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + msg, pos_);
  }

  void skip_ws() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }

  bool accept(std::string_view token) {
    skip_ws();
    if (line_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  std::string word() {
    skip_ws();
    auto start = pos_;
    while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '-' ||
                                   line_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a word");
    return std::string(line_.substr(start, pos_ - start));
  }

  std::size_t number() {
    skip_ws();
    auto start = pos_;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return std::stoull(std::string(line_.substr(start, pos_ - start)));
  }

  template <typename F>
  auto with_parser(F&& f) -> decltype(f(std::declval<KeySetParser&>())) {
    if (schema_ == nullptr) fail("'schema:' line must come first");
    KeySetParser p(line_.substr(pos_), *schema_);
    try {
      auto v = f(p);
      pos_ += p.position();
      return v;
    } catch (const ParseError& e) {
      pos_ += e.position();
      fail(e.detail());
    }
  }

  AttributeSet key() {
    return with_parser([](KeySetParser& p) { return p.parse_key(); });
  }

  KeySet keyset() {
    return with_parser([](KeySetParser& p) { return p.parse_keyset(); });
  }

  // Comma-separated attribute names, bare or double-quoted.
  std::vector<std::string> names() {
    std::vector<std::string> out;
    do {
      skip_ws();
      std::string name;
      if (pos_ < line_.size() && line_[pos_] == '"') {
        ++pos_;
        for (;;) {
          if (pos_ >= line_.size()) fail("unterminated quoted name");
          char c = line_[pos_++];
          if (c == '"') break;
          if (c == '\\' && pos_ < line_.size()) c = line_[pos_++];
          name.push_back(c);
        }
      } else {
        while (pos_ < line_.size() && is_word_char(line_[pos_])) name.push_back(line_[pos_++]);
        if (name.empty()) fail("expected an attribute name");
      }
      out.push_back(std::move(name));
    } while (accept(","));
    return out;
  }

 private:
  std::string_view line_;
  std::size_t line_no_;
  const Schema* schema_;
  std::size_t pos_ = 0;
};

inline Rule parse_rule_name(const std::string& w, DerivationLineReader& in) {
  for (auto r : {Rule::kPremise, Rule::kUpwardClosure, Rule::kRefinement, Rule::kComposition, Rule::kNaryComposition})
    if (rule_name(r) == w) return r;
  in.fail("unknown rule '" + w + "'");
}

}  // namespace detail

// Parses the text form. Item numbers must run 0, 1, 2, ... and premises must
// precede steps. Semantic validity is left to check_derivation.
inline ParsedDerivation parse_derivation(std::string_view text) {
  std::optional<Schema> schema;
  Derivation d;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    detail::DerivationLineReader in(line, line_no, schema ? &*schema : nullptr);
    if (in.at_end() || in.accept("#")) {
      if (end == text.size()) break;
      continue;
    }
    if (in.accept("schema:")) {
      if (schema) in.fail("duplicate 'schema:' line");
      try {
        schema.emplace(in.names());
      } catch (const SchemaError& e) {
        in.fail(e.what());
      }
    } else if (in.accept("goal:")) {
      if (d.goal) in.fail("duplicate 'goal:' line");
      d.goal = in.keyset();
    } else {
      auto idx = in.number();
      if (idx != d.item_count()) in.fail("expected item " + std::to_string(d.item_count()));
      in.expect(":");
      auto rule = detail::parse_rule_name(in.word(), in);
      if (rule == Rule::kPremise) {
        if (!d.steps.empty()) in.fail("premises must precede steps");
        in.expect("=>");
        d.premises.push_back(in.keyset());
      } else {
        std::vector<std::size_t> refs;
        in.expect("from");
        do refs.push_back(in.number());
        while (in.accept(","));
        in.expect("with");
        StepParams params = UpwardClosureParams{KeySet{AttributeSet{0}}};
        if (rule == Rule::kUpwardClosure) {
          params = UpwardClosureParams{in.keyset()};
        } else if (rule == Rule::kRefinement) {
          RefinementParams p;
          p.target = in.key();
          in.expect("->");
          p.left = in.key();
          in.expect("|");
          p.right = in.key();
          params = p;
        } else {
          CompositionParams p;
          do {
            in.expect("(");
            std::vector<AttributeSet> tuple;
            do tuple.push_back(in.key());
            while (in.accept(","));
            in.expect(")");
            in.expect("->");
            auto z = in.key();
            if (!p.choice.emplace(std::move(tuple), z).second) in.fail("duplicate choice entry");
          } while (in.accept(";"));
          params = std::move(p);
        }
        in.expect("=>");
        auto conclusion = in.keyset();
        d.steps.push_back({rule, std::move(refs), std::move(params), std::move(conclusion)});
      }
    }
    if (!in.at_end()) in.fail("unexpected trailing input");
    if (end == text.size()) break;
  }
  if (!schema) throw ParseError("missing 'schema:' line", 0);
  if (d.premises.empty() && d.steps.empty()) throw ParseError("derivation has no items", 0);
  return {std::move(*schema), std::move(d)};
}

}  // namespace keyset
