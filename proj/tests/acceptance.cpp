// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits non-zero
// when any criterion fails. Oracles come from support.hpp and never call the
// algorithm under test.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace keyset;
using namespace keyset::testing;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string note;
};

// Collects the first few mismatches so a failure line says what broke.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_.size() < 3) failures_.push_back(what);
    ++failed_;
  }
  Outcome outcome(std::string note = {}) const {
    if (failed_ == 0) return {Outcome::kPass, note.empty() ? std::to_string(checks_) + " checks" : note};
    std::string msg = std::to_string(failed_) + "/" + std::to_string(checks_) + " checks failed";
    for (const auto& f : failures_) msg += "; " + f;
    return {Outcome::kFail, msg};
  }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------------------
// The exhaustive instance space shared by criteria 4, 6 and 8: |R| = 4, keys
// of size <= 2, key sets of <= 2 keys, sigma of <= 2 distinct key sets.

struct Sweep {
  Schema schema = letters(4);
  std::vector<KeySet> keysets;
  std::vector<KeySetFamily> sigmas;

  Sweep() {
    std::vector<AttributeSet> keys;
    for (const auto& s : all_subsets(4))
      if (!s.empty() && s.size() <= 2) keys.push_back(s);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      keysets.push_back(KeySet{keys[i]});
      for (std::size_t j = i + 1; j < keys.size(); ++j) keysets.push_back(KeySet({keys[i], keys[j]}));
    }
    sigmas.push_back({});
    for (std::size_t i = 0; i < keysets.size(); ++i) {
      sigmas.push_back({keysets[i]});
      for (std::size_t j = i + 1; j < keysets.size(); ++j) sigmas.push_back({keysets[i], keysets[j]});
    }
  }
};

const Sweep& sweep() {
  static const Sweep s;
  return s;
}

std::string show(const KeySetFamily& sigma, const KeySet& phi, const Schema& s) {
  std::string out = "sigma=[";
  for (std::size_t i = 0; i < sigma.size(); ++i) out += (i ? " " : "") + format_keyset(sigma[i], s);
  return out + "] phi=" + format_keyset(phi, s);
}

CompositionChoice maximal_choice(const KeySetFamily& family) {
  CompositionChoice c;
  for (const auto& t : oracle_product(family)) {
    AttributeSet u;
    for (const auto& x : t) u |= x;
    c[t] = u;
  }
  return c;
}

CompositionChoice random_choice(Gen& g, const KeySetFamily& family) {
  CompositionChoice c;
  for (const auto& t : oracle_product(family)) {
    AttributeSet u;
    for (const auto& x : t) u |= x;
    auto z = t[g.below(t.size())];
    u.for_each([&](AttributeIndex a) {
      if (g.chance(0.4)) z.insert(a);
    });
    c[t] = z;
  }
  return c;
}

// ---------------------------------------------------------------------------

Outcome c1_ward_semantics() {
  Checker c;
  auto start = std::chrono::steady_clock::now();
  auto r = ward_relation();
  WardKeySets w;
  for (const auto& k : {ks(w.schema, "{{room},{time}}"), w.x1, w.x2, w.x}) {
    auto name = format_keyset(k, w.schema);
    c.expect(violating_tuples_naive(r, k).empty(), name + " naive");
    c.expect(violating_blocks(r, k).empty(), name + " linear");
  }
  auto rt = ks(w.schema, "{{room,time}}");
  std::vector<RowId> all{1, 2, 3, 4};
  c.expect(violating_tuples_naive(r, rt).row_ids == all, "{{room,time}} naive violators");
  c.expect(violating_blocks(r, rt).rows() == all, "{{room,time}} block union");
  c.expect(oracle_violators(r, rt) == all, "{{room,time}} oracle");
  c.expect(elapsed_ms(start) < 1000, "runtime < 1 s");
  return c.outcome();
}

Outcome c2_injuries_trace() {
  Checker c;
  auto r = injuries_relation();
  auto trace = violating_blocks_trace(r, ks(r.schema(), "{{name,address},{injury},{time}}"));
  c.expect(trace.size() == 3, "three refinement steps");
  c.expect(!trace.empty() && trace[0].blocks == std::vector<Block>{{1, 2}, {2, 3, 4}}, "iteration 1 blocks");
  c.expect(trace.size() == 3 && trace[2].empty(), "final state empty");
  c.expect(violating_blocks(r, ks(r.schema(), "{{name,address},{injury},{time}}")).empty(), "output empty");
  return c.outcome();
}

Outcome c3_algorithm_agreement() {
  Checker c;
  auto start = std::chrono::steady_clock::now();
  Gen g(3);
  for (int i = 0; i < 200; ++i) {
    auto cols = g.between(1, 6);
    auto r = g.relation(g.between(0, 50), cols, 0.2, g.between(1, 4));
    auto k = g.keyset(cols, 4, 3);
    auto naive = violating_tuples_naive(r, k).row_ids;
    c.expect(violating_blocks(r, k).rows() == naive, "instance " + std::to_string(i));
    c.expect(naive == oracle_violators(r, k), "oracle instance " + std::to_string(i));
  }
  c.expect(elapsed_ms(start) < 60'000, "runtime < 60 s");
  return c.outcome("200 relations");
}

void check_decision(Checker& c, const ImplicationInstance& inst) {
  auto d = implies(inst);
  c.expect(d.implied == implies_bruteforce(inst), show(inst.sigma, inst.phi, inst.schema));
  if (d.implied) return;
  const auto& r = d.witness->relation;
  c.expect(satisfies_all(r, inst.sigma) && !satisfies(r, inst.phi), "witness " + show(inst.sigma, inst.phi, inst.schema));
  c.expect(std::all_of(inst.sigma.begin(), inst.sigma.end(), [&](const KeySet& k) { return oracle_satisfies(r, k); }) &&
               !oracle_satisfies(r, inst.phi),
           "witness (oracle) " + show(inst.sigma, inst.phi, inst.schema));
}

Outcome c4_implication_oracle() {
  Checker c;
  auto start = std::chrono::steady_clock::now();
  const auto& sw = sweep();
  std::size_t count = 0;
  for (const auto& sigma : sw.sigmas)
    for (const auto& phi : sw.keysets) {
      check_decision(c, {sw.schema, sigma, phi});
      ++count;
    }
  Gen g(4);
  auto five = letters(5);
  for (int i = 0; i < 500; ++i) check_decision(c, {five, g.family(5, 3, 3, 3, 0), g.keyset(5, 3, 3)});
  c.expect(elapsed_ms(start) < 120'000, "runtime < 120 s");
  return c.outcome(std::to_string(count) + " exhaustive + 500 random instances");
}

Outcome c5_running_example() {
  Checker c;
  WardKeySets w;
  auto yes = implies({w.schema, {w.x1, w.x2}, w.x});
  c.expect(yes.implied, "X1,X2 imply X");
  auto no = implies({w.schema, {w.x1, w.x2}, w.phi_prime});
  c.expect(!no.implied && no.witness.has_value(), "X1,X2 do not imply phi'");
  if (no.witness) {
    const auto& r = no.witness->relation;
    c.expect(satisfies(r, w.x1) && satisfies(r, w.x2) && !satisfies(r, w.phi_prime), "witness verified");
    c.expect(oracle_satisfies(r, w.x1) && oracle_satisfies(r, w.x2) && !oracle_satisfies(r, w.phi_prime),
             "witness verified by oracle");
  }
  return c.outcome();
}

// Median of per-call times over several batches.
double time_unary(const KeySetFamily& sigma, const KeySet& phi, int calls) {
  std::vector<double> samples;
  volatile bool sink = false;
  for (int batch = 0; batch < 15; ++batch) {
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < calls; ++i) sink = implies_unary(sigma, phi) != sink;
    samples.push_back(elapsed_ms(start) / calls);
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

Outcome c6_unary_fragment() {
  Checker c;
  const auto& sw = sweep();
  std::size_t unary = 0;
  for (const auto& sigma : sw.sigmas)
    for (const auto& phi : sw.keysets) {
      if (!phi.is_unary()) continue;
      ++unary;
      c.expect(implies_unary(sigma, phi) == implies({sw.schema, sigma, phi}).implied, show(sigma, phi, sw.schema));
    }
  // No member lies inside {A,B}, so every call scans all of sigma.
  Gen g(6);
  auto make = [&](std::size_t size) {
    KeySetFamily f;
    for (std::size_t i = 0; i < size; ++i) {
      std::vector<AttributeSet> keys{AttributeSet{g.between(2, 7)}};
      for (std::size_t k = 0; k < 3; ++k) keys.push_back(AttributeSet{g.below(8)});
      f.push_back(KeySet(keys));
    }
    return f;
  };
  KeySet phi({AttributeSet{0}, AttributeSet{1}});
  auto small = make(2'000), large = make(20'000);
  c.expect(!implies_unary(large, phi), "timing family is not implied");
  double t_small = time_unary(small, phi, 200), t_large = time_unary(large, phi, 20);
  double ratio = t_large / t_small;
  std::ostringstream note;
  note.precision(3);
  note << unary << " unary instances agree; 10x sigma time ratio " << ratio;
  c.expect(ratio >= 5 && ratio <= 20, note.str());
  return c.outcome(note.str());
}

Outcome c7_three_sat() {
  Checker c;
  auto start = std::chrono::steady_clock::now();
  Gen g(7);
  for (int i = 0; i < 100; ++i) {
    auto f = random_cnf(g, 6, 10);
    c.expect(implies(from_3sat(f)).implied == !oracle_satisfiable(f), to_dimacs(f));
  }
  c.expect(elapsed_ms(start) < 60'000, "runtime < 60 s");
  return c.outcome("100 formulas");
}

Outcome c8_soundness_and_simulation() {
  Checker c;
  const auto& sw = sweep();
  Gen g(8);
  std::size_t applications = 0;
  auto implied = [&](const KeySetFamily& sigma, const KeySet& k, const std::string& rule) {
    ++applications;
    c.expect(implies({sw.schema, sigma, k}).implied, rule + " " + show(sigma, k, sw.schema));
  };
  for (const auto& sigma : sw.sigmas) {
    if (sigma.empty()) continue;
    for (const auto& x : sigma) {
      implied(sigma, apply_upward_closure(x, sw.keysets[g.below(sw.keysets.size())]), "upward-closure");
      for (const auto& target : x) {
        if (target.size() < 2) continue;
        auto idx = target.indices();
        implied(sigma, apply_refinement(x, target, AttributeSet{idx[0]}, AttributeSet{idx[1]}), "refinement");
      }
    }
    if (sigma.size() == 2) implied(sigma, apply_composition(sigma[0], sigma[1], random_choice(g, sigma)), "composition");
    implied(sigma, apply_nary_composition(sigma, random_choice(g, sigma)), "nary-composition");
    implied(sigma, apply_nary_composition(sigma, maximal_choice(sigma)), "nary-composition");
  }
  std::size_t simulations = 0;
  for (int i = 0; i < 500; ++i) {
    auto width = g.between(2, 6);
    auto fam = g.family(width, 3, 3, 3);
    auto choice = random_choice(g, fam);
    auto d = simulate_nary(fam, choice);
    auto check = check_derivation(d);
    c.expect(check.valid, "simulation: " + check.reason);
    c.expect(d.conclusion() == apply_nary_composition(fam, choice), "simulation ends in the n-ary result");
    c.expect(d.steps.size() <= nary_step_bound(fam), "simulation step bound");
    ++simulations;
  }
  return c.outcome(std::to_string(applications) + " rule applications, " + std::to_string(simulations) +
                   " simulations");
}

Outcome c9_armstrong_golden() {
  Checker c;
  auto start = std::chrono::steady_clock::now();
  WardKeySets w;
  KeySetFamily sigma{w.x1, w.x2};
  auto s = w.schema;
  auto rep = anti_keys(sigma, s);
  c.expect(rep.anti_keys == std::vector<AttributeSet>{s.set_of({"room", "name", "address", "injury"}),
                                                      s.set_of({"room", "name", "address", "time"}),
                                                      s.set_of({"address", "injury", "time"})},
           "anti-keys");
  auto r = generate_armstrong(sigma, s);
  c.expect(r.size() == 4 && dataset_stats(r).nulls == 0, "4 total tuples");
  c.expect(is_armstrong_unary(r, sigma), "is_armstrong_unary");
  // The empty set is not a key set, so 31 of the 32 subsets qualify.
  for (const auto& sub : all_subsets(5)) {
    if (sub.empty()) continue;
    auto phi = unary_of(sub);
    c.expect(oracle_satisfies(r, phi) == implies_unary(sigma, phi), format_keyset(phi, s));
  }
  c.expect(elapsed_ms(start) < 5000, "runtime < 5 s");
  return c.outcome();
}

Outcome c10_armstrong_properties() {
  Checker c;
  Gen g(10);
  for (int i = 0; i < 100; ++i) {
    auto n = g.between(1, 6);
    auto s = letters(n);
    auto sigma = g.family(n, 4, 3, 3);
    auto r = generate_armstrong(sigma, s);
    auto label = "sigma #" + std::to_string(i);
    c.expect(is_armstrong_unary(r, sigma), label + " is_armstrong_unary");
    c.expect(r.size() <= anti_keys(sigma, s).anti_keys.size() + 1, label + " size");
    for (const auto& sub : all_subsets(n)) {
      if (sub.empty()) continue;
      auto phi = unary_of(sub);
      c.expect(oracle_satisfies(r, phi) == implies_unary(sigma, phi), label + " " + format_keyset(phi, s));
    }
  }
  for (std::size_t a = 1; a <= 100; ++a) {
    auto b = size_bounds(a);
    c.expect(a + 1 <= b.lower * b.lower && b.lower <= b.upper && b.lower == oracle_lower_bound(a),
             "size_bounds(" + std::to_string(a) + ")");
  }
  return c.outcome();
}

Outcome c11_non_existence() {
  Checker c;
  auto l = letters(4);
  KeySetFamily sigma{ks(l, "{{A},{B}}"), ks(l, "{{C},{D}}")};
  auto s1 = ks(l, "{{A,C},{A,D},{B,C}}");
  auto s2 = ks(l, "{{A,D},{B,C},{B,D}}");
  Cell n;
  auto left1 = Relation::from_rows(l, {{"a1", "b1", n, "d1"}, {n, "b2", "c2", "d2"}});
  auto left2 = Relation::from_rows(l, {{"a3", "b3", "c3", n}, {"a4", n, "c4", "d4"}});
  auto both = Relation::from_rows(l, {left1.cells(0), left1.cells(1), left2.cells(0), left2.cells(1)});
  c.expect(satisfies_all(left1, sigma) && !satisfies(left1, s1), "first relation");
  c.expect(satisfies_all(left2, sigma) && !satisfies(left2, s2), "second relation");
  c.expect(!satisfies_all(both, sigma), "union violates sigma");
  c.expect(!implies({l, sigma, s1}).implied && !implies({l, sigma, s2}).implied, "sigma_1, sigma_2 not implied");
  return c.outcome();
}

Outcome c12_scaling() {
  // Column c0 is complete and nearly unique, so the first refinement already
  // leaves tiny blocks; the other five columns carry 24% nulls each (20%
  // overall). Uniform nulls on every column would put the incomplete rows in
  // every image and make the block output itself quadratic.
  SyntheticSpec spec;
  spec.domains = {10'000'000, 3, 5, 8, 13, 21};
  spec.column_null_rates = {0.0, 0.24, 0.24, 0.24, 0.24, 0.24};
  auto at = [&](std::size_t rows) {
    spec.rows = rows;
    return generate_synthetic(spec);
  };
  auto r1 = at(10'000), r2 = at(20'000);
  auto key = gen_sequential_keysets(r1.schema())[0];
  auto lin1 = run_bench(r1, {key}, Algorithm::kLinear, 30)[0];
  auto lin2 = run_bench(r2, {key}, Algorithm::kLinear, 30)[0];
  auto naive1 = run_bench(r1, {key}, Algorithm::kNaive, 3)[0];
  Checker c;
  double doubling = lin2.mean_ms / lin1.mean_ms, speedup = naive1.mean_ms / lin1.mean_ms;
  std::ostringstream note;
  note.precision(3);
  note << "doubling ratio " << doubling << ", speedup at 1e4 rows " << speedup << "x";
  c.expect(naive1.violating_tuples == lin1.violating_tuples, "algorithms agree on the synthetic data");
  c.expect(doubling >= 1.5 && doubling <= 3.0, note.str());
  c.expect(speedup >= 5.0, note.str());
  return c.outcome(note.str());
}

std::optional<std::string> find_dataset(const std::string& stem) {
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("KEYSET_BENCH_DATA")) dirs.push_back(env);
  dirs.push_back(KEYSET_DATA_DIR);
  for (const auto& d : dirs)
    for (const auto& ext : {".csv", ".data"}) {
      auto p = std::filesystem::path(d) / (stem + ext);
      if (std::filesystem::is_regular_file(p)) return p.string();
    }
  return std::nullopt;
}

Outcome c13_dataset_stats() {
  struct Expect {
    const char* stem;
    DatasetStats stats;
  };
  Checker c;
  std::vector<std::string> missing;
  for (const auto& e : {Expect{"bridges", {108, 13, 77}}, Expect{"hepatitis", {155, 20, 167}}}) {
    auto path = find_dataset(e.stem);
    if (!path) {
      missing.push_back(e.stem);
      continue;
    }
    IngestConfig cfg;
    cfg.has_header = false;
    auto st = dataset_stats(load_csv(*path, cfg));
    c.expect(st.rows == e.stats.rows && st.cols == e.stats.cols && st.nulls == e.stats.nulls,
             std::string(e.stem) + " loads as (" + std::to_string(st.rows) + ", " + std::to_string(st.cols) + ", " +
                 std::to_string(st.nulls) + ")");
  }
  auto out = c.outcome();
  if (out.kind == Outcome::kPass && !missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    return {Outcome::kSkip, names + " not found (set KEYSET_BENCH_DATA or place <name>.csv in data/)"};
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"golden ward semantics", c1_ward_semantics},
      {"block refinement trace", c2_injuries_trace},
      {"algorithm agreement", c3_algorithm_agreement},
      {"implication oracle equivalence", c4_implication_oracle},
      {"running-example implication", c5_running_example},
      {"unary fragment", c6_unary_fragment},
      {"3-SAT reduction", c7_three_sat},
      {"rule soundness and n-ary simulation", c8_soundness_and_simulation},
      {"Armstrong golden case", c9_armstrong_golden},
      {"Armstrong properties", c10_armstrong_properties},
      {"non-existence fixture", c11_non_existence},
      {"scaling shape", c12_scaling},
      {"dataset stats", c13_dataset_stats},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.kind == Outcome::kFail) ++failed;
    std::printf("%s %2zu %s: %s (%.0f ms)\n", tag, i + 1, criteria[i].first, o.note.c_str(), elapsed_ms(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
