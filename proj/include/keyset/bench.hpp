#pragma once

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "keyset/error.hpp"
#include "keyset/key_set.hpp"
#include "keyset/relation.hpp"
#include "keyset/validation.hpp"

namespace keyset {

// Uniform integers from a seeded std::mt19937_64. Bounded draws reject the
// low (2^64 mod n) outputs so every residue is equally likely, which keeps
// sequences identical across standard libraries.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw RuleError("empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      auto x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  // True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::mt19937_64 engine_;
};

// X_i = {{A1..Ai},{A(i+1)},...,{An}} for i = 1..n.
inline std::vector<KeySet> gen_sequential_keysets(const Schema& schema) {
  const auto n = schema.size();
  std::vector<KeySet> out;
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<AttributeSet> keys;
    AttributeSet head;
    for (std::size_t a = 0; a < i; ++a) head.insert(a);
    keys.push_back(head);
    for (std::size_t a = i; a < n; ++a) keys.push_back(AttributeSet{a});
    out.emplace_back(std::move(keys));
  }
  return out;
}

// First key: m attributes drawn without replacement by a partial
// Fisher-Yates shuffle of the attribute indices; every other attribute
// becomes a singleton key.
inline KeySet gen_random_keyset(const Schema& schema, std::size_t m, std::uint64_t seed) {
  const auto n = schema.size();
  if (m < 1 || m > n)
    throw RuleError("parameter " + std::to_string(m) + " outside 1.." + std::to_string(n));
  std::vector<AttributeIndex> idx(n);
  std::iota(idx.begin(), idx.end(), AttributeIndex{0});
  Random rng(seed);
  for (std::size_t k = 0; k < m; ++k) std::swap(idx[k], idx[k + rng.below(n - k)]);
  std::vector<AttributeSet> keys;
  keys.push_back(AttributeSet::from_indices({idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m)}));
  for (std::size_t k = m; k < n; ++k) keys.push_back(AttributeSet{idx[k]});
  return KeySet(std::move(keys));
}

enum class GeneratorMode { kSequential, kRandom };

struct GeneratorSpec {
  GeneratorMode mode = GeneratorMode::kSequential;
  // Sequential: emit only X_param, or all n key sets when unset. Random: m.
  std::optional<std::size_t> param;
  std::uint64_t seed = 0;
};

inline std::vector<KeySet> generate_keysets(const Schema& schema, const GeneratorSpec& spec) {
  if (spec.param && (*spec.param < 1 || *spec.param > schema.size()))
    throw RuleError("parameter " + std::to_string(*spec.param) + " outside 1.." + std::to_string(schema.size()));
  if (spec.mode == GeneratorMode::kRandom) {
    if (!spec.param) throw RuleError("random mode needs a parameter m");
    return {gen_random_keyset(schema, *spec.param, spec.seed)};
  }
  auto all = gen_sequential_keysets(schema);
  if (!spec.param) return all;
  return {all[*spec.param - 1]};
}

// Fraction of the key sets that r does not satisfy.
inline double violation_percentage(const Relation& r, const std::vector<KeySet>& keysets) {
  if (keysets.empty()) throw RuleError("no key sets given");
  std::size_t violated = 0;
  for (const auto& ks : keysets)
    if (!satisfies(r, ks)) ++violated;
  return static_cast<double>(violated) / static_cast<double>(keysets.size());
}

struct SyntheticSpec {
  std::size_t rows = 10'000;
  // Number of distinct values per column; the column count is its size.
  std::vector<std::uint64_t> domains = {2, 3, 5, 8, 13, 21};
  double null_rate = 0.2;
  // Per-column null rates; overrides null_rate when non-empty.
  std::vector<double> column_null_rates;
  std::uint64_t seed = 1;
};

// Uniform values "c<col>_<k>" with independent uniform nulls.
inline Relation generate_synthetic(const SyntheticSpec& spec) {
  if (spec.domains.empty()) throw RuleError("synthetic relation needs at least one column");
  if (!spec.column_null_rates.empty() && spec.column_null_rates.size() != spec.domains.size())
    throw RuleError("column_null_rates must have one entry per column");
  std::vector<std::string> names;
  for (std::size_t c = 0; c < spec.domains.size(); ++c) names.push_back("c" + std::to_string(c));
  Relation r{Schema(names)};
  Random rng(spec.seed);
  constexpr std::uint64_t kScale = 1'000'000;
  std::vector<std::uint64_t> null_num(spec.domains.size());
  for (std::size_t c = 0; c < null_num.size(); ++c) {
    auto rate = spec.column_null_rates.empty() ? spec.null_rate : spec.column_null_rates[c];
    null_num[c] = static_cast<std::uint64_t>(rate * kScale + 0.5);
  }
  std::vector<Cell> row(spec.domains.size());
  for (std::size_t i = 0; i < spec.rows; ++i) {
    for (std::size_t c = 0; c < spec.domains.size(); ++c) {
      if (rng.chance(null_num[c], kScale))
        row[c].reset();
      else
        row[c] = names[c] + "_" + std::to_string(rng.below(spec.domains[c]));
    }
    r.add_row(row);
  }
  return r;
}

enum class Algorithm { kNaive, kLinear };

inline std::string_view algorithm_name(Algorithm a) { return a == Algorithm::kNaive ? "naive" : "linear"; }

struct BenchReport {
  std::string dataset;
  std::string keyset;
  Algorithm algo = Algorithm::kLinear;
  std::size_t repeats = 0;
  std::vector<double> times_ms;
  double mean_ms = 0;
  std::size_t violating_tuples = 0;
  std::optional<std::size_t> blocks;  // linear only
};

inline nlohmann::ordered_json to_json(const BenchReport& b) {
  nlohmann::ordered_json j;
  j["dataset"] = b.dataset;
  j["keyset"] = b.keyset;
  j["algo"] = algorithm_name(b.algo);
  j["repeats"] = b.repeats;
  j["times_ms"] = b.times_ms;
  j["mean_ms"] = b.mean_ms;
  j["violating_tuples"] = b.violating_tuples;
  j["blocks"] = b.blocks ? nlohmann::ordered_json(*b.blocks) : nlohmann::ordered_json(nullptr);
  return j;
}

// One JSON object per line.
inline void write_json_lines(std::ostream& os, const std::vector<BenchReport>& reports) {
  for (const auto& b : reports) os << to_json(b).dump() << '\n';
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchReport>& reports) {
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    return out + "\"";
  };
  os << "dataset,keyset,algo,repeats,times_ms,mean_ms,violating_tuples,blocks\n";
  for (const auto& b : reports) {
    std::ostringstream times;
    for (std::size_t i = 0; i < b.times_ms.size(); ++i) times << (i ? ";" : "") << b.times_ms[i];
    os << quoted(b.dataset) << ',' << quoted(b.keyset) << ',' << algorithm_name(b.algo) << ',' << b.repeats << ','
       << quoted(times.str()) << ',' << b.mean_ms << ',' << b.violating_tuples << ',';
    if (b.blocks) os << *b.blocks;
    os << '\n';
  }
}

inline void write_bench_table(std::ostream& os, const std::vector<BenchReport>& reports) {
  os << std::left << std::setw(8) << "algo" << std::right << std::setw(12) << "mean_ms" << std::setw(12)
     << "violating" << std::setw(10) << "blocks" << "  keyset\n";
  for (const auto& b : reports) {
    os << std::left << std::setw(8) << algorithm_name(b.algo) << std::right << std::setw(12) << std::fixed
       << std::setprecision(3) << b.mean_ms << std::setw(12) << b.violating_tuples << std::setw(10)
       << (b.blocks ? std::to_string(*b.blocks) : "-") << "  " << b.keyset << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

// Times the validation call alone. One unmeasured warm-up run precedes the
// repeats.
inline std::vector<BenchReport> run_bench(const Relation& r, const std::vector<KeySet>& keysets, Algorithm algo,
                                          std::size_t repeats, const std::string& dataset = "") {
  if (repeats < 1) throw RuleError("repeats must be at least 1");
  std::vector<BenchReport> out;
  for (const auto& ks : keysets) {
    BenchReport b;
    b.dataset = dataset;
    b.keyset = format_keyset(ks, r.schema());
    b.algo = algo;
    b.repeats = repeats;
    auto once = [&] {
      if (algo == Algorithm::kNaive) {
        b.violating_tuples = violating_tuples_naive(r, ks).size();
      } else {
        auto blocks = violating_blocks(r, ks);
        b.violating_tuples = blocks.rows().size();
        b.blocks = blocks.size();
      }
    };
    once();
    for (std::size_t i = 0; i < repeats; ++i) {
      auto start = std::chrono::steady_clock::now();
      once();
      auto stop = std::chrono::steady_clock::now();
      b.times_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    b.mean_ms = std::accumulate(b.times_ms.begin(), b.times_ms.end(), 0.0) / static_cast<double>(repeats);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace keyset
