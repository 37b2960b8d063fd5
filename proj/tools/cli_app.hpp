#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "keyset/keyset.hpp"

namespace keysetctl {

using namespace keyset;

// 0 satisfied / implied / valid, 1 violated / not implied / invalid,
// 2 usage or input error, 3 resource cap exceeded.
enum ExitStatus : int { kOk = 0, kNegative = 1, kUsage = 2, kCap = 3 };

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IngestError("error while writing '" + path + "'");
}

struct CsvFlags {
  char delimiter = ',';
  std::vector<std::string> nulls;
  bool no_header = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--delimiter", delimiter, "CSV field delimiter")->capture_default_str();
    cmd->add_option("--null", nulls, "Cell text read as null (repeatable; default: ? , empty, NULL)");
    cmd->add_flag("--no-header", no_header, "CSV has no header row; columns are named 0,1,...");
  }

  IngestConfig config() const {
    IngestConfig cfg;
    cfg.delimiter = delimiter;
    if (!nulls.empty()) cfg.null_tokens = nulls;
    cfg.has_header = !no_header;
    return cfg;
  }
};

// An existing CSV file (header row), the same with ".csv" appended, or an
// inline comma-separated attribute list.
inline Schema resolve_schema(const std::string& spec, const IngestConfig& cfg) {
  namespace fs = std::filesystem;
  for (const auto& path : {spec, spec + ".csv"}) {
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) {
      auto text = read_file(path);
      keyset::detail::CsvReader reader(text, cfg.delimiter);
      std::vector<std::string> header;
      if (!reader.next(header)) throw IngestError("'" + path + "' is empty");
      if (!cfg.has_header) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < header.size(); ++i) names.push_back(std::to_string(i));
        return Schema(names);
      }
      return Schema(keyset::detail::unique_header(header));
    }
  }
  std::vector<std::string> names;
  std::string cur;
  std::istringstream in(spec);
  while (std::getline(in, cur, ',')) {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    names.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (std::any_of(names.begin(), names.end(), [](const std::string& n) { return n.empty(); }))
    throw SchemaError("'" + spec + "' is neither a CSV file nor a comma-separated attribute list");
  return Schema(names);
}

inline KeySetFamily load_sigma(const std::string& path, const Schema& schema) {
  auto family = parse_keyset_lines(read_file(path), schema);
  return family;
}

inline std::uint64_t product_cap(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("KEYSET_PRODUCT_CAP")) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw RuleError("KEYSET_PRODUCT_CAP must be a non-negative integer");
    return v;
  }
  return ImplicationOptions{}.product_cap;
}

inline std::string join_rows(const std::vector<RowId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out;
}

inline std::string format_choice(const std::vector<AttributeSet>& choice, const Schema& schema) {
  std::string out;
  for (std::size_t i = 0; i < choice.size(); ++i) out += (i ? " " : "") + format_key(choice[i], schema);
  return out;
}

}  // namespace detail

// Runs one subcommand. args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key sets over incomplete relations: validation, implication, proofs, Armstrong relations."};
  app.name("keysetctl");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.footer(
      "Key-set grammar: {{a,b},{c}}. A key set is a brace list of keys; a key is a brace list of\n"
      "attributes; names are [A-Za-z0-9_]+ or double-quoted. Sigma files hold one key set per line;\n"
      "blank lines and '#' comments are skipped.\n"
      "Exit status: 0 satisfied/implied/valid, 1 violated/not implied/invalid, 2 usage or input\n"
      "error, 3 cap exceeded. KEYSET_PRODUCT_CAP overrides the implication product cap.");

  int status = kOk;
  std::string data, keyset_text, keyset_file, algo = "linear", report = "table";
  std::string schema_spec, sigma_path, phi_text, witness_out, derivation_path, out_path, dimacs_path;
  std::string mode = "sequential", format = "json";
  std::optional<std::size_t> param;
  std::optional<std::uint64_t> cap;
  std::uint64_t seed = 0;
  std::size_t repeats = 10;
  bool binary_only = false, decide = false, show_transversals = false;
  detail::CsvFlags csv;

  auto* validate = app.add_subcommand("validate", "Check key sets against a CSV relation");
  validate->add_option("--data", data, "CSV file")->required();
  auto* ks_opt = validate->add_option("--keyset", keyset_text, "Key set, e.g. {{room},{time}}");
  auto* ksf_opt = validate->add_option("--keyset-file", keyset_file, "File with one key set per line");
  ks_opt->excludes(ksf_opt);
  validate->add_option("--algo", algo, "naive or linear")
      ->check(CLI::IsMember({"naive", "linear"}))
      ->capture_default_str();
  validate->add_option("--report", report, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  csv.attach(validate);

  auto* implies_cmd = app.add_subcommand("implies", "Decide whether sigma implies phi");
  auto* implies_unary_cmd = app.add_subcommand("implies-unary", "Decide implication of a unary phi");
  auto* derive_cmd = app.add_subcommand("derive", "Emit a checked derivation of an implied phi");
  for (auto* cmd : {implies_cmd, implies_unary_cmd, derive_cmd}) {
    cmd->add_option("--schema", schema_spec, "CSV file or inline comma list of attributes")->required();
    cmd->add_option("--sigma", sigma_path, "File with one key set per line")->required();
    cmd->add_option("--phi", phi_text, "Key set to test")->required();
  }
  for (auto* cmd : {implies_cmd, derive_cmd})
    cmd->add_option("--cap", cap, "Largest choice product to enumerate (default 1000000)");
  implies_cmd->add_option("--witness-out", witness_out, "Write the counterexample CSV here");
  derive_cmd->add_flag("--binary-only", binary_only, "Expand the n-ary composition into binary steps");
  derive_cmd->add_option("--out", out_path, "Write the derivation here instead of stdout");

  auto* check_cmd = app.add_subcommand("check-proof", "Check a derivation file");
  check_cmd->add_option("--derivation", derivation_path, "Derivation text file")->required();

  auto* armstrong_cmd = app.add_subcommand("armstrong", "Generate an Armstrong relation for unary consequences");
  auto* antikeys_cmd = app.add_subcommand("antikeys", "List the anti-keys of sigma");
  for (auto* cmd : {armstrong_cmd, antikeys_cmd}) {
    cmd->add_option("--schema", schema_spec, "CSV file or inline comma list of attributes")->required();
    cmd->add_option("--sigma", sigma_path, "File with one key set per line")->required();
  }
  armstrong_cmd->add_option("--out", out_path, "Write the CSV here; anti-keys then go to stdout");
  antikeys_cmd->add_flag("--transversals", show_transversals, "Also list the minimal transversals");

  auto* gen_cmd = app.add_subcommand("gen-keysets", "Generate synthetic key sets");
  gen_cmd->add_option("--schema", schema_spec, "CSV file or inline comma list of attributes")->required();

  auto* sat_cmd = app.add_subcommand("from-3sat", "Turn a DIMACS CNF into an implication instance");
  sat_cmd->add_option("--dimacs", dimacs_path, "DIMACS CNF file")->required();
  sat_cmd->add_flag("--decide", decide, "Also decide the instance (implied iff unsatisfiable)");
  sat_cmd->add_option("--cap", cap, "Largest choice product to enumerate (default 1000000)");

  auto* bench_cmd = app.add_subcommand("bench", "Time the validation algorithms");
  bench_cmd->add_option("--data", data, "CSV file")->required();
  bench_cmd->add_option("--repeats", repeats, "Measured runs per key set")->capture_default_str();
  bench_cmd->add_option("--algo", algo, "naive, linear or both")
      ->check(CLI::IsMember({"naive", "linear", "both"}))
      ->capture_default_str();
  bench_cmd->add_option("--format", format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  bench_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  csv.attach(bench_cmd);

  for (auto* cmd : {gen_cmd, bench_cmd}) {
    cmd->add_option("--mode", mode, "sequential or random")
        ->check(CLI::IsMember({"sequential", "random"}))
        ->capture_default_str();
    cmd->add_option("--param", param, "Sequential: only X_i; random: size m of the first key");
    cmd->add_option("--seed", seed, "Seed for random mode")->capture_default_str();
  }
  for (auto* cmd : {implies_cmd, implies_unary_cmd, derive_cmd, armstrong_cmd, antikeys_cmd, gen_cmd})
    csv.attach(cmd);

  auto* stats_cmd = app.add_subcommand("stats", "Print rows, columns and nulls of a CSV relation");
  stats_cmd->add_option("--data", data, "CSV file")->required();
  csv.attach(stats_cmd);

  auto write_or_print = [&](const std::string& text) {
    if (out_path.empty())
      out << text;
    else
      detail::write_file(out_path, text);
  };

  validate->callback([&] {
    auto cfg = csv.config();
    auto r = load_csv(data, cfg);
    KeySetFamily family;
    if (!keyset_text.empty())
      family.push_back(parse_keyset(keyset_text, r.schema()));
    else if (!keyset_file.empty())
      family = detail::load_sigma(keyset_file, r.schema());
    else
      throw CLI::RequiredError("--keyset or --keyset-file");
    for (const auto& ks : family) {
      std::vector<RowId> rows;
      std::optional<BlockSet> blocks;
      if (algo == "naive") {
        rows = violating_tuples_naive(r, ks).row_ids;
      } else {
        blocks = violating_blocks(r, ks);
        rows = blocks->rows();
      }
      if (!rows.empty()) status = kNegative;
      auto text = format_keyset(ks, r.schema());
      if (report == "json") {
        nlohmann::ordered_json j;
        j["keyset"] = text;
        j["algo"] = algo;
        j["satisfied"] = rows.empty();
        j["violating_rows"] = rows;
        if (blocks) j["blocks"] = blocks->blocks;
        out << j.dump() << '\n';
        continue;
      }
      if (rows.empty()) {
        out << text << ": satisfied\n";
        continue;
      }
      out << text << ": violated by " << rows.size() << " tuple(s)\n  rows: " << detail::join_rows(rows) << '\n';
      if (blocks) {
        out << "  blocks:";
        for (const auto& b : blocks->blocks) out << " {" << detail::join_rows(b) << '}';
        out << '\n';
      }
    }
  });

  auto load_instance = [&] {
    auto cfg = csv.config();
    auto schema = detail::resolve_schema(schema_spec, cfg);
    auto sigma = detail::load_sigma(sigma_path, schema);
    auto phi = parse_keyset(phi_text, schema);
    return ImplicationInstance{schema, std::move(sigma), std::move(phi)};
  };

  implies_cmd->callback([&] {
    auto inst = load_instance();
    auto d = implies(inst, {detail::product_cap(cap)});
    if (d.implied) {
      out << "implied\n";
      return;
    }
    status = kNegative;
    auto witness = to_csv(d.witness->relation);
    out << "not implied\n";
    if (!d.witness->choice.empty()) out << "# choice: " << detail::format_choice(d.witness->choice, inst.schema) << '\n';
    out << witness;
    if (!witness_out.empty()) detail::write_file(witness_out, witness);
  });

  implies_unary_cmd->callback([&] {
    auto inst = load_instance();
    bool implied = implies_unary(inst.sigma, inst.phi);
    out << (implied ? "implied" : "not implied") << '\n';
    if (!implied) status = kNegative;
  });

  derive_cmd->callback([&] {
    auto inst = load_instance();
    ProofOptions opts;
    opts.binary_only = binary_only;
    opts.implication.product_cap = detail::product_cap(cap);
    if (!implies(inst, opts.implication).implied) {
      out << "not implied\n";
      status = kNegative;
      return;
    }
    write_or_print(format_derivation(derive_from_implication(inst, opts), inst.schema));
  });

  check_cmd->callback([&] {
    auto parsed = parse_derivation(detail::read_file(derivation_path));
    auto check = check_derivation(parsed.derivation);
    if (check.valid) {
      out << "valid: " << format_keyset(parsed.derivation.conclusion(), parsed.schema) << '\n';
    } else {
      out << "invalid: " << check.reason << '\n';
      status = kNegative;
    }
  });

  auto load_sigma_schema = [&] {
    auto schema = detail::resolve_schema(schema_spec, csv.config());
    auto sigma = detail::load_sigma(sigma_path, schema);
    return std::pair{schema, sigma};
  };

  armstrong_cmd->callback([&] {
    auto [schema, sigma] = load_sigma_schema();
    auto rep = anti_keys(sigma, schema);
    auto csv_text = to_csv(generate_armstrong(sigma, schema), csv.config());
    std::ostringstream keys;
    for (const auto& a : rep.anti_keys) keys << format_key(a, schema) << '\n';
    if (out_path.empty()) {
      out << csv_text;
      err << "anti-keys (" << rep.anti_keys.size() << "):\n" << keys.str();
    } else {
      detail::write_file(out_path, csv_text);
      out << keys.str();
    }
  });

  antikeys_cmd->callback([&] {
    auto [schema, sigma] = load_sigma_schema();
    auto rep = anti_keys(sigma, schema);
    if (show_transversals) out << "# anti-keys\n";
    for (const auto& a : rep.anti_keys) out << format_key(a, schema) << '\n';
    if (show_transversals) {
      out << "# minimal transversals\n";
      for (const auto& t : rep.transversals) out << format_key(t, schema) << '\n';
    }
  });

  auto generator = [&] {
    GeneratorSpec spec;
    spec.mode = mode == "random" ? GeneratorMode::kRandom : GeneratorMode::kSequential;
    spec.param = param;
    spec.seed = seed;
    return spec;
  };

  gen_cmd->callback([&] {
    auto schema = detail::resolve_schema(schema_spec, csv.config());
    for (const auto& ks : generate_keysets(schema, generator())) out << format_keyset(ks, schema) << '\n';
  });

  sat_cmd->callback([&] {
    auto inst = from_3sat(parse_dimacs(detail::read_file(dimacs_path)));
    out << "# schema: ";
    for (std::size_t a = 0; a < inst.schema.size(); ++a) out << (a ? "," : "") << inst.schema.name(a);
    out << "\n# phi: " << format_keyset(inst.phi, inst.schema) << '\n';
    for (const auto& ks : inst.sigma) out << format_keyset(ks, inst.schema) << '\n';
    if (!decide) return;
    auto d = implies(inst, {detail::product_cap(cap)});
    out << "# " << (d.implied ? "implied (unsatisfiable)" : "not implied (satisfiable)") << '\n';
    if (!d.implied) {
      status = kNegative;
      out << "# assignment:";
      for (std::size_t v = 0; v < d.witness->choice.size(); ++v) {
        // The chosen literal is the one made false.
        bool value = d.witness->choice[v].contains(2 * v + 1);
        out << ' ' << inst.schema.name(2 * v) << '=' << (value ? 1 : 0);
      }
      out << '\n';
    }
  });

  bench_cmd->callback([&] {
    auto r = load_csv(data, csv.config());
    auto keysets = generate_keysets(r.schema(), generator());
    std::vector<BenchReport> reports;
    auto dataset = std::filesystem::path(data).stem().string();
    if (algo != "linear") {
      auto rep = run_bench(r, keysets, Algorithm::kNaive, repeats, dataset);
      reports.insert(reports.end(), rep.begin(), rep.end());
    }
    if (algo != "naive") {
      auto rep = run_bench(r, keysets, Algorithm::kLinear, repeats, dataset);
      reports.insert(reports.end(), rep.begin(), rep.end());
    }
    std::ostringstream os;
    if (format == "json")
      write_json_lines(os, reports);
    else if (format == "csv")
      write_bench_csv(os, reports);
    else
      write_bench_table(os, reports);
    write_or_print(os.str());
  });

  stats_cmd->callback([&] {
    auto s = dataset_stats(load_csv(data, csv.config()));
    out << "rows=" << s.rows << " cols=" << s.cols << " nulls=" << s.nulls << '\n';
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kCap;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return status;
}

}  // namespace keysetctl
