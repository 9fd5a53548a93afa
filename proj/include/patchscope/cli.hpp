#pragma once

#include "patchscope/battery.hpp"
#include "patchscope/grid.hpp"
#include "patchscope/numtheory.hpp"
#include "patchscope/patch_search.hpp"
#include "patchscope/pointset_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace patchscope {

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = s.find(',', start);
    auto item = trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// "a:b,c:d" -> pairs (base^-a, base^-b).
inline std::vector<ScalePair> parse_pairs(const std::string& text, unsigned base) {
  std::vector<ScalePair> pairs;
  for (const auto& item : split_list(text)) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw Error("scale pair '" + item + "' is not of the form a:b");
    int a = 0, b = 0;
    try {
      std::size_t used = 0;
      a = std::stoi(item.substr(0, colon), &used);
      if (used != colon) throw Error("");
      std::string rest = item.substr(colon + 1);
      b = std::stoi(rest, &used);
      if (used != rest.size()) throw Error("");
    } catch (...) {
      throw Error("scale pair '" + item + "' is not of the form a:b");
    }
    if (b <= a) throw Error("scale pair '" + item + "' needs a < b");
    pairs.emplace_back(power_scale(base, a), power_scale(base, b));
  }
  if (pairs.empty()) throw Error("no scale pairs given");
  return pairs;
}

inline void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Runs the patchscope command line. Exit codes: 0 success, 1 bad input or
/// usage, 2 a verify flag failed.
inline int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"patchscope: Assouad dimension and arithmetic patch diagnostics for finite point sets"};
  app.name("patchscope");
  app.require_subcommand(1);

  std::string output;
  std::string input;
  unsigned base = 2;
  int k = 3;

  GenParams gp;
  std::string family;
  std::string seq_path;
  auto* gen = app.add_subcommand("gen", "Generate a built-in point set");
  gen->add_option("family", family, "e_p|union_patches|squares|prime_powers|primes|reciprocals|cantor|full_grid")->required();
  gen->add_option("--p", gp.p, "Exponent for e_p");
  gen->add_option("--n", gp.n, "Truncation N");
  gen->add_option("--m", gp.m, "Power for prime_powers");
  gen->add_option("--base", gp.base, "union_patches scale base");
  gen->add_option("--count", gp.count, "union_patches patch count");
  gen->add_option("--depth", gp.depth, "cantor/full_grid depth");
  gen->add_option("--d", gp.d, "Ambient dimension");
  gen->add_option("--seq", seq_path, "Integer sequence file for reciprocals");
  gen->add_option("-o,--output", output, "Output file")->required();

  std::string pairs_arg;
  long min_ratio = 16;
  bool csv = false;
  auto* dim = app.add_subcommand("dim", "Assouad estimate by grid counting");
  dim->add_option("--pairs", pairs_arg, "Exponent pairs a:b,... meaning (base^-a, base^-b)");
  dim->add_option("--base", base, "Scale base")->check(CLI::Range(2u, 1000000u));
  dim->add_option("--min-ratio", min_ratio, "Smallest admitted R/r")->check(CLI::PositiveNumber);
  dim->add_flag("--csv", csv, "CSV instead of JSON");
  dim->add_option("-o,--output", output, "Output file");
  dim->add_option("file", input, "Point set")->required();

  std::string scales_arg;
  auto* box = app.add_subcommand("box", "Box-counting slopes");
  box->add_option("--scales", scales_arg, "Decreasing scales, comma separated rationals");
  box->add_option("--base", base, "Scale base for the default scales")->check(CLI::Range(2u, 1000000u));
  box->add_option("-o,--output", output, "Output file");
  box->add_option("file", input, "Point set")->required();

  std::string strategy_name = "anchored";
  bool as_json = false;
  auto* patch = app.add_subcommand("patch", "Best arithmetic k-patch approximation");
  patch->add_option("--k", k, "Patch side length")->required();
  patch->add_option("--strategy", strategy_name, "anchored|grid");
  patch->add_flag("--json", as_json, "JSON instead of a summary line");
  patch->add_option("file", input, "Point set")->required();

  std::string pattern_path;
  auto* stein = app.add_subcommand("steinhaus", "Best approximation of a scaled, translated pattern");
  stein->add_option("--pattern", pattern_path, "Pattern point set")->required();
  stein->add_option("--strategy", strategy_name, "anchored|grid");
  stein->add_flag("--json", as_json, "JSON instead of a summary line");
  stein->add_option("file", input, "Point set")->required();

  auto* tangent = app.add_subcommand("tangent", "Zoom into the densest witness cell");
  tangent->add_option("--pairs", pairs_arg, "Exponent pairs a:b,...");
  tangent->add_option("--base", base, "Scale base")->check(CLI::Range(2u, 1000000u));
  tangent->add_option("--min-ratio", min_ratio, "Smallest admitted R/r")->check(CLI::PositiveNumber);
  tangent->add_option("file", input, "Point set")->required();

  std::string nt_task;
  std::int64_t nt_n = 1000;
  int nt_k = 200;
  int nt_p = 3;
  int nt_kmax = 10;
  auto* nt = app.add_subcommand("numtheory", "Number-theoretic diagnostics");
  nt->add_option("task", nt_task, "primes|bhp|no3ap|blocks")->required()->check(CLI::IsMember({"primes", "bhp", "no3ap", "blocks"}));
  nt->add_option("--N", nt_n, "Upper bound / truncation");
  nt->add_option("--K", nt_k, "BHP length");
  nt->add_option("--p", nt_p, "Exponent for no3ap");
  nt->add_option("--kmax", nt_kmax, "Largest block index");
  nt->add_option("-o,--output", output, "Output file");

  std::string families = "all";
  std::string config_path;
  int kmax = 0;
  auto* verify = app.add_subcommand("verify", "Run the verify battery");
  verify->add_option("--families", families, "all, or a comma list of families (file:PATH for a point set file)");
  verify->add_option("--kmax", kmax, "Largest patch size");
  verify->add_option("--config", config_path, "JSON config file");
  verify->add_option("-o,--output", output, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) {
      std::optional<IntegerSequence> seq;
      if (!seq_path.empty()) seq = read_integer_sequence_file(seq_path);
      PointSet F = gen_set(family, gp, seq ? &*seq : nullptr);
      write_point_set_file(output, F);
      return 0;
    }
    if (dim->parsed()) {
      PointSet F = read_point_set_file(input);
      auto pairs = pairs_arg.empty() ? default_scale_pairs(F, base) : detail::parse_pairs(pairs_arg, base);
      auto report = assouad_estimate(F, pairs, BigInt(min_ratio));
      detail::emit(output, out, csv ? to_csv(report) : detail::dump(to_json(report)));
      return 0;
    }
    if (box->parsed()) {
      PointSet F = read_point_set_file(input);
      std::vector<Scalar> scales;
      if (scales_arg.empty()) {
        int top = top_level(F, base);
        for (int a = top; a <= top + 12; ++a) scales.push_back(power_scale(base, a));
      } else {
        for (const auto& s : detail::split_list(scales_arg)) scales.push_back(parse_scalar(s));
      }
      detail::emit(output, out, detail::dump(to_json(box_estimate(F, scales))));
      return 0;
    }
    if (patch->parsed()) {
      PointSet F = read_point_set_file(input);
      Strategy strategy = parse_strategy(strategy_name);
      auto pairs = default_scale_pairs(F);
      auto report = best_patch_defect(F, k, strategy, strategy == Strategy::grid ? &pairs : nullptr);
      out << (as_json ? detail::dump(to_json(report)) : summary(report) + "\n");
      return 0;
    }
    if (stein->parsed()) {
      PointSet F = read_point_set_file(input);
      PointSet P = read_point_set_file(pattern_path);
      Strategy strategy = parse_strategy(strategy_name);
      auto pairs = default_scale_pairs(F);
      auto report = steinhaus_defect(F, P, strategy, strategy == Strategy::grid ? &pairs : nullptr);
      out << (as_json ? detail::dump(to_json(report)) : summary(report) + "\n");
      return 0;
    }
    if (tangent->parsed()) {
      PointSet F = read_point_set_file(input);
      auto pairs = pairs_arg.empty() ? default_scale_pairs(F, base) : detail::parse_pairs(pairs_arg, base);
      auto best = best_tangent(F, pairs, BigInt(min_ratio));
      const auto& row = best.report.rows[best.report.best_row];
      nlohmann::json j = to_json(best.zoom);
      j["estimate"] = best.report.estimate;
      j["coarse"] = to_string(row.coarse);
      j["fine"] = to_string(row.fine);
      j["witness"] = to_string(row.witness);
      out << detail::dump(j);
      return 0;
    }
    if (nt->parsed()) {
      if (nt_task == "primes") {
        if (nt_n < 2) throw Error("--N must be >= 2");
        std::ostringstream s;
        write_integer_sequence(s, sieve_primes(static_cast<std::uint64_t>(nt_n)));
        detail::emit(output, out, s.str());
      } else if (nt_task == "bhp") {
        detail::emit(output, out, detail::dump(to_json(bhp_subsequence(nt_k))));
      } else if (nt_task == "no3ap") {
        PointSet S = e_p_set(nt_p, nt_n);
        auto ap = find_3ap(S);
        nlohmann::json j = {{"p", nt_p}, {"N", nt_n}, {"found", ap.has_value()}};
        if (ap) j["progression"] = {to_string(ap->lo), to_string(ap->mid), to_string(ap->hi)};
        detail::emit(output, out, detail::dump(j));
      } else {
        if (nt_n < 2) throw Error("--N must be >= 2");
        auto rows = large_set_diagnostics(sieve_primes(static_cast<std::uint64_t>(nt_n)), nt_kmax);
        detail::emit(output, out, detail::dump(to_json(rows)));
      }
      return 0;
    }
    if (verify->parsed()) {
      BatteryConfig config;
      if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw Error("cannot open '" + config_path + "'");
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
          throw Error("config '" + config_path + "': " + e.what());
        }
        config = parse_battery_config(j);
      }
      if (kmax != 0) {
        if (kmax < 2) throw Error("--kmax must be >= 2");
        config.kmax = kmax;
      }
      BatteryReport report = run_battery(parse_family_list(families), config);
      detail::emit(output, out, detail::dump(to_json(report)));
      if (!report.passed) {
        for (const auto& f : report.families) {
          for (const auto& flag : f.flags) {
            if (!flag.passed) err << "FAIL " << f.name << ": " << flag.name << " (" << flag.predicate << ")\n";
          }
        }
        return 2;
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace patchscope
