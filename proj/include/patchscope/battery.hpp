#pragma once

// The verify battery: for each registered family, the Assouad and box
// estimates, the relative patch defect ε(k) for k = 2..kmax, the tangent
// defect at the best witness cell, and finite-scale pass/fail flags with
// thresholds fixed in BatteryConfig.

#include "patchscope/grid.hpp"
#include "patchscope/numtheory.hpp"
#include "patchscope/parallel.hpp"
#include "patchscope/patch_search.hpp"
#include "patchscope/pointset_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace patchscope {

struct BatteryConfig {
  int kmax = 5;
  long min_ratio = 16;

  int full_grid_depth = 8;
  int cantor_depth = 6;
  int e_p_p = 3;
  int e_p_n = 100;
  int union_base = 4;
  int union_count = 8;
  int primes_n = 1000;
  int prime_powers_m = 2;
  int prime_powers_n = 100;
  int squares_n = 100;

  // thresholds, fixed from oracle runs at the default sizes above
  double cantor_max_dim = 0.75;
  Scalar cantor_eps3_floor = Scalar(1, 243);
  int cantor_floor_k = 5;
  Scalar cantor_floor = Scalar(3, 10);
  double union_box_max = 0.2;
  int primes_exact_kmax = 5;
};

inline const std::vector<std::string>& builtin_families() {
  static const std::vector<std::string> names{"cantor",       "e_p",    "full_grid", "prime_powers",
                                              "primes",       "squares", "union_patches"};
  return names;
}

inline BatteryConfig parse_battery_config(const nlohmann::json& j) {
  BatteryConfig c;
  auto get_int = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  auto get_scalar = [&](const char* key, Scalar& field) {
    if (j.contains(key)) field = parse_scalar(j.at(key).get<std::string>());
  };
  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> known{
        "kmax",           "min_ratio",      "full_grid_depth", "cantor_depth",    "e_p_p",
        "e_p_n",          "union_base",     "union_count",     "primes_n",        "prime_powers_m",
        "prime_powers_n", "squares_n",      "cantor_max_dim",  "cantor_eps3_floor", "cantor_floor_k",
        "cantor_floor",   "union_box_max",  "primes_exact_kmax"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw Error("unknown config key '" + key + "'");
    (void)value;
  }
  try {
    get_int("kmax", c.kmax);
    get_int("min_ratio", c.min_ratio);
    get_int("full_grid_depth", c.full_grid_depth);
    get_int("cantor_depth", c.cantor_depth);
    get_int("e_p_p", c.e_p_p);
    get_int("e_p_n", c.e_p_n);
    get_int("union_base", c.union_base);
    get_int("union_count", c.union_count);
    get_int("primes_n", c.primes_n);
    get_int("prime_powers_m", c.prime_powers_m);
    get_int("prime_powers_n", c.prime_powers_n);
    get_int("squares_n", c.squares_n);
    get_int("cantor_max_dim", c.cantor_max_dim);
    get_scalar("cantor_eps3_floor", c.cantor_eps3_floor);
    get_int("cantor_floor_k", c.cantor_floor_k);
    get_scalar("cantor_floor", c.cantor_floor);
    get_int("union_box_max", c.union_box_max);
    get_int("primes_exact_kmax", c.primes_exact_kmax);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
  if (c.kmax < 2) throw Error("kmax must be >= 2");
  return c;
}

inline nlohmann::json to_json(const BatteryConfig& c) {
  return {{"kmax", c.kmax},
          {"min_ratio", c.min_ratio},
          {"full_grid_depth", c.full_grid_depth},
          {"cantor_depth", c.cantor_depth},
          {"e_p_p", c.e_p_p},
          {"e_p_n", c.e_p_n},
          {"union_base", c.union_base},
          {"union_count", c.union_count},
          {"primes_n", c.primes_n},
          {"prime_powers_m", c.prime_powers_m},
          {"prime_powers_n", c.prime_powers_n},
          {"squares_n", c.squares_n},
          {"cantor_max_dim", c.cantor_max_dim},
          {"cantor_eps3_floor", to_string(c.cantor_eps3_floor)},
          {"cantor_floor_k", c.cantor_floor_k},
          {"cantor_floor", to_string(c.cantor_floor)},
          {"union_box_max", c.union_box_max},
          {"primes_exact_kmax", c.primes_exact_kmax}};
}

struct Flag {
  std::string name;
  std::string predicate;
  bool passed = false;
};

struct FamilyRow {
  std::string name;
  std::size_t size = 0;
  double assouad = 0.0;
  double box_slope = 0.0;
  std::map<int, Scalar> eps;          ///< ε(k), k = 2..kmax
  std::map<int, bool> exact_patch;    ///< contains_patch_exact hit
  Scalar tangent_defect;
  Scalar tangent_fine_bound;          ///< 2r/R at the witness pair
  std::vector<Flag> flags;
};

struct BatteryReport {
  BatteryConfig config;
  std::vector<FamilyRow> families;  ///< sorted by name
  Flag coherence;                   ///< reported, not enforced
  bool passed = true;               ///< all per-family flags pass
};

namespace detail {

struct FamilySetup {
  PointSet patch_set;   ///< where ε(k) is measured
  PointSet dim_set;     ///< where dimensions and tangents are measured
  unsigned base = 2;
  int lo = 0;
  int hi = 12;
};

/// Dyadic depth reaching below the smallest gap of a reciprocal set of integers up to `max`.
inline int reciprocal_depth(const BigInt& max) { return 2 * static_cast<int>(msb(max)) + 3; }

inline FamilySetup setup_family(const std::string& name, const BatteryConfig& c) {
  auto integer_family = [](const IntegerSequence& seq) {
    PointSet recip = reciprocal_set(seq);
    return FamilySetup{integer_point_set(seq), recip, 2, 0, reciprocal_depth(seq.values().back())};
  };
  if (name == "full_grid") {
    PointSet F = full_grid_set(c.full_grid_depth);
    return {F, F, 2, 0, c.full_grid_depth};
  }
  if (name == "cantor") {
    PointSet F = cantor_set(c.cantor_depth);
    return {F, F, 3, 0, c.cantor_depth};
  }
  if (name == "e_p") {
    PointSet F = e_p_set(c.e_p_p, c.e_p_n);
    int depth = static_cast<int>(msb(pow(BigInt(c.e_p_n), static_cast<unsigned>(c.e_p_p + 1)))) + 2;
    return {F, F, 2, 0, depth};
  }
  if (name == "union_patches") {
    PointSet F = union_patches_set(c.union_base, c.union_count);
    return {F, F, static_cast<unsigned>(c.union_base), 0, c.union_count};
  }
  if (name == "primes") return integer_family(sieve_primes(static_cast<std::uint64_t>(c.primes_n)));
  if (name == "prime_powers") return integer_family(prime_powers_sequence(c.prime_powers_m, c.prime_powers_n));
  if (name == "squares") return integer_family(squares_sequence(c.squares_n));
  if (name.rfind("file:", 0) == 0) {
    PointSet F = read_point_set_file(name.substr(5));
    if (F.size() < 2) throw Error("family '" + name + "' needs at least two points");
    int top = top_level(F, 2);
    return {F, F, 2, top, top + 12};
  }
  throw Error("unknown family '" + name + "'");
}

inline std::string format_threshold(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

inline bool all_zero(const FamilyRow& row, int kmax) {
  for (const auto& [k, e] : row.eps) {
    if (k <= kmax && e != 0) return false;
  }
  return true;
}

inline FamilyRow run_family(const std::string& name, const BatteryConfig& c) {
  FamilySetup s = setup_family(name, c);
  FamilyRow row;
  row.name = name;
  row.size = s.patch_set.size();

  auto pairs = power_scale_pairs(s.base, s.lo, s.hi);
  BestTangent best = best_tangent(s.dim_set, pairs, BigInt(c.min_ratio));
  row.assouad = best.report.estimate;
  row.tangent_defect = best.zoom.defect;
  const auto& wrow = best.report.rows[best.report.best_row];
  row.tangent_fine_bound = Scalar(2) * wrow.fine / wrow.coarse;

  std::vector<Scalar> scales;
  for (int a = s.lo; a <= s.hi; ++a) scales.push_back(power_scale(s.base, a));
  row.box_slope = box_estimate(s.dim_set, scales).finest_slope;

  for (int k = 2; k <= c.kmax; ++k) {
    row.eps[k] = best_patch_defect(s.patch_set, k).relative;
    row.exact_patch[k] = contains_patch_exact(s.patch_set, k).has_value();
  }

  bool consistent = true;
  for (int k = 2; k <= c.kmax; ++k) consistent = consistent && ((row.eps[k] == 0) == row.exact_patch[k]);
  row.flags.push_back({"consistency", "eps(k) == 0 exactly iff contains_patch_exact finds a k-patch, k = 2..kmax",
                       consistent});

  auto eps_at = [&](int k) -> const Scalar* {
    auto it = row.eps.find(k);
    return it == row.eps.end() ? nullptr : &it->second;
  };

  if (name == "full_grid") {
    row.flags.push_back({"assouad_full", "assouad estimate == 1", row.assouad == 1.0});
    row.flags.push_back({"eps_zero", "eps(k) == 0 for k = 2..kmax", all_zero(row, c.kmax)});
    row.flags.push_back({"tangent_fine", "tangent defect <= 2r/R at the witness pair",
                         row.tangent_defect <= row.tangent_fine_bound});
  } else if (name == "cantor") {
    row.flags.push_back({"assouad_below", "assouad estimate <= " + format_threshold(c.cantor_max_dim),
                         row.assouad <= c.cantor_max_dim});
    if (const Scalar* e3 = eps_at(3)) {
      row.flags.push_back({"eps3_floor", "eps(3) >= " + to_string(c.cantor_eps3_floor), *e3 >= c.cantor_eps3_floor});
    }
    if (const Scalar* ek = eps_at(c.cantor_floor_k)) {
      row.flags.push_back({"eps_floor", "eps(" + std::to_string(c.cantor_floor_k) + ") >= " + to_string(c.cantor_floor),
                           *ek >= c.cantor_floor});
    }
  } else if (name == "e_p") {
    bool none = !find_3ap(s.patch_set).has_value();
    const Scalar* e3 = eps_at(3);
    row.flags.push_back({"no_3ap", "find_3ap finds nothing and eps(3) > 0", none && e3 && *e3 > 0});
  } else if (name == "union_patches") {
    row.flags.push_back({"eps_zero", "eps(k) == 0 for k = 2..min(kmax, count)", all_zero(row, c.union_count)});
    row.flags.push_back({"box_small", "finest box slope <= " + format_threshold(c.union_box_max),
                         row.box_slope <= c.union_box_max});
  } else if (name == "primes") {
    row.flags.push_back({"eps_zero", "eps(k) == 0 for k = 2..min(kmax, " + std::to_string(c.primes_exact_kmax) + ")",
                         all_zero(row, c.primes_exact_kmax)});
  } else if (name == "squares" || (name == "prime_powers" && c.prime_powers_m == 2)) {
    if (const Scalar* e3 = eps_at(3)) row.flags.push_back({"three_ap", "eps(3) == 0", *e3 == 0});
    if (const Scalar* e4 = eps_at(4)) row.flags.push_back({"no_four_ap", "eps(4) > 0", *e4 > 0});
  }
  return row;
}

}  // namespace detail

/// Expands "all" and comma lists; output order is by name.
inline std::vector<std::string> parse_family_list(const std::string& list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    std::string item = std::string(trim(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (item == "all") {
      out.insert(out.end(), builtin_families().begin(), builtin_families().end());
    } else if (!item.empty()) {
      bool known = item.rfind("file:", 0) == 0 ||
                   std::find(builtin_families().begin(), builtin_families().end(), item) != builtin_families().end();
      if (!known) throw Error("unknown family '" + item + "'");
      out.push_back(item);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error("no families selected");
  return out;
}

inline BatteryReport run_battery(const std::vector<std::string>& families, const BatteryConfig& config) {
  BatteryReport report;
  report.config = config;
  std::vector<std::string> names = families;
  std::sort(names.begin(), names.end());
  report.families = parallel_map(names.size(), [&](std::size_t i) { return detail::run_family(names[i], config); });
  for (const auto& f : report.families) {
    for (const auto& flag : f.flags) report.passed = report.passed && flag.passed;
  }

  // Higher Assouad estimate should come with smaller ε(kmax).
  std::vector<std::string> discordant;
  for (const auto& a : report.families) {
    for (const auto& b : report.families) {
      if (a.assouad > b.assouad && a.eps.at(config.kmax) > b.eps.at(config.kmax)) discordant.push_back(a.name + ">" + b.name);
    }
  }
  std::string detail = discordant.empty() ? "" : " (discordant:";
  for (const auto& d : discordant) detail += " " + d;
  if (!discordant.empty()) detail += ")";
  report.coherence = {"directional_coherence",
                      "assouad(A) > assouad(B) implies eps_A(kmax) <= eps_B(kmax); regression flag, not enforced" + detail,
                      discordant.empty()};
  return report;
}

inline nlohmann::json to_json(const BatteryReport& r) {
  nlohmann::json families = nlohmann::json::array();
  for (const auto& f : r.families) {
    nlohmann::json eps = nlohmann::json::object();
    for (const auto& [k, e] : f.eps) {
      eps[std::to_string(k)] = {{"exact", to_string(e)}, {"decimal", to_double(e)}, {"exact_patch", f.exact_patch.at(k)}};
    }
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& flag : f.flags) flags.push_back({{"name", flag.name}, {"predicate", flag.predicate}, {"passed", flag.passed}});
    families.push_back({{"family", f.name},
                        {"size", f.size},
                        {"assouad_estimate", f.assouad},
                        {"box_finest_slope", f.box_slope},
                        {"eps", eps},
                        {"tangent_defect", to_string(f.tangent_defect)},
                        {"tangent_defect_decimal", to_double(f.tangent_defect)},
                        {"flags", flags}});
  }
  return {{"config", to_json(r.config)},
          {"families", families},
          {"coherence",
           {{"name", r.coherence.name}, {"predicate", r.coherence.predicate}, {"passed", r.coherence.passed}, {"enforced", false}}},
          {"passed", r.passed}};
}

}  // namespace patchscope
