#pragma once

// Exact and approximate arithmetic-patch containment.
//
// The relative defect of a candidate (t, δ) for a pattern P is
//   max_{p in P} dist(t + δp, F) / δ,
// which equals min_{E ⊆ F} d_H(E, t + δP) / δ (nearest points form the optimal
// subset). Candidate families are finite, so for ε > 0 the reported value is an
// upper bound on the infimum over all (t, δ).

#include "patchscope/geometry.hpp"
#include "patchscope/grid.hpp"
#include "patchscope/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace patchscope {

enum class Strategy { anchored, grid };

inline std::string to_string(Strategy s) { return s == Strategy::anchored ? "anchored" : "grid"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "anchored") return Strategy::anchored;
  if (s == "grid") return Strategy::grid;
  throw Error("unknown strategy '" + std::string(s) + "'");
}

struct Candidate {
  Point t;
  Scalar delta;
};

namespace detail {

struct IntVecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
};

/// Points scaled by the common denominator, when every scaled coordinate
/// times `headroom` still fits in int64.
inline std::optional<std::pair<BigInt, std::vector<std::vector<std::int64_t>>>> integer_lattice(const PointSet& F,
                                                                                               int headroom) {
  BigInt common = 1;
  for (const auto& p : F) {
    for (const auto& c : p.coords()) common = lcm(common, den(c));
  }
  const BigInt limit = BigInt(1) << 61;
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(F.size());
  for (const auto& p : F) {
    std::vector<std::int64_t> v;
    v.reserve(p.dim());
    for (const auto& c : p.coords()) {
      BigInt z = num(c) * (common / den(c));
      if ((z < 0 ? BigInt(-z) : z) * headroom >= limit) return std::nullopt;
      v.push_back(*to_int64(z));
    }
    out.push_back(std::move(v));
  }
  return std::make_pair(common, std::move(out));
}

}  // namespace detail

/// Some (t, δ) whose k-patch lies in F, or none. Enumerates pairs (t, t + δe_1)
/// of points of F, which every contained patch has; the first hit in
/// (lexicographic t, increasing δ) order is returned.
inline std::optional<Candidate> contains_patch_exact(const PointSet& F, int k) {
  if (k < 2) throw Error("patch size k must be >= 2");
  if (F.size() < 2) return std::nullopt;
  const int d = F.dim();
  const auto& pts = F.points();

  // Points sharing coordinates 1..d-1 form a line along e_1, sorted by coordinate 0.
  auto line_key = [](const auto& p) { return std::vector(std::next(p.begin()), p.end()); };

  if (auto lattice = detail::integer_lattice(F, 2 * k + 2)) {
    const auto& [common, ipts] = *lattice;
    using IVec = std::vector<std::int64_t>;
    std::unordered_set<IVec, detail::IntVecHash> set(ipts.begin(), ipts.end());
    std::map<IVec, std::vector<std::int64_t>> lines;
    for (const auto& v : ipts) lines[line_key(v)].push_back(v[0]);
    for (const auto& t : ipts) {
      const auto& line = lines[line_key(t)];
      auto it = std::upper_bound(line.begin(), line.end(), t[0]);
      const std::int64_t last = line.back();
      for (; it != line.end(); ++it) {
        std::int64_t delta = *it - t[0];
        if (t[0] + static_cast<std::int64_t>(k - 1) * delta > last) break;
        bool ok = true;
        IVec q(t.size());
        for_each_multi_index(d, k, [&](const std::vector<int>& x) {
          if (!ok) return;
          for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)] + x[static_cast<std::size_t>(i)] * delta;
          if (!set.count(q)) ok = false;
        });
        if (ok) {
          std::vector<Scalar> tc;
          for (auto c : t) tc.push_back(Scalar(BigInt(c), common));
          return Candidate{Point(std::move(tc)), Scalar(BigInt(delta), common)};
        }
      }
    }
    return std::nullopt;
  }

  std::map<std::vector<Scalar>, std::vector<Scalar>> lines;
  for (const auto& p : pts) lines[line_key(p.coords())].push_back(p[0]);
  for (const auto& t : pts) {
    const auto& line = lines[line_key(t.coords())];
    auto it = std::upper_bound(line.begin(), line.end(), t[0]);
    for (; it != line.end(); ++it) {
      Scalar delta = *it - t[0];
      if (t[0] + delta * (k - 1) > line.back()) break;
      bool ok = true;
      for_each_multi_index(d, k, [&](const std::vector<int>& x) {
        if (!ok) return;
        Point q = t;
        for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i)] += delta * x[static_cast<std::size_t>(i)];
        if (!F.contains(q)) ok = false;
      });
      if (ok) return Candidate{t, delta};
    }
  }
  return std::nullopt;
}

struct SubsetDefect {
  PointSet subset;
  Scalar defect;
};

/// E = nearest points of F to P, with d_H(E, P) = max_p dist(p, F); this is
/// the minimum of d_H(E', P) over all non-empty E' ⊆ F.
inline SubsetDefect optimal_subset_defect(const PointSet& F, const PointSet& P) {
  detail::require_comparable(F, P);
  std::vector<Point> nearest;
  nearest.reserve(P.size());
  Scalar worst = 0;
  for (const auto& p : P) {
    auto n = dist_point_to_set(p, F);
    if (n.distance > worst) worst = n.distance;
    nearest.push_back(std::move(n.point));
  }
  return {PointSet(F.space(), std::move(nearest), "nearest subset"), std::move(worst)};
}

/// Translates P so its lexicographically smallest point is the origin.
inline PointSet normalize_pattern(const PointSet& P) {
  if (P.is_empty()) throw Error("empty pattern");
  const Point origin = P[0];
  std::vector<Point> pts;
  pts.reserve(P.size());
  for (const auto& p : P) pts.push_back(p - origin);
  return PointSet(P.space(), std::move(pts), P.label());
}

/// {0..k-1}^d as a pattern.
inline PointSet patch_pattern(const NormedSpace& space, int k) {
  return patch_points(Patch(Point::zero(space.dim()), 1, k, space));
}

/// Scales δ for anchor F[t_index]: δ = (y_i - t_i)/g over y in F and nonzero
/// pattern coordinates g on axis i, keeping δ > 0.
inline std::set<Scalar> anchored_deltas(const PointSet& F, const PointSet& pattern, std::size_t t_index) {
  const int d = F.dim();
  std::vector<std::set<Scalar>> gaps(static_cast<std::size_t>(d));
  for (const auto& p : pattern) {
    for (int i = 0; i < d; ++i) {
      if (p[static_cast<std::size_t>(i)] != 0) gaps[static_cast<std::size_t>(i)].insert(p[static_cast<std::size_t>(i)]);
    }
  }
  const Point& t = F[t_index];
  std::set<Scalar> deltas;
  for (const auto& y : F) {
    for (int i = 0; i < d; ++i) {
      Scalar diff = y[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(i)];
      if (diff == 0) continue;
      for (const auto& g : gaps[static_cast<std::size_t>(i)]) {
        Scalar delta = diff / g;
        if (delta > 0) deltas.insert(std::move(delta));
      }
    }
  }
  return deltas;
}

/// The full anchored family {(t, δ) : t in F, δ in anchored_deltas}.
inline std::vector<Candidate> anchored_candidates(const PointSet& F, const PointSet& pattern) {
  PointSet normalized = normalize_pattern(pattern);
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (const auto& delta : anchored_deltas(F, normalized, i)) out.push_back({F[i], delta});
  }
  return out;
}

/// Candidates seeded from the densest grid cells: the scaled pattern placed
/// inside the cell (δ = R / extent(pattern)), plus the fine scale r anchored
/// at the cell corner and at points of F in the cell.
inline std::vector<Candidate> grid_candidates(const PointSet& F, const PointSet& pattern,
                                              const std::vector<ScalePair>& pairs, std::size_t max_cells = 8,
                                              std::size_t max_anchors = 16) {
  PointSet normalized = normalize_pattern(pattern);
  const int d = F.dim();
  std::vector<Scalar> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (const auto& p : normalized) {
    for (int i = 0; i < d; ++i) {
      auto ui = static_cast<std::size_t>(i);
      if (p[ui] < lo[ui]) lo[ui] = p[ui];
      if (p[ui] > hi[ui]) hi[ui] = p[ui];
    }
  }
  Scalar extent = 0;
  for (int i = 0; i < d; ++i) extent = std::max(extent, Scalar(hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]));
  if (extent == 0) throw Error("degenerate pattern");

  DimensionReport report = assouad_estimate(F, pairs, 0);
  std::vector<std::size_t> order(report.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = report.rows[a];
    const auto& rb = report.rows[b];
    if (ra.exponent != rb.exponent) return ra.exponent > rb.exponent;
    return ra.ratio > rb.ratio;
  });

  std::vector<Candidate> out;
  std::set<std::pair<Point, Scalar>> seen;
  auto add = [&](Point t, Scalar delta) {
    if (delta <= 0) return;
    if (seen.emplace(t, delta).second) out.push_back({std::move(t), std::move(delta)});
  };
  std::set<std::pair<CellIndex, Scalar>> used;
  for (std::size_t idx : order) {
    if (used.size() >= max_cells) break;
    const auto& row = report.rows[idx];
    if (row.max_count < 2 || !used.emplace(row.witness, row.coarse).second) continue;
    Point corner = cell_corner(row.witness, row.coarse);
    Scalar fit = row.coarse / extent;
    add(corner - fit * Point(lo), fit);
    add(corner - row.fine * Point(lo), row.fine);
    std::size_t anchors = 0;
    for (const auto& p : F) {
      if (anchors >= max_anchors) break;
      if (cell_of(p, row.coarse) != row.witness) continue;
      ++anchors;
      add(p, fit);
      add(p, row.fine);
    }
  }
  return out;
}

struct DefectReport {
  int k = 0;  ///< patch size, or the number of pattern points for Steinhaus searches
  Point t;
  Scalar delta;
  PointSet subset = PointSet::empty(NormedSpace());  ///< realizing E ⊆ F
  Scalar defect;                                     ///< d_H(E, t + δP)
  Scalar relative;                                   ///< defect / δ (defect / δ² under l2sq)
  bool squared = false;
  Strategy strategy = Strategy::anchored;
  std::size_t candidates = 0;

  bool exact() const { return relative == 0; }
};

namespace detail {

struct Ranked {
  Scalar relative;
  Scalar delta;
  Point t;
  Scalar defect;
};

/// Total order: smaller relative defect, then smaller δ, then lexicographic t.
inline bool better(const Ranked& a, const Ranked& b) {
  if (a.relative != b.relative) return a.relative < b.relative;
  if (a.delta != b.delta) return a.delta < b.delta;
  return a.t < b.t;
}

/// max_p dist(t + δp, F), or none once it exceeds `cutoff`.
inline std::optional<Scalar> candidate_defect(const PointSet& F, const PointSet& pattern, const Point& t,
                                              const Scalar& delta, const std::optional<Scalar>& cutoff) {
  Scalar worst = 0;
  for (const auto& p : pattern) {
    Scalar dist = dist_point_to_set(t + delta * p, F).distance;
    if (dist > worst) {
      worst = std::move(dist);
      if (cutoff && worst > *cutoff) return std::nullopt;
    }
  }
  return worst;
}

inline void consider(const PointSet& F, const PointSet& pattern, const Point& t, const Scalar& delta,
                     std::optional<Ranked>& best) {
  const NormedSpace& space = F.space();
  Scalar unit = space.distance_scale(delta);
  std::optional<Scalar> cutoff;
  if (best) cutoff = best->relative * unit;
  auto defect = candidate_defect(F, pattern, t, delta, cutoff);
  if (!defect) return;
  Ranked r{*defect / unit, delta, t, *defect};
  if (!best || better(r, *best)) best = std::move(r);
}

inline DefectReport finish(const PointSet& F, const PointSet& pattern, Ranked best, int k, Strategy strategy,
                           std::size_t count) {
  std::vector<Point> placed;
  for (const auto& p : pattern) placed.push_back(best.t + best.delta * p);
  SubsetDefect sub = optimal_subset_defect(F, PointSet(F.space(), std::move(placed)));
  DefectReport report;
  report.k = k;
  report.t = std::move(best.t);
  report.delta = std::move(best.delta);
  report.subset = std::move(sub.subset);
  report.defect = std::move(best.defect);
  report.relative = std::move(best.relative);
  report.squared = F.space().squared();
  report.strategy = strategy;
  report.candidates = count;
  return report;
}

}  // namespace detail

/// Minimal relative defect of `pattern` over an explicit candidate list.
inline DefectReport best_defect_over(const PointSet& F, const PointSet& pattern, const std::vector<Candidate>& candidates,
                                     int k, Strategy strategy) {
  if (candidates.empty()) throw Error("no candidate placements");
  PointSet normalized = normalize_pattern(pattern);
  const std::size_t workers = std::min<std::size_t>(worker_count(), candidates.size());
  auto partial = parallel_map(workers, [&](std::size_t w) {
    std::optional<detail::Ranked> best;
    for (std::size_t i = w; i < candidates.size(); i += workers) {
      detail::consider(F, normalized, candidates[i].t, candidates[i].delta, best);
    }
    return best;
  });
  std::optional<detail::Ranked> best;
  for (auto& p : partial) {
    if (p && (!best || detail::better(*p, *best))) best = std::move(p);
  }
  return detail::finish(F, normalized, std::move(*best), k, strategy, candidates.size());
}

namespace detail {

inline DefectReport search_pattern(const PointSet& F, const PointSet& pattern, int k, Strategy strategy,
                                   const std::vector<ScalePair>* pairs) {
  PointSet normalized = normalize_pattern(pattern);
  if (strategy == Strategy::grid) {
    auto scale_pairs = pairs ? *pairs : default_scale_pairs(F);
    return best_defect_over(F, normalized, grid_candidates(F, normalized, scale_pairs), k, strategy);
  }
  // Anchored: candidates are generated per anchor to keep memory linear in |F|.
  const std::size_t workers = std::min<std::size_t>(worker_count(), F.size());
  struct Partial {
    std::optional<Ranked> best;
    std::size_t count = 0;
  };
  auto partial = parallel_map(workers, [&](std::size_t w) {
    Partial out;
    for (std::size_t i = w; i < F.size(); i += workers) {
      for (const auto& delta : anchored_deltas(F, normalized, i)) {
        ++out.count;
        consider(F, normalized, F[i], delta, out.best);
      }
    }
    return out;
  });
  std::optional<Ranked> best;
  std::size_t count = 0;
  for (auto& p : partial) {
    count += p.count;
    if (p.best && (!best || better(*p.best, *best))) best = std::move(p.best);
  }
  if (!best) throw Error("no anchored candidates (all points coincide along every pattern axis)");
  return finish(F, normalized, std::move(*best), k, strategy, count);
}

}  // namespace detail

/// Smallest relative defect of a k-patch over the strategy's candidate family.
inline DefectReport best_patch_defect(const PointSet& F, int k, Strategy strategy = Strategy::anchored,
                                      const std::vector<ScalePair>* pairs = nullptr) {
  if (k < 2) throw Error("patch size k must be >= 2");
  if (F.size() < 2) throw Error("patch search needs at least two points");
  return detail::search_pattern(F, patch_pattern(F.space(), k), k, strategy, pairs);
}

/// Smallest relative defect of a scaled, translated copy of `pattern`.
inline DefectReport steinhaus_defect(const PointSet& F, const PointSet& pattern, Strategy strategy = Strategy::anchored,
                                     const std::vector<ScalePair>* pairs = nullptr) {
  if (!(F.space() == pattern.space())) throw Error("pattern and set live in different spaces");
  if (pattern.size() < 2) throw Error("degenerate pattern: needs two distinct points");
  if (F.size() < 2) throw Error("Steinhaus search needs at least two points");
  return detail::search_pattern(F, pattern, static_cast<int>(pattern.size()), strategy, pairs);
}

inline std::string decimal(const Scalar& x, int digits = 12) {
  std::ostringstream out;
  out.precision(digits);
  out << to_double(x);
  return out.str();
}

/// One-line summary: k=<k> eps=<decimal> t=<…> delta=<…> strategy=<…>
inline std::string summary(const DefectReport& r) {
  return "k=" + std::to_string(r.k) + " eps=" + decimal(r.relative) + " t=" + to_string(r.t) + " delta=" +
         to_string(r.delta) + " strategy=" + to_string(r.strategy);
}

inline nlohmann::json to_json(const DefectReport& r) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& c : r.t.coords()) t.push_back(to_string(c));
  nlohmann::json subset = nlohmann::json::array();
  for (const auto& p : r.subset) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& c : p.coords()) q.push_back(to_string(c));
    subset.push_back(q);
  }
  return {{"k", r.k},
          {"t", t},
          {"delta", to_string(r.delta)},
          {"defect", to_string(r.defect)},
          {"relative_defect", to_string(r.relative)},
          {"relative_defect_decimal", to_double(r.relative)},
          {"squared", r.squared},
          {"subset", subset},
          {"strategy", to_string(r.strategy)},
          {"candidates", r.candidates},
          {"bound", r.exact() ? "exact" : "upper_bound"}};
}

}  // namespace patchscope
