#pragma once

// Grid counting at pairs of scales: cell counts M_r(Q), Assouad- and
// box-counting estimators, the cutting-and-reducing upper bound, and
// zooms of grid cells onto the unit ball (weak-tangent surrogates).
//
// Cells at scale R are half-open cubes R·[z, z+1)^d, z in Z^d, so every
// point lies in exactly one cell.

#include "patchscope/geometry.hpp"
#include "patchscope/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace patchscope {

struct CellIndex {
  std::vector<BigInt> z;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend bool operator<(const CellIndex& a, const CellIndex& b) {
    return std::lexicographical_compare(a.z.begin(), a.z.end(), b.z.begin(), b.z.end());
  }
};

inline std::string to_string(const CellIndex& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.z.size(); ++i) {
    if (i) out += ",";
    out += c.z[i].str();
  }
  return out + ")";
}

inline CellIndex cell_of(const Point& p, const Scalar& scale) {
  CellIndex c;
  c.z.reserve(p.dim());
  for (const auto& x : p.coords()) c.z.push_back(floor(Scalar(x / scale)));
  return c;
}

inline Point cell_corner(const CellIndex& c, const Scalar& scale) {
  std::vector<Scalar> coords;
  coords.reserve(c.z.size());
  for (const auto& z : c.z) coords.push_back(Scalar(z) * scale);
  return Point(std::move(coords));
}

/// Tiling of the space by half-open cubes of side `scale`.
struct GridSpec {
  NormedSpace space;
  Scalar scale;

  GridSpec(NormedSpace s, Scalar R) : space(s), scale(std::move(R)) {
    if (scale <= 0) throw Error("grid scale must be positive");
  }

  CellIndex cell(const Point& p) const { return cell_of(p, scale); }
  bool contains(const CellIndex& Q, const Point& p) const { return cell(p) == Q; }
};

/// Coarse scale R and fine scale r with R/r an integer >= 2, so fine cells nest in coarse ones.
class ScalePair {
 public:
  ScalePair(Scalar coarse, Scalar fine) : coarse_(std::move(coarse)), fine_(std::move(fine)) {
    if (fine_ <= 0 || fine_ >= coarse_) throw Error("scale pair needs 0 < r < R");
    Scalar ratio = coarse_ / fine_;
    if (!is_integer(ratio)) throw Error("scales are not nested: R/r = " + to_string(ratio) + " is not an integer");
    ratio_ = num(ratio);
  }

  const Scalar& coarse() const { return coarse_; }
  const Scalar& fine() const { return fine_; }
  const BigInt& ratio() const { return ratio_; }

 private:
  Scalar coarse_;
  Scalar fine_;
  BigInt ratio_;
};

/// base^(-exponent), exact.
inline Scalar power_scale(unsigned base, int exponent) {
  if (base < 2) throw Error("scale base must be >= 2");
  Scalar b = pow(Scalar(base), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  return exponent >= 0 ? Scalar(1 / b) : b;
}

/// All pairs (base^-a, base^-b) with lo <= a < b <= hi.
inline std::vector<ScalePair> power_scale_pairs(unsigned base, int lo, int hi) {
  std::vector<ScalePair> pairs;
  for (int a = lo; a <= hi; ++a) {
    for (int b = a + 1; b <= hi; ++b) pairs.emplace_back(power_scale(base, a), power_scale(base, b));
  }
  return pairs;
}

/// Largest exponent a with base^-a >= the coordinate extent of F (0 for a singleton).
inline int top_level(const PointSet& F, unsigned base = 2) {
  Scalar extent = 0;
  for (int i = 0; i < F.dim(); ++i) {
    auto [lo, hi] = std::minmax_element(F.begin(), F.end(), [i](const Point& a, const Point& b) {
      return a[static_cast<std::size_t>(i)] < b[static_cast<std::size_t>(i)];
    });
    Scalar range = (*hi)[static_cast<std::size_t>(i)] - (*lo)[static_cast<std::size_t>(i)];
    if (range > extent) extent = range;
  }
  int top = 0;
  if (extent > 0) {
    while (power_scale(base, top) < extent) --top;
    while (power_scale(base, top + 1) >= extent) ++top;
  }
  return top;
}

/// Pairs base^-a > base^-b spanning `levels` levels below the set's extent.
inline std::vector<ScalePair> default_scale_pairs(const PointSet& F, unsigned base = 2, int levels = 12) {
  int top = top_level(F, base);
  return power_scale_pairs(base, top, top + levels);
}

/// M_r(Q): number of scale-r cells inside Q (at scale R) that meet F.
inline std::size_t cell_count(const PointSet& F, const CellIndex& Q, const Scalar& R, const Scalar& r) {
  ScalePair pair(R, r);
  if (Q.z.size() != static_cast<std::size_t>(F.dim())) throw Error("cell index dimension mismatch");
  std::set<CellIndex> fine;
  for (const auto& p : F) {
    if (cell_of(p, R) == Q) fine.insert(cell_of(p, r));
  }
  return fine.size();
}

/// N_r(F): number of scale-r cells meeting F.
inline std::size_t occupied_count(const PointSet& F, const Scalar& r) {
  std::set<CellIndex> cells;
  for (const auto& p : F) cells.insert(cell_of(p, r));
  return cells.size();
}

/// Occupied scale-R cells and the points of F inside each.
inline std::map<CellIndex, std::vector<Point>> occupied_cells(const PointSet& F, const Scalar& R) {
  std::map<CellIndex, std::vector<Point>> cells;
  for (const auto& p : F) cells[cell_of(p, R)].push_back(p);
  return cells;
}

struct DimensionRow {
  Scalar coarse;
  Scalar fine;
  BigInt ratio;
  std::size_t max_count = 0;
  double exponent = 0.0;
  CellIndex witness;
  bool admitted = false;
};

struct DimensionReport {
  int dim = 1;
  BigInt min_ratio;
  std::vector<DimensionRow> rows;
  double estimate = 0.0;
  std::size_t best_row = 0;  ///< row realizing the estimate
};

namespace detail {

/// log M / log ratio; exactly d when the count is saturated.
inline double count_exponent(std::size_t count, const BigInt& ratio, int dim) {
  if (count <= 1) return 0.0;
  BigInt full = pow(ratio, static_cast<unsigned>(dim));
  if (BigInt(count) == full) return static_cast<double>(dim);
  double s = std::log(static_cast<double>(count)) / log_big(ratio);
  return std::min(s, static_cast<double>(dim));
}

inline DimensionRow dimension_row(const PointSet& F, const ScalePair& pair, const BigInt& min_ratio) {
  std::map<CellIndex, std::set<CellIndex>> fine_by_coarse;
  for (const auto& p : F) fine_by_coarse[cell_of(p, pair.coarse())].insert(cell_of(p, pair.fine()));
  DimensionRow row;
  row.coarse = pair.coarse();
  row.fine = pair.fine();
  row.ratio = pair.ratio();
  // map iteration is lexicographic, so the first maximum is the smallest witness
  for (const auto& [cell, fine] : fine_by_coarse) {
    if (fine.size() > row.max_count) {
      row.max_count = fine.size();
      row.witness = cell;
    }
  }
  row.exponent = count_exponent(row.max_count, row.ratio, F.dim());
  row.admitted = row.ratio >= min_ratio;
  return row;
}

}  // namespace detail

/// Per-pair maximal cell counts and exponents. The estimate is the maximal
/// exponent over pairs with R/r >= min_ratio.
inline DimensionReport assouad_estimate(const PointSet& F, const std::vector<ScalePair>& pairs,
                                        const BigInt& min_ratio = 16) {
  if (F.is_empty()) throw Error("Assouad estimate of an empty set");
  if (pairs.empty()) throw Error("no scale pairs given");
  DimensionReport report;
  report.dim = F.dim();
  report.min_ratio = min_ratio;
  report.rows = parallel_map(pairs.size(), [&](std::size_t i) { return detail::dimension_row(F, pairs[i], min_ratio); });
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (!row.admitted) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = report.rows[*best];
    if (row.exponent > b.exponent || (row.exponent == b.exponent && (row.ratio > b.ratio || (row.ratio == b.ratio && row.coarse < b.coarse)))) {
      best = i;
    }
  }
  if (!best) throw Error("no admitted scale pairs (need R/r >= " + min_ratio.str() + ")");
  report.best_row = *best;
  report.estimate = report.rows[*best].exponent;
  return report;
}

inline nlohmann::json to_json(const DimensionReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json witness = nlohmann::json::array();
    for (const auto& z : row.witness.z) witness.push_back(z.str());
    rows.push_back({{"R", to_string(row.coarse)},
                    {"r", to_string(row.fine)},
                    {"ratio", row.ratio.str()},
                    {"count", std::to_string(row.max_count)},
                    {"exponent", row.exponent},
                    {"witness", witness},
                    {"admitted", row.admitted}});
  }
  return {{"dim", report.dim},
          {"min_ratio", report.min_ratio.str()},
          {"estimate", report.estimate},
          {"best_row", report.best_row},
          {"rows", rows}};
}

inline std::string to_csv(const DimensionReport& report) {
  std::ostringstream out;
  out << "R,r,ratio,count,exponent,witness,admitted\n";
  out.precision(17);
  for (const auto& row : report.rows) {
    std::string w;
    for (std::size_t i = 0; i < row.witness.z.size(); ++i) w += (i ? " " : "") + row.witness.z[i].str();
    out << to_string(row.coarse) << ',' << to_string(row.fine) << ',' << row.ratio << ',' << row.max_count << ','
        << row.exponent << ',' << w << ',' << (row.admitted ? 1 : 0) << '\n';
  }
  return out.str();
}

struct BoxReport {
  std::vector<Scalar> scales;
  std::vector<std::size_t> counts;
  std::vector<double> slopes;  ///< slopes[i] between scales[i] and scales[i+1]
  double finest_slope = 0.0;
};

/// Global occupied-cell counts N_r(F) and consecutive log-log slopes.
inline BoxReport box_estimate(const PointSet& F, const std::vector<Scalar>& scales) {
  if (scales.size() < 2) throw Error("box estimate needs at least two scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] <= 0) throw Error("scales must be positive");
    if (i && scales[i] >= scales[i - 1]) throw Error("scales must be strictly decreasing");
  }
  if (F.is_empty()) throw Error("box estimate of an empty set");
  BoxReport report;
  report.scales = scales;
  report.counts = parallel_map(scales.size(), [&](std::size_t i) { return occupied_count(F, scales[i]); });
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    double num_log = std::log(static_cast<double>(report.counts[i + 1]) / static_cast<double>(report.counts[i]));
    report.slopes.push_back(num_log / log_scalar(Scalar(scales[i] / scales[i + 1])));
  }
  report.finest_slope = report.slopes.back();
  return report;
}

inline nlohmann::json to_json(const BoxReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < report.scales.size(); ++i) {
    nlohmann::json row = {{"r", to_string(report.scales[i])}, {"count", std::to_string(report.counts[i])}};
    if (i + 1 < report.scales.size()) row["slope_to_next"] = report.slopes[i];
    rows.push_back(row);
  }
  return {{"rows", rows}, {"finest_slope", report.finest_slope}};
}

/// Upper bound δ^{-d}(1-ε^d)^m on M_r(Q) when every cell at every scale has an
/// empty ε-subcell; δ = r/R and m is the integer with ε^{m+1} <= δ < ε^m.
inline Scalar cutting_bound(const Scalar& delta_ratio, const Scalar& epsilon, int d) {
  if (d < 1) throw Error("dimension must be >= 1");
  if (!(delta_ratio > 0 && delta_ratio < epsilon && epsilon < 1)) throw Error("cutting bound needs 0 < r/R < epsilon < 1");
  unsigned m = 0;
  Scalar eps_pow = epsilon;  // ε^{m+1}
  while (eps_pow > delta_ratio) {
    eps_pow *= epsilon;
    ++m;
  }
  Scalar eps_d = pow(epsilon, static_cast<unsigned>(d));
  return pow(Scalar(1 / delta_ratio), static_cast<unsigned>(d)) * pow(Scalar(1 - eps_d), m);
}

/// Lattice {-1 + i·h}^d ∩ B(0,1) with h = 2/steps, i = 0..steps.
inline PointSet unit_ball_lattice(const NormedSpace& space, const BigInt& steps) {
  auto n = to_int64(steps);
  if (!n || *n < 1) throw Error("lattice resolution must be a positive integer");
  double total = std::pow(static_cast<double>(*n + 1), space.dim());
  if (total > 4.0e6) throw Error("lattice resolution too fine for exact comparison");
  Scalar h = Scalar(2) / Scalar(*n);
  std::vector<Point> pts;
  for_each_multi_index(space.dim(), static_cast<int>(*n + 1), [&](const std::vector<int>& x) {
    std::vector<Scalar> c;
    c.reserve(x.size());
    for (int xi : x) c.push_back(Scalar(-1) + h * xi);
    Point p(std::move(c));
    if (norm_of(space, p) <= 1) pts.push_back(std::move(p));
  });
  return PointSet(space, std::move(pts), "unit-ball lattice");
}

struct TangentZoom {
  Similarity map;            ///< sends the cell onto [-1,1]^d
  PointSet image;            ///< T(F) ∩ B(0,1)
  Scalar defect;             ///< d_H(image, lattice of B(0,1))
  Scalar discretization;     ///< bound on d_H(lattice, B(0,1)) in the same units
  bool squared = false;
};

/// Zooms the scale-R cell Q onto the unit ball and measures how far the
/// clipped image is from the ball, against the ball lattice of step 2r/R.
inline TangentZoom tangent_zoom(const PointSet& F, const CellIndex& Q, const Scalar& R, const Scalar& resolution) {
  if (R <= 0 || resolution <= 0 || resolution > R) throw Error("tangent zoom needs 0 < r <= R");
  Scalar steps = R / resolution;
  if (!is_integer(steps)) throw Error("tangent zoom needs R/r to be an integer");
  bool occupied = std::any_of(F.begin(), F.end(), [&](const Point& p) { return cell_of(p, R) == Q; });
  if (!occupied) throw Error("cell " + to_string(Q) + " contains no point of the set");

  const int d = F.dim();
  Scalar lambda = Scalar(2) / R;
  Point corner = cell_corner(Q, R);
  std::vector<Scalar> shift(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) shift[static_cast<std::size_t>(i)] = -lambda * corner[static_cast<std::size_t>(i)] - 1;
  Similarity T(lambda, Point(std::move(shift)));

  PointSet image = apply_similarity(T, F, true);
  if (image.is_empty()) throw Error("zoomed image misses the unit ball under this norm");
  PointSet lattice = unit_ball_lattice(F.space(), num(steps));
  auto dh = hausdorff_distance(image, lattice);

  Scalar half_step = Scalar(1) / Scalar(num(steps));  // h/2
  Scalar disc;
  switch (F.space().norm()) {
    case Norm::linf: disc = half_step; break;
    case Norm::l1: disc = Scalar(2 * d) * half_step; break;
    case Norm::l2sq: disc = Scalar(4 * d) * half_step * half_step; break;
  }
  return TangentZoom{T, std::move(image), std::move(dh.value), std::move(disc), dh.squared};
}

struct BestTangent {
  DimensionReport report;
  TangentZoom zoom;
};

/// Zoom into the witness cell of the row realizing the Assouad estimate, at that row's fine scale.
inline BestTangent best_tangent(const PointSet& F, const std::vector<ScalePair>& pairs, const BigInt& min_ratio = 16) {
  DimensionReport report = assouad_estimate(F, pairs, min_ratio);
  const auto& row = report.rows[report.best_row];
  TangentZoom zoom = tangent_zoom(F, row.witness, row.coarse, row.fine);
  return BestTangent{std::move(report), std::move(zoom)};
}

inline nlohmann::json to_json(const TangentZoom& z) {
  return {{"scale", to_string(z.map.scale())},
          {"translation", to_string(z.map.translation())},
          {"image_size", z.image.size()},
          {"defect", to_string(z.defect)},
          {"defect_decimal", to_double(z.defect)},
          {"discretization_bound", to_string(z.discretization)},
          {"squared", z.squared}};
}

/// N_r for a 1-D set: the least number of open sets of diameter r covering it
/// (greedy, exact). Points at distance exactly r cannot share such a set.
inline std::size_t min_interval_cover(const PointSet& F, const Scalar& r) {
  if (F.dim() != 1) throw Error("interval cover is defined for 1-D sets");
  if (r <= 0) throw Error("cover diameter must be positive");
  if (F.is_empty()) return 0;
  std::size_t count = 1;
  const Scalar* start = &F[0][0];
  for (const auto& p : F) {
    if (p[0] - *start >= r) {
      ++count;
      start = &p[0];
    }
  }
  return count;
}

}  // namespace patchscope
