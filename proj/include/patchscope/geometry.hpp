#pragma once

// Exact-arithmetic point sets in a finite-dimensional normed space:
// norms, nearest points, Hausdorff distance, arithmetic patches,
// direction sets and similarity maps.

#include "patchscope/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace patchscope {

enum class Norm { linf, l1, l2sq };

inline std::string to_string(Norm n) {
  switch (n) {
    case Norm::linf: return "linf";
    case Norm::l1: return "l1";
    case Norm::l2sq: return "l2sq";
  }
  return "linf";
}

inline Norm parse_norm(std::string_view s) {
  if (s == "linf") return Norm::linf;
  if (s == "l1") return Norm::l1;
  if (s == "l2sq") return Norm::l2sq;
  throw Error("unknown norm '" + std::string(s) + "'");
}

/// R^d with the standard basis and one of three exact norms. For l2sq every
/// distance is reported squared so comparisons stay rational.
class NormedSpace {
 public:
  explicit NormedSpace(int dim = 1, Norm norm = Norm::linf) : dim_(dim), norm_(norm) {
    if (dim < 1) throw Error("dimension must be >= 1");
  }

  int dim() const { return dim_; }
  Norm norm() const { return norm_; }
  bool squared() const { return norm_ == Norm::l2sq; }
  std::string basis() const { return "standard"; }

  /// Factor by which distances scale under x -> lambda x.
  Scalar distance_scale(const Scalar& lambda) const { return squared() ? Scalar(lambda * lambda) : lambda; }

  /// Sum of basis-vector norms, Σ‖e_i‖ (exact for the standard basis).
  Scalar basis_norm_sum() const { return Scalar(dim_); }

  friend bool operator==(const NormedSpace&, const NormedSpace&) = default;

 private:
  int dim_;
  Norm norm_;
};

class Point {
 public:
  Point() = default;
  explicit Point(std::vector<Scalar> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<Scalar> coords) : coords_(coords) {}

  static Point zero(int dim) { return Point(std::vector<Scalar>(static_cast<std::size_t>(dim))); }

  std::size_t dim() const { return coords_.size(); }
  const Scalar& operator[](std::size_t i) const { return coords_[i]; }
  Scalar& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<Scalar>& coords() const { return coords_; }

  friend bool operator==(const Point& a, const Point& b) { return a.coords_ == b.coords_; }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
  friend bool operator<(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(), b.coords_.begin(), b.coords_.end());
  }

  friend Point operator+(const Point& a, const Point& b) {
    Point out = a;
    for (std::size_t i = 0; i < out.dim(); ++i) out.coords_[i] += b.coords_[i];
    return out;
  }
  friend Point operator-(const Point& a, const Point& b) {
    Point out = a;
    for (std::size_t i = 0; i < out.dim(); ++i) out.coords_[i] -= b.coords_[i];
    return out;
  }
  friend Point operator*(const Scalar& s, const Point& a) {
    Point out = a;
    for (auto& c : out.coords_) c *= s;
    return out;
  }

 private:
  std::vector<Scalar> coords_;
};

inline std::string to_string(const Point& p) {
  std::string out;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    if (i) out += ",";
    out += to_string(p[i]);
  }
  return out;
}

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    ScalarHash sh;
    for (const auto& c : p.coords()) h = (h ^ sh(c)) * 0x100000001b3ULL;
    return h;
  }
};

inline Scalar norm_of(const NormedSpace& space, const Point& v) {
  Scalar out = 0;
  switch (space.norm()) {
    case Norm::linf:
      for (const auto& c : v.coords()) {
        Scalar a = abs(c);
        if (a > out) out = a;
      }
      break;
    case Norm::l1:
      for (const auto& c : v.coords()) out += abs(c);
      break;
    case Norm::l2sq:
      for (const auto& c : v.coords()) out += c * c;
      break;
  }
  return out;
}

inline Scalar distance(const NormedSpace& space, const Point& a, const Point& b) {
  return norm_of(space, a - b);
}

/// Finite, deduplicated, lexicographically sorted set of points.
class PointSet {
 public:
  /// Builds a non-empty set; duplicate points collapse to one.
  PointSet(NormedSpace space, std::vector<Point> points, std::string label = {})
      : space_(space), points_(std::move(points)), label_(std::move(label)) {
    if (points_.empty()) throw Error("point set must be non-empty");
    for (const auto& p : points_) {
      if (p.dim() != static_cast<std::size_t>(space_.dim())) throw Error("point dimension does not match space");
    }
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  /// 1-D convenience constructor.
  PointSet(NormedSpace space, const std::vector<Scalar>& values, std::string label = {})
      : PointSet(space, wrap(values), std::move(label)) {}

  static PointSet empty(NormedSpace space, std::string label = {}) {
    PointSet s;
    s.space_ = space;
    s.label_ = std::move(label);
    return s;
  }

  const NormedSpace& space() const { return space_; }
  const std::vector<Point>& points() const { return points_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return points_.size(); }
  bool is_empty() const { return points_.empty(); }
  int dim() const { return space_.dim(); }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  bool contains(const Point& p) const { return std::binary_search(points_.begin(), points_.end(), p); }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.space_ == b.space_ && a.points_ == b.points_;
  }

 private:
  PointSet() = default;

  static std::vector<Point> wrap(const std::vector<Scalar>& values) {
    std::vector<Point> pts;
    pts.reserve(values.size());
    for (const auto& v : values) pts.push_back(Point{v});
    return pts;
  }

  NormedSpace space_;
  std::vector<Point> points_;
  std::string label_;
};

struct NearestPoint {
  Scalar distance;
  Point point;
};

/// Minimal distance from p to F and a realizing point; ties go to the
/// lexicographically smallest point.
inline NearestPoint dist_point_to_set(const Point& p, const PointSet& F) {
  if (F.is_empty()) throw Error("nearest point in an empty set");
  const auto& pts = F.points();
  const NormedSpace& space = F.space();
  if (space.dim() == 1) {
    auto it = std::lower_bound(pts.begin(), pts.end(), p);
    const Point* best = nullptr;
    Scalar best_d;
    if (it != pts.begin()) {
      best = &*std::prev(it);
      best_d = distance(space, p, *best);
    }
    if (it != pts.end()) {
      Scalar d = distance(space, p, *it);
      if (!best || d < best_d) {
        best = &*it;
        best_d = std::move(d);
      }
    }
    return {best_d, *best};
  }
  std::size_t best = 0;
  Scalar best_d = distance(space, p, pts[0]);
  for (std::size_t i = 1; i < pts.size() && best_d != 0; ++i) {
    Scalar d = distance(space, p, pts[i]);
    if (d < best_d) {
      best_d = std::move(d);
      best = i;
    }
  }
  return {best_d, pts[best]};
}

namespace detail {

inline void require_comparable(const PointSet& A, const PointSet& B) {
  if (A.is_empty() || B.is_empty()) throw Error("Hausdorff distance of an empty set");
  if (!(A.space() == B.space())) throw Error("point sets live in different spaces");
}

/// max_{a in A} dist(a, B)
inline Scalar directed_hausdorff(const PointSet& A, const PointSet& B) {
  Scalar out = 0;
  for (const auto& a : A) {
    Scalar d = dist_point_to_set(a, B).distance;
    if (d > out) out = std::move(d);
  }
  return out;
}

}  // namespace detail

struct HausdorffDistance {
  Scalar value;
  bool squared = false;  ///< true under l2sq: value is the squared distance
};

/// Exact Hausdorff distance of two finite sets, O(|A|·|B|) (O(n log n) in 1-D).
inline HausdorffDistance hausdorff_distance(const PointSet& A, const PointSet& B) {
  detail::require_comparable(A, B);
  Scalar ab = detail::directed_hausdorff(A, B);
  Scalar ba = detail::directed_hausdorff(B, A);
  return {ab > ba ? ab : ba, A.space().squared()};
}

/// Arithmetic patch {t + delta * Σ x_i e_i : x_i in {0..k-1}}.
class Patch {
 public:
  Patch(Point t, Scalar delta, int k, NormedSpace space)
      : t_(std::move(t)), delta_(std::move(delta)), k_(k), space_(space) {
    if (t_.dim() != static_cast<std::size_t>(space_.dim())) throw Error("patch origin dimension mismatch");
    if (delta_ <= 0) throw Error("patch scale must be positive");
    if (k_ < 1) throw Error("patch size must be >= 1");
  }

  const Point& t() const { return t_; }
  const Scalar& delta() const { return delta_; }
  int k() const { return k_; }
  const NormedSpace& space() const { return space_; }

 private:
  Point t_;
  Scalar delta_;
  int k_;
  NormedSpace space_;
};

/// Calls fn(x) for every x in {0..k-1}^d in lexicographic order.
template <class Fn>
void for_each_multi_index(int d, int k, Fn&& fn) {
  std::vector<int> x(static_cast<std::size_t>(d), 0);
  while (true) {
    fn(static_cast<const std::vector<int>&>(x));
    int i = d - 1;
    while (i >= 0 && ++x[static_cast<std::size_t>(i)] == k) {
      x[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

inline PointSet patch_points(const Patch& patch) {
  std::vector<Point> pts;
  const int d = patch.space().dim();
  for_each_multi_index(d, patch.k(), [&](const std::vector<int>& x) {
    Point p = patch.t();
    for (int i = 0; i < d; ++i) p[static_cast<std::size_t>(i)] += patch.delta() * x[static_cast<std::size_t>(i)];
    pts.push_back(std::move(p));
  });
  return PointSet(patch.space(), std::move(pts), "patch");
}

using Direction = std::vector<BigInt>;

/// Canonical primitive integer vector of a nonzero rational vector: denominators
/// cleared, divided by the gcd, first nonzero component positive.
inline Direction primitive_direction(const Point& v) {
  BigInt common = 1;
  for (const auto& c : v.coords()) common = lcm(common, den(c));
  Direction out;
  out.reserve(v.dim());
  BigInt g = 0;
  for (const auto& c : v.coords()) {
    BigInt z = num(c) * (common / den(c));
    g = gcd(g, z < 0 ? BigInt(-z) : z);
    out.push_back(std::move(z));
  }
  if (g == 0) throw Error("zero vector has no direction");
  for (auto& z : out) z /= g;
  auto first = std::find_if(out.begin(), out.end(), [](const BigInt& z) { return z != 0; });
  if (*first < 0) {
    for (auto& z : out) z = -z;
  }
  return out;
}

using DirectionSet = std::set<Direction>;

inline DirectionSet direction_set(const PointSet& F) {
  if (F.size() < 2) throw Error("direction set needs at least two points");
  DirectionSet dirs;
  const auto& pts = F.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) dirs.insert(primitive_direction(pts[j] - pts[i]));
  }
  return dirs;
}

/// Rotation- and reflection-free similarity x -> scale * x + translation.
class Similarity {
 public:
  Similarity(Scalar scale, Point translation) : scale_(std::move(scale)), translation_(std::move(translation)) {
    if (scale_ <= 0) throw Error("similarity scale must be positive");
  }

  static Similarity identity(int dim) { return Similarity(1, Point::zero(dim)); }

  const Scalar& scale() const { return scale_; }
  const Point& translation() const { return translation_; }

  Point operator()(const Point& x) const { return scale_ * x + translation_; }

  Point inverse(const Point& y) const { return Scalar(1 / scale_) * (y - translation_); }

 private:
  Scalar scale_;
  Point translation_;
};

/// Image of F under T; with clip_to_unit_ball, intersected with the closed ball B(0,1).
inline PointSet apply_similarity(const Similarity& T, const PointSet& F, bool clip_to_unit_ball = false) {
  if (T.translation().dim() != static_cast<std::size_t>(F.dim())) throw Error("similarity dimension mismatch");
  std::vector<Point> out;
  out.reserve(F.size());
  for (const auto& p : F) {
    Point q = T(p);
    if (clip_to_unit_ball && norm_of(F.space(), q) > 1) continue;
    out.push_back(std::move(q));
  }
  if (out.empty()) return PointSet::empty(F.space(), F.label());
  return PointSet(F.space(), std::move(out), F.label());
}

}  // namespace patchscope
