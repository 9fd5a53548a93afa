#pragma once

// Integer sequences and the sets built from them: primes, prime powers,
// squares, reciprocal sets, E_p = {1/n^p}, unions of shrinking patches and
// Cantor endpoints; three-term progression search; prime subsequences near
// k^5 with their gap differences; decay classification; dyadic-block
// diagnostics for large sets.

#include "patchscope/geometry.hpp"
#include "patchscope/grid.hpp"
#include "patchscope/parallel.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace patchscope {

/// Strictly increasing sequence of positive integers.
class IntegerSequence {
 public:
  IntegerSequence(std::vector<BigInt> values, std::string provenance = "user")
      : values_(std::move(values)), provenance_(std::move(provenance)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] <= 0) throw Error("sequence terms must be positive");
      if (i && values_[i] <= values_[i - 1]) throw Error("sequence must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }

  const std::vector<BigInt>& values() const { return values_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return values_.size(); }
  const BigInt& operator[](std::size_t i) const { return values_[i]; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

 private:
  std::vector<BigInt> values_;
  std::string provenance_;
};

inline IntegerSequence read_integer_sequence(std::istream& in, std::string provenance = "user") {
  std::vector<BigInt> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    std::string_view t = trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    if (!detail::is_decimal_integer(t)) throw Error("line " + std::to_string(line_no) + ": not an integer");
    values.push_back(detail::parse_big(t));
  }
  return IntegerSequence(std::move(values), std::move(provenance));
}

inline IntegerSequence read_integer_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_integer_sequence(in, path);
}

inline void write_integer_sequence(std::ostream& out, const IntegerSequence& seq) {
  out << "# " << seq.provenance() << "\n";
  for (const auto& v : seq) out << v << "\n";
}

// ---------------------------------------------------------------------------
// primes

/// All primes <= n by a segmented sieve of Eratosthenes.
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  if (n < 2) return out;
  std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (root * root > n) --root;
  while ((root + 1) * (root + 1) <= n) ++root;

  std::vector<char> small(root + 1, 1);
  std::vector<std::uint64_t> base;
  for (std::uint64_t i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(i);
    for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
  }

  constexpr std::uint64_t segment = 1u << 16;
  std::vector<char> mark(segment);
  for (std::uint64_t lo = 2; lo <= n; lo += segment) {
    std::uint64_t hi = std::min(n, lo + segment - 1);
    std::fill(mark.begin(), mark.end(), 1);
    for (std::uint64_t p : base) {
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      for (std::uint64_t j = start; j <= hi; j += p) mark[j - lo] = 0;
    }
    for (std::uint64_t i = lo; i <= hi; ++i) {
      if (mark[i - lo]) out.push_back(i);
    }
  }
  return out;
}

inline IntegerSequence sieve_primes(std::uint64_t n) {
  if (n < 2) throw Error("sieve bound must be >= 2");
  auto primes = primes_up_to(n);
  std::vector<BigInt> values(primes.begin(), primes.end());
  return IntegerSequence(std::move(values), "primes");
}

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Deterministic Miller–Rabin for 64-bit inputs (first twelve prime bases).
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  static constexpr std::array<std::uint64_t, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (auto p : bases) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (auto a : bases) {
    std::uint64_t x = detail::pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = detail::mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Exact below 2^64; GMP's probabilistic test (50 rounds) beyond.
inline bool is_prime(const BigInt& n) {
  if (n < 2) return false;
  mpz_srcptr z = n.backend().data();
  if (mpz_fits_ulong_p(z)) return is_prime(static_cast<std::uint64_t>(mpz_get_ui(z)));
  return mpz_probab_prime_p(z, 50) > 0;
}

/// Smallest prime >= n.
inline BigInt next_prime(BigInt n) {
  if (n <= 2) return 2;
  if (n % 2 == 0) {
    if (n == 2) return n;
    n += 1;
  }
  while (!is_prime(n)) n += 2;
  return n;
}

// ---------------------------------------------------------------------------
// generators

struct GenParams {
  int p = 3;            ///< exponent for e_p
  std::int64_t n = 100; ///< truncation N (e_p, squares, prime_powers, primes)
  int m = 2;            ///< power for prime_powers
  int base = 4;         ///< union_patches: δ_n = base^-n
  int count = 8;        ///< union_patches: number of patches
  int depth = 6;        ///< cantor / full_grid depth
  int d = 1;            ///< union_patches / full_grid dimension
};

inline PointSet reciprocal_set(const IntegerSequence& seq) {
  if (seq.size() == 0) throw Error("reciprocal set of an empty sequence");
  std::vector<Scalar> values;
  values.reserve(seq.size());
  for (const auto& a : seq) values.push_back(Scalar(BigInt(1), a));
  return PointSet(NormedSpace(1), values, "1/" + seq.provenance());
}

inline PointSet integer_point_set(const IntegerSequence& seq) {
  if (seq.size() == 0) throw Error("point set of an empty sequence");
  std::vector<Scalar> values(seq.begin(), seq.end());
  return PointSet(NormedSpace(1), values, seq.provenance());
}

inline IntegerSequence squares_sequence(std::int64_t n) {
  if (n < 1) throw Error("squares need N >= 1");
  std::vector<BigInt> v;
  for (std::int64_t i = 1; i <= n; ++i) v.push_back(BigInt(i) * i);
  return IntegerSequence(std::move(v), "squares");
}

inline IntegerSequence prime_powers_sequence(int m, std::int64_t n) {
  if (m < 1 || n < 2) throw Error("prime_powers need m >= 1 and N >= 2");
  std::vector<BigInt> v;
  for (auto p : primes_up_to(static_cast<std::uint64_t>(n))) v.push_back(pow(BigInt(p), static_cast<unsigned>(m)));
  return IntegerSequence(std::move(v), "prime_powers(" + std::to_string(m) + ")");
}

/// {1/n^p : 1 <= n <= N}
inline PointSet e_p_set(int p, std::int64_t n) {
  if (p < 1 || n < 1) throw Error("e_p needs p >= 1 and N >= 1");
  std::vector<Scalar> values;
  for (std::int64_t i = 1; i <= n; ++i) values.push_back(Scalar(BigInt(1), pow(BigInt(i), static_cast<unsigned>(p))));
  return PointSet(NormedSpace(1), values, "e_p(" + std::to_string(p) + "," + std::to_string(n) + ")");
}

/// ∪_{n=1..count} {base^-n · Σ x_i e_i : x_i in 0..n-1}
inline PointSet union_patches_set(int base, int count, int d = 1) {
  if (base < 2 || count < 1 || d < 1) throw Error("union_patches needs base >= 2, count >= 1, d >= 1");
  NormedSpace space(d);
  std::vector<Point> pts;
  for (int n = 1; n <= count; ++n) {
    Scalar delta = power_scale(static_cast<unsigned>(base), n);
    PointSet patch = patch_points(Patch(Point::zero(d), delta, n, space));
    pts.insert(pts.end(), patch.begin(), patch.end());
  }
  return PointSet(space, std::move(pts), "union_patches(" + std::to_string(base) + "," + std::to_string(count) + ")");
}

/// Left endpoints of the 2^depth middle-thirds Cantor intervals.
inline PointSet cantor_set(int depth) {
  if (depth < 1 || depth > 20) throw Error("cantor depth must be in 1..20");
  std::vector<Scalar> values;
  const std::uint64_t n = std::uint64_t{1} << depth;
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Scalar x = 0;
    Scalar w = Scalar(2, 3);
    for (int i = depth - 1; i >= 0; --i) {
      if ((mask >> i) & 1u) x += w;
      w /= 3;
    }
    values.push_back(x);
  }
  return PointSet(NormedSpace(1), values, "cantor(" + std::to_string(depth) + ")");
}

/// {j / 2^depth : 0 <= j < 2^depth}^d
inline PointSet full_grid_set(int depth, int d = 1) {
  if (depth < 0 || d < 1 || depth * d > 22) throw Error("full_grid size out of range");
  Scalar h = power_scale(2, depth);
  NormedSpace space(d);
  PointSet grid = patch_points(Patch(Point::zero(d), h, 1 << depth, space));
  return PointSet(space, grid.points(), "full_grid(" + std::to_string(depth) + ")");
}

inline PointSet gen_set(std::string_view family, const GenParams& params, const IntegerSequence* seq = nullptr) {
  if (family == "e_p") return e_p_set(params.p, params.n);
  if (family == "union_patches") return union_patches_set(params.base, params.count, params.d);
  if (family == "squares") return integer_point_set(squares_sequence(params.n));
  if (family == "prime_powers") return integer_point_set(prime_powers_sequence(params.m, params.n));
  if (family == "primes") {
    if (params.n < 2) throw Error("primes need N >= 2");
    return integer_point_set(sieve_primes(static_cast<std::uint64_t>(params.n)));
  }
  if (family == "reciprocals") {
    if (!seq) throw Error("reciprocals need an integer sequence");
    return reciprocal_set(*seq);
  }
  if (family == "cantor") return cantor_set(params.depth);
  if (family == "full_grid") return full_grid_set(params.depth, params.d);
  throw Error("unknown family '" + std::string(family) + "'");
}

// ---------------------------------------------------------------------------
// three-term progressions

struct ThreeTermAP {
  Scalar lo, mid, hi;
};

/// Some lo < mid < hi in S with 2·mid = lo + hi, or none. First hit in
/// (lo, hi) increasing order. S must be one-dimensional.
inline std::optional<ThreeTermAP> find_3ap(const PointSet& S) {
  if (S.dim() != 1) throw Error("find_3ap needs a 1-D set");
  if (S.size() < 3) return std::nullopt;
  std::vector<Scalar> v;
  v.reserve(S.size());
  for (const auto& p : S) v.push_back(p[0]);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 2; j < v.size(); ++j) {
      Scalar mid = (v[i] + v[j]) / 2;
      if (std::binary_search(v.begin() + static_cast<std::ptrdiff_t>(i + 1), v.begin() + static_cast<std::ptrdiff_t>(j), mid)) {
        return ThreeTermAP{v[i], mid, v[j]};
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// gaps of decreasing sequences

namespace detail {

/// x_1 > x_2 > ... from a 1-D set (stored ascending).
inline std::vector<Scalar> decreasing_values(const PointSet& S) {
  if (S.dim() != 1) throw Error("decreasing sequence must be 1-D");
  std::vector<Scalar> v;
  v.reserve(S.size());
  for (auto it = S.points().rbegin(); it != S.points().rend(); ++it) v.push_back((*it)[0]);
  return v;
}

}  // namespace detail

struct GapDifference {
  Scalar value;                     ///< G(k) = (x_k - x_{k+1}) - (x_{k+1} - x_{k+2})
  std::optional<BigInt> normalized; ///< p_k p_{k+1} p_{k+2} G(k) when x_j = 1/p_j
};

/// G(k) for the k-th (1-based) term of S read in decreasing order.
inline GapDifference gap_difference_G(const PointSet& S, std::size_t k) {
  auto x = detail::decreasing_values(S);
  if (k < 1 || k + 2 > x.size()) throw Error("gap index out of range");
  const Scalar& a = x[k - 1];
  const Scalar& b = x[k];
  const Scalar& c = x[k + 1];
  GapDifference out{(a - b) - (b - c), std::nullopt};
  if (num(a) == 1 && num(b) == 1 && num(c) == 1) {
    Scalar prod = Scalar(den(a) * den(b) * den(c)) * out.value;
    out.normalized = num(prod);  // always an integer
  }
  return out;
}

enum class DecayClass { polynomial, exponential, inconclusive };

inline std::string to_string(DecayClass c) {
  switch (c) {
    case DecayClass::polynomial: return "polynomial/subexponential";
    case DecayClass::exponential: return "at-least-exponential";
    case DecayClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct GapReport {
  std::vector<Scalar> gaps;                 ///< g_n = x_n - x_{n+1}
  std::vector<Scalar> gap_differences;      ///< G(n) = g_n - g_{n+1}
  std::size_t last_violation = 0;           ///< largest n with g_n < g_{n+1}; 0 if none
  std::size_t decreasing_from = 1;          ///< gaps are nonincreasing from this index on
  double exponential_slope = 0.0;
  double exponential_residual = 0.0;
  double polynomial_slope = 0.0;
  double polynomial_residual = 0.0;
  DecayClass decay = DecayClass::inconclusive;
};

namespace detail {

struct LineFit {
  double slope;
  double residual_variance;
};

inline LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - my - slope * (xs[i] - mx);
    rss += e * e;
  }
  return {slope, rss / n};
}

}  // namespace detail

/// Gap monotonicity and decay class of a positive decreasing sequence.
/// On the last half of indices, log x_n is fitted against n and against log n;
/// the better fit decides, provided its slope is below -0.05.
inline GapReport classify_decay(const PointSet& S) {
  auto x = detail::decreasing_values(S);
  if (x.size() < 16) throw Error("decay classification needs at least 16 terms");
  if (x.back() <= 0) throw Error("decay classification needs positive terms");
  GapReport report;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) report.gaps.push_back(x[i] - x[i + 1]);
  for (std::size_t i = 0; i + 1 < report.gaps.size(); ++i) {
    report.gap_differences.push_back(report.gaps[i] - report.gaps[i + 1]);
    if (report.gaps[i] < report.gaps[i + 1]) report.last_violation = i + 1;
  }
  report.decreasing_from = report.last_violation + 1;

  std::vector<double> ns, logns, logxs;
  for (std::size_t i = x.size() / 2; i < x.size(); ++i) {
    double n = static_cast<double>(i + 1);
    ns.push_back(n);
    logns.push_back(std::log(n));
    logxs.push_back(log_scalar(x[i]));
  }
  auto lin = detail::least_squares(ns, logxs);
  auto loglog = detail::least_squares(logns, logxs);
  report.exponential_slope = lin.slope;
  report.exponential_residual = lin.residual_variance;
  report.polynomial_slope = loglog.slope;
  report.polynomial_residual = loglog.residual_variance;
  constexpr double kSlopeThreshold = -0.05;
  if (lin.residual_variance < loglog.residual_variance && lin.slope < kSlopeThreshold) {
    report.decay = DecayClass::exponential;
  } else if (loglog.residual_variance < lin.residual_variance && loglog.slope < kSlopeThreshold) {
    report.decay = DecayClass::polynomial;
  }
  return report;
}

// ---------------------------------------------------------------------------
// primes near k^5

struct BhpReport {
  IntegerSequence primes{{}, "bhp"};  ///< p_k = smallest prime >= k^5, k = 1..K
  std::vector<double> slack;          ///< (p_k - k^5) / k^{21/8}
  double max_slack = 0.0;
  std::vector<Scalar> gap_differences; ///< G(k), k = 1..K-2, for x_k = 1/p_k
  std::optional<std::size_t> positive_from; ///< least k0 with G(k) > 0 for all k0 <= k <= K-2
};

inline BhpReport bhp_subsequence(int K) {
  if (K < 3) throw Error("bhp needs K >= 3");
  auto primes = parallel_map(static_cast<std::size_t>(K), [](std::size_t i) {
    return next_prime(pow(BigInt(static_cast<long>(i + 1)), 5u));
  });
  BhpReport report;
  for (int k = 1; k <= K; ++k) {
    BigInt fifth = pow(BigInt(k), 5u);
    BigInt p = primes[static_cast<std::size_t>(k - 1)];
    if (p < fifth || !is_prime(p)) throw Error("primality backend failure at k=" + std::to_string(k));
    double c = (p - fifth).convert_to<double>() / std::pow(static_cast<double>(k), 21.0 / 8.0);
    report.slack.push_back(c);
    report.max_slack = std::max(report.max_slack, c);
  }
  report.primes = IntegerSequence(std::move(primes), "bhp");
  for (std::size_t i = 0; i + 2 < report.primes.size(); ++i) {
    Scalar a(BigInt(1), report.primes[i]);
    Scalar b(BigInt(1), report.primes[i + 1]);
    Scalar c(BigInt(1), report.primes[i + 2]);
    report.gap_differences.push_back((a - b) - (b - c));
  }
  std::size_t k0 = report.gap_differences.size() + 1;
  while (k0 > 1 && report.gap_differences[k0 - 2] > 0) --k0;
  if (k0 <= report.gap_differences.size()) report.positive_from = k0;
  return report;
}

// ---------------------------------------------------------------------------
// large sets

struct BlockRow {
  int k = 0;
  std::size_t block_size = 0;          ///< |F_k|, F_k = F ∩ [2^k, 2^{k+1})
  std::optional<double> growth;        ///< log2 |F_k| / k
  Scalar partial_sum;                  ///< Σ_{a in F, a < 2^{k+1}} 1/a
  std::size_t cover_count = 0;         ///< N_{4^-(k+1)}(B(0,2^-k) ∩ 1/F), exact 1-D cover
  std::size_t grid_count = 0;          ///< occupied 4^-(k+1)-cells of the same set
  bool separated = false;              ///< |F_k| <= cover_count
};

/// Per-block counts, partial harmonic sums and the covering comparison.
inline std::vector<BlockRow> large_set_diagnostics(const IntegerSequence& F, int kmax) {
  if (F.size() == 0) throw Error("large-set diagnostics of an empty sequence");
  if (kmax < 0) throw Error("kmax must be >= 0");
  PointSet recip = reciprocal_set(F);  // ascending: 1/a for large a first
  std::vector<BlockRow> rows;
  BigInt sum_num = 0, sum_den = 1;
  std::size_t next = 0;
  for (int k = 0; k <= kmax; ++k) {
    BlockRow row;
    row.k = k;
    BigInt lo = BigInt(1) << k;
    BigInt hi = BigInt(1) << (k + 1);
    while (next < F.size() && F[next] < hi) {
      if (F[next] >= lo) ++row.block_size;
      sum_num = sum_num * F[next] + sum_den;
      sum_den *= F[next];
      ++next;
    }
    row.partial_sum = Scalar(sum_num, sum_den);
    if (row.block_size > 0 && k > 0) row.growth = std::log2(static_cast<double>(row.block_size)) / k;

    // B(0, 2^-k) ∩ 1/F = {1/a : a >= 2^k}, a prefix of the ascending reciprocal set.
    Scalar radius = power_scale(2, k);
    auto end = std::upper_bound(recip.begin(), recip.end(), Point{radius});
    if (end != recip.begin()) {
      PointSet ball(recip.space(), std::vector<Point>(recip.begin(), end));
      Scalar r = power_scale(4, k + 1);
      row.cover_count = min_interval_cover(ball, r);
      row.grid_count = occupied_count(ball, r);
    }
    row.separated = row.block_size <= row.cover_count;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const BhpReport& r) {
  nlohmann::json primes = nlohmann::json::array();
  for (const auto& p : r.primes) primes.push_back(p.str());
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : r.gap_differences) gs.push_back(g > 0 ? 1 : (g < 0 ? -1 : 0));
  return {{"K", r.primes.size()},
          {"primes", primes},
          {"slack", r.slack},
          {"max_slack", r.max_slack},
          {"gap_difference_signs", gs},
          {"positive_from", r.positive_from ? nlohmann::json(*r.positive_from) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const GapReport& r) {
  return {{"terms", r.gaps.size() + 1},
          {"last_violation", r.last_violation},
          {"decreasing_from", r.decreasing_from},
          {"exponential_fit", {{"slope", r.exponential_slope}, {"residual_variance", r.exponential_residual}}},
          {"polynomial_fit", {{"slope", r.polynomial_slope}, {"residual_variance", r.polynomial_residual}}},
          {"decay", to_string(r.decay)}};
}

inline nlohmann::json to_json(const std::vector<BlockRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"k", row.k},
                   {"block_size", std::to_string(row.block_size)},
                   {"growth", row.growth ? nlohmann::json(*row.growth) : nlohmann::json(nullptr)},
                   {"partial_sum_decimal", to_double(row.partial_sum)},
                   {"cover_count", std::to_string(row.cover_count)},
                   {"grid_count", std::to_string(row.grid_count)},
                   {"separated", row.separated}});
  }
  return out;
}

}  // namespace patchscope
