#pragma once

// Exact rational scalars and arbitrary-precision integers.

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patchscope {

/// Domain error raised on invalid input or violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
/// Exact rational, always in canonical reduced form (GMP mpq).
using Scalar = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                             boost::multiprecision::et_off>;

inline BigInt num(const Scalar& x) { return boost::multiprecision::numerator(x); }
inline BigInt den(const Scalar& x) { return boost::multiprecision::denominator(x); }

inline Scalar make_scalar(const BigInt& n, const BigInt& d) {
  if (d == 0) throw Error("zero denominator");
  return Scalar(n, d);
}

inline Scalar abs(const Scalar& x) { return x < 0 ? Scalar(-x) : x; }

inline bool is_integer(const Scalar& x) { return den(x) == 1; }

/// floor(x) computed exactly.
inline BigInt floor(const Scalar& x) {
  BigInt n = num(x);
  BigInt d = den(x);
  BigInt q = n / d;  // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

inline Scalar pow(Scalar base, unsigned exponent) {
  Scalar out = 1;
  while (exponent > 0) {
    if (exponent & 1u) out *= base;
    base *= base;
    exponent >>= 1;
  }
  return out;
}

inline BigInt pow(BigInt base, unsigned exponent) {
  BigInt out = 1;
  while (exponent > 0) {
    if (exponent & 1u) out *= base;
    base *= base;
    exponent >>= 1;
  }
  return out;
}

inline BigInt gcd(const BigInt& a, const BigInt& b) {
  return boost::multiprecision::gcd(a, b);
}

inline BigInt lcm(const BigInt& a, const BigInt& b) {
  return boost::multiprecision::lcm(a, b);
}

/// Natural log of a positive big integer; safe beyond the double range.
inline double log_big(const BigInt& n) {
  if (n <= 0) throw Error("log of non-positive integer");
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, n.backend().data());
  return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

/// Natural log of a positive rational.
inline double log_scalar(const Scalar& x) {
  if (x <= 0) throw Error("log of non-positive rational");
  return log_big(num(x)) - log_big(den(x));
}

inline double to_double(const Scalar& x) { return x.convert_to<double>(); }

/// "n" for integers, "n/d" otherwise.
inline std::string to_string(const Scalar& x) {
  if (is_integer(x)) return num(x).str();
  return num(x).str() + "/" + den(x).str();
}

inline std::string to_string(const BigInt& x) { return x.str(); }

namespace detail {

inline bool is_decimal_integer(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

inline BigInt parse_big(std::string_view s) {
  if (!s.empty() && s[0] == '+') s.remove_prefix(1);
  return BigInt(std::string(s));
}

}  // namespace detail

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Parses a decimal integer or a reduced "num/den" rational with den > 0.
inline Scalar parse_scalar(std::string_view text) {
  std::string_view s = trim(text);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    if (!detail::is_decimal_integer(s)) throw Error("not an integer: '" + std::string(s) + "'");
    return Scalar(detail::parse_big(s));
  }
  std::string_view ns = trim(s.substr(0, slash));
  std::string_view ds = trim(s.substr(slash + 1));
  if (!detail::is_decimal_integer(ns) || !detail::is_decimal_integer(ds) || ds[0] == '-' || ds[0] == '+') {
    throw Error("not a rational: '" + std::string(s) + "'");
  }
  BigInt n = detail::parse_big(ns);
  BigInt d = detail::parse_big(ds);
  if (d <= 0) throw Error("denominator must be positive: '" + std::string(s) + "'");
  if (gcd(n < 0 ? BigInt(-n) : n, d) != 1) {
    throw Error("rational not in reduced form: '" + std::string(s) + "'");
  }
  return Scalar(n, d);
}

inline std::size_t hash_mpz(mpz_srcptr z) {
  std::size_t h = static_cast<std::size_t>(mpz_sgn(z)) * 0x9e3779b97f4a7c15ULL;
  std::size_t n = mpz_size(z);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::size_t>(mpz_getlimbn(z, static_cast<mp_size_t>(i))) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

struct ScalarHash {
  std::size_t operator()(const Scalar& x) const noexcept {
    mpq_srcptr q = x.backend().data();
    std::size_t h = hash_mpz(mpq_numref(q));
    return h ^ (hash_mpz(mpq_denref(q)) * 31u + 0x7f4a7c15u + (h << 6) + (h >> 2));
  }
};

struct BigIntHash {
  std::size_t operator()(const BigInt& x) const noexcept { return hash_mpz(x.backend().data()); }
};

/// Returns x as int64 when it fits.
inline std::optional<std::int64_t> to_int64(const BigInt& x) {
  mpz_srcptr z = x.backend().data();
  if (!mpz_fits_slong_p(z)) return std::nullopt;
  return static_cast<std::int64_t>(mpz_get_si(z));
}

}  // namespace patchscope
