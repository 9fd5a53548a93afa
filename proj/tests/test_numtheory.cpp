#include "patchscope/numtheory.hpp"
#include "patchscope/patch_search.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace patchscope;

namespace {

bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

bool trial_division_prime(const BigInt& n, unsigned limit) {
  for (unsigned d = 2; d <= limit && BigInt(d) * d <= n; ++d)
    if (n % d == 0) return false;
  return n >= 2;
}

PointSet line(std::vector<Scalar> v) { return PointSet(NormedSpace(), v); }

}  // namespace

TEST(Sieve, SmallExamples) {
  EXPECT_EQ(sieve_primes(10).values(), (std::vector<BigInt>{2, 3, 5, 7}));
  EXPECT_EQ(sieve_primes(30).size(), 10u);
  EXPECT_EQ(sieve_primes(2).size(), 1u);
  EXPECT_THROW(sieve_primes(1), Error);
}

TEST(Sieve, PrimeCountToOneMillion) { EXPECT_EQ(primes_up_to(1000000).size(), 78498u); }

TEST(Sieve, AgreesWithTrialDivision) {
  auto primes = primes_up_to(20000);
  std::size_t i = 0;
  for (std::uint64_t n = 0; n <= 20000; ++n) {
    bool expected = trial_division_prime(n);
    EXPECT_EQ(is_prime(n), expected) << n;
    if (expected) {
      ASSERT_LT(i, primes.size());
      EXPECT_EQ(primes[i++], n);
    }
  }
  EXPECT_EQ(i, primes.size());
}

TEST(MillerRabin, KnownValues) {
  EXPECT_TRUE(is_prime(std::uint64_t{18446744073709551557ull}));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(std::uint64_t{3215031751ull}));           // strong pseudoprime to 2,3,5,7
  EXPECT_FALSE(is_prime(std::uint64_t{341550071728321ull}));
  EXPECT_TRUE(is_prime(BigInt("170141183460469231731687303715884105727")));  // 2^127 - 1
  EXPECT_FALSE(is_prime(BigInt("170141183460469231731687303715884105729")));
  EXPECT_EQ(next_prime(BigInt(32)), BigInt(37));
  EXPECT_EQ(next_prime(BigInt(243)), BigInt(251));
  EXPECT_EQ(next_prime(BigInt(2)), BigInt(2));
}

TEST(Generators, Examples) {
  EXPECT_EQ(e_p_set(3, 3), line({1, Scalar(1, 8), Scalar(1, 27)}));
  EXPECT_EQ(e_p_set(3, 300).size(), 300u);
  auto pp = prime_powers_sequence(2, 100);
  EXPECT_EQ(pp.size(), 25u);
  EXPECT_EQ(pp[0], BigInt(4));
  EXPECT_EQ(pp[3], BigInt(49));
  EXPECT_EQ(pp.values().back(), BigInt(97 * 97));
  EXPECT_EQ(squares_sequence(5).values(), (std::vector<BigInt>{1, 4, 9, 16, 25}));
  EXPECT_EQ(reciprocal_set(squares_sequence(3)), line({Scalar(1, 9), Scalar(1, 4), 1}));
  EXPECT_EQ(cantor_set(3).size(), 8u);
  EXPECT_EQ(full_grid_set(3, 2).size(), 64u);
  EXPECT_THROW(gen_set("nope", {}), Error);
  EXPECT_THROW(gen_set("reciprocals", {}), Error);
}

TEST(Generators, UnionPatchesContainEveryPatchSize) {
  for (int count = 1; count <= 6; ++count) {
    PointSet E = union_patches_set(4, count);
    for (int n = 2; n <= count; ++n) EXPECT_TRUE(best_patch_defect(E, n).exact()) << count << " " << n;
  }
  PointSet E3 = union_patches_set(4, 3);
  EXPECT_EQ(E3, line({0, Scalar(1, 16), Scalar(1, 64), Scalar(2, 64)}));
}

TEST(IntegerSequenceIO, RoundTripAndValidation) {
  IntegerSequence s({2, 3, 5, 7});
  std::stringstream io;
  write_integer_sequence(io, s);
  EXPECT_EQ(read_integer_sequence(io).values(), s.values());
  EXPECT_THROW(IntegerSequence({3, 2}), Error);
  EXPECT_THROW(IntegerSequence({0, 2}), Error);
  std::istringstream bad("1\nx\n");
  EXPECT_THROW(read_integer_sequence(bad), Error);
}

TEST(ThreeAP, Examples) {
  auto found = find_3ap(line({1, 2, 3}));
  ASSERT_TRUE(found);
  EXPECT_EQ(found->lo, Scalar(1));
  EXPECT_EQ(found->mid, Scalar(2));
  auto sq = find_3ap(line({1, 25, 49}));
  ASSERT_TRUE(sq);
  EXPECT_EQ(sq->mid, Scalar(25));
  EXPECT_FALSE(find_3ap(line({1, Scalar(1, 25), Scalar(1, 49)})));
  EXPECT_FALSE(find_3ap(e_p_set(3, 120)));
  EXPECT_FALSE(find_3ap(line({1, 2})));
}

TEST(ThreeAP, AffineSymmetry) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 60; ++trial) {
    std::set<Scalar> values;
    while (values.size() < 3 + static_cast<std::size_t>(trial % 8))
      values.insert(Scalar(std::uniform_int_distribution<int>(-30, 30)(rng), 1 + trial % 4));
    PointSet S = line(std::vector<Scalar>(values.begin(), values.end()));
    Similarity T(Scalar(1 + trial % 7, 1 + trial % 5), Point{Scalar(trial - 30, 7)});
    auto a = find_3ap(S);
    auto b = find_3ap(apply_similarity(T, S));
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(T(Point{a->lo}), Point{b->lo});
      EXPECT_EQ(T(Point{a->mid}), Point{b->mid});
      EXPECT_EQ(T(Point{a->hi}), Point{b->hi});
      EXPECT_EQ(2 * b->mid, b->lo + b->hi);
    }
  }
}

TEST(GapDifference, Examples) {
  PointSet S = line({1, Scalar(1, 2), Scalar(1, 4)});
  EXPECT_EQ(gap_difference_G(S, 1).value, Scalar(1, 4));
  EXPECT_EQ(gap_difference_G(line({1, 2, 3, 4}), 2).value, Scalar(0));
  EXPECT_THROW(gap_difference_G(S, 2), Error);
  EXPECT_THROW(gap_difference_G(S, 0), Error);
}

TEST(GapDifference, IdealizedFifthPowers) {
  // p p' p'' G = p'p'' - 2 p p'' + p p' for p_k = k^5, divided by k^8
  std::map<int, double> expected{{10, 64.13}, {50, 35.15}, {100, 32.48}};
  for (auto [k, value] : expected) {
    std::vector<Scalar> xs;
    for (int j = k; j <= k + 2; ++j) xs.push_back(Scalar(BigInt(1), pow(BigInt(j), 5u)));
    auto g = gap_difference_G(line(xs), 1);
    ASSERT_TRUE(g.normalized);
    BigInt a = pow(BigInt(k), 5u), b = pow(BigInt(k + 1), 5u), c = pow(BigInt(k + 2), 5u);
    EXPECT_EQ(*g.normalized, b * c - 2 * a * c + a * b);
    double ratio = Scalar(*g.normalized, pow(BigInt(k), 8u)).convert_to<double>();
    EXPECT_NEAR(ratio, value, 0.005);
  }
}

TEST(GapDifference, ConvexSequencesHavePositiveG) {
  for (int e = 2; e <= 4; ++e) {
    std::vector<Scalar> xs;
    for (int n = 1; n <= 40; ++n) xs.push_back(Scalar(BigInt(1), pow(BigInt(n), static_cast<unsigned>(e))));
    PointSet S = line(xs);
    for (std::size_t k = 1; k + 2 <= S.size(); ++k) EXPECT_GT(gap_difference_G(S, k).value, 0);
  }
}

TEST(Decay, Classes) {
  std::vector<Scalar> harmonic, dyadic;
  for (int n = 1; n <= 64; ++n) {
    harmonic.push_back(Scalar(1, n));
    dyadic.push_back(power_scale(2, n));
  }
  auto h = classify_decay(line(harmonic));
  EXPECT_EQ(h.decay, DecayClass::polynomial);
  EXPECT_EQ(h.decreasing_from, 1u);
  EXPECT_EQ(h.last_violation, 0u);
  EXPECT_EQ(classify_decay(line(dyadic)).decay, DecayClass::exponential);
  EXPECT_THROW(classify_decay(line({1, 2, 3})), Error);
}

TEST(Bhp, SmallCases) {
  auto r = bhp_subsequence(20);
  EXPECT_EQ(r.primes[0], BigInt(2));
  EXPECT_EQ(r.primes[1], BigInt(37));
  EXPECT_EQ(r.primes[2], BigInt(251));
  EXPECT_EQ(r.primes[3], BigInt(1031));
  EXPECT_THROW(bhp_subsequence(2), Error);
}

TEST(Bhp, PrimesSlackAndSigns) {
  auto r = bhp_subsequence(200);
  ASSERT_EQ(r.primes.size(), 200u);
  for (int k = 1; k <= 200; ++k) {
    const BigInt& p = r.primes[static_cast<std::size_t>(k - 1)];
    BigInt fifth = pow(BigInt(k), 5u);
    EXPECT_GE(p, fifth);
    if (k >= 2) EXPECT_LT(p, fifth + pow(BigInt(k), 4u));
    EXPECT_TRUE(trial_division_prime(p, 10000)) << k;
    // nothing between k^5 and p is prime
    for (BigInt q = fifth; q < p; ++q) EXPECT_FALSE(is_prime(q));
  }
  for (std::size_t i = 0; i < r.gap_differences.size(); ++i) {
    Scalar a(BigInt(1), r.primes[i]), b(BigInt(1), r.primes[i + 1]), c(BigInt(1), r.primes[i + 2]);
    EXPECT_EQ(r.gap_differences[i], a - 2 * b + c);
  }
  ASSERT_TRUE(r.positive_from);
  EXPECT_EQ(*r.positive_from, 1u);
  auto report = classify_decay(reciprocal_set(r.primes));
  EXPECT_EQ(report.decay, DecayClass::polynomial);
}

TEST(LargeSets, IntegersAndPowersOfTwo) {
  std::vector<BigInt> all, twos;
  for (int n = 1; n < 1 << 10; ++n) all.push_back(n);
  for (int k = 0; k < 12; ++k) twos.push_back(BigInt(1) << k);
  auto rows = large_set_diagnostics(IntegerSequence(all), 9);
  for (const auto& row : rows) {
    EXPECT_EQ(row.block_size, std::size_t{1} << row.k);
    if (row.k > 0) EXPECT_DOUBLE_EQ(*row.growth, 1.0);
    EXPECT_TRUE(row.separated);
  }
  for (const auto& row : large_set_diagnostics(IntegerSequence(twos), 11)) {
    EXPECT_EQ(row.block_size, 1u);
    EXPECT_TRUE(row.separated);
  }
}

TEST(LargeSets, PrimesSatisfyCoveringInequality) {
  auto rows = large_set_diagnostics(sieve_primes(1 << 17), 16);
  Scalar sum = 0;
  auto primes = sieve_primes(1 << 17);
  for (const auto& row : rows) {
    EXPECT_TRUE(row.separated) << row.k;
    EXPECT_LE(row.block_size, row.cover_count);
    EXPECT_LE(row.cover_count, row.grid_count);
  }
  for (const auto& p : primes) {
    if (p >= 4) break;
    sum += Scalar(BigInt(1), p);
  }
  EXPECT_EQ(rows[1].partial_sum, sum);
}
