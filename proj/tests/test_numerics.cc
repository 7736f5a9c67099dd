#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "robod/error.h"
#include "robod/numerics.h"
#include "test_util.h"

namespace robod {
namespace {

using testing::NaiveMatMul;
using testing::RandomMatrix;

TEST(Rng, MatchesReferenceStreamForSeed42) {
  // Reference values from a separate xoshiro256** + splitmix64 script.
  const std::uint64_t expected[] = {
      0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL, 0xae17533239e499a1ULL,
      0xecb8ad4703b360a1ULL, 0xfde6dc7fe2ec5e64ULL, 0xc50da53101795238ULL,
      0xb82154855a65ddb2ULL, 0xd99a2743ebe60087ULL};
  Rng rng(42);
  for (std::uint64_t e : expected) EXPECT_EQ(rng.NextU64(), e);
}

TEST(Rng, SplitMixAndDerivedSeedsMatchReference) {
  std::uint64_t state = 0;
  EXPECT_EQ(SplitMix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(DeriveSeed(42, 0), 0xfaabbbd5afc5d6e7ULL);
  EXPECT_EQ(DeriveSeed(42, 7), 0x8c0acac0cc1f1884ULL);
  EXPECT_EQ(DeriveSeed(0, 0), 0xbfa9ae8d44b45a35ULL);
}

TEST(Rng, NextDoubleInUnitInterval) {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.NextDouble();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1 - 1e-3);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, UniformIntIsInRangeAndRoughlyFlat) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.UniformInt(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(Sampling, PermutationContainsEveryIndexOnce) {
  Rng rng(5);
  for (std::size_t n : {0u, 1u, 2u, 17u, 200u}) {
    auto p = RandomPermutation(rng, n);
    std::sort(p.begin(), p.end());
    std::vector<std::size_t> iota(n);
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(p, iota);
  }
}

TEST(Sampling, PermutationPositionsAreUniform) {
  // Position of element 0 across many shuffles of 4 items.
  Rng rng(8);
  std::vector<int> where(4, 0);
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    auto p = RandomPermutation(rng, 4);
    ++where[std::find(p.begin(), p.end(), 0) - p.begin()];
  }
  for (int w : where) EXPECT_NEAR(w, n / 4.0, 5 * std::sqrt(n / 4.0));
}

TEST(Sampling, WithoutReplacementIsDistinct) {
  Rng rng(6);
  for (std::size_t k : {0u, 1u, 50u, 100u}) {
    const auto s = SampleWithoutReplacement(rng, 100, k);
    EXPECT_EQ(s.size(), k);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), k);
    for (std::size_t v : s) EXPECT_LT(v, 100u);
  }
}

TEST(Sampling, WithoutReplacementRejectsTooMany) {
  Rng rng(6);
  EXPECT_THROW(SampleWithoutReplacement(rng, 3, 4), Error);
}

TEST(Matrix, ShapeChecksAndLiterals) {
  const Matrix m = Matrix::FromRows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(Matrix::FromRows({{1, 2}, {3}}), Error);
  EXPECT_EQ(Matrix::Identity(2), Matrix::FromRows({{1, 0}, {0, 1}}));
}

TEST(Matrix, ProductsMatchTripleLoopOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.UniformInt(9);
    const std::size_t k = 1 + rng.UniformInt(9);
    const std::size_t n = 1 + rng.UniformInt(9);
    const Matrix a = RandomMatrix(rng, m, k);
    const Matrix b = RandomMatrix(rng, k, n);
    const Matrix expect = NaiveMatMul(a, b);
    EXPECT_LT(MaxAbsDiff(MatMul(a, b), expect), 1e-13);
    EXPECT_LT(MaxAbsDiff(MatMulTransposeA(Transpose(a), b), expect), 1e-13);
    EXPECT_LT(MaxAbsDiff(MatMulTransposeB(a, Transpose(b)), expect), 1e-13);
  }
}

TEST(Matrix, ProductShapeMismatchThrows) {
  EXPECT_THROW(MatMul(Matrix(2, 3), Matrix(2, 3)), Error);
  EXPECT_THROW(MatMulTransposeA(Matrix(2, 3), Matrix(3, 3)), Error);
  EXPECT_THROW(MatMulTransposeB(Matrix(2, 3), Matrix(2, 2)), Error);
}

TEST(Matrix, StridedGemmOnSubBlocks) {
  // Multiply the top-left 2x3 block of a 4x5 buffer into a 3x6 buffer.
  Rng rng(12);
  const Matrix a = RandomMatrix(rng, 4, 5);
  const Matrix b = RandomMatrix(rng, 3, 6);
  Matrix c(3, 6, 7.0);
  Gemm(2, 3, 4, a.data(), 5, b.data(), 6, c.data(), 6, false);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < 3; ++p) acc += a(i, p) * b(p, j);
      EXPECT_NEAR(c(i, j), acc, 1e-14);
    }
    EXPECT_EQ(c(i, 4), 7.0);  // untouched outside the block
  }
  EXPECT_EQ(c(2, 0), 7.0);
  Matrix acc = c;
  Gemm(2, 3, 4, a.data(), 5, b.data(), 6, acc.data(), 6, true);
  EXPECT_NEAR(acc(0, 0), 2 * c(0, 0), 1e-14);
}

TEST(Matrix, RowAndColumnScaling) {
  const Matrix x = Matrix::FromRows({{1, 2}, {3, 4}});
  const std::vector<double> v = {10, 100};
  EXPECT_EQ(RowwiseScale(x, v), Matrix::FromRows({{10, 20}, {300, 400}}));
  EXPECT_EQ(ColwiseScale(x, v), Matrix::FromRows({{10, 200}, {30, 400}}));
  EXPECT_THROW(RowwiseScale(x, std::vector<double>{1}), Error);
}

TEST(Matrix, AllFinite) {
  Matrix m(2, 2, 1.0);
  EXPECT_TRUE(m.AllFinite());
  m(1, 1) = std::nan("");
  EXPECT_FALSE(m.AllFinite());
}

}  // namespace
}  // namespace robod
