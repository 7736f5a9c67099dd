#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace robod {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Row-major nested literal, e.g. Matrix::FromRows({{1, 2}, {3, 4}}).
  static Matrix FromRows(
      std::initializer_list<std::initializer_list<double>> rows);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void Fill(double v);
  bool AllFinite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Standard product a * b.
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b and a * b^T without materializing the transpose.
Matrix MatMulTransposeA(const Matrix& a, const Matrix& b);
Matrix MatMulTransposeB(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& a);

// Row i of x multiplied by v[i] (diag(v) * x); v.size() == x.rows().
Matrix RowwiseScale(const Matrix& x, std::span<const double> v);
// Column j of x multiplied by v[j] (x * diag(v)); v.size() == x.cols().
Matrix ColwiseScale(const Matrix& x, std::span<const double> v);

double MaxAbsDiff(const Matrix& a, const Matrix& b);

// Strided kernels shared by the layer implementations. All matrices are
// row-major with an explicit leading dimension.
//   c[m x n] (+)= a[m x k] * b[k x n]
void Gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double* c,
          std::size_t ldc, bool accumulate);
//   c[k x n] (+)= a[m x k]^T * b[m x n]
void GemmTransposeA(std::size_t m, std::size_t k, std::size_t n,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc,
                    bool accumulate);
//   c[m x k] (+)= a[m x n] * b[k x n]^T
void GemmTransposeB(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc,
                    bool accumulate);

// xoshiro256** (Blackman & Vigna, public domain), state expanded from the
// 64-bit seed with splitmix64. Streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextDouble();
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi);
  // Uniform integer in [0, n); n > 0. Unbiased (rejection sampling).
  std::uint64_t UniformInt(std::uint64_t n);
  bool Bernoulli(double p) { return NextDouble() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

std::uint64_t SplitMix64(std::uint64_t& state);
// Decorrelated, reproducible child seed, e.g. one per grid configuration.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t index);

Matrix RandomUniform(Rng& rng, double lo, double hi, std::size_t rows,
                     std::size_t cols);
// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> RandomPermutation(Rng& rng, std::size_t n);
// k distinct indices from 0..n-1 in draw order.
std::vector<std::size_t> SampleWithoutReplacement(Rng& rng, std::size_t n,
                                                  std::size_t k);

}  // namespace robod
