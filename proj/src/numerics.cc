#include "robod/numerics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "robod/error.h"

namespace robod {

namespace {

std::string Dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::uint64_t Rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kState: return "state";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kMetric: return "metric";
  }
  return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    Fail(ErrorKind::kShape, "matrix data length " +
                                std::to_string(data_.size()) + " != " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

Matrix Matrix::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) Fail(ErrorKind::kShape, "ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double* c,
          std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    if (!accumulate) std::fill(ci, ci + n, 0.0);
    const double* ai = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void GemmTransposeA(std::size_t m, std::size_t k, std::size_t n,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc,
                    bool accumulate) {
  if (!accumulate) {
    for (std::size_t p = 0; p < k; ++p) std::fill(c + p * ldc, c + p * ldc + n, 0.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * lda;
    const double* bi = b + i * ldb;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      double* cp = c + p * ldc;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

void GemmTransposeB(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc,
                    bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * lda;
    double* ci = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * ldb;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += ai[j] * bp[j];
      ci[p] = accumulate ? ci[p] + acc : acc;
    }
  }
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorKind::kShape, "matmul " + Dims(a) + " * " + Dims(b));
  }
  Matrix c(a.rows(), b.cols());
  Gemm(a.rows(), a.cols(), b.cols(), a.data(), a.cols(), b.data(), b.cols(),
       c.data(), c.cols(), false);
  return c;
}

Matrix MatMulTransposeA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    Fail(ErrorKind::kShape, "matmul " + Dims(a) + "^T * " + Dims(b));
  }
  Matrix c(a.cols(), b.cols());
  GemmTransposeA(a.rows(), a.cols(), b.cols(), a.data(), a.cols(), b.data(),
                 b.cols(), c.data(), c.cols(), false);
  return c;
}

Matrix MatMulTransposeB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    Fail(ErrorKind::kShape, "matmul " + Dims(a) + " * " + Dims(b) + "^T");
  }
  Matrix c(a.rows(), b.rows());
  GemmTransposeB(a.rows(), a.cols(), b.rows(), a.data(), a.cols(), b.data(),
                 b.cols(), c.data(), c.cols(), false);
  return c;
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix RowwiseScale(const Matrix& x, std::span<const double> v) {
  if (v.size() != x.rows()) {
    Fail(ErrorKind::kShape, "rowwise scale of " + Dims(x) + " by length " +
                                std::to_string(v.size()));
  }
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (double& e : out.row(i)) e *= v[i];
  }
  return out;
}

Matrix ColwiseScale(const Matrix& x, std::span<const double> v) {
  if (v.size() != x.cols()) {
    Fail(ErrorKind::kShape, "colwise scale of " + Dims(x) + " by length " +
                                std::to_string(v.size()));
  }
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= v[j];
  }
  return out;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorKind::kShape, "compare " + Dims(a) + " with " + Dims(b));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t state = base ^ (0xd1342543de82ef95ULL * (index + 1));
  SplitMix64(state);
  return SplitMix64(state);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = SplitMix64(state);
}

std::uint64_t Rng::NextU64() {
  const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double Rng::NextDouble() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) {
  if (!(lo < hi)) Fail(ErrorKind::kConfig, "uniform range requires lo < hi");
  return lo + (hi - lo) * NextDouble();
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n == 0) Fail(ErrorKind::kConfig, "uniform int over empty range");
  // Values below 2^64 mod n are rejected so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x < threshold);
  return x % n;
}

Matrix RandomUniform(Rng& rng, double lo, double hi, std::size_t rows,
                     std::size_t cols) {
  if (!(lo < hi)) Fail(ErrorKind::kConfig, "uniform range requires lo < hi");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = lo + (hi - lo) * rng.NextDouble();
  return m;
}

std::vector<std::size_t> RandomPermutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.UniformInt(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::size_t> SampleWithoutReplacement(Rng& rng, std::size_t n,
                                                  std::size_t k) {
  if (k > n) Fail(ErrorKind::kConfig, "sample size exceeds population");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.UniformInt(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace robod
