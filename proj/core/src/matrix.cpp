#include "hnhn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <cblas.h>

namespace hnhn {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                              " and " + shape_str(b));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_str(*this));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Below this fraction of nonzeros in the left operand the zero-skipping
// loop beats dgemm. One-hot features, dead ReLU units and gradients masked
// by ReLU all land here.
constexpr double kSparseDensity = 0.2;

bool mostly_zero(const Matrix& a) {
  const auto nonzero = std::count_if(a.data().begin(), a.data().end(),
                                     [](double v) { return v != 0.0; });
  return static_cast<double>(nonzero) < kSparseDensity * static_cast<double>(a.size());
}

int blas_int(std::size_t v) { return static_cast<int>(v); }

}  // namespace

// Dense products go to CBLAS. Sparse left operands take an i-k-j loop that
// skips zeros; both paths use a fixed accumulation order for a given build.
Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  if (out.empty() || a.cols() == 0) return out;
  if (mostly_zero(a)) {
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double* __restrict o = out.row(i).data();
      const auto arow = a.row(i);
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double av = arow[k];
        if (av == 0.0) continue;
        const double* __restrict br = b.row(k).data();
        for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
      }
    }
    return out;
  }
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, blas_int(a.rows()), blas_int(b.cols()),
              blas_int(a.cols()), 1.0, a.data().data(), blas_int(a.cols()), b.data().data(),
              blas_int(b.cols()), 0.0, out.data().data(), blas_int(out.cols()));
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_error("matmul_tn", a, b);
  Matrix out(a.cols(), b.cols());
  if (out.empty() || a.rows() == 0) return out;
  if (mostly_zero(a)) {
    const std::size_t n = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const auto arow = a.row(k);
      const double* __restrict br = b.row(k).data();
      for (std::size_t i = 0; i < a.cols(); ++i) {
        const double av = arow[i];
        if (av == 0.0) continue;
        double* __restrict o = out.row(i).data();
        for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
      }
    }
    return out;
  }
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, blas_int(a.cols()), blas_int(b.cols()),
              blas_int(a.rows()), 1.0, a.data().data(), blas_int(a.cols()), b.data().data(),
              blas_int(b.cols()), 0.0, out.data().data(), blas_int(out.cols()));
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  if (mostly_zero(a)) return matmul(a, transpose(b));
  Matrix out(a.rows(), b.rows());
  if (out.empty() || a.cols() == 0) return out;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, blas_int(a.rows()), blas_int(b.rows()),
              blas_int(a.cols()), 1.0, a.data().data(), blas_int(a.cols()), b.data().data(),
              blas_int(b.cols()), 0.0, out.data().data(), blas_int(out.cols()));
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out += b;
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("subtract", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("add", a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
  return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("max_abs_diff", a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace hnhn
