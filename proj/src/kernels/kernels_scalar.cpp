// Scalar reference kernels. These define the semantics the vectorized
// variants are tested against.

#include <cmath>

#include "laprep/kernels.hpp"

namespace laprep::simd {
namespace {

void gemm_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_bias_scalar(double* rows, const double* bias, std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    double* row = rows + r * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += bias[j];
  }
}

void relu_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

// Subgradient 0 at the kink.
void relu_backward_scalar(const double* pre, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

void column_sums_scalar(const double* rows, double* out, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = rows + r * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += row[j];
  }
}

void adam_update_scalar(double* param, const double* grad, double* m1, double* m2, std::size_t n,
                        const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g;
    m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * (g * g);
    const double mhat = m1[i] / c.bias1;
    const double vhat = m2[i] / c.bias2;
    param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

constexpr KernelTable kScalarTable{
    Isa::Scalar,      gemm_scalar,          dot_scalar,         axpy_scalar,        add_bias_scalar,
    relu_scalar,      relu_backward_scalar, column_sums_scalar, adam_update_scalar,
};

}  // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalarTable; }
}  // namespace detail

}  // namespace laprep::simd
