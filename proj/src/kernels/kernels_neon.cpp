// AArch64 NEON kernels (float64x2).

#include <arm_neon.h>

#include <cmath>

#include "laprep/kernels.hpp"

namespace laprep::simd {
namespace {

// 4x4 register block: C[i..i+4, j..j+4].
inline void block_4x4(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                      std::size_t i, std::size_t j, bool accumulate) {
  float64x2_t acc[4][2];
  for (std::size_t r = 0; r < 4; ++r) {
    double* crow = c + (i + r) * n + j;
    acc[r][0] = accumulate ? vld1q_f64(crow) : vdupq_n_f64(0.0);
    acc[r][1] = accumulate ? vld1q_f64(crow + 2) : vdupq_n_f64(0.0);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n + j;
    const float64x2_t b0 = vld1q_f64(brow);
    const float64x2_t b1 = vld1q_f64(brow + 2);
    for (std::size_t r = 0; r < 4; ++r) {
      const float64x2_t av = vdupq_n_f64(a[(i + r) * k + p]);
      acc[r][0] = vfmaq_f64(acc[r][0], av, b0);
      acc[r][1] = vfmaq_f64(acc[r][1], av, b1);
    }
  }
  for (std::size_t r = 0; r < 4; ++r) {
    double* crow = c + (i + r) * n + j;
    vst1q_f64(crow, acc[r][0]);
    vst1q_f64(crow + 2, acc[r][1]);
  }
}

inline void cell(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                 std::size_t i, std::size_t j, bool accumulate) {
  double s = accumulate ? c[i * n + j] : 0.0;
  for (std::size_t p = 0; p < k; ++p) s = std::fma(a[i * k + p], b[p * n + j], s);
  c[i * n + j] = s;
}

void gemm_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) block_4x4(a, b, c, k, n, i, j, accumulate);
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) cell(a, b, c, k, n, i + r, j, accumulate);
    }
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) cell(a, b, c, k, n, i, j, accumulate);
  }
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(x + i), vld1q_f64(y + i));
    s1 = vfmaq_f64(s1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void add_bias_neon(double* rows, const double* bias, std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    double* row = rows + r * n;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(row + j, vaddq_f64(vld1q_f64(row + j), vld1q_f64(bias + j)));
    for (; j < n; ++j) row[j] += bias[j];
  }
}

void relu_neon(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_neon(const double* pre, double* grad, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t keep = vcgtq_f64(vld1q_f64(pre + i), zero);
    const uint64x2_t bits = vandq_u64(vreinterpretq_u64_f64(vld1q_f64(grad + i)), keep);
    vst1q_f64(grad + i, vreinterpretq_f64_u64(bits));
  }
  for (; i < n; ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

void column_sums_neon(const double* rows, double* out, std::size_t m, std::size_t n) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t r = 0; r < m; ++r) acc = vaddq_f64(acc, vld1q_f64(rows + r * n + j));
    vst1q_f64(out + j, acc);
  }
  for (; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += rows[r * n + j];
    out[j] = s;
  }
}

void adam_update_neon(double* param, const double* grad, double* m1, double* m2, std::size_t n,
                      const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g;
    m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * (g * g);
    param[i] -= c.lr * (m1[i] / c.bias1) / (std::sqrt(m2[i] / c.bias2) + c.eps);
  }
}

constexpr KernelTable kNeonTable{
    Isa::Neon,      gemm_neon,          dot_neon,         axpy_neon,        add_bias_neon,
    relu_neon,      relu_backward_neon, column_sums_neon, adam_update_neon,
};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeonTable; }
}  // namespace detail

}  // namespace laprep::simd
