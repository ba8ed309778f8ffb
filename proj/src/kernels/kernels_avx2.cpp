// AVX2 + FMA kernels. Built with -mavx2 -mfma; only reached after a runtime
// CPU check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>

#include "laprep/kernels.hpp"

namespace laprep::simd {
namespace {

// Lane mask for the first `count` (< 4) doubles.
inline __m256i tail_mask(std::size_t count) {
  const __m256i idx = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(count)), idx);
}

// 4x8 register block: C[i..i+4, j..j+8].
inline void block_4x8(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                      std::size_t i, std::size_t j, bool accumulate) {
  __m256d c00, c01, c10, c11, c20, c21, c30, c31;
  double* c0 = c + (i + 0) * n + j;
  double* c1 = c + (i + 1) * n + j;
  double* c2 = c + (i + 2) * n + j;
  double* c3 = c + (i + 3) * n + j;
  if (accumulate) {
    c00 = _mm256_loadu_pd(c0); c01 = _mm256_loadu_pd(c0 + 4);
    c10 = _mm256_loadu_pd(c1); c11 = _mm256_loadu_pd(c1 + 4);
    c20 = _mm256_loadu_pd(c2); c21 = _mm256_loadu_pd(c2 + 4);
    c30 = _mm256_loadu_pd(c3); c31 = _mm256_loadu_pd(c3 + 4);
  } else {
    c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
  }
  const double* a0 = a + (i + 0) * k;
  const double* a1 = a + (i + 1) * k;
  const double* a2 = a + (i + 2) * k;
  const double* a3 = a + (i + 3) * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n + j;
    const __m256d b0 = _mm256_loadu_pd(brow);
    const __m256d b1 = _mm256_loadu_pd(brow + 4);
    __m256d av = _mm256_broadcast_sd(a0 + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a1 + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a2 + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a3 + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c0, c00); _mm256_storeu_pd(c0 + 4, c01);
  _mm256_storeu_pd(c1, c10); _mm256_storeu_pd(c1 + 4, c11);
  _mm256_storeu_pd(c2, c20); _mm256_storeu_pd(c2 + 4, c21);
  _mm256_storeu_pd(c3, c30); _mm256_storeu_pd(c3 + 4, c31);
}

// One row, up to 4 columns starting at j (masked when width < 4).
inline void block_1x4(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                      std::size_t i, std::size_t j, std::size_t width, bool accumulate) {
  const __m256i mask = tail_mask(width);
  double* crow = c + i * n + j;
  __m256d acc = accumulate ? _mm256_maskload_pd(crow, mask) : _mm256_setzero_pd();
  const double* arow = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d bv = _mm256_maskload_pd(b + p * n + j, mask);
    acc = _mm256_fmadd_pd(_mm256_broadcast_sd(arow + p), bv, acc);
  }
  _mm256_maskstore_pd(crow, mask, acc);
}

void gemm_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) block_4x8(a, b, c, k, n, i, j, accumulate);
    for (; j < n; j += 4) {
      const std::size_t width = n - j < 4 ? n - j : 4;
      for (std::size_t r = 0; r < 4; ++r) block_1x4(a, b, c, k, n, i + r, j, width, accumulate);
    }
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < n; j += 4) {
      const std::size_t width = n - j < 4 ? n - j : 4;
      block_1x4(a, b, c, k, n, i, j, width, accumulate);
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  if (i < n) {
    const std::size_t width = n - i < 4 ? n - i : 4;
    const __m256i mask = tail_mask(width);
    s0 = _mm256_fmadd_pd(_mm256_maskload_pd(x + i, mask), _mm256_maskload_pd(y + i, mask), s0);
    i += width;
  }
  if (i < n) {
    const __m256i mask = tail_mask(n - i);
    s1 = _mm256_fmadd_pd(_mm256_maskload_pd(x + i, mask), _mm256_maskload_pd(y + i, mask), s1);
  }
  return hsum(_mm256_add_pd(s0, s1));
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void add_bias_avx2(double* rows, const double* bias, std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    double* row = rows + r * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(bias + j)));
    }
    for (; j < n; ++j) row[j] += bias[j];
  }
}

void relu_avx2(const double* in, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  // max(x, 0) returns the second operand for NaN, matching the scalar kernel.
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(in + i), zero));
  for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_avx2(const double* pre, double* grad, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), keep));
  }
  for (; i < n; ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

void column_sums_avx2(const double* rows, double* out, std::size_t m, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t r = 0; r < m; ++r) acc = _mm256_add_pd(acc, _mm256_loadu_pd(rows + r * n + j));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += rows[r * n + j];
    out[j] = s;
  }
}

void adam_update_avx2(double* param, const double* grad, double* m1, double* m2, std::size_t n,
                      const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d ob1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d ob2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d inv_bias1 = _mm256_set1_pd(1.0 / c.bias1);
  const __m256d inv_bias2 = _mm256_set1_pd(1.0 / c.bias2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mv = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m1 + i), _mm256_mul_pd(ob1, g));
    const __m256d vv =
        _mm256_fmadd_pd(b2, _mm256_loadu_pd(m2 + i), _mm256_mul_pd(ob2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m1 + i, mv);
    _mm256_storeu_pd(m2 + i, vv);
    const __m256d mhat = _mm256_mul_pd(mv, inv_bias1);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, inv_bias2)), eps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g;
    m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * (g * g);
    param[i] -= c.lr * (m1[i] / c.bias1) / (std::sqrt(m2[i] / c.bias2) + c.eps);
  }
}

constexpr KernelTable kAvx2Table{
    Isa::Avx2,      gemm_avx2,          dot_avx2,         axpy_avx2,        add_bias_avx2,
    relu_avx2,      relu_backward_avx2, column_sums_avx2, adam_update_avx2,
};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2Table; }
}  // namespace detail

}  // namespace laprep::simd
