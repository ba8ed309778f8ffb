// AVX-512F kernels. Built with -mavx512f -mavx512dq -mfma; selected only after
// a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "laprep/kernels.hpp"

namespace laprep::simd {
namespace {

inline __mmask8 tail_mask(std::size_t count) {
  return static_cast<__mmask8>((1u << count) - 1u);
}

// 4x16 register block.
inline void block_4x16(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                       std::size_t i, std::size_t j, bool accumulate) {
  __m512d acc[4][2];
  for (std::size_t r = 0; r < 4; ++r) {
    double* crow = c + (i + r) * n + j;
    acc[r][0] = accumulate ? _mm512_loadu_pd(crow) : _mm512_setzero_pd();
    acc[r][1] = accumulate ? _mm512_loadu_pd(crow + 8) : _mm512_setzero_pd();
  }
  const double* a0 = a + (i + 0) * k;
  const double* a1 = a + (i + 1) * k;
  const double* a2 = a + (i + 2) * k;
  const double* a3 = a + (i + 3) * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n + j;
    const __m512d b0 = _mm512_loadu_pd(brow);
    const __m512d b1 = _mm512_loadu_pd(brow + 8);
    __m512d av = _mm512_set1_pd(a0[p]);
    acc[0][0] = _mm512_fmadd_pd(av, b0, acc[0][0]);
    acc[0][1] = _mm512_fmadd_pd(av, b1, acc[0][1]);
    av = _mm512_set1_pd(a1[p]);
    acc[1][0] = _mm512_fmadd_pd(av, b0, acc[1][0]);
    acc[1][1] = _mm512_fmadd_pd(av, b1, acc[1][1]);
    av = _mm512_set1_pd(a2[p]);
    acc[2][0] = _mm512_fmadd_pd(av, b0, acc[2][0]);
    acc[2][1] = _mm512_fmadd_pd(av, b1, acc[2][1]);
    av = _mm512_set1_pd(a3[p]);
    acc[3][0] = _mm512_fmadd_pd(av, b0, acc[3][0]);
    acc[3][1] = _mm512_fmadd_pd(av, b1, acc[3][1]);
  }
  for (std::size_t r = 0; r < 4; ++r) {
    double* crow = c + (i + r) * n + j;
    _mm512_storeu_pd(crow, acc[r][0]);
    _mm512_storeu_pd(crow + 8, acc[r][1]);
  }
}

// Four rows, up to 8 columns (masked).
inline void block_4x8(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                      std::size_t i, std::size_t j, std::size_t width, bool accumulate) {
  const __mmask8 mask = tail_mask(width);
  __m512d acc[4];
  for (std::size_t r = 0; r < 4; ++r) {
    acc[r] = accumulate ? _mm512_maskz_loadu_pd(mask, c + (i + r) * n + j) : _mm512_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m512d bv = _mm512_maskz_loadu_pd(mask, b + p * n + j);
    for (std::size_t r = 0; r < 4; ++r) {
      acc[r] = _mm512_fmadd_pd(_mm512_set1_pd(a[(i + r) * k + p]), bv, acc[r]);
    }
  }
  for (std::size_t r = 0; r < 4; ++r) _mm512_mask_storeu_pd(c + (i + r) * n + j, mask, acc[r]);
}

inline void block_1x8(const double* a, const double* b, double* c, std::size_t k, std::size_t n,
                      std::size_t i, std::size_t j, std::size_t width, bool accumulate) {
  const __mmask8 mask = tail_mask(width);
  double* crow = c + i * n + j;
  __m512d acc = accumulate ? _mm512_maskz_loadu_pd(mask, crow) : _mm512_setzero_pd();
  const double* arow = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    acc = _mm512_fmadd_pd(_mm512_set1_pd(arow[p]), _mm512_maskz_loadu_pd(mask, b + p * n + j), acc);
  }
  _mm512_mask_storeu_pd(crow, mask, acc);
}

void gemm_avx512(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) block_4x16(a, b, c, k, n, i, j, accumulate);
    for (; j < n; j += 8) block_4x8(a, b, c, k, n, i, j, n - j < 8 ? n - j : 8, accumulate);
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < n; j += 8) block_1x8(a, b, c, k, n, i, j, n - j < 8 ? n - j : 8, accumulate);
  }
}

double dot_avx512(const double* x, const double* y, std::size_t n) {
  __m512d s0 = _mm512_setzero_pd();
  __m512d s1 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), s0);
    s1 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i + 8), _mm512_loadu_pd(y + i + 8), s1);
  }
  for (; i < n; i += 8) {
    const __mmask8 mask = tail_mask(n - i < 8 ? n - i : 8);
    s0 = _mm512_fmadd_pd(_mm512_maskz_loadu_pd(mask, x + i), _mm512_maskz_loadu_pd(mask, y + i), s0);
  }
  return _mm512_reduce_add_pd(_mm512_add_pd(s0, s1));
}

void axpy_avx512(double alpha, const double* x, double* y, std::size_t n) {
  const __m512d av = _mm512_set1_pd(alpha);
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mask = tail_mask(n - i < 8 ? n - i : 8);
    const __m512d yv = _mm512_maskz_loadu_pd(mask, y + i);
    _mm512_mask_storeu_pd(y + i, mask, _mm512_fmadd_pd(av, _mm512_maskz_loadu_pd(mask, x + i), yv));
  }
}

void add_bias_avx512(double* rows, const double* bias, std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    double* row = rows + r * n;
    for (std::size_t j = 0; j < n; j += 8) {
      const __mmask8 mask = tail_mask(n - j < 8 ? n - j : 8);
      const __m512d v = _mm512_add_pd(_mm512_maskz_loadu_pd(mask, row + j), _mm512_maskz_loadu_pd(mask, bias + j));
      _mm512_mask_storeu_pd(row + j, mask, v);
    }
  }
}

void relu_avx512(const double* in, double* out, std::size_t n) {
  const __m512d zero = _mm512_setzero_pd();
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mask = tail_mask(n - i < 8 ? n - i : 8);
    _mm512_mask_storeu_pd(out + i, mask, _mm512_max_pd(_mm512_maskz_loadu_pd(mask, in + i), zero));
  }
}

void relu_backward_avx512(const double* pre, double* grad, std::size_t n) {
  const __m512d zero = _mm512_setzero_pd();
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mask = tail_mask(n - i < 8 ? n - i : 8);
    const __mmask8 keep = _mm512_mask_cmp_pd_mask(mask, _mm512_maskz_loadu_pd(mask, pre + i), zero, _CMP_GT_OQ);
    // Lanes in `mask` but not in `keep` become zero.
    _mm512_mask_storeu_pd(grad + i, mask, _mm512_maskz_loadu_pd(keep, grad + i));
  }
}

void column_sums_avx512(const double* rows, double* out, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < n; j += 8) {
    const __mmask8 mask = tail_mask(n - j < 8 ? n - j : 8);
    __m512d acc = _mm512_setzero_pd();
    for (std::size_t r = 0; r < m; ++r) acc = _mm512_add_pd(acc, _mm512_maskz_loadu_pd(mask, rows + r * n + j));
    _mm512_mask_storeu_pd(out + j, mask, acc);
  }
}

void adam_update_avx512(double* param, const double* grad, double* m1, double* m2, std::size_t n,
                        const AdamCoeffs& c) {
  const __m512d b1 = _mm512_set1_pd(c.beta1);
  const __m512d b2 = _mm512_set1_pd(c.beta2);
  const __m512d ob1 = _mm512_set1_pd(1.0 - c.beta1);
  const __m512d ob2 = _mm512_set1_pd(1.0 - c.beta2);
  const __m512d inv_bias1 = _mm512_set1_pd(1.0 / c.bias1);
  const __m512d inv_bias2 = _mm512_set1_pd(1.0 / c.bias2);
  const __m512d lr = _mm512_set1_pd(c.lr);
  const __m512d eps = _mm512_set1_pd(c.eps);
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mask = tail_mask(n - i < 8 ? n - i : 8);
    const __m512d g = _mm512_maskz_loadu_pd(mask, grad + i);
    const __m512d mv = _mm512_fmadd_pd(b1, _mm512_maskz_loadu_pd(mask, m1 + i), _mm512_mul_pd(ob1, g));
    const __m512d vv =
        _mm512_fmadd_pd(b2, _mm512_maskz_loadu_pd(mask, m2 + i), _mm512_mul_pd(ob2, _mm512_mul_pd(g, g)));
    _mm512_mask_storeu_pd(m1 + i, mask, mv);
    _mm512_mask_storeu_pd(m2 + i, mask, vv);
    const __m512d mhat = _mm512_mul_pd(mv, inv_bias1);
    const __m512d denom = _mm512_add_pd(_mm512_sqrt_pd(_mm512_mul_pd(vv, inv_bias2)), eps);
    const __m512d step = _mm512_div_pd(_mm512_mul_pd(lr, mhat), denom);
    _mm512_mask_storeu_pd(param + i, mask, _mm512_sub_pd(_mm512_maskz_loadu_pd(mask, param + i), step));
  }
}

constexpr KernelTable kAvx512Table{
    Isa::Avx512,      gemm_avx512,          dot_avx512,         axpy_avx512,        add_bias_avx512,
    relu_avx512,      relu_backward_avx512, column_sums_avx512, adam_update_avx512,
};

}  // namespace

namespace detail {
const KernelTable* avx512_table() { return &kAvx512Table; }
}  // namespace detail

}  // namespace laprep::simd
