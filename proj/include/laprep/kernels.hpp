#pragma once

// Dense float64 kernels used by the network code. Every kernel has a scalar
// reference implementation; vectorized variants (AVX2, AVX-512, NEON) are
// compiled in when the target supports them and picked at runtime.

#include <cstddef>
#include <string_view>
#include <vector>

namespace laprep::simd {

enum class Isa { Scalar, Avx2, Avx512, Neon };

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

/// Hyper-parameters and bias-correction terms for one Adam update.
struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

// Row-major layouts throughout. Matrices are passed as raw pointers plus
// extents; callers own storage.
struct KernelTable {
  Isa isa;

  // C[m x n] (+)= A[m x k] * B[k x n]
  void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // rows[r, :] += bias for every row
  void (*add_bias)(double* rows, const double* bias, std::size_t m, std::size_t n);
  // out = max(in, 0); in-place allowed
  void (*relu)(const double* in, double* out, std::size_t n);
  // grad[i] = 0 where pre[i] <= 0
  void (*relu_backward)(const double* pre, double* grad, std::size_t n);
  // out[j] = sum_r rows[r, j]
  void (*column_sums)(const double* rows, double* out, std::size_t m, std::size_t n);
  void (*adam_update)(double* param, const double* grad, double* m1, double* m2, std::size_t n,
                      const AdamCoeffs& coeffs);
};

bool isa_supported(Isa isa);
std::vector<Isa> supported_isas();

/// Table for a specific ISA; throws if the ISA is not compiled in or not
/// supported by the running CPU.
const KernelTable& kernels_for(Isa isa);

/// Table used by the library. Chosen once: the LAPREP_ISA environment
/// variable (scalar, avx2, avx512, neon) if set, otherwise the widest
/// supported ISA.
const KernelTable& active_kernels();

/// Overrides the active table for the rest of the process.
void set_active_isa(Isa isa);

/// Flushes subnormal results and inputs to zero while alive. Adam moments of
/// dead units decay geometrically and would otherwise crawl through the
/// subnormal range at a large per-operation cost.
class ScopedFlushDenormals {
 public:
  ScopedFlushDenormals();
  ~ScopedFlushDenormals();
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

 private:
  unsigned long saved_ = 0;
};

// out[j, i] = in[i, j]; in is rows x cols.
void transpose(const double* in, double* out, std::size_t rows, std::size_t cols);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();
const KernelTable* avx512_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace laprep::simd
