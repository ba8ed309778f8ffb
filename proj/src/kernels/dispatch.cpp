#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "laprep/error.hpp"
#include "laprep/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <xmmintrin.h>
#endif

namespace laprep::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Avx512: return "avx512";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "avx512") return Isa::Avx512;
  if (name == "neon") return Isa::Neon;
  fail(ErrorCode::InvalidArgument, "unknown ISA '" + std::string(name) + "'");
}

namespace {

const KernelTable* compiled_table(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &detail::scalar_table();
    case Isa::Avx2: return detail::avx2_table();
    case Isa::Avx512: return detail::avx512_table();
    case Isa::Neon: return detail::neon_table();
  }
  return nullptr;
}

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
#if defined(__x86_64__) || defined(__i386__)
    case Isa::Avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::Avx512:
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq");
#else
    case Isa::Avx2:
    case Isa::Avx512: return false;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return true;
#else
    case Isa::Neon: return false;
#endif
  }
  return false;
}

const KernelTable& pick_default() {
  if (const char* env = std::getenv("LAPREP_ISA"); env != nullptr && *env != '\0') {
    return kernels_for(parse_isa(env));
  }
  for (Isa isa : {Isa::Avx512, Isa::Avx2, Isa::Neon}) {
    if (isa_supported(isa)) return *compiled_table(isa);
  }
  return detail::scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

namespace detail {
#if !defined(LAPREP_HAVE_X86_KERNELS)
const KernelTable* avx2_table() { return nullptr; }
const KernelTable* avx512_table() { return nullptr; }
#endif
#if !defined(LAPREP_HAVE_NEON_KERNELS)
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

bool isa_supported(Isa isa) { return compiled_table(isa) != nullptr && cpu_has(isa); }

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512, Isa::Neon}) {
    if (isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    fail(ErrorCode::Unsupported,
         "ISA '" + std::string(isa_name(isa)) + "' is not available on this build/CPU");
  }
  return *compiled_table(isa);
}

const KernelTable& active_kernels() {
  const KernelTable* table = g_active.load(std::memory_order_acquire);
  if (table == nullptr) {
    const KernelTable* chosen = &pick_default();
    // First caller wins; concurrent initialisers agree on the same choice.
    g_active.compare_exchange_strong(table, chosen, std::memory_order_acq_rel);
    table = g_active.load(std::memory_order_acquire);
  }
  return *table;
}

void set_active_isa(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

#if defined(__x86_64__) || defined(__i386__)
ScopedFlushDenormals::ScopedFlushDenormals() : saved_(_mm_getcsr()) {
  _mm_setcsr(static_cast<unsigned>(saved_) | 0x8040u);  // FTZ | DAZ
}
ScopedFlushDenormals::~ScopedFlushDenormals() { _mm_setcsr(static_cast<unsigned>(saved_)); }
#elif defined(__aarch64__)
ScopedFlushDenormals::ScopedFlushDenormals() {
  std::uint64_t fpcr;
  __asm__ volatile("mrs %0, fpcr" : "=r"(fpcr));
  saved_ = fpcr;
  fpcr |= (std::uint64_t{1} << 24);  // FZ
  __asm__ volatile("msr fpcr, %0" : : "r"(fpcr));
}
ScopedFlushDenormals::~ScopedFlushDenormals() {
  const std::uint64_t fpcr = saved_;
  __asm__ volatile("msr fpcr, %0" : : "r"(fpcr));
}
#else
ScopedFlushDenormals::ScopedFlushDenormals() = default;
ScopedFlushDenormals::~ScopedFlushDenormals() = default;
#endif

void transpose(const double* in, double* out, std::size_t rows, std::size_t cols) {
  constexpr std::size_t kBlock = 8;
  for (std::size_t i0 = 0; i0 < rows; i0 += kBlock) {
    const std::size_t i1 = std::min(rows, i0 + kBlock);
    for (std::size_t j0 = 0; j0 < cols; j0 += kBlock) {
      const std::size_t j1 = std::min(cols, j0 + kBlock);
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = in[i * cols + j];
      }
    }
  }
}

}  // namespace laprep::simd
