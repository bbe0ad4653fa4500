#pragma once

// Data-parallel float32 primitives used by the toy transformer, hook
// injection and token scoring. Every kernel has a scalar reference
// implementation; AVX2+FMA (x86-64) and NEON (aarch64) variants are selected
// at run time. Set COTREP_ISA=scalar|avx2|neon to pin a variant.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cotrep::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  float (*dot)(const float* a, const float* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  // y[i] += x[i]; elementwise, so bitwise identical across variants
  void (*add)(const float* x, float* y, std::size_t n);
  // y[r] = sum_c w[r * cols + c] * x[c]   (w row-major, rows x cols)
  void (*matvec)(const float* w, const float* x, float* y, std::size_t rows, std::size_t cols);
};

std::string_view to_string(Isa isa);

// Variants compiled into this binary and supported by the running CPU.
// Always contains kScalar.
std::vector<Isa> available();

// nullptr when the variant is unavailable.
const KernelTable* table_for(Isa isa);

// The dispatched table: best available variant unless COTREP_ISA overrides.
const KernelTable& active();

inline float dot(std::span<const float> a, std::span<const float> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void add(std::span<const float> x, std::span<float> y) {
  active().add(x.data(), y.data(), x.size());
}

inline void matvec(std::span<const float> w, std::span<const float> x, std::span<float> y) {
  active().matvec(w.data(), x.data(), y.data(), y.size(), x.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(COTREP_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(COTREP_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace cotrep::kernels
