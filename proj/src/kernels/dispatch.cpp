#include <cstdlib>
#include <string>

#include "cotrep/kernels/kernels.hpp"

namespace cotrep::kernels {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(COTREP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(COTREP_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* select() {
  if (const char* forced = std::getenv("COTREP_ISA")) {
    const std::string name(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (name == to_string(isa)) {
        if (const KernelTable* t = table_for(isa)) return t;
      }
    }
  }
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (const KernelTable* t = table_for(isa)) return t;
  }
  return &detail::kScalarTable;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "?";
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (table_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

const KernelTable* table_for(Isa isa) {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::kScalar: return &detail::kScalarTable;
#if defined(COTREP_HAVE_AVX2)
    case Isa::kAvx2: return &detail::kAvx2Table;
#endif
#if defined(COTREP_HAVE_NEON)
    case Isa::kNeon: return &detail::kNeonTable;
#endif
    default: return nullptr;
  }
}

const KernelTable& active() {
  static const KernelTable* table = select();
  return *table;
}

}  // namespace cotrep::kernels
