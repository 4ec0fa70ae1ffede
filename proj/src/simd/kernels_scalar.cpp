#include <cstdlib>
#include <string>

#include "wise/simd/kernels.hpp"

namespace wise::simd {

namespace {

std::size_t count_equal_scalar(const std::int32_t* data, std::size_t n, std::int32_t value) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += data[i] == value;
  return count;
}

std::ptrdiff_t find_first_scalar(const std::int32_t* data, std::size_t n, std::int32_t value) {
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i] == value) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

std::ptrdiff_t find_last_scalar(const std::int32_t* data, std::size_t n, std::int32_t value) {
  for (std::size_t i = n; i > 0; --i) {
    if (data[i - 1] == value) return static_cast<std::ptrdiff_t>(i - 1);
  }
  return -1;
}

constexpr KernelTable kScalar{Isa::Scalar, count_equal_scalar, find_first_scalar, find_last_scalar};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& choose() {
  const auto candidates = available_kernels();
  if (const char* forced = std::getenv("WISE_SIMD")) {
    for (const KernelTable* table : candidates) {
      if (to_string(table->isa) == forced) return *table;
    }
  }
  return *candidates.back();
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
  return cpu_has_avx2() ? detail::avx2_table_if_compiled() : nullptr;
}

const KernelTable* neon_kernels() { return detail::neon_table_if_compiled(); }

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> tables{&kScalar};
  if (const KernelTable* t = neon_kernels()) tables.push_back(t);
  if (const KernelTable* t = avx2_kernels()) tables.push_back(t);
  return tables;
}

const KernelTable& active_kernels() {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace wise::simd
