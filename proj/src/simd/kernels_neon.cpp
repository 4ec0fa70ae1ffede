#include "wise/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace wise::simd {

namespace {

std::size_t count_equal_neon(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const int32x4_t needle = vdupq_n_s32(value);
  std::size_t total = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // Matching lanes are all-ones; shift down to 1 and add across.
    const uint32x4_t eq = vceqq_s32(vld1q_s32(data + i), needle);
    total += vaddvq_u32(vshrq_n_u32(eq, 31));
  }
  for (; i < n; ++i) total += data[i] == value;
  return total;
}

std::ptrdiff_t find_first_neon(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const int32x4_t needle = vdupq_n_s32(value);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    if (vmaxvq_u32(vceqq_s32(vld1q_s32(data + i), needle)) != 0) break;
  }
  for (; i < n; ++i) {
    if (data[i] == value) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

std::ptrdiff_t find_last_neon(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const int32x4_t needle = vdupq_n_s32(value);
  std::size_t end = n;
  while (end >= 4 && vmaxvq_u32(vceqq_s32(vld1q_s32(data + end - 4), needle)) == 0) end -= 4;
  for (; end > 0; --end) {
    if (data[end - 1] == value) return static_cast<std::ptrdiff_t>(end - 1);
  }
  return -1;
}

constexpr KernelTable kNeon{Isa::Neon, count_equal_neon, find_first_neon, find_last_neon};

}  // namespace

const KernelTable* detail::neon_table_if_compiled() { return &kNeon; }

}  // namespace wise::simd

#else

namespace wise::simd {
const KernelTable* detail::neon_table_if_compiled() { return nullptr; }
}  // namespace wise::simd

#endif
