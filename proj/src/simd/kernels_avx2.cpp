// Built with -mavx2 on x86-64; only reached when the CPU reports AVX2.

#include "wise/simd/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace wise::simd {

namespace {

inline unsigned lane_mask(const std::int32_t* p, __m256i needle) {
  const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  return static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(v, needle))));
}

std::size_t count_equal_avx2(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const __m256i needle = _mm256_set1_epi32(value);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  // cmpeq yields -1 per matching lane; subtracting accumulates the count.
  // Lane counters are 32-bit, so flush before they could overflow.
  std::size_t total = 0;
  std::size_t since_flush = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    acc = _mm256_sub_epi32(acc, _mm256_cmpeq_epi32(v, needle));
    if (++since_flush == (1u << 30)) {
      alignas(32) std::int32_t lanes[8];
      _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
      for (std::int32_t lane : lanes) total += static_cast<std::uint32_t>(lane);
      acc = _mm256_setzero_si256();
      since_flush = 0;
    }
  }
  alignas(32) std::int32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  for (std::int32_t lane : lanes) total += static_cast<std::uint32_t>(lane);
  for (; i < n; ++i) total += data[i] == value;
  return total;
}

std::ptrdiff_t find_first_avx2(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const __m256i needle = _mm256_set1_epi32(value);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    if (const unsigned m = lane_mask(data + i, needle)) {
      return static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(__builtin_ctz(m)));
    }
  }
  for (; i < n; ++i) {
    if (data[i] == value) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

std::ptrdiff_t find_last_avx2(const std::int32_t* data, std::size_t n, std::int32_t value) {
  const __m256i needle = _mm256_set1_epi32(value);
  std::size_t end = n;
  while (end >= 8) {
    const std::size_t base = end - 8;
    if (const unsigned m = lane_mask(data + base, needle)) {
      return static_cast<std::ptrdiff_t>(base + 31 - static_cast<std::size_t>(__builtin_clz(m)));
    }
    end = base;
  }
  for (; end > 0; --end) {
    if (data[end - 1] == value) return static_cast<std::ptrdiff_t>(end - 1);
  }
  return -1;
}

constexpr KernelTable kAvx2{Isa::Avx2, count_equal_avx2, find_first_avx2, find_last_avx2};

}  // namespace

const KernelTable* detail::avx2_table_if_compiled() { return &kAvx2; }

}  // namespace wise::simd

#else

namespace wise::simd {
const KernelTable* detail::avx2_table_if_compiled() { return nullptr; }
}  // namespace wise::simd

#endif
