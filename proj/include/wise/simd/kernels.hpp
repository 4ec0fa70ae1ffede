#pragma once

// Activity-code scanning kernels. Every kernel has a scalar reference
// implementation; vector variants (AVX2 on x86-64, NEON on AArch64) are
// selected once at runtime and must agree with the reference exactly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace wise::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  std::size_t (*count_equal)(const std::int32_t* data, std::size_t n, std::int32_t value);
  /// Index of the first element equal to `value`, or -1.
  std::ptrdiff_t (*find_first)(const std::int32_t* data, std::size_t n, std::int32_t value);
  /// Index of the last element equal to `value`, or -1.
  std::ptrdiff_t (*find_last)(const std::int32_t* data, std::size_t n, std::int32_t value);
};

const KernelTable& scalar_kernels();

/// Null when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

/// Best available table, chosen on first use. `WISE_SIMD=scalar|avx2|neon`
/// forces a variant when it is available.
const KernelTable& active_kernels();

inline std::size_t count_equal(std::span<const std::int32_t> data, std::int32_t value) {
  return active_kernels().count_equal(data.data(), data.size(), value);
}

inline std::ptrdiff_t find_first(std::span<const std::int32_t> data, std::int32_t value) {
  return active_kernels().find_first(data.data(), data.size(), value);
}

inline std::ptrdiff_t find_last(std::span<const std::int32_t> data, std::int32_t value) {
  return active_kernels().find_last(data.data(), data.size(), value);
}

namespace detail {
// Defined in the per-ISA translation units.
const KernelTable* avx2_table_if_compiled();
const KernelTable* neon_table_if_compiled();
}  // namespace detail

}  // namespace wise::simd
