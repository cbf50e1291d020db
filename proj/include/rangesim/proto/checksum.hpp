#pragma once

// Internet checksum (RFC 1071). The 16-bit ones'-complement word sum is the
// per-byte hot loop of the simulator: every emitted and decoded frame runs it
// at least twice. A scalar reference kernel and vectorized kernels share one
// contract; the fastest one the CPU supports is picked on first use.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rangesim {

namespace checksum_kernels {

/// Sum of big-endian 16-bit words (odd tail zero-padded), not folded.
std::uint64_t word_sum_scalar(std::span<const std::uint8_t> data);

// Vector kernels return a partially folded value; after fold_sum() every
// kernel agrees bit-for-bit with word_sum_scalar.

#if defined(__x86_64__) || defined(__i386__)
std::uint64_t word_sum_avx2(std::span<const std::uint8_t> data);
std::uint64_t word_sum_sse2(std::span<const std::uint8_t> data);
#endif
#if defined(__aarch64__)
std::uint64_t word_sum_neon(std::span<const std::uint8_t> data);
#endif

using WordSumFn = std::uint64_t (*)(std::span<const std::uint8_t>);

/// Name of the kernel chosen by runtime dispatch ("avx2", "sse2", "neon", "scalar").
std::string_view active_kernel();

/// Forces a kernel by name; returns false if unknown or unsupported here.
/// Intended for tests and benchmarking.
bool select_kernel(std::string_view name);

}  // namespace checksum_kernels

/// Dispatched 16-bit big-endian word sum. Only meaningful after fold_sum();
/// sums of several buffers may be added before folding.
std::uint64_t word_sum(std::span<const std::uint8_t> data);

/// Folds carries until the value fits in 16 bits.
constexpr std::uint16_t fold_sum(std::uint64_t sum) {
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(sum);
}

/// Ones'-complement of the ones'-complement sum.
inline std::uint16_t inet_checksum(std::span<const std::uint8_t> data) {
  return static_cast<std::uint16_t>(~fold_sum(word_sum(data)));
}

}  // namespace rangesim
