#include "rangesim/proto/checksum.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace rangesim {
namespace checksum_kernels {

std::uint64_t word_sum_scalar(std::span<const std::uint8_t> data) {
  std::uint64_t sum = 0;
  const std::size_t n = data.size();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) sum += (std::uint32_t{data[i]} << 8) | data[i + 1];
  if (i < n) sum += std::uint32_t{data[i]} << 8;
  return sum;
}

namespace {

// Vector kernels add little-endian words (native on both x86 and arm64) and
// byte-swap the folded result; the ones'-complement sum is byte-order
// independent (RFC 1071 section 2(B)), so this matches the scalar kernel
// after folding. The tail goes through the same native-order path.
std::uint64_t native_tail_sum(const std::uint8_t* p, std::size_t n) {
  std::uint64_t sum = 0;
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) sum += std::uint32_t{p[i]} | (std::uint32_t{p[i + 1]} << 8);
  if (i < n) sum += p[i];
  return sum;
}

std::uint64_t native_to_big(std::uint64_t native_sum) {
  const std::uint16_t folded = fold_sum(native_sum);
  return static_cast<std::uint16_t>((folded >> 8) | (folded << 8));
}

}  // namespace

#if defined(__x86_64__) || defined(__i386__)

__attribute__((target("avx2"))) std::uint64_t word_sum_avx2(std::span<const std::uint8_t> data) {
  const std::uint8_t* p = data.data();
  std::size_t n = data.size();
  std::uint64_t total = 0;
  const __m256i low_mask = _mm256_set1_epi32(0xFFFF);

  // Each 32-byte block adds < 2^17 per 32-bit lane; flush well before overflow.
  constexpr std::size_t kBlocksPerFlush = 1 << 14;
  while (n >= 32) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t blocks = n / 32 < kBlocksPerFlush ? n / 32 : kBlocksPerFlush;
    for (std::size_t b = 0; b < blocks; ++b) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
      acc = _mm256_add_epi32(acc, _mm256_and_si256(v, low_mask));
      acc = _mm256_add_epi32(acc, _mm256_srli_epi32(v, 16));
      p += 32;
    }
    n -= blocks * 32;
    alignas(32) std::uint32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    for (std::uint32_t lane : lanes) total += lane;
  }
  total += native_tail_sum(p, n);
  return native_to_big(total);
}

std::uint64_t word_sum_sse2(std::span<const std::uint8_t> data) {
  const std::uint8_t* p = data.data();
  std::size_t n = data.size();
  std::uint64_t total = 0;
  const __m128i low_mask = _mm_set1_epi32(0xFFFF);

  constexpr std::size_t kBlocksPerFlush = 1 << 14;
  while (n >= 16) {
    __m128i acc = _mm_setzero_si128();
    std::size_t blocks = n / 16 < kBlocksPerFlush ? n / 16 : kBlocksPerFlush;
    for (std::size_t b = 0; b < blocks; ++b) {
      const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
      acc = _mm_add_epi32(acc, _mm_and_si128(v, low_mask));
      acc = _mm_add_epi32(acc, _mm_srli_epi32(v, 16));
      p += 16;
    }
    n -= blocks * 16;
    alignas(16) std::uint32_t lanes[4];
    _mm_store_si128(reinterpret_cast<__m128i*>(lanes), acc);
    for (std::uint32_t lane : lanes) total += lane;
  }
  total += native_tail_sum(p, n);
  return native_to_big(total);
}

#endif

#if defined(__aarch64__)

std::uint64_t word_sum_neon(std::span<const std::uint8_t> data) {
  const std::uint8_t* p = data.data();
  std::size_t n = data.size();
  uint64x2_t acc = vdupq_n_u64(0);
  while (n >= 16) {
    const uint16x8_t words = vreinterpretq_u16_u8(vld1q_u8(p));
    acc = vpadalq_u32(acc, vpaddlq_u16(words));
    p += 16;
    n -= 16;
  }
  std::uint64_t total = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
  total += native_tail_sum(p, n);
  return native_to_big(total);
}

#endif

namespace {

struct Kernel {
  std::string_view name;
  WordSumFn fn;
};

Kernel detect() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return {"avx2", &word_sum_avx2};
  return {"sse2", &word_sum_sse2};
#elif defined(__aarch64__)
  return {"neon", &word_sum_neon};
#else
  return {"scalar", &word_sum_scalar};
#endif
}

std::atomic<WordSumFn> g_fn{nullptr};
std::atomic<const char*> g_name{nullptr};

WordSumFn resolve() {
  WordSumFn fn = g_fn.load(std::memory_order_acquire);
  if (fn == nullptr) {
    const Kernel k = detect();
    g_name.store(k.name.data(), std::memory_order_relaxed);
    g_fn.store(k.fn, std::memory_order_release);
    fn = k.fn;
  }
  return fn;
}

}  // namespace

std::string_view active_kernel() {
  resolve();
  return g_name.load(std::memory_order_relaxed);
}

bool select_kernel(std::string_view name) {
  Kernel k{};
  if (name == "scalar") {
    k = {"scalar", &word_sum_scalar};
  }
#if defined(__x86_64__) || defined(__i386__)
  else if (name == "sse2") {
    k = {"sse2", &word_sum_sse2};
  } else if (name == "avx2") {
    __builtin_cpu_init();
    if (!__builtin_cpu_supports("avx2")) return false;
    k = {"avx2", &word_sum_avx2};
  }
#endif
#if defined(__aarch64__)
  else if (name == "neon") {
    k = {"neon", &word_sum_neon};
  }
#endif
  else {
    return false;
  }
  g_name.store(k.name.data(), std::memory_order_relaxed);
  g_fn.store(k.fn, std::memory_order_release);
  return true;
}

}  // namespace checksum_kernels

std::uint64_t word_sum(std::span<const std::uint8_t> data) { return checksum_kernels::resolve()(data); }

}  // namespace rangesim
