#pragma once

#include <cstdint>

namespace hmmar {

/// Counter-based 64-bit generator, "splitmix64-ctr" version 1.
///
/// Output i of a stream with key k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15),
/// where mix64 is the SplitMix64 finalizer. The value depends only on
/// (key, i), so streams can be split, skipped, and reproduced exactly.
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double next_uniform();

    /// Standard normal via inverse_gaussian_cdf(next_uniform()).
    double next_gaussian();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x);

/// Key of a named substream: mix64(master ^ tag).
std::uint64_t derive_key(std::uint64_t master, std::uint64_t tag);

/// Substream tags. Changing any of these changes every seeded output.
inline constexpr std::uint64_t kChainStreamTag = 0x636861696E5F7631ULL;    // "chain_v1"
inline constexpr std::uint64_t kNoiseStreamTag = 0x6E6F6973655F7631ULL;    // "noise_v1"
inline constexpr std::uint64_t kRestartStreamTag = 0x72657374617274ULL;    // "restart"
inline constexpr std::uint64_t kReplicateStreamTag = 0x7265706C6963ULL;    // "replic"

}  // namespace hmmar
