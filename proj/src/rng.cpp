#include "hmmar/rng.hpp"

#include "hmmar/normal.hpp"

namespace hmmar {

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t master, std::uint64_t tag) { return mix64(master ^ tag); }

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double CounterRng::next_uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(next_u64() >> 11) + 0.5) * kScale;
}

double CounterRng::next_gaussian() { return inverse_gaussian_cdf(next_uniform()); }

}  // namespace hmmar
