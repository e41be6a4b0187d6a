#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pathclass {

// All randomness in the library flows through this generator so that results
// are reproducible from a single seed across platforms. Bounded draws use
// rejection sampling instead of std distributions, whose output is
// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t index(uint64_t n) {
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform real in [0, 1) with 53 bits of precision.
    double real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Fisher-Yates shuffle driven by index().
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Derives a per-stage seed from a global seed and a stage name, so that
// independent pipeline stages draw from independent streams.
inline uint64_t derive_seed(uint64_t base, std::string_view stage) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return detail::splitmix64(base ^ h);
}

}  // namespace pathclass
