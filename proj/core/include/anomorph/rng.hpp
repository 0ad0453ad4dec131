#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace anomorph {

// Deterministic PRNG used everywhere instead of std distributions, whose
// output is implementation-defined. Same seed, same sequence, any platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    float uniform() {
        return static_cast<float>(next_u64() >> 40) * (1.0f / 16777216.0f);
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one value per call (the twin is cached).
    float normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        float u1 = uniform();
        float u2 = uniform();
        if (u1 < 1e-12f) u1 = 1e-12f;
        const float r = std::sqrt(-2.0f * std::log(u1));
        const float a = 6.28318530717958647692f * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // [0, n)
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    // Independent child stream; forking never disturbs the parent sequence.
    Rng fork(uint64_t stream) const {
        uint64_t z = state_ ^ (0xd1342543de82ef95ull * (stream + 1));
        z = (z ^ (z >> 29)) * 0xff51afd7ed558ccdull;
        return Rng(z ^ (z >> 32));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_u64() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
    float cached_ = 0.0f;
    bool has_cached_ = false;
};

} // namespace anomorph
