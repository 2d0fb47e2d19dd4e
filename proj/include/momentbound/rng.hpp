#pragma once

#include <cmath>
#include <cstdint>

namespace momentbound {

// Counter-based generator: draw k is a pure function of (seed, k), so streams
// are reproducible across platforms and can be consumed out of order.
// Mixing function is splitmix64.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t bits_at(std::uint64_t k) const {
        return mix(seed_ + (k + 1) * 0x9E3779B97F4A7C15ull);
    }

    // Uniform draw in [0,1) with 53-bit resolution.
    double uniform_at(std::uint64_t k) const {
        return static_cast<double>(bits_at(k) >> 11) * 0x1.0p-53;
    }

    double next_uniform() { return uniform_at(counter_++); }

    // Box-Muller; consumes two uniforms per pair, caches the second draw.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        while (u1 <= 0.0) u1 = next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace momentbound
