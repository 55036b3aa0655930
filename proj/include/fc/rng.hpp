#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fc {

// splitmix64 step; the generator behind every random draw in the toolkit.
// Counter-based derivation keeps parallel and serial runs bit-identical.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    return splitmix64(s);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c) {
    return hash_mix(hash_mix(a, b), c);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return hash_mix(hash_mix(a, b, c), d);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased-enough bounded draw (multiply-shift); deterministic on all platforms.
    uint32_t next_below(uint32_t n) {
        if (n == 0) throw std::invalid_argument("next_below requires n > 0.");
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller; two u64 draws per pair, second value cached.
    double next_gauss() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // First k entries of a partial Fisher-Yates shuffle of 0..n-1.
    std::vector<int> sample_subset(int n, int k) {
        if (k < 0 || k > n) throw std::invalid_argument("sample_subset requires 0 <= k <= n.");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < k; ++i) {
            uint32_t j = i + next_below(static_cast<uint32_t>(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

  private:
    uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace fc
