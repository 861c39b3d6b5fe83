#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace divrec {

// FNV-1a over raw bytes. Used for prompt hashing, config hashing and
// per-sample RNG stream derivation.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ stream);
}

// Deterministic RNG. All draws go through hand-rolled mappings rather than
// std distributions, so identical seeds give identical streams on every
// platform and compiler.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    static Rng derived(uint64_t seed, uint64_t stream) { return Rng(mix_seed(seed, stream)); }
    static Rng derived(uint64_t seed, std::string_view stream_id) {
        return Rng(mix_seed(seed, fnv1a64(stream_id)));
    }

    uint64_t next_u64() { return engine_(); }

    // Unbiased draw from [0, n) via rejection sampling.
    uint64_t bounded(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // k distinct indices from [0, n), in draw order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        if (k > n) k = n;
        std::vector<size_t> out;
        out.reserve(k);
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(bounded(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

    // Index draw proportional to nonnegative weights. Caller guarantees a
    // positive total.
    size_t weighted(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double x = next_double() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (x < acc) return i;
        }
        return weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace divrec
