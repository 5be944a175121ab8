// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace fsdet {

/// Deterministic random source. Wraps std::mt19937_64 (whose raw output
/// sequence is fixed by the standard) with hand-rolled draw helpers, since
/// std::uniform_*_distribution results are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
        // rejection sampling for an unbiased draw
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return lo + static_cast<std::int64_t>(v % span);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller, no internal caching so draw count is
    /// predictable.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::int64_t>(last - first);
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::swap(first[i], first[uniform_int(0, i)]);
        }
    }

    std::string save_state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void load_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
        if (is.fail()) throw std::invalid_argument("Rng: bad serialized state");
    }

private:
    std::mt19937_64 engine_;
};

/// FNV-1a, used to derive per-record seeds and config fingerprints.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Stable per-record seed from a global seed and a record id.
inline std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& id) {
    std::uint64_t h = fnv1a(id);
    h ^= global_seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace fsdet
