#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace edm {

/// Counter-based splittable random stream. All randomness in the library
/// flows from a single 64-bit run seed; substreams are derived by labeled
/// hashing so that adding or removing one consumer never shifts another.
///
/// Core generator is splitmix64, uniform doubles take the top 53 bits,
/// normals come from Box-Muller with a cached spare. Output is identical
/// across platforms (no <random> distributions involved).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Derive an independent stream keyed by a label. Splitting does not
    /// advance this stream.
    Rng split(std::string_view label) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return split(h);
    }

    Rng split(std::uint64_t salt) const {
        Rng derived(state_ ^ (salt + 0x9e3779b97f4a7c15ULL + (state_ << 6) + (state_ >> 2)));
        derived.next_u64();  // decorrelate from the raw key
        return derived;
    }

    /// Current stream position; Rng(state()) reproduces the remaining stream.
    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace edm
