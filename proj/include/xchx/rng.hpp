// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_RNG_HPP
#define XCHX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "xchx/hash.hpp"

namespace xchx {

// SplitMix64. Small, fast, and identical everywhere, which is what the
// deterministic replay guarantee actually needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    bool bernoulli(double p) { return next_double() < p; }

    /// Inverse-CDF exponential draw; rate must be positive.
    double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

private:
    std::uint64_t state_;
};

/// Derive an actor's private substream from the run seed. Keyed hashing keeps
/// streams independent: adding an actor never perturbs the draws of another.
inline Rng derive_rng(std::uint64_t seed, std::string_view stream_id) {
    std::string buf;
    append_u64_le(buf, seed);
    buf.append(stream_id);
    Digest256 d = sha256(buf);
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s |= static_cast<std::uint64_t>(d[i]) << (8 * i);
    return Rng(s);
}

}  // namespace xchx

#endif  // XCHX_RNG_HPP
