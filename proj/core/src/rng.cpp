// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/rng.hpp"

#include <array>

namespace gatekeeper {

uint64_t fnv1a64(std::string_view bytes, uint64_t state) {
    for (unsigned char c : bytes) {
        state ^= static_cast<uint64_t>(c);
        state *= 1099511628211ull;
    }
    return state;
}

std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

uint64_t SplitMix64::next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t SplitMix64::next_below(uint64_t bound) {
    // Rejection sampling over the largest multiple of bound.
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const uint64_t v = next();
        if (v >= threshold) return v % bound;
    }
}

double SplitMix64::next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

uint64_t derive_seed(uint64_t seed, std::string_view key) {
    std::array<char, 8> le{};
    for (size_t i = 0; i < 8; ++i) le[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
    uint64_t h = fnv1a64(std::string_view(le.data(), le.size()));
    h = fnv1a64(key, h);
    // A zero seed would make the first outputs correlate across keys.
    return h == 0 ? 0x9e3779b97f4a7c15ull : h;
}

}  // namespace gatekeeper
