// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gatekeeper {

/// FNV-1a 64-bit hash. Used for content-derived ids, digests and seed
/// derivation; not a cryptographic hash.
uint64_t fnv1a64(std::string_view bytes, uint64_t state = 0xcbf29ce484222325ull);

/// Lower-case hex rendering of fnv1a64(bytes), 16 characters.
std::string fnv1a64_hex(std::string_view bytes);

/// SplitMix64: counter-style generator with 64-bit state. Chosen for
/// bit-identical behaviour across platforms; streams are derived by hashing
/// a base seed with a string key, so independent consumers (per class,
/// per pivot) never share state.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next();

    /// Unbiased integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound);

    /// Double in [0, 1) with 53 random bits.
    double next_unit();

private:
    uint64_t state_;
};

/// Stream seed for (seed, key). Distinct keys give independent streams.
uint64_t derive_seed(uint64_t seed, std::string_view key);

/// Deterministic Fisher-Yates shuffle driven by a SplitMix64 stream.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (size_t i = items.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace gatekeeper
