// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gatekeeper {

/// Sparse token -> weight vector. Ordered map so iteration (and therefore
/// serialization and summation order) is deterministic. Zero-weight entries
/// are never stored.
using TermVector = std::map<std::string, double>;

namespace text {

std::string to_lower(std::string_view s);

/// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view s);

/// The shared tokenization used by the augmenter, analyzer and classifier:
/// lowercase, split on runs of non-alphanumeric bytes, keep tokens of
/// length >= 1. Bytes outside ASCII letters/digits act as separators.
std::vector<std::string> tokenize(std::string_view s);

/// Raw term-frequency vector over tokenize(s).
TermVector term_frequencies(std::string_view s);

double dot(const TermVector& a, const TermVector& b);
double l2_norm(const TermVector& v);

/// Cosine similarity; 0.0 when either vector is empty (no tokens).
double cosine(const TermVector& a, const TermVector& b);

}  // namespace text
}  // namespace gatekeeper
