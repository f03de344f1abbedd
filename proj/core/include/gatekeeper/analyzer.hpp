// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/corpus.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::analyzer {

/// The pinned English stopword list (179 entries), lowercase.
const std::vector<std::string>& english_stopwords();
bool is_stopword(std::string_view token);

/// Symmetric matrix of pairwise class-centroid cosines in [0,1]; the diagonal
/// is 1 for any class whose centroid has tokens (0 for a stopword-only class).
struct SimilarityMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> values;

    double at(size_t i, size_t j) const { return values[i][j]; }
    int index_of(const std::string& cls) const;

    /// Largest off-diagonal value among non-benign classes.
    double max_malicious_offdiagonal(const std::string& benign_class) const;
};

/// Unnormalized sum of the class samples' term-frequency vectors; stopwords
/// are dropped first when requested.
TermVector class_centroid(const Corpus& corpus, const std::string& class_name,
                          bool remove_stopwords);

SimilarityMatrix similarity_matrix(const Corpus& corpus, bool remove_stopwords);

/// Connected components of {(i,j) : similarity >= threshold} over the
/// malicious classes. Multi-class components map onto "merged:<first member>"
/// (lexicographically first); every other class maps to itself.
MergeMap propose_merges(const SimilarityMatrix& matrix, double threshold,
                        const std::string& benign_class);

/// Override file: one "old-class -> new-class" per line; '#' comments.
MergeMap parse_merge_override(std::string_view text);
MergeMap load_merge_override(const std::filesystem::path& path);

/// CSV with a header row of class names and one labeled row per class.
std::string matrix_to_csv(const SimilarityMatrix& matrix);
void save_matrix_csv(const SimilarityMatrix& matrix, const std::filesystem::path& path);

}  // namespace gatekeeper::analyzer
