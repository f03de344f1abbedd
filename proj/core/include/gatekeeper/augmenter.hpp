// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/corpus.hpp"

namespace gatekeeper::augmenter {

/// Cosine of raw term-frequency vectors over the shared tokenization.
/// Symmetric; exactly 1.0 for token-identical texts; 0.0 when the token sets
/// are disjoint or either text has no tokens.
double text_similarity(std::string_view a, std::string_view b);

class ParaphraseProvider {
public:
    virtual ~ParaphraseProvider() = default;
    virtual const std::string& name() const = 0;
    virtual const std::string& pivot() const = 0;
    /// Produces a paraphrase of non-empty text; throws Error on failure.
    virtual std::string generate(const std::string& text) = 0;
};

struct AugmentConfig {
    std::vector<std::shared_ptr<ParaphraseProvider>> providers;
    double max_similarity = 0.8;
    uint64_t seed = 0;  // feeds the bundled deterministic providers
};

struct AugmentStats {
    size_t generated = 0;
    size_t added = 0;
    size_t rejected_similarity = 0;
    size_t rejected_duplicate = 0;
    std::vector<std::string> warnings;
};

/// Expands a training corpus: per sample x provider, a candidate paraphrase
/// is kept iff text_similarity(original, candidate) < max_similarity and it
/// is not an exact duplicate of an already-kept sibling. Kept candidates are
/// appended with origin=augmented, the parent's label, and a train split tag
/// when the corpus carries a split. Input must contain no test samples.
Corpus augment_corpus(const Corpus& train, const AugmentConfig& config,
                      AugmentStats* stats = nullptr);

/// word -> synonym choices, in file order.
using Thesaurus = std::map<std::string, std::vector<std::string>>;

/// Embedded default table (tool-description vocabulary).
const Thesaurus& builtin_thesaurus();

/// Two-column UTF-8 text: word<TAB>synonym, repeated words accumulate.
Thesaurus load_thesaurus(const std::filesystem::path& path);

/// Returns its input unchanged; every candidate is rejected by the 0.8
/// similarity cutoff, which makes it the no-op provider for tests.
class IdentityProvider : public ParaphraseProvider {
public:
    const std::string& name() const override;
    const std::string& pivot() const override;
    std::string generate(const std::string& text) override;
};

/// Bundled deterministic paraphraser: seeded synonym substitution plus
/// comma-clause rotation. The substitution stream is keyed on
/// (seed, pivot, text), so distinct pivots yield distinct paraphrases and
/// repeated calls are reproducible.
class SyntheticPivotProvider : public ParaphraseProvider {
public:
    SyntheticPivotProvider(std::string pivot, uint64_t seed, const Thesaurus* thesaurus);

    const std::string& name() const override { return name_; }
    const std::string& pivot() const override { return pivot_; }
    std::string generate(const std::string& text) override;

private:
    std::string name_;
    std::string pivot_;
    uint64_t seed_;
    const Thesaurus* thesaurus_;
};

/// External paraphrase command: the text (plus a trailing newline) is written
/// to the child's stdin and the paraphrase read from its stdout, with one
/// trailing newline stripped. Invocations are serialized.
class CommandProvider : public ParaphraseProvider {
public:
    CommandProvider(std::string name, std::string pivot, std::vector<std::string> argv);

    const std::string& name() const override { return name_; }
    const std::string& pivot() const override { return pivot_; }
    std::string generate(const std::string& text) override;

private:
    std::string name_;
    std::string pivot_;
    std::vector<std::string> argv_;
};

/// The four bundled pivots (ar, zh, ja, ko) over the builtin thesaurus.
std::vector<std::shared_ptr<ParaphraseProvider>> default_providers(uint64_t seed);

/// Provider config: stanzas separated by blank lines with keys
/// provider.name, provider.pivot and provider.cmd (argv, whitespace-split);
/// a stanza without a cmd builds the bundled deterministic provider.
std::vector<std::shared_ptr<ParaphraseProvider>> load_providers(
    const std::filesystem::path& path, uint64_t seed, const Thesaurus* thesaurus = nullptr);

}  // namespace gatekeeper::augmenter
