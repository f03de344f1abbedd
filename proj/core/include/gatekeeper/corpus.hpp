// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gatekeeper {

enum class Origin { Scraped, McpTox, Augmented, Live };

const char* to_string(Origin origin);
Origin origin_from_string(std::string_view s);  // throws Error(Parse)

enum class SplitPart { Train, Test };

/// One MCP tool's natural-language description with label and provenance.
struct ToolDescription {
    std::string id;
    std::string name;
    std::string description;
    std::optional<std::string> label;
    Origin origin = Origin::Scraped;
    std::optional<std::string> parent_id;  // set iff origin == Augmented
    std::string source;                    // repo path / server name / "file:line"

    bool operator==(const ToolDescription&) const = default;
};

/// Class set with a designated benign class. The binary projection collapses
/// everything that is not the benign class into "malicious".
struct LabelTaxonomy {
    std::vector<std::string> classes;
    std::string benign_class;

    bool contains(std::string_view cls) const;

    /// benign_class -> "benign", any other class -> "malicious".
    std::string binary_projection(const std::string& label) const;

    /// Checks benign_class membership and class uniqueness. An empty taxonomy
    /// (no classes, empty benign name) is allowed for unlabeled corpora.
    void validate() const;

    std::vector<std::string> malicious_classes() const;

    bool operator==(const LabelTaxonomy&) const = default;
};

/// old-class -> new-class rewrite. Classes absent from the map are left as-is.
using MergeMap = std::map<std::string, std::string>;

struct Corpus {
    std::vector<ToolDescription> samples;
    LabelTaxonomy taxonomy;
    std::map<std::string, SplitPart> split;  // empty = no split assigned

    size_t size() const { return samples.size(); }

    /// Full invariant check: unique ids, labels in taxonomy, augmented
    /// parents resolvable, split covering all ids exactly once when present.
    void validate() const;

    /// Samples per class, in taxonomy order (labels only; unlabeled ignored).
    std::map<std::string, size_t> class_counts() const;

    const ToolDescription* find(std::string_view id) const;

    bool operator==(const Corpus&) const = default;
};

/// JSONL corpus I/O. Format: optional first line "#taxonomy {json}", then one
/// object per line with keys id, name, description, label (nullable), origin,
/// parent_id (nullable), source, and optional split ("train"/"test").
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

/// Deterministic per-class split. Per class: test count =
/// round(test_fraction * class_count), at least 1; shuffle order is keyed on
/// (seed, class name) over id-sorted samples. Requires every sample labeled,
/// every class with >= 2 samples, and no augmented samples.
Corpus stratified_split(const Corpus& corpus, double test_fraction, uint64_t seed);

/// Rewrites labels through merge_map and shrinks the taxonomy to its image.
/// The benign class must map to itself and no malicious class may map into it.
Corpus apply_merge(const Corpus& corpus, const MergeMap& merge_map);

/// Removes a malicious class and all of its samples.
Corpus drop_class(const Corpus& corpus, const std::string& class_name);

/// Samples assigned to one side of the split (taxonomy retained).
Corpus subset(const Corpus& corpus, SplitPart part);

}  // namespace gatekeeper
