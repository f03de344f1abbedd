// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/corpus.hpp"

namespace gatekeeper::extractor {

enum class FileKind { Python, TypeScript, JavaScript };

/// .py / .ts,.tsx / .js,.mjs; nullopt for anything else.
std::optional<FileKind> kind_for_path(const std::filesystem::path& path);

enum class PayloadKind { Docstring, DescriptionField };

/// Anchored textual pattern. The anchor locates a tool definition; the
/// payload rule then extracts the description:
///  - Docstring: the first string literal in the body of the next function
///    definition after the anchor.
///  - DescriptionField: every `description`-keyed string value inside the
///    bracket construct opened at (or right after) the anchor; a preceding
///    `name` key in the same construct supplies the tool name.
struct ExtractionPattern {
    std::string name;
    std::set<FileKind> file_kinds;
    std::string anchor;
    bool anchor_is_regex = false;
    PayloadKind payload = PayloadKind::DescriptionField;
};

struct ExtractedTool {
    std::optional<std::string> name;
    std::string description;
    std::filesystem::path file;
    int line = 1;  // 1-based line of the anchor
    std::string pattern;
};

struct ExtractionResult {
    std::vector<ExtractedTool> tools;
    std::vector<std::string> warnings;
};

/// Files with extensions .py/.ts/.tsx/.js/.mjs under root, in lexicographic
/// order. Directory symlinks are not followed.
std::vector<std::filesystem::path> scan_tree(const std::filesystem::path& root);

ExtractionResult extract_tools(const std::filesystem::path& file,
                               const std::vector<ExtractionPattern>& patterns);

/// Pure core: extraction over in-memory content.
ExtractionResult extract_from_text(std::string_view content, FileKind kind,
                                   const std::vector<ExtractionPattern>& patterns,
                                   const std::filesystem::path& file = {});

/// One ToolDescription per tool with origin=scraped, ids content-hashed from
/// the description; exact-duplicate descriptions collapse to one sample.
Corpus to_corpus(const std::vector<ExtractedTool>& tools, const std::string& label,
                 const LabelTaxonomy& taxonomy);

/// The built-in 12-pattern pack.
std::vector<ExtractionPattern> default_patterns();

/// Pattern file: stanzas of `name=`, `kinds=`, `anchor=`, `payload=` lines
/// separated by blank lines; `anchor = regex:<expr>` opts into regex anchors.
std::vector<ExtractionPattern> load_patterns(const std::filesystem::path& path);
std::vector<ExtractionPattern> parse_patterns(std::string_view content);

}  // namespace gatekeeper::extractor
