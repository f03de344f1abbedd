// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <stdexcept>
#include <string>

namespace gatekeeper {

/// Failure categories surfaced by the library. Tests match on the kind,
/// messages carry the human-readable detail (line numbers, class names, ids).
enum class ErrorKind {
    Parse,            // malformed input text (corpus lines, rule files, model files)
    Integrity,        // duplicate ids, dangling parent references
    Taxonomy,         // label not in the active class set
    Policy,           // forbidden operation (merging/dropping the benign class, list overlap)
    Stratification,   // class too small to split
    Precondition,     // operation contract violated (augmented samples in split input, ...)
    Domain,           // empty class handed to an analysis operation
    Training,         // degenerate training input (single class, empty vocabulary)
    Incompatibility,  // model artifact format version mismatch
    Input,            // malformed in-memory arguments (matrix shape, label lists)
    Mode,             // predictor/mode combination not supported
    Io,               // filesystem and process failures
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace gatekeeper
