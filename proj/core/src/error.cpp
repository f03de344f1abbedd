// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/error.hpp"

namespace gatekeeper {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Integrity: return "integrity error";
        case ErrorKind::Taxonomy: return "taxonomy error";
        case ErrorKind::Policy: return "policy error";
        case ErrorKind::Stratification: return "stratification error";
        case ErrorKind::Precondition: return "precondition error";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::Training: return "training error";
        case ErrorKind::Incompatibility: return "incompatibility error";
        case ErrorKind::Input: return "input error";
        case ErrorKind::Mode: return "mode error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

}  // namespace gatekeeper
