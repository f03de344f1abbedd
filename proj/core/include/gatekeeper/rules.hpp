// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace gatekeeper::rules {

enum class Severity { Info, Warn, Block };

const char* to_string(Severity severity);

enum class PatternKind { Literal, NocaseLiteral, Regex };

struct Pattern {
    std::string id;  // without the leading '$'
    PatternKind kind = PatternKind::Literal;
    std::string body;
    std::regex compiled;  // Regex kind only
};

/// Boolean condition over pattern hits: $id references, and/or/not,
/// parentheses, "any of them", "N of them".
struct Condition {
    enum class Op { PatternRef, And, Or, Not, OfThem };
    Op op = Op::PatternRef;
    std::string pattern_id;                         // PatternRef
    size_t threshold = 0;                           // OfThem: minimum distinct hits
    std::vector<std::unique_ptr<Condition>> args;   // And/Or (2), Not (1)
};

struct Rule {
    std::string name;
    Severity severity = Severity::Warn;
    std::vector<Pattern> patterns;
    std::unique_ptr<Condition> condition;
};

struct RuleSet {
    std::vector<Rule> rules;

    size_t size() const { return rules.size(); }
};

struct PatternHit {
    std::string pattern_id;
    size_t offset = 0;  // first occurrence, byte offset
};

struct RuleMatch {
    std::string rule;
    Severity severity = Severity::Warn;
    std::vector<PatternHit> matched_patterns;  // sorted by pattern id
};

/// Parses the line-oriented rule grammar:
///   rule <name> : <severity> {
///     $<id> = "<literal>" [nocase]
///     $<id> = /<regex>/
///     condition: <expr>
///   }
/// "//" starts a comment. Throws Error(Parse) with the offending line number.
RuleSet parse_ruleset(std::string_view text);
RuleSet load_ruleset(const std::filesystem::path& path);

/// Rules whose condition holds over the text's pattern hit set, ordered by
/// rule name; each match lists the first offset of every hitting pattern.
std::vector<RuleMatch> scan(std::string_view text, const RuleSet& ruleset);

/// Binary baseline verdict: "malicious" iff any match has severity warn or
/// block; info-only matches stay benign.
std::string rules_verdict(std::string_view text, const RuleSet& ruleset);

}  // namespace gatekeeper::rules
