// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gatekeeper/error.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::rules {

const char* to_string(Severity severity) {
    switch (severity) {
        case Severity::Info: return "info";
        case Severity::Warn: return "warn";
        case Severity::Block: return "block";
    }
    return "warn";
}

namespace {

[[noreturn]] void parse_error(size_t line, const std::string& message) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message);
}

Severity severity_from(const std::string& s, size_t line) {
    if (s == "info") return Severity::Info;
    if (s == "warn") return Severity::Warn;
    if (s == "block") return Severity::Block;
    parse_error(line, "unknown severity \"" + s + "\" (expected info, warn or block)");
}

std::string unescape_literal(const std::string& body, size_t line) {
    std::string out;
    out.reserve(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '\\') {
            out.push_back(body[i]);
            continue;
        }
        if (++i == body.size()) parse_error(line, "dangling escape in literal");
        switch (body[i]) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: parse_error(line, std::string("unsupported escape \\") + body[i]);
        }
    }
    return out;
}

// --- condition expression parsing -----------------------------------------

struct CondToken {
    enum class Kind { Id, And, Or, Not, Of, Them, Any, Number, LParen, RParen, End };
    Kind kind = Kind::End;
    std::string id;
    size_t number = 0;
};

std::vector<CondToken> lex_condition(const std::string& expr, size_t line) {
    std::vector<CondToken> tokens;
    size_t i = 0;
    while (i < expr.size()) {
        const char c = expr[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '(') { tokens.push_back({CondToken::Kind::LParen, "", 0}); ++i; continue; }
        if (c == ')') { tokens.push_back({CondToken::Kind::RParen, "", 0}); ++i; continue; }
        if (c == '$') {
            size_t j = i + 1;
            while (j < expr.size() &&
                   (std::isalnum(static_cast<unsigned char>(expr[j])) || expr[j] == '_'))
                ++j;
            if (j == i + 1) parse_error(line, "empty pattern reference '$'");
            tokens.push_back({CondToken::Kind::Id, expr.substr(i + 1, j - i - 1), 0});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < expr.size() && std::isdigit(static_cast<unsigned char>(expr[j]))) ++j;
            tokens.push_back({CondToken::Kind::Number, "", std::stoull(expr.substr(i, j - i))});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < expr.size() && std::isalpha(static_cast<unsigned char>(expr[j]))) ++j;
            const std::string word = expr.substr(i, j - i);
            i = j;
            if (word == "and") tokens.push_back({CondToken::Kind::And, "", 0});
            else if (word == "or") tokens.push_back({CondToken::Kind::Or, "", 0});
            else if (word == "not") tokens.push_back({CondToken::Kind::Not, "", 0});
            else if (word == "of") tokens.push_back({CondToken::Kind::Of, "", 0});
            else if (word == "them") tokens.push_back({CondToken::Kind::Them, "", 0});
            else if (word == "any") tokens.push_back({CondToken::Kind::Any, "", 0});
            else parse_error(line, "unexpected word \"" + word + "\" in condition");
            continue;
        }
        parse_error(line, std::string("unexpected character '") + c + "' in condition");
    }
    tokens.push_back({CondToken::Kind::End, "", 0});
    return tokens;
}

class CondParser {
public:
    CondParser(std::vector<CondToken> tokens, size_t line)
        : tokens_(std::move(tokens)), line_(line) {}

    std::unique_ptr<Condition> parse() {
        auto expr = parse_or();
        if (peek().kind != CondToken::Kind::End) parse_error(line_, "trailing tokens in condition");
        return expr;
    }

private:
    const CondToken& peek() const { return tokens_[pos_]; }
    CondToken take() { return tokens_[pos_++]; }

    std::unique_ptr<Condition> parse_or() {
        auto left = parse_and();
        while (peek().kind == CondToken::Kind::Or) {
            take();
            auto node = std::make_unique<Condition>();
            node->op = Condition::Op::Or;
            node->args.push_back(std::move(left));
            node->args.push_back(parse_and());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Condition> parse_and() {
        auto left = parse_unary();
        while (peek().kind == CondToken::Kind::And) {
            take();
            auto node = std::make_unique<Condition>();
            node->op = Condition::Op::And;
            node->args.push_back(std::move(left));
            node->args.push_back(parse_unary());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Condition> parse_unary() {
        if (peek().kind == CondToken::Kind::Not) {
            take();
            auto node = std::make_unique<Condition>();
            node->op = Condition::Op::Not;
            node->args.push_back(parse_unary());
            return node;
        }
        return parse_primary();
    }

    std::unique_ptr<Condition> parse_primary() {
        const CondToken token = take();
        switch (token.kind) {
            case CondToken::Kind::Id: {
                auto node = std::make_unique<Condition>();
                node->op = Condition::Op::PatternRef;
                node->pattern_id = token.id;
                return node;
            }
            case CondToken::Kind::Any: {
                expect_of_them();
                auto node = std::make_unique<Condition>();
                node->op = Condition::Op::OfThem;
                node->threshold = 1;
                return node;
            }
            case CondToken::Kind::Number: {
                expect_of_them();
                if (token.number == 0) parse_error(line_, "\"0 of them\" is not a condition");
                auto node = std::make_unique<Condition>();
                node->op = Condition::Op::OfThem;
                node->threshold = token.number;
                return node;
            }
            case CondToken::Kind::LParen: {
                auto inner = parse_or();
                if (take().kind != CondToken::Kind::RParen)
                    parse_error(line_, "missing ')' in condition");
                return inner;
            }
            default:
                parse_error(line_, "malformed condition");
        }
    }

    void expect_of_them() {
        if (take().kind != CondToken::Kind::Of || take().kind != CondToken::Kind::Them)
            parse_error(line_, "expected \"of them\"");
    }

    std::vector<CondToken> tokens_;
    size_t pos_ = 0;
    size_t line_;
};

void check_references(const Condition& cond, const std::set<std::string>& declared, size_t line) {
    if (cond.op == Condition::Op::PatternRef) {
        if (!declared.count(cond.pattern_id))
            parse_error(line, "condition references undeclared pattern $" + cond.pattern_id);
    }
    for (const auto& arg : cond.args) check_references(*arg, declared, line);
}

bool eval_condition(const Condition& cond, const std::set<std::string>& hits) {
    switch (cond.op) {
        case Condition::Op::PatternRef: return hits.count(cond.pattern_id) > 0;
        case Condition::Op::And: return eval_condition(*cond.args[0], hits) &&
                                        eval_condition(*cond.args[1], hits);
        case Condition::Op::Or: return eval_condition(*cond.args[0], hits) ||
                                       eval_condition(*cond.args[1], hits);
        case Condition::Op::Not: return !eval_condition(*cond.args[0], hits);
        case Condition::Op::OfThem: return hits.size() >= cond.threshold;
    }
    return false;
}

// Case-insensitive ASCII substring search; returns npos if absent.
size_t find_nocase(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    if (needle.size() > haystack.size()) return std::string_view::npos;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        size_t j = 0;
        for (; j < needle.size(); ++j) {
            const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(haystack[i + j])));
            const char b = static_cast<char>(std::tolower(static_cast<unsigned char>(needle[j])));
            if (a != b) break;
        }
        if (j == needle.size()) return i;
    }
    return std::string_view::npos;
}

}  // namespace

RuleSet parse_ruleset(std::string_view text) {
    RuleSet ruleset;
    std::set<std::string> rule_names;

    std::istringstream in{std::string(text)};
    std::string raw;
    size_t line_no = 0;
    bool in_rule = false;
    Rule current;
    std::set<std::string> pattern_ids;
    size_t condition_line = 0;
    std::string condition_expr;

    auto finish_rule = [&](size_t closing_line) {
        if (condition_expr.empty()) parse_error(closing_line, "rule \"" + current.name + "\" has no condition");
        CondParser parser(lex_condition(condition_expr, condition_line), condition_line);
        current.condition = parser.parse();
        check_references(*current.condition, pattern_ids, condition_line);
        ruleset.rules.push_back(std::move(current));
        current = Rule{};
        pattern_ids.clear();
        condition_expr.clear();
        in_rule = false;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string line = text::trim(raw);
        if (line.empty() || line.rfind("//", 0) == 0) continue;

        if (!in_rule) {
            // rule <name> : <severity> {
            if (line.rfind("rule ", 0) != 0) parse_error(line_no, "expected \"rule <name> : <severity> {\"");
            if (line.back() != '{') parse_error(line_no, "rule header must end with '{'");
            std::string header = text::trim(line.substr(4, line.size() - 5));
            const size_t colon = header.find(':');
            if (colon == std::string::npos) parse_error(line_no, "rule header is missing \": <severity>\"");
            current.name = text::trim(header.substr(0, colon));
            if (current.name.empty()) parse_error(line_no, "rule name is empty");
            current.severity = severity_from(text::trim(header.substr(colon + 1)), line_no);
            if (!rule_names.insert(current.name).second)
                parse_error(line_no, "duplicate rule name \"" + current.name + "\"");
            in_rule = true;
            continue;
        }

        if (line == "}") {
            finish_rule(line_no);
            continue;
        }
        if (line.rfind("condition:", 0) == 0) {
            condition_expr = text::trim(line.substr(10));
            condition_line = line_no;
            if (condition_expr.empty()) parse_error(line_no, "empty condition");
            continue;
        }
        if (line[0] == '$') {
            const size_t eq = line.find('=');
            if (eq == std::string::npos) parse_error(line_no, "pattern line is missing '='");
            const std::string id = text::trim(line.substr(1, eq - 1));
            if (id.empty()) parse_error(line_no, "pattern id is empty");
            if (!pattern_ids.insert(id).second)
                parse_error(line_no, "duplicate pattern id $" + id);
            std::string rhs = text::trim(line.substr(eq + 1));
            Pattern pattern;
            pattern.id = id;
            if (!rhs.empty() && rhs[0] == '"') {
                // find the closing unescaped quote
                size_t close = std::string::npos;
                for (size_t i = 1; i < rhs.size(); ++i) {
                    if (rhs[i] == '\\') { ++i; continue; }
                    if (rhs[i] == '"') { close = i; break; }
                }
                if (close == std::string::npos) parse_error(line_no, "unterminated literal");
                pattern.body = unescape_literal(rhs.substr(1, close - 1), line_no);
                const std::string tail = text::trim(rhs.substr(close + 1));
                if (tail == "nocase") pattern.kind = PatternKind::NocaseLiteral;
                else if (tail.empty()) pattern.kind = PatternKind::Literal;
                else parse_error(line_no, "unexpected trailing \"" + tail + "\" after literal");
            } else if (!rhs.empty() && rhs[0] == '/') {
                size_t close = std::string::npos;
                for (size_t i = rhs.size(); i-- > 1;) {
                    if (rhs[i] == '/' && rhs[i - 1] != '\\') { close = i; break; }
                }
                if (close == std::string::npos || close == 0)
                    parse_error(line_no, "unterminated regex");
                const std::string tail = text::trim(rhs.substr(close + 1));
                if (!tail.empty()) parse_error(line_no, "unexpected trailing \"" + tail + "\" after regex");
                pattern.body = rhs.substr(1, close - 1);
                pattern.kind = PatternKind::Regex;
                try {
                    pattern.compiled = std::regex(pattern.body, std::regex::ECMAScript);
                } catch (const std::regex_error& e) {
                    parse_error(line_no, "pattern $" + id + " has a bad regex: " + e.what());
                }
            } else {
                parse_error(line_no, "pattern body must be a \"literal\" or /regex/");
            }
            current.patterns.push_back(std::move(pattern));
            continue;
        }
        parse_error(line_no, "unexpected line inside rule \"" + current.name + "\"");
    }
    if (in_rule) parse_error(line_no, "unterminated rule \"" + current.name + "\"");
    return ruleset;
}

RuleSet load_ruleset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open rule file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_ruleset(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::vector<RuleMatch> scan(std::string_view text, const RuleSet& ruleset) {
    std::vector<RuleMatch> matches;
    for (const auto& rule : ruleset.rules) {
        std::set<std::string> hit_ids;
        std::map<std::string, size_t> offsets;
        for (const auto& pattern : rule.patterns) {
            size_t offset = std::string_view::npos;
            switch (pattern.kind) {
                case PatternKind::Literal:
                    offset = text.find(pattern.body);
                    break;
                case PatternKind::NocaseLiteral:
                    offset = find_nocase(text, pattern.body);
                    break;
                case PatternKind::Regex: {
                    std::cmatch m;
                    if (std::regex_search(text.begin(), text.end(), m, pattern.compiled))
                        offset = static_cast<size_t>(m.position(0));
                    break;
                }
            }
            if (offset != std::string_view::npos) {
                hit_ids.insert(pattern.id);
                offsets[pattern.id] = offset;
            }
        }
        if (eval_condition(*rule.condition, hit_ids)) {
            RuleMatch match;
            match.rule = rule.name;
            match.severity = rule.severity;
            for (const auto& [id, offset] : offsets)  // map order = pattern id order
                match.matched_patterns.push_back({id, offset});
            matches.push_back(std::move(match));
        }
    }
    std::sort(matches.begin(), matches.end(),
              [](const RuleMatch& a, const RuleMatch& b) { return a.rule < b.rule; });
    return matches;
}

std::string rules_verdict(std::string_view text, const RuleSet& ruleset) {
    for (const auto& match : scan(text, ruleset))
        if (match.severity != Severity::Info) return "malicious";
    return "benign";
}

}  // namespace gatekeeper::rules
