// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::extractor {

std::optional<FileKind> kind_for_path(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".py") return FileKind::Python;
    if (ext == ".ts" || ext == ".tsx") return FileKind::TypeScript;
    if (ext == ".js" || ext == ".mjs") return FileKind::JavaScript;
    return std::nullopt;
}

std::vector<std::filesystem::path> scan_tree(const std::filesystem::path& root) {
    std::error_code ec;
    if (!std::filesystem::exists(root, ec) || !std::filesystem::is_directory(root, ec))
        throw Error(ErrorKind::Io, "cannot read directory " + root.string());

    std::vector<std::filesystem::path> files;
    std::filesystem::recursive_directory_iterator it(
        root, std::filesystem::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot read directory " + root.string());
    for (const auto& entry : it) {
        if (!entry.is_regular_file(ec)) continue;
        if (kind_for_path(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
    return files;
}

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool valid_utf8(std::string_view bytes) {
    size_t i = 0;
    while (i < bytes.size()) {
        const unsigned char c = static_cast<unsigned char>(bytes[i]);
        if (c == 0) return false;  // NUL: treat as binary
        size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c >> 5) == 0x6) extra = 1;
        else if ((c >> 4) == 0xe) extra = 2;
        else if ((c >> 3) == 0x1e) extra = 3;
        else return false;
        if (i + extra >= bytes.size() && extra > 0) return false;
        for (size_t k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(bytes[i + k]) >> 6) != 0x2) return false;
        i += extra + 1;
    }
    return true;
}

/// Position-aware scanning over one source file with language comment and
/// string syntax. Python: # comments, ''' """ triple quotes, r/b/f prefixes.
/// TS/JS: // and /* */ comments, backtick template literals.
struct SourceScanner {
    std::string_view text;
    FileKind kind;

    bool python() const { return kind == FileKind::Python; }

    /// Advances past whitespace and comments starting at pos.
    size_t skip_trivia(size_t pos) const {
        while (pos < text.size()) {
            const char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
                continue;
            }
            if (python() && c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
                continue;
            }
            if (!python() && c == '/' && pos + 1 < text.size()) {
                if (text[pos + 1] == '/') {
                    while (pos < text.size() && text[pos] != '\n') ++pos;
                    continue;
                }
                if (text[pos + 1] == '*') {
                    const size_t close = text.find("*/", pos + 2);
                    pos = close == std::string_view::npos ? text.size() : close + 2;
                    continue;
                }
            }
            break;
        }
        return pos;
    }

    bool at_string_start(size_t pos) const {
        if (pos >= text.size()) return false;
        char c = text[pos];
        if (python()) {
            // optional 1-2 letter prefix (r, b, f, u and combinations)
            size_t p = pos;
            int prefix = 0;
            while (p < text.size() && prefix < 2 &&
                   std::strchr("rRbBuUfF", text[p]) != nullptr) {
                ++p;
                ++prefix;
            }
            if (p >= text.size()) return false;
            c = text[p];
            return c == '"' || c == '\'';
        }
        return c == '"' || c == '\'' || c == '`';
    }

    struct StringLit {
        std::string value;   // unescaped, not trimmed
        size_t begin = 0;    // offset of the first quote (or prefix)
        size_t end = 0;      // offset just past the closing quote
    };

    /// Parses the string literal starting at pos (caller checked
    /// at_string_start). Returns nullopt on an unterminated literal.
    std::optional<StringLit> parse_string(size_t pos) const {
        StringLit lit;
        lit.begin = pos;
        bool raw = false;
        if (python()) {
            while (pos < text.size() && std::strchr("rRbBuUfF", text[pos]) != nullptr) {
                if (text[pos] == 'r' || text[pos] == 'R') raw = true;
                ++pos;
            }
        }
        if (pos >= text.size()) return std::nullopt;
        const char quote = text[pos];
        bool triple = false;
        if (python() && pos + 2 < text.size() && text[pos + 1] == quote && text[pos + 2] == quote) {
            triple = true;
            pos += 3;
        } else {
            pos += 1;
        }

        std::string value;
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '\\' && !raw) {
                if (pos + 1 >= text.size()) return std::nullopt;
                const char esc = text[pos + 1];
                switch (esc) {
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    case '0': value.push_back('\0'); break;
                    case '\n': break;  // line continuation
                    default: value.push_back(esc); break;  // \", \', \`, \\ and friends
                }
                pos += 2;
                continue;
            }
            if (c == '\\' && raw) {
                value.push_back(c);
                if (pos + 1 < text.size()) value.push_back(text[pos + 1]);
                pos += 2;
                continue;
            }
            if (triple) {
                if (c == quote && pos + 2 < text.size() && text[pos + 1] == quote &&
                    text[pos + 2] == quote) {
                    lit.end = pos + 3;
                    lit.value = std::move(value);
                    return lit;
                }
                if (c == quote && pos + 2 == text.size() && text[pos + 1] == quote) {
                    // closing pair at EOF would be malformed anyway
                    return std::nullopt;
                }
                value.push_back(c);
                ++pos;
                continue;
            }
            if (c == quote) {
                lit.end = pos + 1;
                lit.value = std::move(value);
                return lit;
            }
            if (c == '\n' && quote != '`') return std::nullopt;  // unterminated single-line string
            value.push_back(c);
            ++pos;
        }
        return std::nullopt;
    }

    /// End of the balanced bracket region opened at `open_pos` (which must
    /// hold one of ( [ {). Returns npos when unbalanced.
    size_t match_bracket(size_t open_pos) const {
        const char open = text[open_pos];
        const char close = open == '(' ? ')' : open == '[' ? ']' : '}';
        int depth = 0;
        size_t pos = open_pos;
        while (pos < text.size()) {
            pos = skip_trivia(pos);
            if (pos >= text.size()) break;
            if (at_string_start(pos)) {
                auto lit = parse_string(pos);
                if (!lit) return std::string_view::npos;
                pos = lit->end;
                continue;
            }
            const char c = text[pos];
            if (c == open) ++depth;
            else if (c == close) {
                --depth;
                if (depth == 0) return pos;
            }
            ++pos;
        }
        return std::string_view::npos;
    }
};

struct Candidate {
    size_t payload_offset = 0;
    size_t anchor_offset = 0;
    size_t pattern_index = 0;
    std::optional<std::string> name;
    std::string description;
};

int line_of(std::string_view text, size_t offset) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

/// Docstring payload: the first string literal in the body of the next
/// function definition after the anchor.
std::optional<Candidate> extract_docstring(const SourceScanner& scanner, size_t anchor_end) {
    std::string_view text = scanner.text;
    // find the next `def` keyword
    size_t pos = anchor_end;
    size_t def_pos = std::string_view::npos;
    while (pos + 3 < text.size()) {
        pos = text.find("def", pos);
        if (pos == std::string_view::npos) return std::nullopt;
        const bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
        const bool right_ok = pos + 3 < text.size() && !is_ident_char(text[pos + 3]);
        if (left_ok && right_ok) {
            def_pos = pos;
            break;
        }
        pos += 3;
    }
    if (def_pos == std::string_view::npos) return std::nullopt;

    // function name
    size_t p = scanner.skip_trivia(def_pos + 3);
    std::string fn_name;
    while (p < text.size() && is_ident_char(text[p])) fn_name.push_back(text[p++]);

    // signature parentheses
    p = scanner.skip_trivia(p);
    if (p >= text.size() || text[p] != '(') return std::nullopt;
    const size_t close = scanner.match_bracket(p);
    if (close == std::string_view::npos) return std::nullopt;

    // colon ending the header; return-annotation brackets are skipped whole
    p = close + 1;
    while (p < text.size() && text[p] != ':') {
        if (text[p] == '[' || text[p] == '(' || text[p] == '{') {
            const size_t end = scanner.match_bracket(p);
            if (end == std::string_view::npos) return std::nullopt;
            p = end + 1;
            continue;
        }
        ++p;
    }
    if (p >= text.size()) return std::nullopt;

    p = scanner.skip_trivia(p + 1);
    if (!scanner.at_string_start(p)) return std::nullopt;  // no docstring
    auto lit = scanner.parse_string(p);
    if (!lit) return std::nullopt;
    const std::string trimmed = text::trim(lit->value);
    if (trimmed.empty()) return std::nullopt;

    Candidate c;
    c.payload_offset = lit->begin;
    c.description = trimmed;
    if (!fn_name.empty()) c.name = fn_name;
    return c;
}

/// DescriptionField payload: name/description keyed string values inside the
/// bracket construct at the anchor.
std::vector<Candidate> extract_description_fields(const SourceScanner& scanner,
                                                  size_t anchor_begin, size_t anchor_end) {
    std::string_view text = scanner.text;

    // window opener: last bracket inside the anchor text, else the next one
    size_t open_pos = std::string_view::npos;
    for (size_t p = anchor_end; p-- > anchor_begin;) {
        if (text[p] == '(' || text[p] == '[' || text[p] == '{') {
            open_pos = p;
            break;
        }
    }
    if (open_pos == std::string_view::npos) {
        for (size_t p = anchor_end; p < text.size() && p < anchor_end + 200; ++p) {
            if (text[p] == '(' || text[p] == '[' || text[p] == '{') {
                open_pos = p;
                break;
            }
            if (!std::isspace(static_cast<unsigned char>(text[p])) && text[p] != ':' &&
                text[p] != '=')
                break;
        }
    }
    if (open_pos == std::string_view::npos) return {};
    const size_t window_end = scanner.match_bracket(open_pos);
    if (window_end == std::string_view::npos) return {};

    std::vector<Candidate> out;
    std::optional<std::string> current_name;
    size_t pos = open_pos + 1;
    while (pos < window_end) {
        pos = scanner.skip_trivia(pos);
        if (pos >= window_end) break;

        std::string key;
        size_t after_key = pos;
        if (scanner.at_string_start(pos)) {
            auto lit = scanner.parse_string(pos);
            if (!lit) break;
            key = lit->value;
            after_key = lit->end;
        } else if (is_ident_char(text[pos])) {
            while (after_key < window_end && is_ident_char(text[after_key]))
                key.push_back(text[after_key++]);
        } else {
            ++pos;
            continue;
        }

        if (key != "name" && key != "description") {
            pos = after_key > pos ? after_key : pos + 1;
            continue;
        }
        size_t p = scanner.skip_trivia(after_key);
        if (p >= window_end || (text[p] != ':' && text[p] != '=')) {
            pos = after_key;
            continue;
        }
        p = scanner.skip_trivia(p + 1);
        if (p >= window_end || !scanner.at_string_start(p)) {
            pos = p;
            continue;
        }
        auto value = scanner.parse_string(p);
        if (!value) break;
        if (key == "name") {
            current_name = value->value;
        } else {
            const std::string trimmed = text::trim(value->value);
            if (!trimmed.empty()) {
                Candidate c;
                c.payload_offset = value->begin;
                c.description = trimmed;
                c.name = current_name;
                out.push_back(std::move(c));
            }
            current_name.reset();
        }
        pos = value->end;
    }
    return out;
}

}  // namespace

ExtractionResult extract_from_text(std::string_view content, FileKind kind,
                                   const std::vector<ExtractionPattern>& patterns,
                                   const std::filesystem::path& file) {
    ExtractionResult result;
    if (!valid_utf8(content)) {
        result.warnings.push_back("skipped " + (file.empty() ? std::string("<memory>") : file.string()) +
                                  ": not valid UTF-8");
        return result;
    }

    SourceScanner scanner{content, kind};
    std::vector<Candidate> candidates;

    for (size_t pi = 0; pi < patterns.size(); ++pi) {
        const ExtractionPattern& pattern = patterns[pi];
        if (!pattern.file_kinds.count(kind)) continue;

        std::vector<std::pair<size_t, size_t>> anchors;  // (begin, end)
        if (pattern.anchor_is_regex) {
            std::regex re;
            try {
                re = std::regex(pattern.anchor, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw Error(ErrorKind::Parse,
                            "pattern \"" + pattern.name + "\" anchor does not compile: " + e.what());
            }
            for (auto it = std::cregex_iterator(content.begin(), content.end(), re);
                 it != std::cregex_iterator(); ++it)
                anchors.emplace_back(static_cast<size_t>(it->position(0)),
                                     static_cast<size_t>(it->position(0) + it->length(0)));
        } else {
            size_t from = 0;
            while (true) {
                const size_t at = content.find(pattern.anchor, from);
                if (at == std::string_view::npos) break;
                anchors.emplace_back(at, at + pattern.anchor.size());
                from = at + 1;
            }
        }

        for (const auto& [begin, end] : anchors) {
            if (pattern.payload == PayloadKind::Docstring) {
                if (auto c = extract_docstring(scanner, end)) {
                    c->anchor_offset = begin;
                    c->pattern_index = pi;
                    candidates.push_back(std::move(*c));
                }
            } else {
                for (auto& c : extract_description_fields(scanner, begin, end)) {
                    c.anchor_offset = begin;
                    c.pattern_index = pi;
                    candidates.push_back(std::move(c));
                }
            }
        }
    }

    // collapse candidates that captured the same payload location: the
    // earliest pattern in pack order wins
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.payload_offset != b.payload_offset) return a.payload_offset < b.payload_offset;
        return a.pattern_index < b.pattern_index;
    });
    std::vector<Candidate> unique;
    for (auto& c : candidates)
        if (unique.empty() || unique.back().payload_offset != c.payload_offset)
            unique.push_back(std::move(c));

    for (const auto& c : unique) {
        ExtractedTool tool;
        tool.name = c.name;
        tool.description = c.description;
        tool.file = file;
        tool.line = line_of(content, c.anchor_offset);
        tool.pattern = patterns[c.pattern_index].name;
        result.tools.push_back(std::move(tool));
    }
    return result;
}

ExtractionResult extract_tools(const std::filesystem::path& file,
                               const std::vector<ExtractionPattern>& patterns) {
    const auto kind = kind_for_path(file);
    if (!kind) throw Error(ErrorKind::Input, "unsupported file kind: " + file.string());
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return extract_from_text(buffer.str(), *kind, patterns, file);
}

Corpus to_corpus(const std::vector<ExtractedTool>& tools, const std::string& label,
                 const LabelTaxonomy& taxonomy) {
    taxonomy.validate();
    if (!taxonomy.contains(label))
        throw Error(ErrorKind::Taxonomy, "label \"" + label + "\" is not in the taxonomy");

    Corpus corpus;
    corpus.taxonomy = taxonomy;
    std::set<std::string> seen_ids;
    for (const auto& tool : tools) {
        ToolDescription td;
        td.id = "t" + fnv1a64_hex(tool.description);
        if (!seen_ids.insert(td.id).second) continue;  // exact duplicate description
        td.name = tool.name.value_or("");
        td.description = tool.description;
        td.label = label;
        td.origin = Origin::Scraped;
        td.source = tool.file.generic_string() + ":" + std::to_string(tool.line);
        corpus.samples.push_back(std::move(td));
    }
    corpus.validate();
    return corpus;
}

std::vector<ExtractionPattern> default_patterns() {
    using K = FileKind;
    const std::set<K> py = {K::Python};
    const std::set<K> tsjs = {K::TypeScript, K::JavaScript};
    const std::set<K> all = {K::Python, K::TypeScript, K::JavaScript};
    return {
        {"py-server-tool-decorator", py, "@server.tool(", false, PayloadKind::Docstring},
        {"server-tool-call", all, "server.tool(", false, PayloadKind::DescriptionField},
        {"py-mcp-tool-decorator", py, "@mcp.tool(", false, PayloadKind::Docstring},
        {"py-app-tool-decorator", py, "@app.tool(", false, PayloadKind::Docstring},
        {"ts-tool-decorator", tsjs, "@Tool({", false, PayloadKind::DescriptionField},
        {"ts-new-tool", tsjs, "new Tool({", false, PayloadKind::DescriptionField},
        {"tools-array", tsjs, "tools: [", false, PayloadKind::DescriptionField},
        {"register-tool", tsjs, "registerTool(", false, PayloadKind::DescriptionField},
        {"add-tool", tsjs, "addTool(", false, PayloadKind::DescriptionField},
        {"py-define-tool", py, "define_tool(", false, PayloadKind::DescriptionField},
        {"py-tool-decorator", py, "@tool(", false, PayloadKind::Docstring},
        {"json-tools-array", all, "\"tools\": [", false, PayloadKind::DescriptionField},
    };
}

namespace {

FileKind kind_from_name(const std::string& name, size_t line_no) {
    if (name == "python") return FileKind::Python;
    if (name == "typescript") return FileKind::TypeScript;
    if (name == "javascript") return FileKind::JavaScript;
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unknown file kind \"" +
                                      name + "\" (expected python, typescript or javascript)");
}

}  // namespace

std::vector<ExtractionPattern> parse_patterns(std::string_view content) {
    std::vector<ExtractionPattern> patterns;
    std::set<std::string> names;
    ExtractionPattern current;
    bool open = false;
    bool have_anchor = false, have_payload = false;

    auto finish = [&](size_t line_no) {
        if (!open) return;
        if (current.name.empty())
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": pattern stanza has no name");
        if (current.file_kinds.empty())
            throw Error(ErrorKind::Parse, "pattern \"" + current.name + "\" has no kinds");
        if (!have_anchor || current.anchor.empty())
            throw Error(ErrorKind::Parse, "pattern \"" + current.name + "\" has no anchor");
        if (!have_payload)
            throw Error(ErrorKind::Parse, "pattern \"" + current.name + "\" has no payload");
        if (current.anchor_is_regex) {
            try {
                std::regex probe(current.anchor, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw Error(ErrorKind::Parse,
                            "pattern \"" + current.name + "\" anchor does not compile: " + e.what());
            }
        }
        if (!names.insert(current.name).second)
            throw Error(ErrorKind::Parse, "duplicate pattern name \"" + current.name + "\"");
        patterns.push_back(std::move(current));
        current = ExtractionPattern{};
        open = have_anchor = have_payload = false;
    };

    std::istringstream in{std::string(content)};
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = text::trim(line);
        if (trimmed.empty()) {
            finish(line_no);
            continue;
        }
        if (trimmed[0] == '#') continue;
        const size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = text::trim(trimmed.substr(0, eq));
        const std::string value = text::trim(trimmed.substr(eq + 1));
        open = true;
        if (key == "name") {
            current.name = value;
        } else if (key == "kinds") {
            std::istringstream kinds(value);
            std::string kind;
            while (std::getline(kinds, kind, ','))
                current.file_kinds.insert(kind_from_name(text::trim(kind), line_no));
        } else if (key == "anchor") {
            if (value.rfind("regex:", 0) == 0) {
                current.anchor = value.substr(6);
                current.anchor_is_regex = true;
            } else {
                current.anchor = value;
            }
            have_anchor = true;
        } else if (key == "payload") {
            if (value == "docstring") current.payload = PayloadKind::Docstring;
            else if (value == "description") current.payload = PayloadKind::DescriptionField;
            else
                throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                                  ": payload must be docstring or description");
            have_payload = true;
        } else {
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
        }
    }
    finish(line_no);
    return patterns;
}

std::vector<ExtractionPattern> load_patterns(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open pattern file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_patterns(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace gatekeeper::extractor
