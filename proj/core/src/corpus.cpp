// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"

namespace gatekeeper {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Origin origin) {
    switch (origin) {
        case Origin::Scraped: return "scraped";
        case Origin::McpTox: return "mcptox";
        case Origin::Augmented: return "augmented";
        case Origin::Live: return "live";
    }
    return "scraped";
}

Origin origin_from_string(std::string_view s) {
    if (s == "scraped") return Origin::Scraped;
    if (s == "mcptox") return Origin::McpTox;
    if (s == "augmented") return Origin::Augmented;
    if (s == "live") return Origin::Live;
    throw Error(ErrorKind::Parse, "unknown origin \"" + std::string(s) + "\"");
}

bool LabelTaxonomy::contains(std::string_view cls) const {
    return std::find(classes.begin(), classes.end(), cls) != classes.end();
}

std::string LabelTaxonomy::binary_projection(const std::string& label) const {
    return label == benign_class ? "benign" : "malicious";
}

void LabelTaxonomy::validate() const {
    if (classes.empty()) {
        if (!benign_class.empty())
            throw Error(ErrorKind::Taxonomy,
                        "benign class \"" + benign_class + "\" declared without any classes");
        return;
    }
    std::set<std::string> seen;
    for (const auto& cls : classes) {
        if (cls.empty()) throw Error(ErrorKind::Taxonomy, "empty class name");
        if (!seen.insert(cls).second)
            throw Error(ErrorKind::Taxonomy, "duplicate class \"" + cls + "\"");
    }
    if (!contains(benign_class))
        throw Error(ErrorKind::Taxonomy,
                    "benign class \"" + benign_class + "\" is not among the declared classes");
}

std::vector<std::string> LabelTaxonomy::malicious_classes() const {
    std::vector<std::string> out;
    for (const auto& cls : classes)
        if (cls != benign_class) out.push_back(cls);
    return out;
}

void Corpus::validate() const {
    taxonomy.validate();
    std::set<std::string> ids;
    for (const auto& s : samples) {
        if (s.id.empty()) throw Error(ErrorKind::Integrity, "sample with empty id");
        if (!ids.insert(s.id).second)
            throw Error(ErrorKind::Integrity, "duplicate id \"" + s.id + "\"");
        if (s.description.empty())
            throw Error(ErrorKind::Integrity, "sample \"" + s.id + "\" has an empty description");
        if (s.label && !taxonomy.contains(*s.label))
            throw Error(ErrorKind::Taxonomy,
                        "sample \"" + s.id + "\" has unknown label \"" + *s.label + "\"");
        if (s.origin == Origin::Augmented && !s.parent_id)
            throw Error(ErrorKind::Integrity,
                        "augmented sample \"" + s.id + "\" has no parent_id");
        if (s.origin != Origin::Augmented && s.parent_id)
            throw Error(ErrorKind::Integrity,
                        "sample \"" + s.id + "\" has a parent_id but origin is not augmented");
    }
    for (const auto& s : samples) {
        if (s.parent_id && !ids.count(*s.parent_id))
            throw Error(ErrorKind::Integrity, "augmented sample \"" + s.id +
                                                  "\" references unknown parent \"" +
                                                  *s.parent_id + "\"");
    }
    if (!split.empty()) {
        if (split.size() != samples.size())
            throw Error(ErrorKind::Integrity, "split does not cover all ids exactly once");
        for (const auto& [id, part] : split) {
            (void)part;
            if (!ids.count(id))
                throw Error(ErrorKind::Integrity, "split references unknown id \"" + id + "\"");
        }
    }
}

std::map<std::string, size_t> Corpus::class_counts() const {
    std::map<std::string, size_t> counts;
    for (const auto& cls : taxonomy.classes) counts[cls] = 0;
    for (const auto& s : samples)
        if (s.label) counts[*s.label] += 1;
    return counts;
}

const ToolDescription* Corpus::find(std::string_view id) const {
    for (const auto& s : samples)
        if (s.id == id) return &s;
    return nullptr;
}

namespace {

constexpr std::string_view kTaxonomyPrefix = "#taxonomy ";

[[noreturn]] void line_error(ErrorKind kind, size_t line, const std::string& message) {
    throw Error(kind, "line " + std::to_string(line) + ": " + message);
}

std::string require_string(const ordered_json& obj, const char* key, size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        line_error(ErrorKind::Parse, line, std::string("missing or non-string \"") + key + "\"");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const ordered_json& obj, const char* key, size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
        line_error(ErrorKind::Parse, line, std::string("\"") + key + "\" must be a string or null");
    return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    bool saw_record = false;
    std::map<std::string, size_t> id_lines;
    std::vector<size_t> sample_lines;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind(kTaxonomyPrefix, 0) == 0) {
            if (saw_record || !corpus.taxonomy.classes.empty())
                line_error(ErrorKind::Parse, line_no,
                           "taxonomy header must appear once, before any record");
            ordered_json tax;
            try {
                tax = ordered_json::parse(line.substr(kTaxonomyPrefix.size()));
            } catch (const nlohmann::json::exception& e) {
                line_error(ErrorKind::Parse, line_no, std::string("bad taxonomy header: ") + e.what());
            }
            if (!tax.is_object() || !tax.contains("classes") || !tax["classes"].is_array() ||
                !tax.contains("benign") || !tax["benign"].is_string())
                line_error(ErrorKind::Parse, line_no,
                           "taxonomy header must be {\"classes\":[...],\"benign\":\"...\"}");
            for (const auto& cls : tax["classes"]) {
                if (!cls.is_string())
                    line_error(ErrorKind::Parse, line_no, "class names must be strings");
                corpus.taxonomy.classes.push_back(cls.get<std::string>());
            }
            corpus.taxonomy.benign_class = tax["benign"].get<std::string>();
            try {
                corpus.taxonomy.validate();
            } catch (const Error& e) {
                line_error(ErrorKind::Taxonomy, line_no, e.what());
            }
            continue;
        }

        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            line_error(ErrorKind::Parse, line_no, e.what());
        }
        if (!obj.is_object()) line_error(ErrorKind::Parse, line_no, "record is not a JSON object");
        saw_record = true;

        ToolDescription td;
        td.id = require_string(obj, "id", line_no);
        td.name = obj.contains("name") && obj["name"].is_string() ? obj["name"].get<std::string>() : "";
        td.description = require_string(obj, "description", line_no);
        td.label = optional_string(obj, "label", line_no);
        td.origin = [&] {
            try {
                return origin_from_string(require_string(obj, "origin", line_no));
            } catch (const Error& e) {
                line_error(ErrorKind::Parse, line_no, e.what());
            }
        }();
        td.parent_id = optional_string(obj, "parent_id", line_no);
        td.source = obj.contains("source") && obj["source"].is_string() ? obj["source"].get<std::string>() : "";

        if (td.description.empty())
            line_error(ErrorKind::Integrity, line_no, "empty description");
        auto [it, inserted] = id_lines.emplace(td.id, line_no);
        if (!inserted)
            line_error(ErrorKind::Integrity, line_no,
                       "duplicate id \"" + td.id + "\" (first seen on line " +
                           std::to_string(it->second) + ")");
        if (td.label && !corpus.taxonomy.contains(*td.label))
            line_error(ErrorKind::Taxonomy, line_no, "unknown label \"" + *td.label + "\"");

        if (auto part = optional_string(obj, "split", line_no)) {
            if (*part != "train" && *part != "test")
                line_error(ErrorKind::Parse, line_no, "split must be \"train\" or \"test\"");
            corpus.split[td.id] = (*part == "train") ? SplitPart::Train : SplitPart::Test;
        }

        corpus.samples.push_back(std::move(td));
        sample_lines.push_back(line_no);
    }

    // Cross-record checks, with the offending record's line where possible.
    for (size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        if (s.origin == Origin::Augmented && !s.parent_id)
            line_error(ErrorKind::Integrity, sample_lines[i],
                       "augmented sample \"" + s.id + "\" has no parent_id");
        if (s.parent_id && !id_lines.count(*s.parent_id))
            line_error(ErrorKind::Integrity, sample_lines[i],
                       "augmented sample \"" + s.id + "\" references unknown parent \"" +
                           *s.parent_id + "\"");
    }
    corpus.validate();
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open corpus file " + path.string());
    try {
        return parse_corpus(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    if (!corpus.taxonomy.classes.empty() || !corpus.taxonomy.benign_class.empty()) {
        ordered_json tax;
        tax["classes"] = corpus.taxonomy.classes;
        tax["benign"] = corpus.taxonomy.benign_class;
        out << kTaxonomyPrefix << tax.dump() << "\n";
    }
    for (const auto& s : corpus.samples) {
        ordered_json obj;
        obj["id"] = s.id;
        obj["name"] = s.name;
        obj["description"] = s.description;
        obj["label"] = s.label ? ordered_json(*s.label) : ordered_json(nullptr);
        obj["origin"] = to_string(s.origin);
        obj["parent_id"] = s.parent_id ? ordered_json(*s.parent_id) : ordered_json(nullptr);
        obj["source"] = s.source;
        if (auto it = corpus.split.find(s.id); it != corpus.split.end())
            obj["split"] = it->second == SplitPart::Train ? "train" : "test";
        out << obj.dump() << "\n";
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write corpus file " + path.string());
    write_corpus(corpus, out);
    if (!out) throw Error(ErrorKind::Io, "failed writing corpus file " + path.string());
}

Corpus stratified_split(const Corpus& corpus, double test_fraction, uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorKind::Input, "test fraction must be in (0,1)");
    for (const auto& s : corpus.samples) {
        if (!s.label)
            throw Error(ErrorKind::Precondition, "sample \"" + s.id + "\" is unlabeled");
        if (s.origin == Origin::Augmented)
            throw Error(ErrorKind::Precondition,
                        "augmented samples present; the split must precede synthesis");
    }

    std::map<std::string, std::vector<std::string>> members;  // class -> ids
    for (const auto& s : corpus.samples) members[*s.label].push_back(s.id);

    Corpus out = corpus;
    out.split.clear();
    for (const auto& cls : corpus.taxonomy.classes) {
        auto it = members.find(cls);
        if (it == members.end()) continue;  // declared class with no samples
        auto ids = it->second;
        if (ids.size() < 2)
            throw Error(ErrorKind::Stratification,
                        "class \"" + cls + "\" has " + std::to_string(ids.size()) +
                            " sample(s); need at least 2 to stratify");
        std::sort(ids.begin(), ids.end());
        SplitMix64 rng(derive_seed(seed, cls));
        deterministic_shuffle(ids, rng);
        size_t test_count =
            static_cast<size_t>(std::llround(test_fraction * static_cast<double>(ids.size())));
        if (test_count < 1) test_count = 1;
        for (size_t i = 0; i < ids.size(); ++i)
            out.split[ids[i]] = i < test_count ? SplitPart::Test : SplitPart::Train;
    }
    out.validate();
    return out;
}

Corpus apply_merge(const Corpus& corpus, const MergeMap& merge_map) {
    for (const auto& [from, to] : merge_map) {
        (void)to;
        if (!corpus.taxonomy.contains(from))
            throw Error(ErrorKind::Taxonomy, "merge source \"" + from + "\" is not a known class");
    }
    const std::string& benign = corpus.taxonomy.benign_class;
    auto target = [&](const std::string& cls) {
        auto it = merge_map.find(cls);
        return it == merge_map.end() ? cls : it->second;
    };
    if (target(benign) != benign)
        throw Error(ErrorKind::Policy, "the benign class must map to itself");
    for (const auto& cls : corpus.taxonomy.classes)
        if (cls != benign && target(cls) == benign)
            throw Error(ErrorKind::Policy,
                        "class \"" + cls + "\" may not merge into the benign class");

    Corpus out = corpus;
    out.taxonomy.classes.clear();
    for (const auto& cls : corpus.taxonomy.classes) {
        const std::string t = target(cls);
        if (!out.taxonomy.contains(t)) out.taxonomy.classes.push_back(t);
    }
    for (auto& s : out.samples)
        if (s.label) s.label = target(*s.label);
    out.validate();
    return out;
}

Corpus drop_class(const Corpus& corpus, const std::string& class_name) {
    if (!corpus.taxonomy.contains(class_name))
        throw Error(ErrorKind::Taxonomy, "unknown class \"" + class_name + "\"");
    if (class_name == corpus.taxonomy.benign_class)
        throw Error(ErrorKind::Policy, "the benign class cannot be dropped");

    Corpus out;
    out.taxonomy = corpus.taxonomy;
    std::erase(out.taxonomy.classes, class_name);
    for (const auto& s : corpus.samples) {
        if (s.label && *s.label == class_name) continue;
        out.samples.push_back(s);
        if (auto it = corpus.split.find(s.id); it != corpus.split.end())
            out.split[s.id] = it->second;
    }
    out.validate();
    return out;
}

Corpus subset(const Corpus& corpus, SplitPart part) {
    if (corpus.split.empty())
        throw Error(ErrorKind::Input, "corpus has no split assigned");
    Corpus out;
    out.taxonomy = corpus.taxonomy;
    for (const auto& s : corpus.samples) {
        auto it = corpus.split.find(s.id);
        if (it != corpus.split.end() && it->second == part) {
            out.samples.push_back(s);
            out.split[s.id] = part;
        }
    }
    return out;
}

}  // namespace gatekeeper
