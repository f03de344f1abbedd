// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/augmenter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::augmenter {

double text_similarity(std::string_view a, std::string_view b) {
    const TermVector ta = text::term_frequencies(a);
    const TermVector tb = text::term_frequencies(b);
    if (ta.empty() || tb.empty()) return 0.0;
    if (ta == tb) return 1.0;
    return std::min(1.0, text::cosine(ta, tb));
}

// --- providers --------------------------------------------------------------

const std::string& IdentityProvider::name() const {
    static const std::string n = "identity";
    return n;
}

const std::string& IdentityProvider::pivot() const {
    static const std::string p = "en";
    return p;
}

std::string IdentityProvider::generate(const std::string& text) {
    if (text.empty()) throw Error(ErrorKind::Input, "cannot paraphrase empty text");
    return text;
}

SyntheticPivotProvider::SyntheticPivotProvider(std::string pivot, uint64_t seed,
                                               const Thesaurus* thesaurus)
    : name_("synthetic-" + pivot),
      pivot_(std::move(pivot)),
      seed_(seed),
      thesaurus_(thesaurus ? thesaurus : &builtin_thesaurus()) {}

std::string SyntheticPivotProvider::generate(const std::string& input) {
    if (text::trim(input).empty()) throw Error(ErrorKind::Input, "cannot paraphrase empty text");
    SplitMix64 rng(derive_seed(derive_seed(seed_, pivot_), input));

    // word-by-word synonym substitution, punctuation kept in place
    std::istringstream words(input);
    std::string word;
    std::string rebuilt;
    while (words >> word) {
        size_t begin = 0, end = word.size();
        while (begin < end && !std::isalnum(static_cast<unsigned char>(word[begin]))) ++begin;
        while (end > begin && !std::isalnum(static_cast<unsigned char>(word[end - 1]))) --end;
        const std::string core = word.substr(begin, end - begin);
        std::string replacement = core;
        auto it = thesaurus_->find(text::to_lower(core));
        if (it != thesaurus_->end() && !it->second.empty() && rng.next_below(10) < 9) {
            replacement = it->second[rng.next_below(it->second.size())];
            if (!core.empty() && std::isupper(static_cast<unsigned char>(core[0])) &&
                !replacement.empty())
                replacement[0] =
                    static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
        }
        if (!rebuilt.empty()) rebuilt += " ";
        rebuilt += word.substr(0, begin) + replacement + word.substr(end);
    }

    // comma-clause rotation
    std::vector<std::string> clauses;
    size_t start = 0;
    for (;;) {
        const size_t comma = rebuilt.find(", ", start);
        if (comma == std::string::npos) {
            clauses.push_back(rebuilt.substr(start));
            break;
        }
        clauses.push_back(rebuilt.substr(start, comma - start));
        start = comma + 2;
    }
    if (clauses.size() > 1) {
        const size_t shift = rng.next_below(clauses.size());
        std::rotate(clauses.begin(), clauses.begin() + static_cast<long>(shift), clauses.end());
        rebuilt.clear();
        for (size_t i = 0; i < clauses.size(); ++i) {
            if (i) rebuilt += ", ";
            rebuilt += clauses[i];
        }
    }
    if (rebuilt.empty()) throw Error(ErrorKind::Io, "paraphrase came out empty");
    return rebuilt;
}

CommandProvider::CommandProvider(std::string name, std::string pivot,
                                 std::vector<std::string> argv)
    : name_(std::move(name)), pivot_(std::move(pivot)), argv_(std::move(argv)) {
    if (argv_.empty()) throw Error(ErrorKind::Input, "provider command is empty");
}

std::string CommandProvider::generate(const std::string& input) {
    if (input.empty()) throw Error(ErrorKind::Input, "cannot paraphrase empty text");

    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw Error(ErrorKind::Io, "pipe() failed for provider " + name_);

    const pid_t pid = fork();
    if (pid < 0) throw Error(ErrorKind::Io, "fork() failed for provider " + name_);
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(argv_.size() + 1);
        for (const auto& arg : argv_) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);

    const std::string payload = input + "\n";
    size_t written = 0;
    while (written < payload.size()) {
        const ssize_t n =
            write(to_child[1], payload.data() + written, payload.size() - written);
        if (n <= 0) break;
        written += static_cast<size_t>(n);
    }
    close(to_child[1]);

    std::string output;
    char buffer[4096];
    for (;;) {
        const ssize_t n = read(from_child[0], buffer, sizeof(buffer));
        if (n <= 0) break;
        output.append(buffer, static_cast<size_t>(n));
    }
    close(from_child[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw Error(ErrorKind::Io, "provider command \"" + argv_[0] + "\" failed");
    if (!output.empty() && output.back() == '\n') output.pop_back();
    if (output.empty())
        throw Error(ErrorKind::Io, "provider command \"" + argv_[0] + "\" produced no output");
    return output;
}

// --- thesaurus ---------------------------------------------------------------

const Thesaurus& builtin_thesaurus() {
    static const Thesaurus table = {
        {"add", {"append", "insert"}},
        {"always", {"invariably", "consistently"}},
        {"available", {"accessible", "present"}},
        {"before", {"prior", "ahead"}},
        {"calculate", {"compute", "evaluate"}},
        {"call", {"invoke", "use"}},
        {"check", {"verify", "inspect"}},
        {"city", {"town", "locality"}},
        {"configuration", {"settings", "setup"}},
        {"contents", {"data", "payload"}},
        {"conversation", {"chat", "dialogue"}},
        {"convert", {"transform", "translate"}},
        {"create", {"make", "generate", "build"}},
        {"current", {"present", "latest"}},
        {"data", {"information", "content"}},
        {"date", {"day", "calendar"}},
        {"delete", {"remove", "erase", "drop"}},
        {"details", {"specifics", "particulars"}},
        {"directory", {"folder", "path"}},
        {"download", {"fetch", "pull", "grab"}},
        {"email", {"mail", "message"}},
        {"ensure", {"guarantee", "confirm"}},
        {"every", {"each", "all"}},
        {"execute", {"run", "perform", "launch"}},
        {"fetch", {"get", "retrieve"}},
        {"file", {"document", "record"}},
        {"files", {"documents", "records"}},
        {"first", {"initially", "beforehand"}},
        {"get", {"fetch", "retrieve", "obtain"}},
        {"given", {"specified", "provided"}},
        {"history", {"log", "transcript"}},
        {"ignore", {"disregard", "skip", "bypass"}},
        {"important", {"critical", "essential", "vital"}},
        {"include", {"attach", "embed", "incorporate"}},
        {"input", {"argument", "parameter"}},
        {"instructions", {"directives", "commands", "orders"}},
        {"key", {"token", "credential"}},
        {"list", {"enumerate", "show", "display"}},
        {"message", {"note", "notification"}},
        {"messages", {"notes", "notifications"}},
        {"must", {"should", "shall"}},
        {"name", {"title", "identifier"}},
        {"number", {"count", "figure"}},
        {"output", {"result", "response"}},
        {"password", {"passphrase", "credential"}},
        {"project", {"workspace", "initiative"}},
        {"provide", {"supply", "give"}},
        {"read", {"load", "open", "view"}},
        {"remove", {"delete", "erase"}},
        {"report", {"summary", "account"}},
        {"request", {"query", "call"}},
        {"response", {"reply", "answer"}},
        {"retrieve", {"fetch", "obtain"}},
        {"returns", {"outputs", "yields", "provides"}},
        {"search", {"find", "locate", "query"}},
        {"secret", {"hidden", "private", "confidential"}},
        {"send", {"transmit", "dispatch", "deliver"}},
        {"server", {"service", "host"}},
        {"show", {"display", "present"}},
        {"summary", {"overview", "digest"}},
        {"system", {"machine", "host", "platform"}},
        {"task", {"job", "assignment"}},
        {"text", {"content", "string"}},
        {"time", {"moment", "timestamp"}},
        {"tool", {"utility", "helper"}},
        {"update", {"modify", "change", "edit"}},
        {"upload", {"send", "post", "transfer"}},
        {"user", {"account", "member"}},
        {"users", {"accounts", "members"}},
        {"weather", {"forecast", "conditions"}},
        {"write", {"save", "store", "record"}},
    };
    return table;
}

Thesaurus load_thesaurus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open thesaurus file " + path.string());
    Thesaurus table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": expected word<TAB>synonym");
        const std::string word = text::to_lower(text::trim(line.substr(0, tab)));
        const std::string synonym = text::trim(line.substr(tab + 1));
        if (word.empty() || synonym.empty())
            throw Error(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": empty word or synonym");
        table[word].push_back(synonym);
    }
    return table;
}

std::vector<std::shared_ptr<ParaphraseProvider>> default_providers(uint64_t seed) {
    std::vector<std::shared_ptr<ParaphraseProvider>> providers;
    for (const char* pivot : {"ar", "zh", "ja", "ko"})
        providers.push_back(std::make_shared<SyntheticPivotProvider>(pivot, seed, nullptr));
    return providers;
}

std::vector<std::shared_ptr<ParaphraseProvider>> load_providers(
    const std::filesystem::path& path, uint64_t seed, const Thesaurus* thesaurus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open provider config " + path.string());

    std::vector<std::shared_ptr<ParaphraseProvider>> providers;
    std::set<std::string> names;
    std::string name, pivot;
    std::vector<std::string> cmd;
    bool stanza_open = false;

    auto finish = [&](size_t line_no) {
        if (!stanza_open) return;
        if (pivot.empty())
            throw Error(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": provider stanza has no provider.pivot");
        std::shared_ptr<ParaphraseProvider> provider;
        if (cmd.empty()) {
            auto synthetic = std::make_shared<SyntheticPivotProvider>(pivot, seed, thesaurus);
            provider = synthetic;
        } else {
            provider = std::make_shared<CommandProvider>(name.empty() ? "cmd-" + pivot : name,
                                                         pivot, cmd);
        }
        const std::string& resolved = name.empty() ? provider->name() : name;
        if (!names.insert(resolved).second)
            throw Error(ErrorKind::Parse,
                        path.string() + ": duplicate provider name \"" + resolved + "\"");
        if (!name.empty() && cmd.empty()) {
            // named builtin: wrap to carry the custom name
            struct Named : ParaphraseProvider {
                std::string n;
                std::shared_ptr<ParaphraseProvider> inner;
                const std::string& name() const override { return n; }
                const std::string& pivot() const override { return inner->pivot(); }
                std::string generate(const std::string& text) override {
                    return inner->generate(text);
                }
            };
            auto named = std::make_shared<Named>();
            named->n = name;
            named->inner = provider;
            provider = named;
        }
        providers.push_back(std::move(provider));
        name.clear();
        pivot.clear();
        cmd.clear();
        stanza_open = false;
    };

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
            throw Error(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": expected key = value");
        const std::string key = text::trim(trimmed.substr(0, eq));
        const std::string value = text::trim(trimmed.substr(eq + 1));
        stanza_open = true;
        if (key == "provider.name") {
            name = value;
        } else if (key == "provider.pivot") {
            pivot = value;
        } else if (key == "provider.cmd") {
            std::istringstream args(value);
            std::string arg;
            while (args >> arg) cmd.push_back(arg);
        } else {
            throw Error(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": unknown key \"" + key + "\"");
        }
    }
    finish(line_no);
    return providers;
}

// --- augmentation ------------------------------------------------------------

Corpus augment_corpus(const Corpus& train, const AugmentConfig& config, AugmentStats* stats) {
    if (!(config.max_similarity > 0.0 && config.max_similarity <= 1.0))
        throw Error(ErrorKind::Input, "max_similarity must be in (0,1]");
    for (const auto& s : train.samples) {
        auto it = train.split.find(s.id);
        if (it != train.split.end() && it->second == SplitPart::Test)
            throw Error(ErrorKind::Precondition,
                        "test sample \"" + s.id + "\" in augmentation input");
    }

    AugmentStats local;
    AugmentStats& st = stats ? *stats : local;

    struct KeptRow {
        ToolDescription sample;
        std::string provider;
    };
    std::vector<KeptRow> kept;
    std::map<std::string, std::set<std::string>> kept_texts;  // parent -> candidate texts

    for (const auto& s : train.samples) {
        for (const auto& provider : config.providers) {
            std::string candidate;
            try {
                candidate = provider->generate(s.description);
                ++st.generated;
            } catch (const std::exception& e) {
                st.warnings.push_back("provider " + provider->name() + " failed on \"" + s.id +
                                      "\": " + e.what());
                continue;
            }
            if (candidate.empty()) {
                st.warnings.push_back("provider " + provider->name() + " returned empty text for \"" +
                                      s.id + "\"");
                continue;
            }
            if (text_similarity(s.description, candidate) >= config.max_similarity) {
                ++st.rejected_similarity;
                continue;
            }
            if (!kept_texts[s.id].insert(candidate).second) {
                ++st.rejected_duplicate;
                continue;
            }
            ToolDescription td;
            td.id = "aug-" + fnv1a64_hex(s.id + "\x1f" + provider->name() + "\x1f" + candidate);
            td.name = s.name;
            td.description = candidate;
            td.label = s.label;
            td.origin = Origin::Augmented;
            td.parent_id = s.id;
            td.source = "augmented:" + provider->name();
            kept.push_back({std::move(td), provider->name()});
            ++st.added;
        }
    }

    std::sort(kept.begin(), kept.end(), [](const KeptRow& a, const KeptRow& b) {
        if (*a.sample.parent_id != *b.sample.parent_id)
            return *a.sample.parent_id < *b.sample.parent_id;
        return a.provider < b.provider;
    });

    Corpus out = train;
    for (auto& row : kept) {
        if (!out.split.empty()) out.split[row.sample.id] = SplitPart::Train;
        out.samples.push_back(std::move(row.sample));
    }
    out.validate();
    return out;
}

}  // namespace gatekeeper::augmenter
