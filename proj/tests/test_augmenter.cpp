// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "gatekeeper/augmenter.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"

using namespace gatekeeper;
using namespace gatekeeper::augmenter;

namespace {

class StubProvider : public ParaphraseProvider {
public:
    StubProvider(std::string name, std::function<std::string(const std::string&)> fn)
        : name_(std::move(name)), pivot_("xx"), fn_(std::move(fn)) {}

    const std::string& name() const override { return name_; }
    const std::string& pivot() const override { return pivot_; }
    std::string generate(const std::string& text) override { return fn_(text); }

private:
    std::string name_;
    std::string pivot_;
    std::function<std::string(const std::string&)> fn_;
};

Corpus small_corpus(size_t n, const std::string& label = "attack") {
    Corpus c;
    c.taxonomy = LabelTaxonomy{{"benign", "attack"}, "benign"};
    const char* verbs[] = {"get", "list", "delete", "send", "update"};
    const char* objects[] = {"file", "user", "message", "report", "task"};
    for (size_t i = 0; i < n; ++i) {
        ToolDescription td;
        td.id = "s" + std::to_string(i);
        td.name = "tool" + std::to_string(i);
        td.description = std::string(verbs[i % 5]) + " the " + objects[(i / 5) % 5] + " number " +
                         std::to_string(i) + " from the server";
        td.label = label;
        td.origin = Origin::McpTox;
        c.samples.push_back(td);
    }
    return c;
}

}  // namespace

TEST_CASE("text similarity of identical texts is exactly 1.0") {
    CHECK(text_similarity("get user data", "get user data") == 1.0);
    CHECK(text_similarity("Get USER data!", "get user data") == 1.0);  // token-identical
}

TEST_CASE("text similarity of disjoint vocabularies is 0.0") {
    CHECK(text_similarity("alpha beta", "gamma delta") == 0.0);
    CHECK(text_similarity("", "words here") == 0.0);
    CHECK(text_similarity("...", "words") == 0.0);  // no tokens on the left
}

TEST_CASE("text similarity matches a hand-computed cosine") {
    // tf("read the file") = {read, the, file}; tf("read a file") = {read, a, file}
    // dot = 2, norms = sqrt(3) each -> 2/3
    CHECK(std::abs(text_similarity("read the file", "read a file") - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("text similarity is symmetric") {
    SplitMix64 rng(31);
    const char* words[] = {"get", "file", "user", "data", "send", "read"};
    for (int round = 0; round < 50; ++round) {
        std::string a, b;
        for (size_t i = 0, n = 1 + rng.next_below(6); i < n; ++i)
            a += std::string(words[rng.next_below(6)]) + " ";
        for (size_t i = 0, n = 1 + rng.next_below(6); i < n; ++i)
            b += std::string(words[rng.next_below(6)]) + " ";
        CHECK(text_similarity(a, b) == text_similarity(b, a));
    }
}

TEST_CASE("the identity provider adds nothing") {
    Corpus train = small_corpus(10);
    AugmentConfig config;
    config.providers = {std::make_shared<IdentityProvider>()};
    AugmentStats stats;
    Corpus out = augment_corpus(train, config, &stats);
    CHECK(out.samples.size() == train.samples.size());
    CHECK(stats.added == 0);
    CHECK(stats.rejected_similarity == 10);
}

TEST_CASE("disjoint-vocabulary providers all pass the filter") {
    Corpus train = small_corpus(1);
    AugmentConfig config;
    for (int i = 0; i < 4; ++i)
        config.providers.push_back(std::make_shared<StubProvider>(
            "p" + std::to_string(i), [i](const std::string&) {
                return "unrelated phrasing variant " + std::to_string(i) + " zz" + std::to_string(i);
            }));
    Corpus out = augment_corpus(train, config);
    CHECK(out.samples.size() == 5);  // 1 original + 4 augmented
    size_t augmented = 0;
    for (const auto& s : out.samples)
        if (s.origin == Origin::Augmented) {
            ++augmented;
            CHECK(*s.parent_id == "s0");
            CHECK(*s.label == "attack");
        }
    CHECK(augmented == 4);
}

TEST_CASE("augmentation matches an independent replay oracle on 50 samples") {
    Corpus train = small_corpus(50);
    AugmentConfig config;
    config.seed = 11;
    config.providers = default_providers(config.seed);
    AugmentStats stats;
    Corpus out = augment_corpus(train, config, &stats);

    // oracle: replay generate + similarity filter + sibling dedup by hand
    size_t expected_added = 0;
    std::map<std::string, std::set<std::string>> seen;
    std::set<std::string> expected_texts;
    for (const auto& s : train.samples) {
        for (const auto& provider : config.providers) {
            const std::string candidate = provider->generate(s.description);
            if (text_similarity(s.description, candidate) >= config.max_similarity) continue;
            if (!seen[s.id].insert(candidate).second) continue;
            ++expected_added;
            expected_texts.insert(candidate);
        }
    }
    CHECK(stats.added == expected_added);
    CHECK(out.samples.size() == 50 + expected_added);
    size_t actual_augmented = 0;
    for (const auto& s : out.samples)
        if (s.origin == Origin::Augmented) {
            ++actual_augmented;
            CHECK(expected_texts.count(s.description) == 1);
            const ToolDescription* parent = out.find(*s.parent_id);
            REQUIRE(parent != nullptr);
            CHECK(text_similarity(parent->description, s.description) < config.max_similarity);
            CHECK(*s.label == *parent->label);
        }
    CHECK(actual_augmented == expected_added);
    CHECK(actual_augmented <= train.samples.size() * config.providers.size());
}

TEST_CASE("augmentation is deterministic for a fixed seed") {
    Corpus train = small_corpus(20);
    AugmentConfig config;
    config.seed = 5;
    config.providers = default_providers(config.seed);
    Corpus a = augment_corpus(train, config);
    Corpus b = augment_corpus(train, config);
    CHECK(a == b);

    AugmentConfig other;
    other.seed = 6;
    other.providers = default_providers(other.seed);
    Corpus c = augment_corpus(train, other);
    CHECK(a != c);
}

TEST_CASE("provider failures are warnings, not errors") {
    Corpus train = small_corpus(3);
    AugmentConfig config;
    config.providers = {std::make_shared<StubProvider>("boom", [](const std::string& t) -> std::string {
                            if (t.find("number 1") != std::string::npos)
                                throw Error(ErrorKind::Io, "synthetic failure");
                            return "completely different wording entirely";
                        })};
    AugmentStats stats;
    Corpus out = augment_corpus(train, config, &stats);
    CHECK(stats.added == 2);
    CHECK(stats.warnings.size() == 1);
    CHECK(out.samples.size() == 5);
}

TEST_CASE("exact duplicate candidates from sibling providers are dropped") {
    Corpus train = small_corpus(1);
    auto same = [](const std::string&) { return std::string("identical paraphrase output"); };
    AugmentConfig config;
    config.providers = {std::make_shared<StubProvider>("p1", same),
                        std::make_shared<StubProvider>("p2", same)};
    AugmentStats stats;
    Corpus out = augment_corpus(train, config, &stats);
    CHECK(stats.added == 1);
    CHECK(stats.rejected_duplicate == 1);
    CHECK(out.samples.size() == 2);
}

TEST_CASE("test samples in the input are a precondition error") {
    Corpus train = small_corpus(4);
    train.taxonomy = LabelTaxonomy{{"benign", "attack"}, "benign"};
    train.samples[0].label = "benign";
    train.samples[1].label = "benign";
    Corpus split = stratified_split(train, 0.5, 1);
    AugmentConfig config;
    config.providers = {std::make_shared<IdentityProvider>()};
    try {
        augment_corpus(split, config);
        FAIL("expected precondition error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Precondition);
    }
    Corpus train_only = subset(split, SplitPart::Train);
    CHECK_NOTHROW(augment_corpus(train_only, config));
}

TEST_CASE("augmented samples keep the train split tag") {
    Corpus base = small_corpus(8);
    for (int i = 0; i < 4; ++i) base.samples[i].label = "benign";
    Corpus split = stratified_split(base, 0.25, 3);
    Corpus train = subset(split, SplitPart::Train);
    AugmentConfig config;
    config.seed = 2;
    config.providers = default_providers(config.seed);
    Corpus out = augment_corpus(train, config);
    for (const auto& s : out.samples)
        if (s.origin == Origin::Augmented) CHECK(out.split.at(s.id) == SplitPart::Train);
}

TEST_CASE("the synthetic provider rewrites tokens deterministically") {
    SyntheticPivotProvider ar("ar", 7, nullptr);
    const std::string text = "Get the weather report for the given city, then send a summary";
    const std::string p1 = ar.generate(text);
    const std::string p2 = ar.generate(text);
    CHECK(p1 == p2);
    CHECK(p1 != text);

    SyntheticPivotProvider zh("zh", 7, nullptr);
    CHECK(zh.generate(text) != p1);  // distinct pivot, distinct stream
    CHECK_THROWS_AS(ar.generate(""), Error);
}

TEST_CASE("command providers run external paraphrasers") {
    Corpus train = small_corpus(2);
    AugmentConfig config;
    config.providers = {std::make_shared<CommandProvider>("cat", "xx",
                                                          std::vector<std::string>{"/bin/cat"})};
    AugmentStats stats;
    Corpus out = augment_corpus(train, config, &stats);
    CHECK(stats.added == 0);  // identity output is rejected by the filter
    CHECK(stats.rejected_similarity == 2);

    AugmentConfig echo_config;
    echo_config.providers = {std::make_shared<CommandProvider>(
        "fixed", "yy", std::vector<std::string>{"/bin/sh", "-c", "echo totally different words"})};
    AugmentStats echo_stats;
    Corpus echoed = augment_corpus(train, echo_config, &echo_stats);
    // sibling dedup is per parent, so each sample keeps its candidate
    CHECK(echo_stats.added == 2);
    CHECK(echoed.samples.size() == 4);

    AugmentConfig bad;
    bad.providers = {std::make_shared<CommandProvider>("fail", "zz",
                                                       std::vector<std::string>{"/bin/false"})};
    AugmentStats bad_stats;
    Corpus unchanged = augment_corpus(train, bad, &bad_stats);
    CHECK(bad_stats.added == 0);
    CHECK(bad_stats.warnings.size() == 2);
    CHECK(unchanged.samples.size() == 2);
}

TEST_CASE("thesaurus files parse word-tab-synonym rows") {
    const auto path = std::filesystem::temp_directory_path() / "gatekeeper_thesaurus_test.tsv";
    std::ofstream(path) << "get\tfetch\nget\tretrieve\nfile\tdocument\n";
    Thesaurus t = load_thesaurus(path);
    CHECK(t.at("get") == std::vector<std::string>{"fetch", "retrieve"});
    CHECK(t.at("file") == std::vector<std::string>{"document"});
    std::filesystem::remove(path);
}
