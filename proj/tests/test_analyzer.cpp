// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "gatekeeper/analyzer.hpp"
#include "gatekeeper/error.hpp"

using namespace gatekeeper;
using namespace gatekeeper::analyzer;

namespace {

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& labeled_texts,
                   const std::vector<std::string>& classes, const std::string& benign) {
    Corpus c;
    c.taxonomy = LabelTaxonomy{classes, benign};
    int n = 0;
    for (const auto& [label, text] : labeled_texts) {
        ToolDescription td;
        td.id = "s" + std::to_string(n++);
        td.description = text;
        td.label = label;
        td.origin = Origin::Scraped;
        c.samples.push_back(td);
    }
    return c;
}

}  // namespace

TEST_CASE("the bundled stopword list is pinned at 179 entries") {
    const auto& words = english_stopwords();
    CHECK(words.size() == 179);
    std::set<std::string> unique(words.begin(), words.end());
    CHECK(unique.size() == 179);
    CHECK(is_stopword("the"));
    CHECK(is_stopword("don"));
    CHECK(is_stopword("re"));
    CHECK_FALSE(is_stopword("file"));
    CHECK_FALSE(is_stopword("delete"));
}

TEST_CASE("class centroid is the raw token count sum") {
    Corpus c = make_corpus({{"benign", "list list files"}}, {"benign"}, "benign");
    TermVector v = class_centroid(c, "benign", false);
    REQUIRE(v.size() == 2);
    CHECK(v.at("list") == doctest::Approx(2.0));
    CHECK(v.at("files") == doctest::Approx(1.0));
}

TEST_CASE("stopword removal drops stopword tokens from the centroid") {
    Corpus c = make_corpus({{"benign", "list the files"}}, {"benign"}, "benign");
    TermVector with = class_centroid(c, "benign", false);
    TermVector without = class_centroid(c, "benign", true);
    CHECK(with.count("the") == 1);
    CHECK(without.count("the") == 0);
    CHECK(without.at("list") == doctest::Approx(1.0));
}

TEST_CASE("centroid equals a brute-force counting oracle on a 3-sample class") {
    Corpus c = make_corpus({{"x", "alpha beta beta"},
                            {"x", "beta gamma"},
                            {"x", "alpha alpha delta"},
                            {"benign", "other words"}},
                           {"benign", "x"}, "benign");
    TermVector v = class_centroid(c, "x", false);
    // oracle: loop over the three texts and count tokens independently
    std::map<std::string, int> oracle;
    for (const auto& textual : {"alpha beta beta", "beta gamma", "alpha alpha delta"}) {
        std::istringstream in(textual);
        std::string tok;
        while (in >> tok) oracle[tok] += 1;
    }
    REQUIRE(v.size() == oracle.size());
    for (const auto& [tok, count] : oracle) CHECK(v.at(tok) == doctest::Approx(count));
}

TEST_CASE("empty classes are a domain error") {
    Corpus c = make_corpus({{"benign", "something"}}, {"benign", "ghost"}, "benign");
    try {
        class_centroid(c, "ghost", false);
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
    CHECK_THROWS_AS(similarity_matrix(c, false), Error);
    CHECK_THROWS_AS(class_centroid(c, "unknown", false), Error);
}

TEST_CASE("identical centroids give off-diagonal 1.0, disjoint give 0.0") {
    Corpus c = make_corpus({{"a", "same words here"}, {"b", "same words here"},
                            {"c", "completely different vocabulary"}},
                           {"a", "b", "c"}, "a");
    SimilarityMatrix m = similarity_matrix(c, false);
    const int ia = m.index_of("a"), ib = m.index_of("b"), ic = m.index_of("c");
    CHECK(m.at(ia, ib) == doctest::Approx(1.0));
    CHECK(m.at(ia, ic) == doctest::Approx(0.0));
    CHECK(m.at(ib, ic) == doctest::Approx(0.0));
    CHECK(m.at(ia, ia) == doctest::Approx(1.0));
}

TEST_CASE("3-class similarity matrix matches hand-computed cosines") {
    Corpus c = make_corpus({{"a", "red red blue"}, {"b", "red blue blue"}, {"c", "green green"}},
                           {"a", "b", "c"}, "a");
    SimilarityMatrix m = similarity_matrix(c, false);
    // a = {red:2, blue:1}; b = {red:1, blue:2}; c = {green:2}
    const double ab = (2.0 * 1 + 1.0 * 2) / (std::sqrt(5.0) * std::sqrt(5.0));  // 4/5
    CHECK(m.at(0, 1) == doctest::Approx(ab).epsilon(1e-12));
    CHECK(m.at(0, 2) == doctest::Approx(0.0));
    CHECK(m.at(1, 2) == doctest::Approx(0.0));
    // symmetry within 1e-12
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(std::abs(m.at(i, j) - m.at(j, i)) < 1e-12);
}

TEST_CASE("duplicating one class's samples leaves its similarity row unchanged") {
    Corpus c = make_corpus({{"a", "red red blue"}, {"b", "red blue blue"}, {"c", "green red"}},
                           {"a", "b", "c"}, "a");
    SimilarityMatrix before = similarity_matrix(c, false);

    Corpus scaled = c;
    for (int copy = 0; copy < 3; ++copy) {  // x4 total for class "b"
        ToolDescription td;
        td.id = "dup" + std::to_string(copy);
        td.description = "red blue blue";
        td.label = "b";
        td.origin = Origin::Scraped;
        scaled.samples.push_back(td);
    }
    SimilarityMatrix after = similarity_matrix(scaled, false);
    const int ib = before.index_of("b");
    for (size_t j = 0; j < before.classes.size(); ++j)
        CHECK(std::abs(before.at(ib, j) - after.at(ib, j)) < 1e-12);
}

TEST_CASE("propose_merges below threshold is the identity") {
    SimilarityMatrix m;
    m.classes = {"benign", "a", "b"};
    m.values = {{1.0, 0.1, 0.1}, {0.1, 1.0, 0.3}, {0.1, 0.3, 1.0}};
    MergeMap mm = propose_merges(m, 0.8, "benign");
    for (const auto& [from, to] : mm) CHECK(from == to);
}

TEST_CASE("a clique above threshold merges into one class") {
    SimilarityMatrix m;
    m.classes = {"benign", "d", "c", "b", "a"};
    m.values.assign(5, std::vector<double>(5, 0.9));
    for (size_t i = 0; i < 5; ++i) m.values[i][i] = 1.0;
    for (size_t i = 1; i < 5; ++i) {  // benign pairs below threshold
        m.values[0][i] = 0.2;
        m.values[i][0] = 0.2;
    }
    MergeMap mm = propose_merges(m, 0.8, "benign");
    CHECK(mm.at("benign") == "benign");
    CHECK(mm.at("a") == "merged:a");
    CHECK(mm.at("b") == "merged:a");
    CHECK(mm.at("c") == "merged:a");
    CHECK(mm.at("d") == "merged:a");
}

TEST_CASE("merging is the transitive closure over the threshold graph") {
    // chain: a~b and b~c above threshold, a~c below
    SimilarityMatrix m;
    m.classes = {"benign", "a", "b", "c", "d"};
    m.values.assign(5, std::vector<double>(5, 0.0));
    for (size_t i = 0; i < 5; ++i) m.values[i][i] = 1.0;
    auto set = [&](int i, int j, double v) { m.values[i][j] = v; m.values[j][i] = v; };
    set(1, 2, 0.85);  // a~b
    set(2, 3, 0.9);   // b~c
    set(1, 3, 0.1);   // a~c below
    MergeMap mm = propose_merges(m, 0.8, "benign");

    // oracle: boolean reachability closure over the malicious subgraph
    const std::vector<std::string> malicious = {"a", "b", "c", "d"};
    std::vector<std::vector<bool>> reach(4, std::vector<bool>(4, false));
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = 0; j < 4; ++j)
            reach[i][j] = (i == j) || m.values[i + 1][j + 1] >= 0.8;
    for (size_t k = 0; k < 4; ++k)
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = 0; j < 4; ++j) {
            const bool same_target = mm.at(malicious[i]) == mm.at(malicious[j]);
            CHECK(same_target == static_cast<bool>(reach[i][j]));
        }
    CHECK(mm.at("a") == "merged:a");
    CHECK(mm.at("c") == "merged:a");
    CHECK(mm.at("d") == "d");
}

TEST_CASE("proposed merges apply cleanly to the corpus") {
    Corpus c = make_corpus({{"benign", "plain words"},
                            {"a", "shared vocab one"},
                            {"b", "shared vocab two"},
                            {"c", "isolated tokens"}},
                           {"benign", "a", "b", "c"}, "benign");
    SimilarityMatrix m = similarity_matrix(c, false);
    MergeMap mm = propose_merges(m, 0.5, "benign");
    Corpus merged = apply_merge(c, mm);  // must not throw
    CHECK(merged.samples.size() == c.samples.size());
    CHECK(mm.at("a") == mm.at("b"));
}

TEST_CASE("merge override files parse and reject conflicts") {
    MergeMap mm = parse_merge_override(
        "# paper merge\n"
        "Service Disruption -> Information manipulation\n"
        "Privacy Leakage -> Information manipulation\n"
        "\n"
        "Data Tampering -> Information manipulation\n"
        "Instruction Tampering -> Information manipulation\n");
    CHECK(mm.size() == 4);
    CHECK(mm.at("Privacy Leakage") == "Information manipulation");

    CHECK_THROWS_AS(parse_merge_override("no arrow here\n"), Error);
    CHECK_THROWS_AS(parse_merge_override("a -> b\na -> c\n"), Error);
}

TEST_CASE("matrix CSV has a class-name header row and labeled rows") {
    Corpus c = make_corpus({{"a", "red red"}, {"b", "red blue"}}, {"a", "b"}, "a");
    SimilarityMatrix m = similarity_matrix(c, false);
    const std::string csv = matrix_to_csv(m);
    std::istringstream in(csv);
    std::string header, row_a, row_b;
    std::getline(in, header);
    std::getline(in, row_a);
    std::getline(in, row_b);
    CHECK(header == "class,a,b");
    CHECK(row_a.rfind("a,1,", 0) == 0);
    CHECK(row_b.rfind("b,", 0) == 0);
}
