// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/analyzer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "gatekeeper/error.hpp"

namespace gatekeeper::analyzer {

int SimilarityMatrix::index_of(const std::string& cls) const {
    for (size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == cls) return static_cast<int>(i);
    return -1;
}

double SimilarityMatrix::max_malicious_offdiagonal(const std::string& benign_class) const {
    double best = 0.0;
    for (size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == benign_class) continue;
        for (size_t j = i + 1; j < classes.size(); ++j) {
            if (classes[j] == benign_class) continue;
            best = std::max(best, values[i][j]);
        }
    }
    return best;
}

TermVector class_centroid(const Corpus& corpus, const std::string& class_name,
                          bool remove_stopwords) {
    if (!corpus.taxonomy.contains(class_name))
        throw Error(ErrorKind::Domain, "unknown class \"" + class_name + "\"");
    TermVector centroid;
    size_t members = 0;
    for (const auto& s : corpus.samples) {
        if (!s.label || *s.label != class_name) continue;
        ++members;
        for (const auto& token : text::tokenize(s.description)) {
            if (remove_stopwords && is_stopword(token)) continue;
            centroid[token] += 1.0;
        }
    }
    if (members == 0)
        throw Error(ErrorKind::Domain, "class \"" + class_name + "\" has no samples");
    return centroid;
}

SimilarityMatrix similarity_matrix(const Corpus& corpus, bool remove_stopwords) {
    SimilarityMatrix matrix;
    matrix.classes = corpus.taxonomy.classes;
    const size_t k = matrix.classes.size();
    if (k == 0) throw Error(ErrorKind::Domain, "corpus has no classes");

    std::vector<TermVector> centroids;
    centroids.reserve(k);
    for (const auto& cls : matrix.classes)
        centroids.push_back(class_centroid(corpus, cls, remove_stopwords));

    matrix.values.assign(k, std::vector<double>(k, 0.0));
    for (size_t i = 0; i < k; ++i) {
        matrix.values[i][i] = centroids[i].empty() ? 0.0 : 1.0;
        for (size_t j = i + 1; j < k; ++j) {
            const double sim = text::cosine(centroids[i], centroids[j]);
            matrix.values[i][j] = sim;
            matrix.values[j][i] = sim;
        }
    }
    return matrix;
}

namespace {

// Union-find over class indices.
struct DisjointSets {
    std::vector<size_t> parent;

    explicit DisjointSets(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

MergeMap propose_merges(const SimilarityMatrix& matrix, double threshold,
                        const std::string& benign_class) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorKind::Input, "merge threshold must be in (0,1)");
    const size_t k = matrix.classes.size();
    DisjointSets sets(k);
    for (size_t i = 0; i < k; ++i) {
        if (matrix.classes[i] == benign_class) continue;
        for (size_t j = i + 1; j < k; ++j) {
            if (matrix.classes[j] == benign_class) continue;
            if (matrix.values[i][j] >= threshold) sets.unite(i, j);
        }
    }

    std::map<size_t, std::vector<std::string>> components;
    for (size_t i = 0; i < k; ++i) {
        if (matrix.classes[i] == benign_class) continue;
        components[sets.find(i)].push_back(matrix.classes[i]);
    }

    MergeMap merge_map;
    merge_map[benign_class] = benign_class;
    for (auto& [root, members] : components) {
        (void)root;
        if (members.size() == 1) {
            merge_map[members[0]] = members[0];
            continue;
        }
        const std::string target = "merged:" + *std::min_element(members.begin(), members.end());
        for (const auto& cls : members) merge_map[cls] = target;
    }
    return merge_map;
}

MergeMap parse_merge_override(std::string_view content) {
    MergeMap merge_map;
    std::istringstream in{std::string(content)};
    std::string raw;
    size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = text::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const size_t arrow = line.find("->");
        if (arrow == std::string::npos)
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": expected \"old-class -> new-class\"");
        const std::string from = text::trim(line.substr(0, arrow));
        const std::string to = text::trim(line.substr(arrow + 2));
        if (from.empty() || to.empty())
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": empty class name in merge override");
        if (merge_map.count(from) && merge_map.at(from) != to)
            throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                              ": conflicting targets for \"" + from + "\"");
        merge_map[from] = to;
    }
    return merge_map;
}

MergeMap load_merge_override(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open merge override file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_merge_override(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

namespace {

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

std::string matrix_to_csv(const SimilarityMatrix& matrix) {
    std::ostringstream out;
    out << "class";
    for (const auto& cls : matrix.classes) out << "," << csv_field(cls);
    out << "\n";
    char buffer[64];
    for (size_t i = 0; i < matrix.classes.size(); ++i) {
        out << csv_field(matrix.classes[i]);
        for (size_t j = 0; j < matrix.classes.size(); ++j) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", matrix.values[i][j]);
            out << "," << buffer;
        }
        out << "\n";
    }
    return out.str();
}

void save_matrix_csv(const SimilarityMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write matrix file " + path.string());
    out << matrix_to_csv(matrix);
}

}  // namespace gatekeeper::analyzer
