// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/corpus.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::classifier {

struct VectorizerConfig {
    bool lowercase = true;
    std::string token_pattern = "[a-z0-9]+ (lowercase, split on non-alphanumeric)";
    int min_document_frequency = 1;
    bool sublinear_tf = false;
};

/// TF-IDF vocabulary fitted on the training split only.
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N training documents.
struct VectorizerModel {
    VectorizerConfig config;
    std::vector<std::string> vocabulary;          // lexicographic; index = position
    std::map<std::string, uint32_t> vocab_index;  // token -> column
    std::vector<double> idf;

    size_t dimensions() const { return vocabulary.size(); }
};

VectorizerModel fit_vectorizer(const Corpus& train, const VectorizerConfig& config = {});

/// tf(t) * idf(t) over in-vocabulary tokens, L2-normalized. Out-of-vocabulary
/// tokens are ignored; all-OOV text yields a zero vector.
TermVector transform(std::string_view text, const VectorizerModel& vectorizer);

/// Same vector keyed by column index, sorted by index.
std::vector<std::pair<uint32_t, double>> transform_indexed(std::string_view text,
                                                           const VectorizerModel& vectorizer);

enum class TaskMode { Binary, Multiclass };

struct TrainConfig {
    TaskMode mode = TaskMode::Binary;
    double regularization = 1e-4;  // lambda in the hinge objective
    int epochs = 200;
    uint64_t seed = 0;
    bool sublinear_tf = false;
    int min_document_frequency = 1;
};

/// Linear max-margin model. Multiclass is one-vs-rest with one weight vector
/// per class; the binary task stores a single vector with the convention
/// that a positive score means malicious.
struct LinearModel {
    static constexpr int kFormatVersion = 1;

    std::vector<std::string> classes;            // binary: {"benign","malicious"}
    std::vector<std::vector<double>> weights;    // one row per stored head
    std::vector<double> biases;
    VectorizerModel vectorizer;
    LabelTaxonomy taxonomy;
    TrainConfig train_config;
    int format_version = kFormatVersion;
    std::string training_data_digest;

    bool is_binary_head() const { return weights.size() == 1 && classes.size() == 2; }

    /// Signed weight of `column` for class index `cls` (binary heads expose
    /// the stored vector as +w for malicious and -w for benign).
    double class_weight(size_t cls, size_t column) const;
    double class_bias(size_t cls) const;
};

struct Attribution {
    std::string token;
    double contribution;
};

struct Verdict {
    std::string predicted_class;
    std::string binary;          // "benign" or "malicious"
    std::vector<double> scores;  // per class, aligned with model.classes
    std::vector<Attribution> attribution;  // filled by attribute()
};

/// Per-epoch mean of the instantaneous regularized hinge objective, for
/// convergence monitoring.
struct TrainDiagnostics {
    std::vector<double> epoch_loss;
};

LinearModel train_linear(const Corpus& train, const TrainConfig& config,
                         TrainDiagnostics* diagnostics = nullptr);

Verdict predict(std::string_view text, const LinearModel& model);

/// Exact linear attribution for the predicted class: contribution(t) =
/// w_c[t] * x[t]; top-k by |contribution|. Contributions plus the class bias
/// sum to the decision score.
std::vector<Attribution> attribute(std::string_view text, const LinearModel& model, int k);

void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);
std::string serialize_model(const LinearModel& model);
LinearModel deserialize_model(const std::string& json_text);

}  // namespace gatekeeper::classifier
