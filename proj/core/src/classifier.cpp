// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"

namespace gatekeeper::classifier {

using ordered_json = nlohmann::ordered_json;
using SparseVec = std::vector<std::pair<uint32_t, double>>;

VectorizerModel fit_vectorizer(const Corpus& train, const VectorizerConfig& config) {
    if (train.samples.empty()) throw Error(ErrorKind::Training, "empty training corpus");
    const size_t n_docs = train.samples.size();
    const size_t min_df = config.min_document_frequency < 1
                              ? 1
                              : static_cast<size_t>(config.min_document_frequency);

    std::map<std::string, size_t> df;
    for (const auto& s : train.samples) {
        std::set<std::string> seen;
        for (auto& tok : text::tokenize(s.description)) seen.insert(std::move(tok));
        for (const auto& tok : seen) df[tok] += 1;
    }

    VectorizerModel model;
    model.config = config;
    for (const auto& [token, count] : df) {
        if (count < min_df) continue;
        const uint32_t index = static_cast<uint32_t>(model.vocabulary.size());
        model.vocabulary.push_back(token);
        model.vocab_index.emplace(token, index);
        model.idf.push_back(std::log((1.0 + static_cast<double>(n_docs)) /
                                     (1.0 + static_cast<double>(count))) +
                            1.0);
    }
    if (model.vocabulary.empty())
        throw Error(ErrorKind::Training, "effective vocabulary is empty");
    return model;
}

std::vector<std::pair<uint32_t, double>> transform_indexed(std::string_view text,
                                                           const VectorizerModel& vectorizer) {
    std::map<uint32_t, double> counts;
    for (const auto& tok : text::tokenize(text)) {
        auto it = vectorizer.vocab_index.find(tok);
        if (it != vectorizer.vocab_index.end()) counts[it->second] += 1.0;
    }
    SparseVec vec;
    vec.reserve(counts.size());
    double sq = 0.0;
    for (const auto& [index, count] : counts) {
        const double tf = vectorizer.config.sublinear_tf ? 1.0 + std::log(count) : count;
        const double value = tf * vectorizer.idf[index];
        vec.emplace_back(index, value);
        sq += value * value;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& [index, value] : vec) value *= inv;
    }
    return vec;
}

TermVector transform(std::string_view text, const VectorizerModel& vectorizer) {
    TermVector out;
    for (const auto& [index, value] : transform_indexed(text, vectorizer))
        out.emplace(vectorizer.vocabulary[index], value);
    return out;
}

double LinearModel::class_weight(size_t cls, size_t column) const {
    if (is_binary_head()) return cls == 1 ? weights[0][column] : -weights[0][column];
    return weights[cls][column];
}

double LinearModel::class_bias(size_t cls) const {
    if (is_binary_head()) return cls == 1 ? biases[0] : -biases[0];
    return biases[cls];
}

namespace {

struct Head {
    std::vector<double> w;
    double b = 0.0;
};

double sparse_dot(const std::vector<double>& dense, const SparseVec& sparse) {
    double sum = 0.0;
    for (const auto& [index, value] : sparse) sum += dense[index] * value;
    return sum;
}

/// Pegasos-schedule subgradient descent on
///   (lambda/2)||w||^2 + (1/n) sum_i max(0, 1 - y_i (w.x_i + b)).
/// w carries the 1/(lambda t) rate with per-step (1 - 1/t) decay and a
/// projection onto the ball of radius 1/sqrt(lambda); the unregularized bias
/// uses the lambda-free 1/t rate, which keeps its early steps bounded.
/// Returns the epoch-end iterate with the lowest full objective (the "best
/// iterate" option of the Pegasos schedule); the kept objective sequence is
/// non-increasing by construction.
Head train_head(const std::vector<SparseVec>& xs, const std::vector<int>& ys, size_t dim,
                double lambda, int epochs, uint64_t seed, std::vector<double>* epoch_loss) {
    const size_t n = xs.size();
    std::vector<double> v(dim, 0.0);
    double scale = 1.0;
    double v_sq = 0.0;  // ||v||^2, maintained incrementally
    double b = 0.0;
    const double radius = 1.0 / std::sqrt(lambda);

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    SplitMix64 rng(seed);

    const auto objective = [&] {
        double hinge_sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double wx = scale * sparse_dot(v, xs[i]);
            hinge_sum += std::max(0.0, 1.0 - static_cast<double>(ys[i]) * (wx + b));
        }
        return 0.5 * lambda * scale * scale * v_sq + hinge_sum / static_cast<double>(n);
    };

    Head best;
    best.w.assign(dim, 0.0);
    double best_objective = objective();

    uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        for (uint32_t i : order) {
            ++t;
            const SparseVec& x = xs[i];
            const int y = ys[i];
            const double wx = scale * sparse_dot(v, x);
            const double margin = static_cast<double>(y) * (wx + b);

            if (t > 1) scale *= 1.0 - 1.0 / static_cast<double>(t);  // at t=1, w is zero
            if (scale < 1e-12) {  // fold the scale into v before it underflows
                for (auto& value : v) value *= scale;
                v_sq *= scale * scale;
                scale = 1.0;
            }
            if (margin < 1.0) {
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double step = eta * static_cast<double>(y) / scale;
                for (const auto& [index, value] : x) {
                    const double delta = step * value;
                    v_sq += 2.0 * v[index] * delta + delta * delta;
                    v[index] += delta;
                }
                b += static_cast<double>(y) / static_cast<double>(t);
            }
            const double w_norm = scale * std::sqrt(std::max(0.0, v_sq));
            if (w_norm > radius) scale *= radius / w_norm;
        }
        const double epoch_objective = objective();
        if (epoch_objective < best_objective) {
            best_objective = epoch_objective;
            for (size_t j = 0; j < dim; ++j) best.w[j] = scale * v[j];
            best.b = b;
        }
        if (epoch_loss) epoch_loss->push_back(best_objective);
    }
    return best;
}

std::string corpus_digest(const Corpus& train) {
    uint64_t h = fnv1a64("gatekeeper-train");
    for (const auto& s : train.samples) {
        h = fnv1a64(s.id, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(s.label ? *s.label : "", h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(s.description, h);
        h = fnv1a64("\x1e", h);
    }
    std::ostringstream out;
    out << std::hex;
    for (int i = 15; i >= 0; --i) out << ((h >> (4 * i)) & 0xf);
    return out.str();
}

}  // namespace

LinearModel train_linear(const Corpus& train, const TrainConfig& config,
                         TrainDiagnostics* diagnostics) {
    if (train.samples.empty()) throw Error(ErrorKind::Training, "empty training corpus");
    for (const auto& s : train.samples)
        if (!s.label)
            throw Error(ErrorKind::Training, "unlabeled sample \"" + s.id + "\" in training data");

    std::set<std::string> present;
    for (const auto& s : train.samples) present.insert(*s.label);
    if (present.size() < 2)
        throw Error(ErrorKind::Training, "training requires at least 2 classes with samples");

    VectorizerConfig vc;
    vc.min_document_frequency = config.min_document_frequency;
    vc.sublinear_tf = config.sublinear_tf;

    LinearModel model;
    model.taxonomy = train.taxonomy;
    model.train_config = config;
    model.vectorizer = fit_vectorizer(train, vc);
    model.training_data_digest = corpus_digest(train);

    const size_t n = train.samples.size();
    std::vector<SparseVec> xs(n);
    for (size_t i = 0; i < n; ++i)
        xs[i] = transform_indexed(train.samples[i].description, model.vectorizer);

    const size_t dim = model.vectorizer.dimensions();
    if (config.mode == TaskMode::Binary) {
        std::vector<int> ys(n);
        bool has_pos = false, has_neg = false;
        for (size_t i = 0; i < n; ++i) {
            const bool malicious =
                train.taxonomy.binary_projection(*train.samples[i].label) == "malicious";
            ys[i] = malicious ? 1 : -1;
            (malicious ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg)
            throw Error(ErrorKind::Training,
                        "binary training requires both benign and malicious samples");
        Head head = train_head(xs, ys, dim, config.regularization, config.epochs,
                               derive_seed(config.seed, "binary"),
                               diagnostics ? &diagnostics->epoch_loss : nullptr);
        model.classes = {"benign", "malicious"};
        model.weights = {std::move(head.w)};
        model.biases = {head.b};
    } else {
        model.classes = train.taxonomy.classes;
        for (const auto& cls : model.classes) {
            std::vector<int> ys(n);
            for (size_t i = 0; i < n; ++i) ys[i] = *train.samples[i].label == cls ? 1 : -1;
            Head head = train_head(xs, ys, dim, config.regularization, config.epochs,
                                   derive_seed(config.seed, cls),
                                   diagnostics ? &diagnostics->epoch_loss : nullptr);
            model.weights.push_back(std::move(head.w));
            model.biases.push_back(head.b);
        }
    }
    return model;
}

Verdict predict(std::string_view text, const LinearModel& model) {
    const SparseVec x = transform_indexed(text, model.vectorizer);
    Verdict verdict;
    verdict.scores.resize(model.classes.size());
    for (size_t c = 0; c < model.classes.size(); ++c) {
        double score = model.class_bias(c);
        for (const auto& [index, value] : x) score += model.class_weight(c, index) * value;
        verdict.scores[c] = score;
    }
    size_t best = 0;
    for (size_t c = 1; c < verdict.scores.size(); ++c)
        if (verdict.scores[c] > verdict.scores[best]) best = c;  // ties keep the lower index
    verdict.predicted_class = model.classes[best];
    verdict.binary = model.is_binary_head()
                         ? verdict.predicted_class
                         : model.taxonomy.binary_projection(verdict.predicted_class);
    return verdict;
}

std::vector<Attribution> attribute(std::string_view text, const LinearModel& model, int k) {
    if (k < 1) throw Error(ErrorKind::Input, "attribution k must be >= 1");
    const Verdict verdict = predict(text, model);
    size_t cls = 0;
    for (size_t c = 0; c < model.classes.size(); ++c)
        if (model.classes[c] == verdict.predicted_class) { cls = c; break; }

    std::vector<Attribution> contributions;
    for (const auto& [index, value] : transform_indexed(text, model.vectorizer))
        contributions.push_back(
            {model.vectorizer.vocabulary[index], model.class_weight(cls, index) * value});
    std::sort(contributions.begin(), contributions.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a.contribution), mb = std::abs(b.contribution);
        if (ma != mb) return ma > mb;
        return a.token < b.token;
    });
    if (contributions.size() > static_cast<size_t>(k)) contributions.resize(static_cast<size_t>(k));
    return contributions;
}

namespace {

const char* to_string(TaskMode mode) {
    return mode == TaskMode::Binary ? "binary" : "multiclass";
}

TaskMode task_mode_from_string(const std::string& s) {
    if (s == "binary") return TaskMode::Binary;
    if (s == "multiclass") return TaskMode::Multiclass;
    throw Error(ErrorKind::Parse, "unknown task mode \"" + s + "\"");
}

void check_finite(const LinearModel& model) {
    for (const auto& row : model.weights)
        for (double w : row)
            if (!std::isfinite(w)) throw Error(ErrorKind::Parse, "non-finite weight in model");
    for (double b : model.biases)
        if (!std::isfinite(b)) throw Error(ErrorKind::Parse, "non-finite bias in model");
}

}  // namespace

std::string serialize_model(const LinearModel& model) {
    check_finite(model);
    ordered_json doc;
    doc["format_version"] = model.format_version;
    doc["taxonomy"] = {{"classes", model.taxonomy.classes},
                       {"benign", model.taxonomy.benign_class}};
    doc["vectorizer"] = {
        {"config",
         {{"lowercase", model.vectorizer.config.lowercase},
          {"token_pattern", model.vectorizer.config.token_pattern},
          {"min_document_frequency", model.vectorizer.config.min_document_frequency},
          {"sublinear_tf", model.vectorizer.config.sublinear_tf}}},
        {"vocabulary", model.vectorizer.vocabulary},
        {"idf", model.vectorizer.idf}};
    doc["classes"] = model.classes;
    doc["weights"] = model.weights;
    doc["biases"] = model.biases;
    doc["train_config"] = {{"mode", to_string(model.train_config.mode)},
                           {"regularization", model.train_config.regularization},
                           {"epochs", model.train_config.epochs},
                           {"seed", model.train_config.seed},
                           {"sublinear_tf", model.train_config.sublinear_tf},
                           {"min_document_frequency", model.train_config.min_document_frequency}};
    doc["training_data_digest"] = model.training_data_digest;
    return doc.dump(2) + "\n";
}

LinearModel deserialize_model(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("model document: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Parse, "model document is not a JSON object");
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
        throw Error(ErrorKind::Parse, "model document has no format_version");
    const int version = doc["format_version"].get<int>();
    if (version != LinearModel::kFormatVersion)
        throw Error(ErrorKind::Incompatibility,
                    "model format_version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(LinearModel::kFormatVersion) + ")");

    try {
        LinearModel model;
        model.format_version = version;
        model.taxonomy.classes = doc.at("taxonomy").at("classes").get<std::vector<std::string>>();
        model.taxonomy.benign_class = doc.at("taxonomy").at("benign").get<std::string>();
        const auto& vec = doc.at("vectorizer");
        const auto& cfg = vec.at("config");
        model.vectorizer.config.lowercase = cfg.at("lowercase").get<bool>();
        model.vectorizer.config.token_pattern = cfg.at("token_pattern").get<std::string>();
        model.vectorizer.config.min_document_frequency =
            cfg.at("min_document_frequency").get<int>();
        model.vectorizer.config.sublinear_tf = cfg.at("sublinear_tf").get<bool>();
        model.vectorizer.vocabulary = vec.at("vocabulary").get<std::vector<std::string>>();
        model.vectorizer.idf = vec.at("idf").get<std::vector<double>>();
        for (uint32_t i = 0; i < model.vectorizer.vocabulary.size(); ++i)
            model.vectorizer.vocab_index.emplace(model.vectorizer.vocabulary[i], i);
        model.classes = doc.at("classes").get<std::vector<std::string>>();
        model.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
        model.biases = doc.at("biases").get<std::vector<double>>();
        const auto& tc = doc.at("train_config");
        model.train_config.mode = task_mode_from_string(tc.at("mode").get<std::string>());
        model.train_config.regularization = tc.at("regularization").get<double>();
        model.train_config.epochs = tc.at("epochs").get<int>();
        model.train_config.seed = tc.at("seed").get<uint64_t>();
        model.train_config.sublinear_tf = tc.at("sublinear_tf").get<bool>();
        model.train_config.min_document_frequency = tc.at("min_document_frequency").get<int>();
        model.training_data_digest = doc.at("training_data_digest").get<std::string>();

        const size_t dim = model.vectorizer.vocabulary.size();
        if (model.vectorizer.idf.size() != dim)
            throw Error(ErrorKind::Parse, "idf table does not match the vocabulary size");
        if (model.vectorizer.vocab_index.size() != dim)
            throw Error(ErrorKind::Parse, "vocabulary contains duplicate tokens");
        const size_t heads = model.weights.size();
        const bool binary_head = heads == 1 && model.classes.size() == 2;
        if (!binary_head && heads != model.classes.size())
            throw Error(ErrorKind::Parse, "weight rows do not match the class list");
        if (model.biases.size() != heads)
            throw Error(ErrorKind::Parse, "bias count does not match the weight rows");
        for (const auto& row : model.weights)
            if (row.size() != dim)
                throw Error(ErrorKind::Parse, "weight vector does not match the vocabulary size");
        check_finite(model);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("model document: ") + e.what());
    }
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write model file " + path.string());
    out << serialize_model(model);
    if (!out) throw Error(ErrorKind::Io, "failed writing model file " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open model file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return deserialize_model(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace gatekeeper::classifier
