// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatekeeper/classifier.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/rules.hpp"

namespace gatekeeper::evaluator {

using ordered_json = nlohmann::ordered_json;

int64_t ConfusionMatrix::total() const {
    int64_t sum = 0;
    for (const auto& row : counts)
        for (int64_t c : row) sum += c;
    return sum;
}

int64_t ConfusionMatrix::trace() const {
    int64_t sum = 0;
    for (size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

int ConfusionMatrix::index_of(const std::string& cls) const {
    for (size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == cls) return static_cast<int>(i);
    return -1;
}

int64_t ConfusionMatrix::row_sum(size_t i) const {
    return std::accumulate(counts[i].begin(), counts[i].end(), int64_t{0});
}

int64_t ConfusionMatrix::col_sum(size_t j) const {
    int64_t sum = 0;
    for (const auto& row : counts) sum += row[j];
    return sum;
}

ConfusionMatrix build_confusion(const std::vector<std::string>& gold,
                                const std::vector<std::string>& pred,
                                const std::vector<std::string>& classes) {
    if (gold.size() != pred.size())
        throw Error(ErrorKind::Input, "gold and prediction lists differ in length");
    if (classes.empty()) throw Error(ErrorKind::Input, "empty class list");

    ConfusionMatrix cm;
    cm.classes = classes;
    cm.counts.assign(classes.size(), std::vector<int64_t>(classes.size(), 0));
    for (size_t k = 0; k < gold.size(); ++k) {
        const int i = cm.index_of(gold[k]);
        const int j = cm.index_of(pred[k]);
        if (i < 0) throw Error(ErrorKind::Input, "unknown gold label \"" + gold[k] + "\"");
        if (j < 0) throw Error(ErrorKind::Input, "unknown predicted label \"" + pred[k] + "\"");
        cm.counts[static_cast<size_t>(i)][static_cast<size_t>(j)] += 1;
    }
    return cm;
}

namespace {

void check_shape(const ConfusionMatrix& cm) {
    if (cm.classes.empty() || cm.counts.size() != cm.classes.size())
        throw Error(ErrorKind::Input, "malformed confusion matrix");
    for (const auto& row : cm.counts) {
        if (row.size() != cm.classes.size())
            throw Error(ErrorKind::Input, "confusion matrix is not square");
        for (int64_t c : row)
            if (c < 0) throw Error(ErrorKind::Input, "negative confusion count");
    }
}

ClassMetrics one_vs_rest(const ConfusionMatrix& cm, size_t i) {
    ClassMetrics m;
    const int64_t tp = cm.counts[i][i];
    const int64_t row = cm.row_sum(i);
    const int64_t col = cm.col_sum(i);
    m.support = row;
    if (col > 0) {
        m.precision = static_cast<double>(tp) / static_cast<double>(col);
    } else {
        m.precision_undefined = true;
    }
    if (row > 0) {
        m.recall = static_cast<double>(tp) / static_cast<double>(row);
    } else {
        m.recall_undefined = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1_undefined = true;
    }
    return m;
}

}  // namespace

MetricsReport binary_metrics(const ConfusionMatrix& cm, const std::string& positive_class) {
    check_shape(cm);
    if (cm.classes.size() != 2)
        throw Error(ErrorKind::Input, "binary metrics require a 2x2 matrix");
    const int p = cm.index_of(positive_class);
    if (p < 0)
        throw Error(ErrorKind::Input, "positive class \"" + positive_class + "\" not in matrix");
    const int64_t total = cm.total();
    if (total == 0) throw Error(ErrorKind::Input, "empty confusion matrix");

    MetricsReport report;
    report.averaging = Averaging::BinaryPositive;
    report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    for (size_t i = 0; i < 2; ++i) report.per_class[cm.classes[i]] = one_vs_rest(cm, i);
    const ClassMetrics& positive = report.per_class[positive_class];
    report.precision = positive.precision;
    report.recall = positive.recall;
    report.f1 = positive.f1;
    return report;
}

MetricsReport weighted_metrics(const ConfusionMatrix& cm) {
    check_shape(cm);
    if (cm.classes.size() < 2)
        throw Error(ErrorKind::Input, "weighted metrics require at least 2 classes");
    const int64_t total = cm.total();
    if (total == 0) throw Error(ErrorKind::Input, "empty confusion matrix");

    MetricsReport report;
    report.averaging = Averaging::Weighted;
    report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    for (size_t i = 0; i < cm.classes.size(); ++i) {
        const ClassMetrics m = one_vs_rest(cm, i);
        const double weight = static_cast<double>(m.support) / static_cast<double>(total);
        report.precision += weight * m.precision;
        report.recall += weight * m.recall;
        report.f1 += weight * m.f1;
        report.per_class[cm.classes[i]] = m;
    }
    return report;
}

namespace {

void check_test_corpus(const Corpus& test) {
    if (test.samples.empty()) throw Error(ErrorKind::Input, "empty test corpus");
    for (const auto& s : test.samples) {
        if (!s.label) throw Error(ErrorKind::Input, "unlabeled sample \"" + s.id + "\" in test corpus");
        auto it = test.split.find(s.id);
        if (it != test.split.end() && it->second == SplitPart::Train)
            throw Error(ErrorKind::Precondition,
                        "sample \"" + s.id + "\" carries a train split tag");
    }
}

Evaluation finish(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                  const std::vector<std::string>& classes, EvalMode mode) {
    Evaluation eval;
    eval.matrix = build_confusion(gold, pred, classes);
    eval.report = mode == EvalMode::Binary ? binary_metrics(eval.matrix)
                                           : weighted_metrics(eval.matrix);
    return eval;
}

}  // namespace

Evaluation evaluate(const classifier::LinearModel& model, const Corpus& test, EvalMode mode) {
    check_test_corpus(test);
    if (mode == EvalMode::Multiclass && model.is_binary_head())
        throw Error(ErrorKind::Mode, "a binary model cannot be evaluated in multiclass mode");

    std::vector<std::string> gold, pred;
    gold.reserve(test.samples.size());
    pred.reserve(test.samples.size());
    for (const auto& s : test.samples) {
        const classifier::Verdict v = classifier::predict(s.description, model);
        if (mode == EvalMode::Binary) {
            gold.push_back(test.taxonomy.binary_projection(*s.label));
            pred.push_back(v.binary);
        } else {
            gold.push_back(*s.label);
            pred.push_back(v.predicted_class);
        }
    }
    const std::vector<std::string> classes =
        mode == EvalMode::Binary ? std::vector<std::string>{"benign", "malicious"}
                                 : test.taxonomy.classes;
    return finish(gold, pred, classes, mode);
}

Evaluation evaluate(const rules::RuleSet& ruleset, const Corpus& test, EvalMode mode) {
    if (mode == EvalMode::Multiclass)
        throw Error(ErrorKind::Mode, "rule sets produce binary verdicts only");
    check_test_corpus(test);

    std::vector<std::string> gold, pred;
    gold.reserve(test.samples.size());
    pred.reserve(test.samples.size());
    for (const auto& s : test.samples) {
        gold.push_back(test.taxonomy.binary_projection(*s.label));
        pred.push_back(rules::rules_verdict(s.description, ruleset));
    }
    return finish(gold, pred, {"benign", "malicious"}, EvalMode::Binary);
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string full_precision(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string percent(double value, bool flagged) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.2f%%", 100.0 * value);
    std::string out = buffer;
    if (flagged) out += "*";
    return out;
}

std::vector<std::string> undefined_list(const ClassMetrics& m) {
    std::vector<std::string> out;
    if (m.precision_undefined) out.push_back("precision");
    if (m.recall_undefined) out.push_back("recall");
    if (m.f1_undefined) out.push_back("f1");
    return out;
}

std::string render_text(const ConfusionMatrix& cm, const MetricsReport& report) {
    size_t name_width = 4;  // "true"
    for (const auto& cls : cm.classes) name_width = std::max(name_width, cls.size());
    size_t cell_width = 9;
    for (const auto& cls : cm.classes) cell_width = std::max(cell_width, cls.size() + 2);

    std::ostringstream out;
    out << "confusion matrix (rows = true, columns = predicted)\n";
    out << std::string(name_width, ' ');
    for (const auto& cls : cm.classes) {
        out << std::string(cell_width - cls.size(), ' ') << cls;
    }
    out << "\n";
    for (size_t i = 0; i < cm.classes.size(); ++i) {
        out << cm.classes[i] << std::string(name_width - cm.classes[i].size(), ' ');
        for (size_t j = 0; j < cm.classes.size(); ++j) {
            const std::string cell = std::to_string(cm.counts[i][j]);
            out << std::string(cell_width - cell.size(), ' ') << cell;
        }
        out << "\n";
    }

    const std::string prefix = report.averaging == Averaging::Weighted ? "weighted " : "";
    auto metric_line = [&](const std::string& label, double value) {
        std::string full = label == "accuracy" ? label : prefix + label;
        full.resize(20, ' ');
        out << full << percent(value, false) << "\n";
    };
    out << "\n";
    metric_line("accuracy", report.accuracy);
    metric_line("precision", report.precision);
    metric_line("recall", report.recall);
    metric_line("f1", report.f1);

    out << "\n";
    out << "class" << std::string(name_width > 5 ? name_width - 5 : 1, ' ')
        << "  precision     recall         f1    support\n";
    bool any_flag = false;
    for (const auto& cls : cm.classes) {
        const ClassMetrics& m = report.per_class.at(cls);
        any_flag = any_flag || m.precision_undefined || m.recall_undefined || m.f1_undefined;
        out << cls << std::string(name_width - cls.size(), ' ');
        for (const auto& [value, flag] :
             {std::pair<double, bool>{m.precision, m.precision_undefined},
              {m.recall, m.recall_undefined},
              {m.f1, m.f1_undefined}}) {
            const std::string cell = percent(value, flag);
            out << std::string(11 > cell.size() ? 11 - cell.size() : 1, ' ') << cell;
        }
        const std::string support = std::to_string(m.support);
        out << std::string(11 > support.size() ? 11 - support.size() : 1, ' ') << support << "\n";
    }
    if (any_flag) out << "* undefined (zero denominator), reported as 0\n";
    return out.str();
}

std::string render_csv(const ConfusionMatrix& cm, const MetricsReport& report) {
    std::ostringstream out;
    out << "matrix";
    for (const auto& cls : cm.classes) out << "," << csv_escape(cls);
    out << "\n";
    for (size_t i = 0; i < cm.classes.size(); ++i) {
        out << csv_escape(cm.classes[i]);
        for (size_t j = 0; j < cm.classes.size(); ++j) out << "," << cm.counts[i][j];
        out << "\n";
    }
    out << "\nmetric,value\n";
    out << "averaging," << (report.averaging == Averaging::Weighted ? "weighted" : "malicious-positive") << "\n";
    out << "accuracy," << full_precision(report.accuracy) << "\n";
    out << "precision," << full_precision(report.precision) << "\n";
    out << "recall," << full_precision(report.recall) << "\n";
    out << "f1," << full_precision(report.f1) << "\n";
    out << "\nclass,precision,recall,f1,support,undefined\n";
    for (const auto& cls : cm.classes) {
        const ClassMetrics& m = report.per_class.at(cls);
        out << csv_escape(cls) << "," << full_precision(m.precision) << ","
            << full_precision(m.recall) << "," << full_precision(m.f1) << "," << m.support << ",";
        const auto flags = undefined_list(m);
        for (size_t i = 0; i < flags.size(); ++i) out << (i ? "|" : "") << flags[i];
        out << "\n";
    }
    return out.str();
}

std::string render_json(const ConfusionMatrix& cm, const MetricsReport& report) {
    ordered_json doc;
    doc["matrix"] = {{"classes", cm.classes}, {"counts", cm.counts}};
    ordered_json metrics;
    metrics["accuracy"] = report.accuracy;
    metrics["averaging"] =
        report.averaging == Averaging::Weighted ? "weighted" : "malicious-positive";
    metrics["weighted"] = {{"precision", report.precision},
                           {"recall", report.recall},
                           {"f1", report.f1}};
    ordered_json per_class = ordered_json::object();
    for (const auto& cls : cm.classes) {
        const ClassMetrics& m = report.per_class.at(cls);
        per_class[cls] = {{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"support", m.support},
                          {"undefined", undefined_list(m)}};
    }
    metrics["per_class"] = std::move(per_class);
    doc["metrics"] = std::move(metrics);
    return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const ConfusionMatrix& cm, const MetricsReport& report,
                          ReportFormat format) {
    check_shape(cm);
    switch (format) {
        case ReportFormat::Text: return render_text(cm, report);
        case ReportFormat::Csv: return render_csv(cm, report);
        case ReportFormat::Json: return render_json(cm, report);
    }
    throw Error(ErrorKind::Input, "unknown report format");
}

Evaluation parse_report_json(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("report document: ") + e.what());
    }
    try {
        Evaluation eval;
        eval.matrix.classes = doc.at("matrix").at("classes").get<std::vector<std::string>>();
        eval.matrix.counts =
            doc.at("matrix").at("counts").get<std::vector<std::vector<int64_t>>>();
        const auto& metrics = doc.at("metrics");
        eval.report.accuracy = metrics.at("accuracy").get<double>();
        eval.report.averaging = metrics.at("averaging").get<std::string>() == "weighted"
                                    ? Averaging::Weighted
                                    : Averaging::BinaryPositive;
        eval.report.precision = metrics.at("weighted").at("precision").get<double>();
        eval.report.recall = metrics.at("weighted").at("recall").get<double>();
        eval.report.f1 = metrics.at("weighted").at("f1").get<double>();
        for (const auto& [cls, entry] : metrics.at("per_class").items()) {
            ClassMetrics m;
            m.precision = entry.at("precision").get<double>();
            m.recall = entry.at("recall").get<double>();
            m.f1 = entry.at("f1").get<double>();
            m.support = entry.at("support").get<int64_t>();
            for (const auto& flag : entry.at("undefined")) {
                const std::string f = flag.get<std::string>();
                if (f == "precision") m.precision_undefined = true;
                if (f == "recall") m.recall_undefined = true;
                if (f == "f1") m.f1_undefined = true;
            }
            eval.report.per_class[cls] = m;
        }
        check_shape(eval.matrix);
        return eval;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("report document: ") + e.what());
    }
}

}  // namespace gatekeeper::evaluator
