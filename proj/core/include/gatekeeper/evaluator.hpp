// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gatekeeper/corpus.hpp"

namespace gatekeeper::classifier {
struct LinearModel;
}
namespace gatekeeper::rules {
struct RuleSet;
}

namespace gatekeeper::evaluator {

/// rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<int64_t>> counts;

    int64_t total() const;
    int64_t trace() const;
    int index_of(const std::string& cls) const;  // -1 if absent
    int64_t row_sum(size_t i) const;
    int64_t col_sum(size_t j) const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int64_t support = 0;
    // Division-by-zero convention: the value is reported as 0 and flagged.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

enum class Averaging { BinaryPositive, Weighted };

/// Headline precision/recall/f1 are the malicious-positive values for binary
/// reports and the support-weighted aggregates for multiclass reports.
struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Averaging averaging = Averaging::Weighted;
    std::map<std::string, ClassMetrics> per_class;
};

ConfusionMatrix build_confusion(const std::vector<std::string>& gold,
                                const std::vector<std::string>& pred,
                                const std::vector<std::string>& classes);

/// 2x2 only. Positive class is malicious by convention.
MetricsReport binary_metrics(const ConfusionMatrix& cm,
                             const std::string& positive_class = "malicious");

/// Per-class one-vs-rest metrics weighted by true-class support;
/// accuracy = trace/total. Requires >= 2 classes.
MetricsReport weighted_metrics(const ConfusionMatrix& cm);

enum class EvalMode { Binary, Multiclass };

struct Evaluation {
    ConfusionMatrix matrix;
    MetricsReport report;
};

/// Runs the predictor over every sample of `test` (all must be labeled and
/// none may carry a train split tag). Multiclass mode is rejected for rule
/// sets, which produce binary verdicts only.
Evaluation evaluate(const classifier::LinearModel& model, const Corpus& test, EvalMode mode);
Evaluation evaluate(const rules::RuleSet& ruleset, const Corpus& test, EvalMode mode);

enum class ReportFormat { Text, Csv, Json };

std::string render_report(const ConfusionMatrix& cm, const MetricsReport& report,
                          ReportFormat format);

/// Inverse of render_report(..., Json); used for report round-trips.
Evaluation parse_report_json(const std::string& json_text);

}  // namespace gatekeeper::evaluator
