// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

// gatekeeper: corpus tooling, training, evaluation and the MCP proxy in one
// binary. Exit codes: 0 success (scan: benign), 1 operational error, 2 usage
// error, 3 scan found the input malicious.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gatekeeper/analyzer.hpp"
#include "gatekeeper/augmenter.hpp"
#include "gatekeeper/classifier.hpp"
#include "gatekeeper/corpus.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/evaluator.hpp"
#include "gatekeeper/extractor.hpp"
#include "gatekeeper/gateway.hpp"
#include "gatekeeper/rules.hpp"

namespace {

using namespace gatekeeper;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMalicious = 3;

struct ExtractArgs {
    std::string root;
    std::string patterns;
    std::string label;
    std::string benign = "benign";
    std::string out;
};

int run_extract(const ExtractArgs& args) {
    const auto patterns = args.patterns.empty() ? extractor::default_patterns()
                                                : extractor::load_patterns(args.patterns);
    std::vector<extractor::ExtractedTool> tools;
    size_t warning_count = 0;
    const auto files = extractor::scan_tree(args.root);
    for (const auto& file : files) {
        auto result = extractor::extract_tools(file, patterns);
        for (const auto& w : result.warnings) {
            std::cerr << "warning: " << w << "\n";
            ++warning_count;
        }
        for (auto& tool : result.tools) tools.push_back(std::move(tool));
    }

    LabelTaxonomy taxonomy;
    taxonomy.classes.push_back(args.benign);
    if (args.label != args.benign) taxonomy.classes.push_back(args.label);
    taxonomy.benign_class = args.benign;

    Corpus corpus = extractor::to_corpus(tools, args.label, taxonomy);
    save_corpus(corpus, args.out);
    std::cerr << "extracted " << tools.size() << " tool description(s) from " << files.size()
              << " file(s); " << corpus.samples.size() << " unique sample(s) written to "
              << args.out;
    if (warning_count) std::cerr << " (" << warning_count << " warning(s))";
    std::cerr << "\n";
    return kExitOk;
}

struct AugmentArgs {
    std::string in;
    std::string out;
    std::string providers;
    std::string thesaurus;
    double max_sim = 0.8;
    uint64_t seed = 0;
};

int run_augment(const AugmentArgs& args) {
    Corpus corpus = load_corpus(args.in);

    augmenter::Thesaurus table;
    const augmenter::Thesaurus* table_ptr = nullptr;
    if (!args.thesaurus.empty()) {
        table = augmenter::load_thesaurus(args.thesaurus);
        table_ptr = &table;
    }

    augmenter::AugmentConfig config;
    config.max_similarity = args.max_sim;
    config.seed = args.seed;
    if (args.providers.empty()) {
        if (table_ptr) {
            for (const char* pivot : {"ar", "zh", "ja", "ko"})
                config.providers.push_back(
                    std::make_shared<augmenter::SyntheticPivotProvider>(pivot, args.seed, table_ptr));
        } else {
            config.providers = augmenter::default_providers(args.seed);
        }
    } else {
        config.providers = augmenter::load_providers(args.providers, args.seed, table_ptr);
    }

    augmenter::AugmentStats stats;
    Corpus out;
    if (corpus.split.empty()) {
        out = augmenter::augment_corpus(corpus, config, &stats);
    } else {
        // augment the train partition, then carry the new rows back into the
        // full corpus so the test partition stays untouched
        Corpus train = subset(corpus, SplitPart::Train);
        Corpus augmented_train = augmenter::augment_corpus(train, config, &stats);
        out = corpus;
        for (const auto& s : augmented_train.samples) {
            if (s.origin != Origin::Augmented) continue;
            out.samples.push_back(s);
            out.split[s.id] = SplitPart::Train;
        }
        out.validate();
    }

    for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
    save_corpus(out, args.out);
    std::cerr << "augmented " << stats.added << " sample(s) (" << stats.rejected_similarity
              << " rejected by similarity, " << stats.rejected_duplicate
              << " duplicates); corpus " << corpus.samples.size() << " -> " << out.samples.size()
              << "\n";
    return kExitOk;
}

struct AnalyzeArgs {
    std::string in;
    bool stopwords = false;
    std::string out_matrix;
    std::optional<double> merge_threshold;
    std::string merge_out;
    std::string apply_merge_file;
    std::string out;
};

int run_analyze(const AnalyzeArgs& args) {
    Corpus corpus = load_corpus(args.in);

    if (!args.apply_merge_file.empty()) {
        if (args.out.empty())
            throw Error(ErrorKind::Input, "--apply-merge requires --out for the merged corpus");
        const MergeMap merge_map = analyzer::load_merge_override(args.apply_merge_file);
        Corpus merged = apply_merge(corpus, merge_map);
        save_corpus(merged, args.out);
        std::cerr << "applied merge: " << corpus.taxonomy.classes.size() << " -> "
                  << merged.taxonomy.classes.size() << " classes\n";
        return kExitOk;
    }

    const analyzer::SimilarityMatrix matrix = analyzer::similarity_matrix(corpus, args.stopwords);
    if (args.out_matrix.empty()) {
        std::cout << analyzer::matrix_to_csv(matrix);
    } else {
        analyzer::save_matrix_csv(matrix, args.out_matrix);
        std::cerr << "similarity matrix written to " << args.out_matrix << "\n";
    }

    if (args.merge_threshold) {
        const MergeMap proposal = analyzer::propose_merges(matrix, *args.merge_threshold,
                                                           corpus.taxonomy.benign_class);
        std::ostringstream rendered;
        for (const auto& [from, to] : proposal)
            if (from != to) rendered << from << " -> " << to << "\n";
        if (args.merge_out.empty()) {
            std::cout << rendered.str();
        } else {
            std::ofstream out(args.merge_out, std::ios::binary);
            if (!out) throw Error(ErrorKind::Io, "cannot write " + args.merge_out);
            out << rendered.str();
            std::cerr << "merge proposal written to " << args.merge_out << "\n";
        }
    }
    return kExitOk;
}

struct SplitArgs {
    std::string in;
    std::string out;
    double test_frac = 0.1;
    uint64_t seed = 0;
};

int run_split(const SplitArgs& args) {
    Corpus corpus = load_corpus(args.in);
    Corpus split = stratified_split(corpus, args.test_frac, args.seed);
    save_corpus(split, args.out);
    size_t test_count = 0;
    for (const auto& [id, part] : split.split)
        if (part == SplitPart::Test) ++test_count;
    std::cerr << "split " << split.samples.size() << " sample(s): " << test_count << " test, "
              << (split.samples.size() - test_count) << " train\n";
    return kExitOk;
}

struct TrainArgs {
    std::string in;
    std::string mode = "binary";
    std::string out_model;
    double lambda = 1e-4;
    int epochs = 200;
    uint64_t seed = 0;
    bool sublinear_tf = false;
    int min_df = 1;
};

int run_train(const TrainArgs& args) {
    Corpus corpus = load_corpus(args.in);
    Corpus train = corpus.split.empty() ? corpus : subset(corpus, SplitPart::Train);

    classifier::TrainConfig config;
    config.mode =
        args.mode == "binary" ? classifier::TaskMode::Binary : classifier::TaskMode::Multiclass;
    config.regularization = args.lambda;
    config.epochs = args.epochs;
    config.seed = args.seed;
    config.sublinear_tf = args.sublinear_tf;
    config.min_document_frequency = args.min_df;

    classifier::TrainDiagnostics diagnostics;
    const classifier::LinearModel model = classifier::train_linear(train, config, &diagnostics);
    classifier::save_model(model, args.out_model);
    std::cerr << "trained " << args.mode << " model on " << train.samples.size()
              << " sample(s), vocabulary " << model.vectorizer.dimensions();
    if (!diagnostics.epoch_loss.empty())
        std::cerr << ", final objective " << diagnostics.epoch_loss.back();
    std::cerr << "; written to " << args.out_model << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string rules;
    std::string in;
    std::string mode = "binary";
    std::string format = "text";
};

int run_eval(const EvalArgs& args) {
    Corpus corpus = load_corpus(args.in);
    Corpus test = corpus.split.empty() ? corpus : subset(corpus, SplitPart::Test);
    const evaluator::EvalMode mode =
        args.mode == "binary" ? evaluator::EvalMode::Binary : evaluator::EvalMode::Multiclass;

    evaluator::Evaluation evaluation;
    if (!args.model.empty()) {
        const classifier::LinearModel model = classifier::load_model(args.model);
        evaluation = evaluator::evaluate(model, test, mode);
    } else {
        const rules::RuleSet ruleset = rules::load_ruleset(args.rules);
        evaluation = evaluator::evaluate(ruleset, test, mode);
    }

    const evaluator::ReportFormat format = args.format == "text" ? evaluator::ReportFormat::Text
                                           : args.format == "csv" ? evaluator::ReportFormat::Csv
                                                                  : evaluator::ReportFormat::Json;
    std::cout << evaluator::render_report(evaluation.matrix, evaluation.report, format);
    return kExitOk;
}

struct ScanArgs {
    std::string model;
    std::string rules;
    std::string text;
    std::string file;
    int top = 10;
};

int run_scan(const ScanArgs& args) {
    std::string description = args.text;
    if (!args.file.empty()) {
        std::ifstream in(args.file, std::ios::binary);
        if (!in) throw Error(ErrorKind::Io, "cannot open " + args.file);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        description = buffer.str();
    }

    ordered_json verdict_doc;
    bool malicious = false;

    std::optional<classifier::LinearModel> model;
    if (!args.model.empty()) model = classifier::load_model(args.model);
    std::optional<rules::RuleSet> ruleset;
    if (!args.rules.empty()) ruleset = rules::load_ruleset(args.rules);

    if (ruleset) {
        ordered_json matched = ordered_json::array();
        for (const auto& match : rules::scan(description, *ruleset)) {
            matched.push_back({{"rule", match.rule}, {"severity", rules::to_string(match.severity)}});
            if (match.severity != rules::Severity::Info) malicious = true;
        }
        verdict_doc["matched_rules"] = std::move(matched);
    }
    if (model) {
        const classifier::Verdict verdict = classifier::predict(description, *model);
        verdict_doc["predicted_class"] = verdict.predicted_class;
        verdict_doc["binary"] = verdict.binary;
        ordered_json scores = ordered_json::object();
        for (size_t i = 0; i < model->classes.size(); ++i)
            scores[model->classes[i]] = verdict.scores[i];
        verdict_doc["scores"] = std::move(scores);
        ordered_json attributions = ordered_json::array();
        for (const auto& a : classifier::attribute(description, *model, args.top))
            attributions.push_back({{"token", a.token}, {"contribution", a.contribution}});
        verdict_doc["attributions"] = std::move(attributions);
        if (verdict.binary == "malicious") malicious = true;
    }
    verdict_doc["verdict"] = malicious ? "malicious" : "benign";
    std::cout << verdict_doc.dump(2) << "\n";
    return malicious ? kExitMalicious : kExitOk;
}

struct ProxyArgs {
    std::string model;
    std::string rules;
    std::string policy;
    std::vector<std::string> server_cmd;
    std::string tcp;
};

int run_proxy_cmd(const ProxyArgs& args) {
    gateway::PolicyConfig policy;
    if (!args.policy.empty()) policy = gateway::load_policy(args.policy);

    std::optional<classifier::LinearModel> model;
    if (!args.model.empty()) model = classifier::load_model(args.model);
    std::optional<rules::RuleSet> ruleset;
    if (!args.rules.empty()) ruleset = rules::load_ruleset(args.rules);

    if (args.rules.empty() && args.policy.empty()) policy.use_rules = false;
    if (!args.rules.empty() && args.policy.empty()) policy.use_rules = true;
    if (policy.use_model && !model)
        std::cerr << "warning: use_model is enabled but no --model was given; "
                     "classification will fail closed and block tools\n";
    if (policy.use_rules && !ruleset)
        std::cerr << "warning: use_rules is enabled but no --rules was given; "
                     "classification will fail closed and block tools\n";

    gateway::ProxyEndpoints endpoints;
    endpoints.server_cmd = args.server_cmd;
    endpoints.tcp_address = args.tcp;
    return gateway::run_proxy(endpoints, model ? &*model : nullptr,
                              ruleset ? &*ruleset : nullptr, policy);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCP tool-description security gateway and training pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "gatekeeper.conf", "Read options from a key=value config file");

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "Scan a source tree for MCP tool descriptions");
    extract->add_option("--root", extract_args.root, "Source tree to scan")
        ->required()
        ->check(CLI::ExistingDirectory);
    extract->add_option("--patterns", extract_args.patterns,
                        "Pattern file (defaults to the built-in pack)")
        ->check(CLI::ExistingFile);
    extract->add_option("--label", extract_args.label, "Class label for extracted samples")
        ->required();
    extract->add_option("--benign", extract_args.benign, "Benign class name (default: benign)");
    extract->add_option("--out", extract_args.out, "Output corpus (JSONL)")->required();

    AugmentArgs augment_args;
    auto* augment = app.add_subcommand("augment", "Expand a training corpus with paraphrases");
    augment->add_option("--in", augment_args.in, "Input corpus")->required()->check(CLI::ExistingFile);
    augment->add_option("--out", augment_args.out, "Output corpus")->required();
    augment->add_option("--providers", augment_args.providers, "Provider config file")
        ->check(CLI::ExistingFile);
    augment->add_option("--thesaurus", augment_args.thesaurus,
                        "Thesaurus table for the built-in providers (word<TAB>synonym)")
        ->check(CLI::ExistingFile);
    augment->add_option("--max-sim", augment_args.max_sim,
                        "Reject candidates with similarity >= this (default 0.8)");
    augment->add_option("--seed", augment_args.seed, "Seed for the deterministic providers");

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "Inter-class cosine similarity and merges");
    analyze->add_option("--in", analyze_args.in, "Input corpus")->required()->check(CLI::ExistingFile);
    analyze->add_flag("--stopwords", analyze_args.stopwords, "Remove stopwords before analysis");
    analyze->add_option("--out-matrix", analyze_args.out_matrix, "Write the matrix CSV here");
    analyze->add_option("--merge-threshold", analyze_args.merge_threshold,
                        "Propose merges above this similarity");
    analyze->add_option("--merge-out", analyze_args.merge_out, "Write the merge proposal here");
    analyze->add_option("--apply-merge", analyze_args.apply_merge_file,
                        "Apply a merge override file instead of analyzing")
        ->check(CLI::ExistingFile);
    analyze->add_option("--out", analyze_args.out, "Merged corpus output (with --apply-merge)");

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "Assign a stratified train/test split");
    split_cmd->add_option("--in", split_args.in, "Input corpus")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--test-frac", split_args.test_frac, "Test fraction (default 0.1)");
    split_cmd->add_option("--seed", split_args.seed, "Split seed");
    split_cmd->add_option("--out", split_args.out, "Output corpus")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train the TF-IDF linear classifier");
    train->add_option("--in", train_args.in, "Training corpus")->required()->check(CLI::ExistingFile);
    train->add_option("--mode", train_args.mode, "binary or multiclass (default binary)")
        ->check(CLI::IsMember({"binary", "multiclass"}));
    train->add_option("--out-model", train_args.out_model, "Model artifact path")->required();
    train->add_option("--lambda", train_args.lambda, "Regularization strength (default 1e-4)");
    train->add_option("--epochs", train_args.epochs, "Training epochs (default 200)");
    train->add_option("--seed", train_args.seed, "Training seed");
    train->add_flag("--sublinear-tf", train_args.sublinear_tf, "Use 1+ln(tf) term frequencies");
    train->add_option("--min-df", train_args.min_df, "Minimum document frequency (default 1)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a model or rule pack on a test corpus");
    auto* eval_model = eval->add_option("--model", eval_args.model, "Model artifact");
    auto* eval_rules = eval->add_option("--rules", eval_args.rules, "Rule pack");
    eval->add_option("--in", eval_args.in, "Test corpus")->required()->check(CLI::ExistingFile);
    eval->add_option("--mode", eval_args.mode, "binary or multiclass (default binary)")
        ->check(CLI::IsMember({"binary", "multiclass"}));
    eval->add_option("--format", eval_args.format, "text, csv or json (default text)")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    eval_model->excludes(eval_rules);

    ScanArgs scan_args;
    auto* scan = app.add_subcommand("scan", "Classify one tool description");
    scan->add_option("--model", scan_args.model, "Model artifact")->check(CLI::ExistingFile);
    scan->add_option("--rules", scan_args.rules, "Rule pack")->check(CLI::ExistingFile);
    auto* scan_text = scan->add_option("--text", scan_args.text, "Description text");
    auto* scan_file = scan->add_option("--file", scan_args.file, "Read the description from a file");
    scan->add_option("--top", scan_args.top, "Attributions to report (default 10)");
    scan_text->excludes(scan_file);

    ProxyArgs proxy_args;
    auto* proxy = app.add_subcommand("proxy", "Run the MCP interception proxy on stdio");
    proxy->add_option("--model", proxy_args.model, "Model artifact")->check(CLI::ExistingFile);
    proxy->add_option("--rules", proxy_args.rules, "Rule pack")->check(CLI::ExistingFile);
    proxy->add_option("--policy", proxy_args.policy, "Policy file (key=value)")
        ->envname("GATEKEEPER_POLICY");
    auto* server_cmd = proxy->add_option("--server-cmd", proxy_args.server_cmd,
                                         "Server command to spawn (argv...)");
    server_cmd->expected(-1);
    auto* tcp = proxy->add_option("--tcp", proxy_args.tcp, "Connect to the server at host:port");
    server_cmd->excludes(tcp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and a pointer to --help on stderr
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(extract)) return run_extract(extract_args);
        if (app.got_subcommand(augment)) return run_augment(augment_args);
        if (app.got_subcommand(analyze)) return run_analyze(analyze_args);
        if (app.got_subcommand(split_cmd)) return run_split(split_args);
        if (app.got_subcommand(train)) return run_train(train_args);
        if (app.got_subcommand(eval)) {
            if (eval_args.model.empty() == eval_args.rules.empty()) {
                std::cerr << "eval: exactly one of --model or --rules is required\n";
                return kExitUsage;
            }
            if (!eval_args.rules.empty() && eval_args.mode == "multiclass") {
                std::cerr << "eval: rule packs produce binary verdicts only; "
                             "--mode multiclass requires --model\n";
                return kExitUsage;
            }
            return run_eval(eval_args);
        }
        if (app.got_subcommand(scan)) {
            if (scan_args.model.empty() && scan_args.rules.empty()) {
                std::cerr << "scan: at least one of --model or --rules is required\n";
                return kExitUsage;
            }
            if (scan_args.text.empty() && scan_args.file.empty()) {
                std::cerr << "scan: one of --text or --file is required\n";
                return kExitUsage;
            }
            return run_scan(scan_args);
        }
        if (app.got_subcommand(proxy)) {
            if (proxy_args.server_cmd.empty() == proxy_args.tcp.empty()) {
                std::cerr << "proxy: exactly one of --server-cmd or --tcp is required\n";
                return kExitUsage;
            }
            return run_proxy_cmd(proxy_args);
        }
    } catch (const Error& e) {
        std::cerr << "gatekeeper: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "gatekeeper: unexpected error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
