#include "dsl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsl/benchmark.hpp"
#include "dsl/cross_validation.hpp"
#include "dsl/data_io.hpp"
#include "dsl/deep_ensemble.hpp"
#include "dsl/error.hpp"
#include "dsl/metrics.hpp"
#include "dsl/parallel.hpp"
#include "dsl/random.hpp"

namespace dsl::cli {
namespace {

struct UsageError : Error {
    using Error::Error;
};

enum class ReportFormat { table, csv };

struct Options {
    std::string data;
    std::string train_path;
    std::string test_path;
    std::string label_col = "label";
    bool label_col_given = false;
    bool no_header = false;
    char delimiter = ',';
    std::string out;
    std::string model;
    std::uint64_t seed = 0;
    std::size_t folds = 3;
    std::size_t max_iterations = 20;
    std::string learners = "lr,knn,rf,et,gbt";
    std::string mode = "deep";
    bool retrain_full = false;
    std::optional<std::size_t> workers;
    std::string format = "table";
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t vocab_size = 2000;
};

std::size_t resolve_workers(const Options& o) { return o.workers.value_or(workers_from_environment()); }

ReportFormat report_format(const Options& o) {
    return o.format == "csv" ? ReportFormat::csv : ReportFormat::table;
}

std::vector<LearnerSpec> parse_roster(const std::string& list) {
    std::vector<LearnerSpec> roster;
    std::stringstream stream(list);
    std::string name;
    while (std::getline(stream, name, ',')) {
        if (name.empty()) continue;
        const auto kind = parse_learner_kind(name);
        if (!kind) throw UsageError("unknown learner '" + name + "' (expected lr, knn, rf, et, gbt)");
        roster.push_back(LearnerSpec::defaults(*kind));
    }
    if (roster.empty()) throw UsageError("--learners is empty");
    return roster;
}

TrainConfig make_config(const Options& o) {
    TrainConfig config;
    config.folds = o.folds;
    config.max_iterations = o.max_iterations;
    config.roster = parse_roster(o.learners);
    config.retrain_full = o.retrain_full;
    config.seed = o.seed;
    const auto mode = parse_mode(o.mode);
    if (!mode) throw UsageError("unknown mode '" + o.mode + "'");
    config.mode = *mode;
    config.workers = resolve_workers(o);
    try {
        config.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return config;
}

// A data argument is either "images,labels" (IDX pair), a .txt/.tsv
// "label<TAB>text" file, or a CSV file.
enum class SourceKind { csv, idx, text };

SourceKind source_kind(const std::string& path) {
    if (path.find(',') != std::string::npos) return SourceKind::idx;
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".txt" || ext == ".tsv") return SourceKind::text;
    return SourceKind::csv;
}

std::pair<std::string, std::string> split_pair(const std::string& arg) {
    const auto comma = arg.find(',');
    return {arg.substr(0, comma), arg.substr(comma + 1)};
}

/// Loads CSV or IDX data. `classes` fixes the class encoding (for data
/// scored against an existing model) when non-empty.
Dataset load_numeric(const std::string& arg, const Options& o, bool labeled,
                     const std::vector<std::string>& classes) {
    switch (source_kind(arg)) {
        case SourceKind::idx: {
            const auto [images, labels] = split_pair(arg);
            std::optional<int> j;
            if (!classes.empty()) j = static_cast<int>(classes.size());
            return load_idx(images, labels, j);
        }
        case SourceKind::text:
            throw UsageError("text input is only supported by the benchmark command");
        case SourceKind::csv: break;
    }
    CsvOptions csv;
    csv.label_column = labeled ? o.label_col : std::string();
    csv.has_header = !o.no_header;
    csv.delimiter = o.delimiter;
    if (!classes.empty()) csv.known_classes = classes;
    return load_csv(arg, csv);
}

std::string fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

std::string percent(double accuracy) { return fixed(100.0 * accuracy, 2); }

// ---------------------------------------------------------------------------

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    const TrainConfig config = make_config(o);
    const Dataset data = load_numeric(o.data, o, true, {});
    const auto format = report_format(o);

    if (format == ReportFormat::table) {
        out << "records " << data.size() << ", features " << data.features.cols() << ", classes "
            << data.class_names.size() << "\n";
        for (std::size_t c = 0; c < data.class_names.size(); ++c) {
            out << "class " << c << " = " << data.class_names[c] << "\n";
        }
    } else {
        out << "iteration,loss,uniform_loss,kept";
        for (const auto& spec : config.roster) out << ",w_" << learner_short_name(spec.kind);
        out << "\n";
    }

    auto progress = [&](const IterationReport& r) {
        if (format == ReportFormat::table) {
            out << "iteration " << r.iteration << ": loss " << fixed(r.loss, 4) << " (uniform "
                << fixed(r.uniform_loss, 4) << ") " << (r.kept ? "kept" : "discarded") << ", weights";
            for (std::size_t q = 0; q < r.weights.size(); ++q) {
                out << " " << learner_short_name(config.roster[q].kind) << "=" << fixed(r.weights[q], 3);
            }
            out << "\n";
        } else {
            out << r.iteration << "," << fixed(r.loss, 6) << "," << fixed(r.uniform_loss, 6) << ","
                << (r.kept ? 1 : 0);
            for (double w : r.weights) out << "," << fixed(w, 6);
            out << "\n";
        }
        out.flush();
        // Timings vary run to run, so they stay off the report stream.
        err << "iteration " << r.iteration << " took " << fixed(r.seconds, 1) << "s\n";
    };
    const DslModel model = train(data, config, nullptr, progress);
    save_model(model, o.out);
    err << "wrote " << o.out << " (" << model.depth() << " layer" << (model.depth() == 1 ? "" : "s")
        << ")\n";
    return kOk;
}

int cmd_predict(const Options& o, std::ostream&, std::ostream& err) {
    const DslModel model = load_model(o.model);
    const Dataset data = load_numeric(o.data, o, o.label_col_given, model.class_names());
    const ProbabilityMatrix probs = predict(model, data.features, resolve_workers(o));
    write_probabilities_csv(o.out, probs, model.class_names());
    err << "wrote " << probs.rows() << " rows to " << o.out << "\n";
    return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream&) {
    const DslModel model = load_model(o.model);
    const Dataset data = load_numeric(o.data, o, true, model.class_names());
    const auto records = evaluate(model, data, resolve_workers(o));
    if (report_format(o) == ReportFormat::csv) {
        out << "layer,log_loss,accuracy\n";
        for (std::size_t t = 0; t < records.size(); ++t) {
            out << t + 1 << "," << fixed(records[t].log_loss, 4) << "," << percent(records[t].accuracy) << "\n";
        }
        return kOk;
    }
    out << "layer  log loss  accuracy %\n";
    for (std::size_t t = 0; t < records.size(); ++t) {
        char line[96];
        std::snprintf(line, sizeof line, "%5zu  %8.4f  %10.2f\n", t + 1, records[t].log_loss,
                      100.0 * records[t].accuracy);
        out << line;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct Split {
    Dataset train;
    Dataset test;
};

Split text_split(const Options& o) {
    std::vector<std::string> names;
    auto corpus_labels = [&](const TextCorpus& corpus, bool extend) {
        return encode_labels(corpus.labels, names, extend);
    };
    std::vector<std::vector<std::string>> train_docs;
    std::vector<std::vector<std::string>> test_docs;
    std::vector<int> train_y;
    std::vector<int> test_y;

    if (!o.data.empty()) {
        TextCorpus corpus = load_text(o.data);
        const auto y = corpus_labels(corpus, true);
        const LabelVector labels(y, static_cast<int>(std::max<std::size_t>(names.size(), 2)));
        if (o.train_size + o.test_size > labels.size()) {
            throw UsageError("--train-size + --test-size exceeds the " + std::to_string(labels.size()) +
                             " available records");
        }
        const auto split = stratified_split(labels, o.train_size, o.test_size, o.seed);
        for (std::size_t i : split.train) {
            train_docs.push_back(std::move(corpus.documents[i]));
            train_y.push_back(y[i]);
        }
        for (std::size_t i : split.test) {
            test_docs.push_back(std::move(corpus.documents[i]));
            test_y.push_back(y[i]);
        }
    } else {
        TextCorpus train_corpus = load_text(o.train_path);
        train_y = corpus_labels(train_corpus, true);
        TextCorpus test_corpus = load_text(o.test_path);
        test_y = corpus_labels(test_corpus, false);
        train_docs = std::move(train_corpus.documents);
        test_docs = std::move(test_corpus.documents);
    }
    if (names.size() < 2) throw DataError("text data needs at least two classes");
    const int j = static_cast<int>(names.size());
    TfidfResult tfidf = build_tfidf(train_docs, o.vocab_size);
    FeatureMatrix test_x = transform_tfidf(test_docs, tfidf.vocabulary);
    return {Dataset(std::move(tfidf.features), LabelVector(std::move(train_y), j), names),
            Dataset(std::move(test_x), LabelVector(std::move(test_y), j), names)};
}

std::vector<std::size_t> subset_rows(const LabelVector& labels, std::size_t count, const Options& o) {
    if (count > labels.size()) {
        throw UsageError("subset of " + std::to_string(count) + " requested from " +
                         std::to_string(labels.size()) + " records");
    }
    return stratified_split(labels, count, 0, o.seed).train;
}

Split benchmark_split(const Options& o) {
    const std::string& probe = o.data.empty() ? o.train_path : o.data;
    if (source_kind(probe) == SourceKind::text) return text_split(o);
    if (!o.data.empty()) {
        const Dataset all = load_numeric(o.data, o, true, {});
        const LabelVector& labels = all.require_labels();
        if (o.train_size + o.test_size > labels.size()) {
            throw UsageError("--train-size + --test-size exceeds the " + std::to_string(labels.size()) +
                             " available records");
        }
        const auto split = stratified_split(labels, o.train_size, o.test_size, o.seed);
        return {all.select_rows(split.train), all.select_rows(split.test)};
    }
    Dataset train_set = load_numeric(o.train_path, o, true, {});
    Dataset test_set = load_numeric(o.test_path, o, true, train_set.class_names);
    if (o.train_size > 0) train_set = train_set.select_rows(subset_rows(train_set.require_labels(), o.train_size, o));
    if (o.test_size > 0) test_set = test_set.select_rows(subset_rows(test_set.require_labels(), o.test_size, o));
    return {std::move(train_set), std::move(test_set)};
}

int cmd_benchmark(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.data.empty() == (o.train_path.empty() || o.test_path.empty())) {
        throw UsageError("benchmark needs either --train and --test, or --data with --train-size and --test-size");
    }
    if (!o.data.empty() && (o.train_size == 0 || o.test_size == 0)) {
        throw UsageError("--data requires --train-size and --test-size");
    }
    const TrainConfig config = make_config(o);
    const Split split = benchmark_split(o);
    err << "train " << split.train.size() << " x " << split.train.features.cols() << ", test "
        << split.test.size() << "\n";

    const BenchmarkResult result = run_benchmark(split.train, split.test, config, [&](const IterationReport& r) {
        err << "iteration " << r.iteration << ": loss " << fixed(r.loss, 4) << " "
            << (r.kept ? "kept" : "discarded") << " (" << fixed(r.seconds, 1) << "s)\n";
    });
    const auto rows = result.table();

    if (report_format(o) == ReportFormat::csv) {
        out << "method,log_loss,accuracy\n";
        for (const auto& row : rows) {
            out << row.method << "," << fixed(row.metrics.log_loss, 4) << "," << percent(row.metrics.accuracy)
                << "\n";
        }
    } else {
        out << "method                          log loss  accuracy %\n";
        for (const auto& row : rows) {
            char line[160];
            std::snprintf(line, sizeof line, "%-30s  %8.4f  %10.2f\n", row.method.c_str(),
                          row.metrics.log_loss, 100.0 * row.metrics.accuracy);
            out << line;
        }
    }
    err << "layers " << result.model.depth() << ", total " << fixed(result.seconds, 1) << "s\n";
    return kOk;
}

void add_engine_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--seed", o.seed, "Random seed");
    cmd.add_option("--folds", o.folds, "Cross-validation folds k");
    cmd.add_option("--max-iterations", o.max_iterations, "Maximum cascade layers");
    cmd.add_option("--learners", o.learners, "Comma list from lr,knn,rf,et,gbt");
    cmd.add_option("--mode", o.mode, "deep, single_layer or simple_average")
        ->check(CLI::IsMember({"deep", "single_layer", "simple_average"}));
    cmd.add_flag("--retrain-full", o.retrain_full, "Refit each kept layer's learners on all records");
}

void add_data_options(CLI::App& cmd, Options& o) {
    cmd.add_option_function<std::string>(
        "--label-col",
        [&o](const std::string& v) {
            o.label_col = v;
            o.label_col_given = true;
        },
        "CSV label column (name or 0-based index)");
    cmd.add_flag("--no-header", o.no_header, "CSV has no header row");
    cmd.add_option("--delimiter", o.delimiter, "CSV delimiter");
}

void add_common_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--workers", o.workers, "Worker threads (default: DSL_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"table", "csv"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deep Super Learner: layered cross-validated ensembles"};
    app.name("dsl");
    app.require_subcommand(1);
    Options o;

    auto* train_cmd = app.add_subcommand("train", "Train a model and write the archive");
    train_cmd->add_option("--data", o.data, "CSV file or IDX pair images,labels")->required();
    train_cmd->add_option("--out", o.out, "Model archive path")->required();
    add_engine_options(*train_cmd, o);
    add_data_options(*train_cmd, o);
    add_common_options(*train_cmd, o);

    auto* predict_cmd = app.add_subcommand("predict", "Write class probabilities as CSV");
    predict_cmd->add_option("--data", o.data, "CSV file or IDX pair images,labels")->required();
    predict_cmd->add_option("--model", o.model, "Model archive")->required();
    predict_cmd->add_option("--out", o.out, "Output CSV")->required();
    add_data_options(*predict_cmd, o);
    add_common_options(*predict_cmd, o);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-layer log loss and accuracy");
    evaluate_cmd->add_option("--data", o.data, "Labeled CSV file or IDX pair images,labels")->required();
    evaluate_cmd->add_option("--model", o.model, "Model archive")->required();
    add_data_options(*evaluate_cmd, o);
    add_common_options(*evaluate_cmd, o);

    auto* bench_cmd = app.add_subcommand("benchmark", "Compare the ensemble with its baselines");
    bench_cmd->add_option("--train", o.train_path, "Training data");
    bench_cmd->add_option("--test", o.test_path, "Test data");
    bench_cmd->add_option("--data", o.data, "Data to split into train and test");
    bench_cmd->add_option("--train-size", o.train_size, "Stratified training subset size");
    bench_cmd->add_option("--test-size", o.test_size, "Stratified test subset size");
    bench_cmd->add_option("--vocab-size", o.vocab_size, "TF-IDF vocabulary size for text data");
    add_engine_options(*bench_cmd, o);
    add_data_options(*bench_cmd, o);
    add_common_options(*bench_cmd, o);

    std::vector<const char*> argv{"dsl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*train_cmd) return cmd_train(o, out, err);
        if (*predict_cmd) return cmd_predict(o, out, err);
        if (*evaluate_cmd) return cmd_evaluate(o, out, err);
        return cmd_benchmark(o, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const ArchiveError& e) {
        err << "model archive error: " << e.what() << "\n";
        return kDataError;
    } catch (const DimensionError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const TrainingError& e) {
        err << "training failed: " << e.what() << "\n";
        return kTrainingFailure;
    } catch (const std::exception& e) {
        err << "training failed: " << e.what() << "\n";
        return kTrainingFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace dsl::cli
