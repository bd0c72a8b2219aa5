#include "dtwc/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtwc/pipeline.hpp"

#ifndef DTWC_DATA_DIR
#define DTWC_DATA_DIR "data"
#endif

namespace dtwc {

namespace {

using nlohmann::ordered_json;

struct WordListPaths {
    std::string stopwords = std::string(DTWC_DATA_DIR) + "/stopwords.txt";
    std::string abbreviations = std::string(DTWC_DATA_DIR) + "/abbreviations.tsv";
    std::string emoji = std::string(DTWC_DATA_DIR) + "/emoji_ranges.txt";
};

CleansingConfig make_cleansing(const WordListPaths& paths) {
    return CleansingConfig::from_files(paths.stopwords, paths.abbreviations, paths.emoji);
}

ordered_json stats_json(const DatasetStats& s) {
    ordered_json j;
    j["total"] = s.total;
    j["class_counts"] = {s.per_class[0], s.per_class[1]};
    j["unlabeled"] = s.unlabeled;
    return j;
}

ordered_json metrics_json(const MetricsReport& m) {
    ordered_json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["accuracy"] = m.accuracy;
    j["confusion"] = {{"tp", m.matrix.tp},
                      {"fp", m.matrix.fp},
                      {"fn", m.matrix.fn},
                      {"tn", m.matrix.tn}};
    return j;
}

ordered_json history_json(const std::vector<EpochStats>& history) {
    auto arr = ordered_json::array();
    for (const auto& h : history)
        arr.push_back(
            {{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_f1", h.val_f1}});
    return arr;
}

int cmd_stats(const std::string& data_path) {
    const auto records = load_csv(data_path);
    const DatasetStats raw = dataset_stats(records);
    auto [deduped, removed] = dedup(records);
    DatasetStats after = dataset_stats(deduped);
    after.duplicates_removed = removed;

    ordered_json j;
    j["raw"] = stats_json(raw);
    j["after_dedup"] = stats_json(after);
    j["after_dedup"]["duplicates_removed"] = removed;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const PipelineOptions& options,
              const WordListPaths& paths, const std::string& out_path) {
    const auto records = load_csv(data_path);
    const CleansingConfig cleansing = make_cleansing(paths);

    TrainReport report;
    TrainedModel model = train_pipeline(records, options, cleansing, &report);

    ordered_json j;
    j["model"] = options.model;
    j["vectorizer"] = options.is_encoder() ? "none" : options.vectorizer;
    j["train_size"] = report.train_size;
    j["val_size"] = report.val_size;
    j["duplicates_removed"] = report.duplicates_removed;
    j["val"] = report.has_val_metrics ? metrics_json(report.val_metrics) : ordered_json(nullptr);
    if (options.is_encoder()) j["history"] = history_json(report.history);
    std::cout << j.dump(2) << "\n";

    if (!out_path.empty()) save_container(out_path, to_container(model));
    return 0;
}

TrainedModel load_model_checked(const std::string& path) {
    ModelContainer container = load_container(path);
    if (container.vocab_mismatch)
        std::cerr << "warning: VocabMismatch: stored vocabulary hash does not match its "
                     "token list; the model file may be corrupt\n";
    return from_container(container);
}

int cmd_eval(const std::string& model_path, const std::string& data_path, double val_override,
             bool seed_given, std::uint64_t seed_override) {
    TrainedModel model = load_model_checked(model_path);
    const auto records = load_csv(data_path);

    const double val =
        val_override >= 0.0 ? val_override : model.options.val_fraction;
    const std::uint64_t seed = seed_given ? seed_override : model.options.seed;
    MetricsReport m = evaluate_split(model, records, val, seed);

    ordered_json j;
    j["model"] = model.options.model;
    j["vectorizer"] = model.options.is_encoder() ? "none" : model.options.vectorizer;
    j["val_fraction"] = val;
    j["seed"] = seed;
    j["val"] = metrics_json(m);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                bool threshold_given, double threshold) {
    TrainedModel model = load_model_checked(model_path);
    if (threshold_given) model.options.threshold = threshold;

    std::ifstream file;
    std::istream* in = &std::cin;
    if (!input_path.empty() && input_path != "-") {
        file.open(input_path);
        if (!file) throw Error(ErrorCode::io_failure, "cannot open '" + input_path + "'");
        in = &file;
    }

    std::string line;
    char buf[32];
    while (std::getline(*in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const double score = model.score_text(line);
        std::snprintf(buf, sizeof buf, "%.6f", score);
        std::cout << model.label_for(score) << "\t" << buf << "\n";
    }
    return 0;
}

// --- sweep ---

struct GridAxis {
    std::string name;
    std::vector<std::string> values;
};

GridAxis parse_grid(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
        throw Error(ErrorCode::usage, "grid spec '" + spec + "' is not name=v1,v2,...");
    GridAxis axis;
    axis.name = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            throw Error(ErrorCode::usage, "grid spec '" + spec + "' has an empty value");
        axis.values.push_back(item);
    }
    if (axis.values.empty())
        throw Error(ErrorCode::usage, "grid spec '" + spec + "' has no values");
    return axis;
}

void apply_param(PipelineOptions& o, const std::string& name, const std::string& value) {
    try {
        if (name == "alpha") o.alpha = std::stod(value);
        else if (name == "l2") o.l2 = std::stod(value);
        else if (name == "lr") o.lr = std::stod(value);
        else if (name == "epochs") o.epochs = std::stoll(value);
        else if (name == "batch") o.batch = std::stoll(value);
        else if (name == "dropout") o.dropout = std::stod(value);
        else if (name == "seed") o.seed = std::stoull(value);
        else if (name == "val") o.val_fraction = std::stod(value);
        else if (name == "min_df") o.min_df = std::stoull(value);
        else if (name == "dim") o.dim = std::stoull(value);
        else if (name == "window") o.window = std::stoull(value);
        else if (name == "negatives") o.negatives = std::stoull(value);
        else if (name == "embed_lr") o.embed_lr = std::stod(value);
        else if (name == "embed_epochs") o.embed_epochs = std::stoull(value);
        else if (name == "optimizer") o.optimizer = value;
        else throw Error(ErrorCode::usage, "unknown sweep parameter '" + name + "'");
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::usage,
                    "cannot parse '" + value + "' for sweep parameter '" + name + "'");
    }
}

std::vector<GridAxis> default_grid(const PipelineOptions& o) {
    if (o.model == "nb") return {{"alpha", {"0.5", "1", "2"}}};
    if (o.model == "encoder") return {{"lr", {"2e-06", "6e-06", "1e-05"}}};
    return {{"l2", {"1e-05", "0.0001", "0.001"}}}; // logreg / svm
}

std::size_t sweep_threads() {
    const char* env = std::getenv("DTWC_THREADS");
    if (!env || !*env) return 1;
    try {
        const long long n = std::stoll(env);
        if (n < 1) throw std::invalid_argument("non-positive");
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw Error(ErrorCode::usage, std::string("DTWC_THREADS='") + env +
                                          "' is not a positive integer");
    }
}

int cmd_sweep(const std::string& data_path, const PipelineOptions& base,
              const WordListPaths& paths, const std::vector<std::string>& grid_specs,
              const std::string& out_path) {
    const auto records = load_csv(data_path);
    const CleansingConfig cleansing = make_cleansing(paths);

    std::vector<GridAxis> axes;
    for (const auto& spec : grid_specs) axes.push_back(parse_grid(spec));
    if (axes.empty()) axes = default_grid(base);

    // Row-major enumeration over the axes, first axis outermost.
    std::size_t n_rows = 1;
    for (const auto& a : axes) n_rows *= a.values.size();

    struct Row {
        std::vector<std::string> values;
        MetricsReport m;
        bool ok = false;
        std::string error;
    };
    std::vector<Row> rows(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::size_t rest = r;
        rows[r].values.resize(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            rows[r].values[a] = axes[a].values[rest % axes[a].values.size()];
            rest /= axes[a].values.size();
        }
    }

    auto run_row = [&](Row& row) {
        try {
            PipelineOptions o = base;
            for (std::size_t a = 0; a < axes.size(); ++a)
                apply_param(o, axes[a].name, row.values[a]);
            TrainReport report;
            train_pipeline(records, o, cleansing, &report);
            if (!report.has_val_metrics)
                throw Error(ErrorCode::empty_input, "sweep needs a non-empty validation split");
            row.m = report.val_metrics;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    const std::size_t n_threads = std::min(sweep_threads(), n_rows);
    if (n_threads <= 1) {
        for (auto& row : rows) run_row(row);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back([&rows, &next, &run_row] {
                for (;;) {
                    const std::size_t r = next.fetch_add(1);
                    if (r >= rows.size()) return;
                    run_row(rows[r]);
                }
            });
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << "model,vectorizer";
    for (const auto& a : axes) csv << "," << a.name;
    csv << ",f1,precision,recall,accuracy\n";
    char buf[32];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        if (!row.ok) throw Error(ErrorCode::io_failure, "sweep run failed: " + row.error);
        csv << base.model << "," << (base.is_encoder() ? "none" : base.vectorizer);
        for (const auto& v : row.values) csv << "," << v;
        csv << "," << fmt(row.m.f1) << "," << fmt(row.m.precision) << "," << fmt(row.m.recall)
            << "," << fmt(row.m.accuracy) << "\n";
    }

    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + out_path + "'");
        out << csv.str();
    }
    return 0;
}

void add_pipeline_flags(CLI::App* cmd, PipelineOptions& o, WordListPaths& paths) {
    cmd->add_option("--model", o.model, "nb | logreg | svm | encoder");
    cmd->add_option("--vectorizer", o.vectorizer, "count | tfidf | cbow | skipgram");
    cmd->add_option("--val", o.val_fraction, "validation fraction");
    cmd->add_option("--seed", o.seed, "split / shuffle / init seed");
    cmd->add_option("--min-df", o.min_df, "minimum document frequency");
    cmd->add_option("--alpha", o.alpha, "nb smoothing");
    cmd->add_option("--l2", o.l2, "linear model l2 strength");
    cmd->add_option("--optimizer", o.optimizer, "sgd | rmsprop | adam");
    cmd->add_option("--lr", o.lr, "learning rate");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--batch", o.batch, "mini-batch size");
    cmd->add_option("--dim", o.dim, "embedding dimension");
    cmd->add_option("--window", o.window, "context window half-width");
    cmd->add_option("--negatives", o.negatives, "negative samples per pair");
    cmd->add_option("--embed-lr", o.embed_lr, "embedding learning rate");
    cmd->add_option("--embed-epochs", o.embed_epochs, "embedding epochs");
    cmd->add_option("--dropout", o.dropout, "encoder head dropout");
    cmd->add_option("--enc-layers", o.enc_layers, "encoder layers");
    cmd->add_option("--hidden", o.hidden, "encoder hidden size");
    cmd->add_option("--heads", o.heads, "attention heads");
    cmd->add_option("--ffn", o.ffn, "feed-forward size");
    cmd->add_option("--max-len", o.max_len, "maximum token sequence length");
    cmd->add_option("--threshold", o.threshold, "decision threshold");
    cmd->add_option("--stopwords", paths.stopwords, "stopword list path");
    cmd->add_option("--abbrev", paths.abbreviations, "abbreviation map path");
    cmd->add_option("--emoji", paths.emoji, "emoji range list path");
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"disaster tweet classification toolkit"};
    app.require_subcommand(1);

    std::string data_path, model_path, out_path, input_path = "-";
    PipelineOptions options;
    WordListPaths paths;
    std::vector<std::string> grid_specs;
    double eval_val = -1.0;
    std::uint64_t eval_seed = 0;
    double predict_threshold = 0.5;

    auto* stats = app.add_subcommand("stats", "dataset shape and class balance");
    stats->add_option("--data", data_path, "training CSV")->required();

    auto* train = app.add_subcommand("train", "fit a model and report validation metrics");
    train->add_option("--data", data_path, "training CSV")->required();
    add_pipeline_flags(train, options, paths);
    train->add_option("--out", out_path, "write the fitted model here");

    auto* eval = app.add_subcommand("eval", "score a saved model on a validation split");
    eval->add_option("--model-file", model_path, "saved model")->required();
    eval->add_option("--data", data_path, "training CSV")->required();
    eval->add_option("--val", eval_val, "validation fraction (default: stored)");
    auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "split seed (default: stored)");

    auto* predict = app.add_subcommand("predict", "label raw tweets, one per line");
    predict->add_option("--model-file", model_path, "saved model")->required();
    predict->add_option("--input", input_path, "text file ('-' for stdin)");
    auto* thr_opt = predict->add_option("--threshold", predict_threshold, "decision threshold");

    auto* sweep = app.add_subcommand("sweep", "grid search; CSV results");
    sweep->add_option("--data", data_path, "training CSV")->required();
    add_pipeline_flags(sweep, options, paths);
    sweep->add_option("--grid", grid_specs, "axis as name=v1,v2,... (repeatable)");
    sweep->add_option("--out", out_path, "CSV output path (default stdout)");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("dtwc");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(stats)) return cmd_stats(data_path);
        if (app.got_subcommand(train)) return cmd_train(data_path, options, paths, out_path);
        if (app.got_subcommand(eval))
            return cmd_eval(model_path, data_path, eval_val, eval_seed_opt->count() > 0,
                            eval_seed);
        if (app.got_subcommand(predict))
            return cmd_predict(model_path, input_path, thr_opt->count() > 0, predict_threshold);
        if (app.got_subcommand(sweep))
            return cmd_sweep(data_path, options, paths, grid_specs, out_path);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace dtwc
