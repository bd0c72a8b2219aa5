#include "dtwc/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace dtwc {

namespace {

std::vector<TokenSequence> cleanse_docs(const std::vector<TweetRecord>& records,
                                        const CleansingConfig& cleansing) {
    std::vector<TokenSequence> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(tokenize(cleanse_text(r.text, cleansing)));
    return docs;
}

std::vector<int> labels_of(const std::vector<TweetRecord>& records) {
    std::vector<int> y;
    y.reserve(records.size());
    for (const auto& r : records) {
        if (!r.target)
            throw Error(ErrorCode::unlabeled_record,
                        "record id " + std::to_string(r.id) + " has no target");
        y.push_back(*r.target);
    }
    return y;
}

EmbedTrainConfig embed_config(const PipelineOptions& o) {
    EmbedTrainConfig cfg;
    cfg.dim = o.dim;
    cfg.window = o.window;
    cfg.negatives = o.negatives;
    cfg.learning_rate = o.embed_lr;
    cfg.epochs = o.embed_epochs;
    cfg.seed = o.seed;
    return cfg;
}

} // namespace

double PipelineOptions::resolved_lr() const {
    if (lr >= 0.0) return lr;
    return is_encoder() ? 6e-6 : 0.1;
}

std::size_t PipelineOptions::resolved_epochs() const {
    if (epochs >= 0) return static_cast<std::size_t>(epochs);
    return is_encoder() ? 3 : 10;
}

std::size_t PipelineOptions::resolved_batch() const {
    if (batch >= 0) return static_cast<std::size_t>(batch);
    return is_encoder() ? 16 : 256;
}

double PipelineOptions::resolved_threshold() const {
    if (threshold >= 0.0) return threshold;
    return model == "svm" ? 0.0 : 0.5;
}

void PipelineOptions::validate() const {
    if (model != "nb" && model != "logreg" && model != "svm" && model != "encoder")
        throw Error(ErrorCode::invalid_model_kind, "unknown model '" + model + "'");
    if (vectorizer != "count" && vectorizer != "tfidf" && vectorizer != "cbow" &&
        vectorizer != "skipgram")
        throw Error(ErrorCode::usage, "unknown vectorizer '" + vectorizer + "'");
    if (model == "nb" && embedding_vectorizer())
        throw Error(ErrorCode::usage,
                    "nb needs non-negative features; use count or tfidf, or a linear model");
    if (val_fraction < 0.0 || val_fraction >= 1.0)
        throw Error(ErrorCode::usage, "val fraction must be in [0, 1)");
    optimizer_from_name(optimizer); // validates the name
}

FeatureSet build_features(const std::vector<TweetRecord>& records,
                          const PipelineOptions& options, const CleansingConfig& cleansing) {
    auto [deduped, removed] = dedup(records);
    (void)removed;
    SplitSpec spec{options.val_fraction, options.seed, true};
    auto [train_recs, val_recs] = stratified_split(deduped, spec);
    if (train_recs.empty()) throw Error(ErrorCode::empty_corpus, "no training records");

    const auto train_docs = cleanse_docs(train_recs, cleansing);
    const auto val_docs = cleanse_docs(val_recs, cleansing);

    FeatureSet fs;
    fs.train_y = labels_of(train_recs);
    fs.val_y = labels_of(val_recs);
    fs.vocab = build_vocab(train_docs, options.min_df);

    if (options.vectorizer == "count" || options.vectorizer == "tfidf") {
        const bool use_tfidf = options.vectorizer == "tfidf";
        if (use_tfidf) fs.tfidf = fit_idf(train_docs, fs.vocab);
        auto transform = [&](const TokenSequence& doc) {
            SparseVector counts = count_vectorize(doc, fs.vocab);
            return use_tfidf ? tfidf_transform(counts, fs.tfidf) : counts;
        };
        for (const auto& d : train_docs) fs.train_x.push_back(transform(d));
        for (const auto& d : val_docs) fs.val_x.push_back(transform(d));
        fs.n_features = fs.vocab.size();
    } else {
        const EmbedTrainConfig cfg = embed_config(options);
        fs.embedding = options.vectorizer == "cbow"
                           ? train_cbow(train_docs, fs.vocab, cfg)
                           : train_skipgram(train_docs, fs.vocab, cfg);
        for (const auto& d : train_docs)
            fs.train_x.push_back(densify(doc_embed(d, fs.embedding, fs.vocab)));
        for (const auto& d : val_docs)
            fs.val_x.push_back(densify(doc_embed(d, fs.embedding, fs.vocab)));
        fs.n_features = fs.embedding.dim;
    }
    return fs;
}

SparseVector TrainedModel::vectorize_tokens(const TokenSequence& tokens) const {
    if (options.vectorizer == "count") return count_vectorize(tokens, vocab);
    if (options.vectorizer == "tfidf")
        return tfidf_transform(count_vectorize(tokens, vocab), tfidf);
    return densify(doc_embed(tokens, embedding, vocab));
}

double TrainedModel::score_tokens(const TokenSequence& tokens) const {
    if (options.is_encoder()) {
        const auto ids = enc_vocab.encode(tokens, options.max_len);
        return encoder_forward(ids, enc_params, false, nullptr).prob;
    }
    const SparseVector x = vectorize_tokens(tokens);
    if (options.model == "nb") return std::exp(nb_predict_log_proba(nb, x)[1]);
    if (options.model == "logreg") return predict_proba(linear, x);
    return decision_function(linear, x);
}

double TrainedModel::score_text(const std::string& raw) const {
    return score_tokens(tokenize(cleanse_text(raw, cleansing)));
}

int TrainedModel::label_for(double score) const {
    return predict_label(score, options.resolved_threshold());
}

TrainedModel train_pipeline(const std::vector<TweetRecord>& records,
                            const PipelineOptions& options, const CleansingConfig& cleansing,
                            TrainReport* report) {
    options.validate();

    TrainedModel model;
    model.options = options;
    model.cleansing = cleansing;

    auto [deduped, removed] = dedup(records);
    if (report) report->duplicates_removed = removed;

    if (options.is_encoder()) {
        FineTuneConfig ft;
        ft.learning_rate = options.resolved_lr();
        ft.dropout_rate = options.dropout;
        ft.epochs = options.resolved_epochs();
        ft.batch_size = options.resolved_batch();
        ft.optimizer.kind = optimizer_from_name(options.optimizer);
        ft.val_fraction = options.val_fraction;
        ft.split_seed = options.seed;
        ft.vocab_min_df = options.min_df;

        EncoderConfig ec;
        ec.layers = options.enc_layers;
        ec.hidden = options.hidden;
        ec.heads = options.heads;
        ec.ffn_dim = options.ffn;
        ec.max_len = options.max_len;
        ec.dropout_rate = options.dropout;
        ec.seed = options.seed;
        ec.vocab_size = kReservedTokens; // placeholder; fine_tune fills it in

        FineTuneResult result = fine_tune(deduped, ft, ec, cleansing);
        model.enc_params = std::move(result.params);
        model.enc_vocab = std::move(result.vocab);
        model.history = result.history;

        if (report) {
            SplitSpec spec{options.val_fraction, options.seed, true};
            auto [train_recs, val_recs] = stratified_split(deduped, spec);
            report->train_size = train_recs.size();
            report->val_size = val_recs.size();
            report->history = model.history;
            if (!val_recs.empty()) {
                std::vector<int> preds;
                preds.reserve(val_recs.size());
                for (const auto& r : val_recs)
                    preds.push_back(model.label_for(model.score_text(r.text)));
                report->val_metrics = metrics(confusion(preds, labels_of(val_recs)));
                report->has_val_metrics = true;
            }
        }
        return model;
    }

    FeatureSet fs = build_features(deduped, options, cleansing);
    model.vocab = std::move(fs.vocab);
    model.tfidf = std::move(fs.tfidf);
    model.embedding = std::move(fs.embedding);

    if (options.model == "nb") {
        model.nb = nb_fit(fs.train_x, fs.train_y, options.alpha);
    } else {
        LinearFitConfig cfg;
        cfg.loss_kind = options.model == "svm" ? LossKind::hinge : LossKind::logistic;
        cfg.l2 = options.l2;
        cfg.optimizer.kind = optimizer_from_name(options.optimizer);
        cfg.optimizer.learning_rate = options.resolved_lr();
        cfg.epochs = options.resolved_epochs();
        cfg.batch_size = options.resolved_batch();
        cfg.seed = options.seed;
        model.linear = linear_fit(fs.train_x, fs.train_y, cfg);
    }

    if (report) {
        report->train_size = fs.train_x.size();
        report->val_size = fs.val_x.size();
        if (!fs.val_x.empty()) {
            std::vector<int> preds;
            preds.reserve(fs.val_x.size());
            for (const auto& x : fs.val_x) {
                double score = 0.0;
                if (options.model == "nb") score = std::exp(nb_predict_log_proba(model.nb, x)[1]);
                else if (options.model == "logreg") score = predict_proba(model.linear, x);
                else score = decision_function(model.linear, x);
                preds.push_back(model.label_for(score));
            }
            report->val_metrics = metrics(confusion(preds, fs.val_y));
            report->has_val_metrics = true;
        }
    }
    return model;
}

MetricsReport evaluate_split(const TrainedModel& model, const std::vector<TweetRecord>& records,
                             double val_fraction, std::uint64_t seed) {
    auto [deduped, removed] = dedup(records);
    (void)removed;
    SplitSpec spec{val_fraction, seed, true};
    auto [train_recs, val_recs] = stratified_split(deduped, spec);
    if (val_recs.empty()) throw Error(ErrorCode::empty_input, "validation split is empty");

    std::vector<int> preds;
    preds.reserve(val_recs.size());
    for (const auto& r : val_recs) preds.push_back(model.label_for(model.score_text(r.text)));
    return metrics(confusion(preds, labels_of(val_recs)));
}

SparseVector densify(const std::vector<double>& dense) {
    SparseVector out;
    out.dim = dense.size();
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) out.entries.push_back({static_cast<std::uint32_t>(i), dense[i]});
    return out;
}

namespace {

nlohmann::ordered_json options_json(const PipelineOptions& o) {
    nlohmann::ordered_json j;
    j["model"] = o.model;
    j["vectorizer"] = o.vectorizer;
    j["val_fraction"] = o.val_fraction;
    j["seed"] = o.seed;
    j["min_df"] = o.min_df;
    j["alpha"] = o.alpha;
    j["l2"] = o.l2;
    j["optimizer"] = o.optimizer;
    j["lr"] = o.resolved_lr();
    j["epochs"] = o.resolved_epochs();
    j["batch"] = o.resolved_batch();
    j["dim"] = o.dim;
    j["window"] = o.window;
    j["negatives"] = o.negatives;
    j["embed_lr"] = o.embed_lr;
    j["embed_epochs"] = o.embed_epochs;
    j["dropout"] = o.dropout;
    j["enc_layers"] = o.enc_layers;
    j["hidden"] = o.hidden;
    j["heads"] = o.heads;
    j["ffn"] = o.ffn;
    j["max_len"] = o.max_len;
    j["threshold"] = o.resolved_threshold();
    return j;
}

PipelineOptions options_from_json(const nlohmann::ordered_json& j) {
    PipelineOptions o;
    o.model = j.value("model", o.model);
    o.vectorizer = j.value("vectorizer", o.vectorizer);
    o.val_fraction = j.value("val_fraction", o.val_fraction);
    o.seed = j.value("seed", o.seed);
    o.min_df = j.value("min_df", o.min_df);
    o.alpha = j.value("alpha", o.alpha);
    o.l2 = j.value("l2", o.l2);
    o.optimizer = j.value("optimizer", o.optimizer);
    o.lr = j.value("lr", o.resolved_lr());
    o.epochs = static_cast<long long>(j.value("epochs", o.resolved_epochs()));
    o.batch = static_cast<long long>(j.value("batch", o.resolved_batch()));
    o.dim = j.value("dim", o.dim);
    o.window = j.value("window", o.window);
    o.negatives = j.value("negatives", o.negatives);
    o.embed_lr = j.value("embed_lr", o.embed_lr);
    o.embed_epochs = j.value("embed_epochs", o.embed_epochs);
    o.dropout = j.value("dropout", o.dropout);
    o.enc_layers = j.value("enc_layers", o.enc_layers);
    o.hidden = j.value("hidden", o.hidden);
    o.heads = j.value("heads", o.heads);
    o.ffn = j.value("ffn", o.ffn);
    o.max_len = j.value("max_len", o.max_len);
    o.threshold = j.value("threshold", o.resolved_threshold());
    return o;
}

nlohmann::ordered_json cleansing_json(const CleansingConfig& c) {
    nlohmann::ordered_json j;
    auto steps = nlohmann::ordered_json::array();
    for (CleanseStep s : c.steps) steps.push_back(step_name(s));
    j["steps"] = std::move(steps);

    std::vector<std::string> stopwords(c.stopword_set.begin(), c.stopword_set.end());
    std::sort(stopwords.begin(), stopwords.end()); // unordered_set -> stable output
    j["stopwords"] = stopwords;

    auto abbrev = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.abbreviation_map) abbrev[k] = v;
    j["abbreviations"] = std::move(abbrev);

    auto ranges = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : c.emoji_ranges)
        ranges.push_back({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
    j["emoji_ranges"] = std::move(ranges);
    return j;
}

CleansingConfig cleansing_from_json(const nlohmann::ordered_json& j) {
    CleansingConfig c;
    for (const auto& name : j.at("steps")) c.steps.push_back(step_from_name(name));
    for (const auto& w : j.at("stopwords")) c.stopword_set.insert(w.get<std::string>());
    for (const auto& [k, v] : j.at("abbreviations").items())
        c.abbreviation_map.emplace(k, v.get<std::string>());
    for (const auto& r : j.at("emoji_ranges"))
        c.emoji_ranges.emplace_back(static_cast<char32_t>(r[0].get<std::uint32_t>()),
                                    static_cast<char32_t>(r[1].get<std::uint32_t>()));
    return c;
}

TensorSection make_section(std::string name, std::vector<std::size_t> dims,
                           std::vector<double> data) {
    TensorSection s;
    s.name = std::move(name);
    s.dims = std::move(dims);
    s.data = std::move(data);
    return s;
}

} // namespace

ModelContainer to_container(const TrainedModel& model) {
    const PipelineOptions& o = model.options;
    ModelContainer c;
    c.kind = model_kind_from_name(o.model);

    c.metadata["format"] = "dtwc-model";
    c.metadata["kind"] = o.model;
    c.metadata["vectorizer"] = o.is_encoder() ? "none" : o.vectorizer;
    c.metadata["options"] = options_json(o);
    c.metadata["cleansing"] = cleansing_json(model.cleansing);

    if (o.is_encoder()) {
        nlohmann::ordered_json vocab;
        vocab["tokens"] = model.enc_vocab.tokens;
        c.metadata["vocab"] = std::move(vocab);
        c.metadata["vocab_hash"] = fnv1a_hex(model.enc_vocab.tokens);
        auto history = nlohmann::ordered_json::array();
        for (const auto& h : model.history)
            history.push_back({{"epoch", h.epoch},
                               {"train_loss", h.train_loss},
                               {"val_f1", h.val_f1}});
        c.metadata["history"] = std::move(history);

        for (const auto& t : model.enc_params.layout.tensors) {
            const double* base = model.enc_params.values.data() + t.offset;
            c.sections.push_back(
                make_section(t.name, t.dims, std::vector<double>(base, base + t.size)));
        }
        return c;
    }

    nlohmann::ordered_json vocab;
    vocab["tokens"] = model.vocab.tokens;
    vocab["df"] = model.vocab.df;
    vocab["n_docs"] = model.vocab.n_docs;
    c.metadata["vocab"] = std::move(vocab);
    c.metadata["vocab_hash"] = fnv1a_hex(model.vocab.tokens);

    if (o.vectorizer == "tfidf")
        c.sections.push_back(make_section("idf", {model.tfidf.idf.size()}, model.tfidf.idf));
    if (o.embedding_vectorizer()) {
        c.sections.push_back(make_section("embedding_input",
                                          {model.embedding.rows, model.embedding.dim},
                                          model.embedding.input));
        c.sections.push_back(make_section("embedding_output",
                                          {model.embedding.rows, model.embedding.dim},
                                          model.embedding.output));
    }

    if (o.model == "nb") {
        c.sections.push_back(make_section(
            "class_log_prior", {2},
            {model.nb.class_log_prior[0], model.nb.class_log_prior[1]}));
        c.sections.push_back(make_section("feature_log_prob", {2, model.nb.n_features},
                                          model.nb.feature_log_prob));
    } else {
        c.sections.push_back(
            make_section("weights", {model.linear.weights.size()}, model.linear.weights));
        c.sections.push_back(make_section("bias", {1}, {model.linear.bias}));
    }
    return c;
}

TrainedModel from_container(const ModelContainer& container) {
    TrainedModel model;
    model.options = options_from_json(container.metadata.at("options"));
    model.options.model = model_kind_name(container.kind);
    model.cleansing = cleansing_from_json(container.metadata.at("cleansing"));

    const auto& vocab_meta = container.metadata.at("vocab");
    if (container.kind == ModelKind::encoder) {
        for (const auto& t : vocab_meta.at("tokens"))
            model.enc_vocab.tokens.push_back(t.get<std::string>());
        for (std::size_t i = 0; i < model.enc_vocab.tokens.size(); ++i)
            model.enc_vocab.token_to_id.emplace(model.enc_vocab.tokens[i], i);

        EncoderConfig ec;
        ec.layers = model.options.enc_layers;
        ec.hidden = model.options.hidden;
        ec.heads = model.options.heads;
        ec.ffn_dim = model.options.ffn;
        ec.max_len = model.options.max_len;
        ec.dropout_rate = model.options.dropout;
        ec.seed = model.options.seed;
        ec.vocab_size = model.enc_vocab.size();

        model.enc_params.config = ec;
        model.enc_params.layout = EncoderLayout::build(ec);
        model.enc_params.values.assign(model.enc_params.layout.total, 0.0);
        for (const auto& t : model.enc_params.layout.tensors) {
            const TensorSection& s = container.section(t.name);
            if (s.dims != t.dims || s.data.size() != t.size)
                throw Error(ErrorCode::shape_mismatch,
                            "section '" + t.name + "' shape differs from the declared geometry");
            std::copy(s.data.begin(), s.data.end(), model.enc_params.values.begin() + static_cast<std::ptrdiff_t>(t.offset));
        }
        if (container.metadata.contains("history"))
            for (const auto& h : container.metadata["history"])
                model.history.push_back({h.at("epoch").get<std::size_t>(),
                                         h.at("train_loss").get<double>(),
                                         h.at("val_f1").get<double>()});
        return model;
    }

    for (const auto& t : vocab_meta.at("tokens"))
        model.vocab.tokens.push_back(t.get<std::string>());
    for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i)
        model.vocab.token_to_index.emplace(model.vocab.tokens[i], i);
    for (const auto& d : vocab_meta.at("df")) model.vocab.df.push_back(d.get<std::size_t>());
    model.vocab.n_docs = vocab_meta.at("n_docs").get<std::size_t>();

    if (model.options.vectorizer == "tfidf") model.tfidf.idf = container.section("idf").data;
    if (model.options.embedding_vectorizer()) {
        const TensorSection& in = container.section("embedding_input");
        const TensorSection& out = container.section("embedding_output");
        model.embedding.rows = in.dims.at(0);
        model.embedding.dim = in.dims.at(1);
        model.embedding.input = in.data;
        model.embedding.output = out.data;
        if (out.dims != in.dims)
            throw Error(ErrorCode::shape_mismatch, "embedding sections disagree on shape");
    }

    if (container.kind == ModelKind::naive_bayes) {
        const TensorSection& prior = container.section("class_log_prior");
        const TensorSection& flp = container.section("feature_log_prob");
        model.nb.alpha = model.options.alpha;
        model.nb.class_log_prior = {prior.data.at(0), prior.data.at(1)};
        model.nb.n_features = flp.dims.at(1);
        model.nb.feature_log_prob = flp.data;
    } else {
        model.linear.loss_kind =
            container.kind == ModelKind::svm ? LossKind::hinge : LossKind::logistic;
        model.linear.l2 = model.options.l2;
        model.linear.weights = container.section("weights").data;
        model.linear.bias = container.section("bias").data.at(0);
    }
    return model;
}

} // namespace dtwc
