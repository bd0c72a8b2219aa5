#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dtwc/pipeline.hpp"
#include "support/fixture.hpp"

using namespace dtwc;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::bad_magic; // sentinel no pipeline test expects
}

PipelineOptions encoder_options() {
    PipelineOptions o;
    o.model = "encoder";
    o.vectorizer = "count"; // ignored by the encoder path
    o.enc_layers = 1;
    o.hidden = 8;
    o.heads = 2;
    o.ffn = 16;
    o.max_len = 12;
    o.epochs = 1;
    o.batch = 8;
    o.lr = 1e-3;
    o.seed = 3;
    o.val_fraction = 0.2;
    return o;
}

} // namespace

TEST_CASE("per-model defaults resolve from the -1 sentinels") {
    PipelineOptions enc;
    enc.model = "encoder";
    CHECK(enc.resolved_lr() == 6e-6);
    CHECK(enc.resolved_epochs() == 3);
    CHECK(enc.resolved_batch() == 16);
    CHECK(enc.resolved_threshold() == 0.5);

    PipelineOptions lin;
    lin.model = "logreg";
    CHECK(lin.resolved_lr() == 0.1);
    CHECK(lin.resolved_epochs() == 10);
    CHECK(lin.resolved_batch() == 256);
    CHECK(lin.resolved_threshold() == 0.5);

    PipelineOptions svm;
    svm.model = "svm";
    CHECK(svm.resolved_threshold() == 0.0);

    PipelineOptions overridden;
    overridden.model = "svm";
    overridden.lr = 0.2;
    overridden.epochs = 0;
    overridden.batch = 32;
    overridden.threshold = 0.3;
    CHECK(overridden.resolved_lr() == 0.2);
    CHECK(overridden.resolved_epochs() == 0);
    CHECK(overridden.resolved_batch() == 32);
    CHECK(overridden.resolved_threshold() == 0.3);
}

TEST_CASE("option validation rejects bad names and combinations") {
    PipelineOptions o;
    o.validate(); // defaults are fine

    o.model = "forest";
    CHECK(code_of([&] { o.validate(); }) == ErrorCode::invalid_model_kind);

    o.model = "nb";
    o.vectorizer = "hashing";
    CHECK(code_of([&] { o.validate(); }) == ErrorCode::usage);

    o.vectorizer = "cbow"; // nb cannot take signed features
    CHECK(code_of([&] { o.validate(); }) == ErrorCode::usage);
    o.vectorizer = "skipgram";
    CHECK(code_of([&] { o.validate(); }) == ErrorCode::usage);

    o = PipelineOptions{};
    o.val_fraction = 1.0;
    CHECK(code_of([&] { o.validate(); }) == ErrorCode::usage);

    o = PipelineOptions{};
    o.optimizer = "nadam";
    CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("densify keeps only nonzero entries in index order") {
    auto v = densify({0.0, 1.5, 0.0, 2.0});
    CHECK(v.dim == 4);
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0].index == 1);
    CHECK(v.entries[0].value == 1.5);
    CHECK(v.entries[1].index == 3);
    CHECK(v.entries[1].value == 2.0);

    auto zero = densify({0.0, 0.0});
    CHECK(zero.dim == 2);
    CHECK(zero.entries.empty());
}

TEST_CASE("build_features splits, vectorizes, and reports dimensions") {
    auto records = testfix::small_labeled(40, 5);
    auto cleansing = CleansingConfig::bare();

    PipelineOptions o;
    o.val_fraction = 0.2;
    o.seed = 7;

    SUBCASE("tfidf rows are unit length") {
        auto fs = build_features(records, o, cleansing);
        CHECK(fs.train_x.size() + fs.val_x.size() == 40);
        CHECK(fs.train_y.size() == fs.train_x.size());
        CHECK(fs.val_y.size() == fs.val_x.size());
        CHECK(fs.n_features == fs.vocab.size());
        CHECK(fs.tfidf.idf.size() == fs.vocab.size());
        for (const auto& x : fs.train_x) {
            if (x.entries.empty()) continue;
            double norm = 0.0;
            for (const auto& e : x.entries) norm += e.value * e.value;
            CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    SUBCASE("count rows hold raw frequencies") {
        o.vectorizer = "count";
        auto fs = build_features(records, o, cleansing);
        CHECK(fs.n_features == fs.vocab.size());
        for (const auto& x : fs.train_x)
            for (const auto& e : x.entries) {
                CHECK(e.value >= 1.0);
                CHECK(e.value == std::floor(e.value));
            }
    }

    SUBCASE("embedding rows live in the embedding dimension") {
        o.vectorizer = "cbow";
        o.dim = 16;
        o.embed_epochs = 1;
        auto fs = build_features(records, o, cleansing);
        CHECK(fs.n_features == 16);
        CHECK(fs.embedding.dim == 16);
        CHECK(fs.embedding.rows == fs.vocab.size());
        for (const auto& x : fs.train_x) CHECK(x.dim == 16);
    }
}

TEST_CASE("nb pipeline: trains, reports validation metrics, scores raw text") {
    auto records = testfix::small_labeled(60, 11);
    auto cleansing = CleansingConfig::bare();

    PipelineOptions o;
    o.model = "nb";
    o.vectorizer = "tfidf";
    o.val_fraction = 0.2;
    o.seed = 2;

    TrainReport report;
    auto model = train_pipeline(records, o, cleansing, &report);

    CHECK(report.train_size + report.val_size == 60);
    CHECK(report.duplicates_removed == 0);
    REQUIRE(report.has_val_metrics);
    CHECK(report.val_metrics.f1 >= 0.0);
    CHECK(report.val_metrics.f1 <= 1.0);

    const double s = model.score_text(records.front().text);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK((model.label_for(s) == 0 || model.label_for(s) == 1));

    // Out-of-vocabulary text scores without throwing.
    const double oov = model.score_text("zzzzq qqqzz");
    CHECK(oov >= 0.0);
    CHECK(oov <= 1.0);

    // evaluate_split with the training split parameters reproduces the
    // reported validation metrics.
    auto again = evaluate_split(model, records, o.val_fraction, o.seed);
    CHECK(again.f1 == doctest::Approx(report.val_metrics.f1).epsilon(1e-12));
    CHECK(again.matrix.tp == report.val_metrics.matrix.tp);
    CHECK(again.matrix.fp == report.val_metrics.matrix.fp);
}

TEST_CASE("training is deterministic: containers serialize byte-identically") {
    auto records = testfix::small_labeled(50, 21);
    auto cleansing = CleansingConfig::bare();

    PipelineOptions o;
    o.model = "logreg";
    o.vectorizer = "count";
    o.epochs = 3;
    o.seed = 9;

    auto a = serialize_container(to_container(train_pipeline(records, o, cleansing)));
    auto b = serialize_container(to_container(train_pipeline(records, o, cleansing)));
    CHECK(a == b);
}

TEST_CASE("container round-trip preserves classical model scores exactly") {
    auto records = testfix::small_labeled(50, 13);
    auto cleansing = CleansingConfig::bare();
    const std::vector<std::string> probes = {
        records[1].text, records[2].text, "Fire and flood everywhere", "calm sunny picnic day",
    };

    for (const std::string model_name : {"nb", "logreg", "svm"}) {
        PipelineOptions o;
        o.model = model_name;
        o.vectorizer = model_name == "nb" ? "tfidf" : "count";
        o.epochs = 3;
        o.seed = 4;

        auto trained = train_pipeline(records, o, cleansing);
        auto container = to_container(trained);
        auto restored = from_container(deserialize_container(serialize_container(container)));

        for (const auto& text : probes) {
            const double want = trained.score_text(text);
            const double got = restored.score_text(text);
            CHECK(got == want); // bitwise: same arithmetic on both sides
            CHECK(restored.label_for(got) == trained.label_for(want));
        }
    }
}

TEST_CASE("container round-trip preserves embedding vectorizer scores") {
    auto records = testfix::small_labeled(40, 17);
    auto cleansing = CleansingConfig::bare();

    PipelineOptions o;
    o.model = "svm";
    o.vectorizer = "skipgram";
    o.dim = 12;
    o.embed_epochs = 1;
    o.epochs = 2;
    o.seed = 5;

    auto trained = train_pipeline(records, o, cleansing);
    auto restored = from_container(deserialize_container(serialize_container(to_container(trained))));
    for (const auto& r : records) CHECK(restored.score_text(r.text) == trained.score_text(r.text));
}

TEST_CASE("encoder pipeline: history, container round-trip, exact rescoring") {
    auto records = testfix::small_labeled(40, 19);
    auto cleansing = CleansingConfig::bare();
    auto o = encoder_options();

    TrainReport report;
    auto trained = train_pipeline(records, o, cleansing, &report);
    REQUIRE(trained.history.size() == 1);
    CHECK(trained.history[0].epoch == 1);
    CHECK(std::isfinite(trained.history[0].train_loss));
    REQUIRE(report.has_val_metrics);

    auto container = to_container(trained);
    CHECK(container.kind == ModelKind::encoder);
    CHECK(container.metadata.at("history").size() == 1);

    auto restored = from_container(deserialize_container(serialize_container(container)));
    REQUIRE(restored.history.size() == 1);
    CHECK(restored.history[0].train_loss == trained.history[0].train_loss);
    for (const auto& r : records) {
        const double want = trained.score_text(r.text);
        CHECK(want >= 0.0);
        CHECK(want <= 1.0);
        CHECK(restored.score_text(r.text) == want);
    }
}

TEST_CASE("from_container rejects missing or misshapen sections") {
    auto records = testfix::small_labeled(30, 23);
    auto cleansing = CleansingConfig::bare();

    PipelineOptions o;
    o.model = "nb";
    o.vectorizer = "tfidf";
    o.epochs = 2;
    auto container = to_container(train_pipeline(records, o, cleansing));

    auto stripped = container;
    std::erase_if(stripped.sections, [](const TensorSection& s) { return s.name == "idf"; });
    CHECK(code_of([&] { from_container(stripped); }) == ErrorCode::usage);

    auto enc = to_container(train_pipeline(records, encoder_options(), cleansing));
    auto bent = enc;
    for (auto& s : bent.sections)
        if (s.name == "head.weight") s.dims = {4};
    CHECK(code_of([&] { from_container(bent); }) == ErrorCode::shape_mismatch);
}
