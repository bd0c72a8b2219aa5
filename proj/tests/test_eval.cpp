#include <doctest.h>

#include <vector>

#include "dtwc/eval.hpp"

using namespace dtwc;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::io_failure; // sentinel no eval test expects
}

} // namespace

TEST_CASE("confusion counts every cell from paired predictions") {
    //            tp tp fp fn tn tn fn
    std::vector<int> pred = {1, 1, 1, 0, 0, 0, 0};
    std::vector<int> truth = {1, 1, 0, 1, 0, 0, 1};
    auto m = confusion(pred, truth);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 2);
    CHECK(m.tn == 2);
    CHECK(m.total() == 7);

    CHECK(code_of([&] { confusion({1, 0}, {1}); }) == ErrorCode::length_mismatch);
    CHECK(code_of([&] { confusion({}, {}); }) == ErrorCode::empty_input);
    CHECK(code_of([&] { confusion({2}, {1}); }) == ErrorCode::non_binary_target);
    CHECK(code_of([&] { confusion({1}, {-1}); }) == ErrorCode::non_binary_target);
}

TEST_CASE("metrics: hand-checked precision, recall, f1, accuracy") {
    ConfusionMatrix m;
    m.tp = 2;
    m.fp = 1;
    m.fn = 1;
    m.tn = 4;
    auto r = metrics(m);
    CHECK(r.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(6.0 / 8.0).epsilon(1e-12));
    CHECK(r.matrix.tp == 2);

    // Asymmetric case: p = 3/4, r = 3/5, f1 = 2pr/(p+r) = 2/3.
    ConfusionMatrix m2;
    m2.tp = 3;
    m2.fp = 1;
    m2.fn = 2;
    m2.tn = 0;
    auto r2 = metrics(m2);
    CHECK(r2.precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r2.recall == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r2.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-12));
    CHECK(r2.accuracy == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metrics: zero-denominator conventions fall back to 0") {
    ConfusionMatrix never_positive; // model never predicts 1, no positives exist
    never_positive.tn = 5;
    auto r = metrics(never_positive);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.accuracy == 1.0);

    ConfusionMatrix all_missed; // positives exist but none predicted
    all_missed.fn = 3;
    all_missed.tn = 2;
    auto r2 = metrics(all_missed);
    CHECK(r2.precision == 0.0);
    CHECK(r2.recall == 0.0);
    CHECK(r2.f1 == 0.0);
    CHECK(r2.accuracy == doctest::Approx(0.4).epsilon(1e-12));

    CHECK(code_of([&] { metrics(ConfusionMatrix{}); }) == ErrorCode::empty_matrix);
}

TEST_CASE("mean_f1_by_vectorizer averages per group and sorts deterministically") {
    std::vector<SuiteScore> scores = {
        {"tfidf", "nb", 0.80},   {"tfidf", "logreg", 0.70}, {"count", "nb", 0.60},
        {"count", "svm", 0.70},  {"cbow", "logreg", 0.65},
    };
    auto out = mean_f1_by_vectorizer(scores);
    REQUIRE(out.size() == 3);
    CHECK(out[0].first == "tfidf");
    CHECK(out[0].second == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(out[1].first == "cbow"); // 0.65 ties broken by name: cbow < count
    CHECK(out[1].second == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(out[2].first == "count");
    CHECK(out[2].second == doctest::Approx(0.65).epsilon(1e-12));

    CHECK(code_of([&] { mean_f1_by_vectorizer({}); }) == ErrorCode::empty_group);
}
