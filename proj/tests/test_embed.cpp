#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dtwc/embed.hpp"

using namespace dtwc;

namespace {

std::vector<TokenSequence> toy_corpus() {
    // Two loose topic clusters so training has structure to find.
    std::vector<std::string> texts = {
        "fire smoke fire damage flood",
        "flood water fire rescue smoke",
        "smoke fire flood damage water",
        "coffee movie music coffee garden",
        "garden music coffee sunny movie",
        "movie garden sunny coffee music",
        "fire flood smoke water rescue damage",
        "music movie garden coffee sunny",
    };
    std::vector<TokenSequence> docs;
    for (const auto& t : texts) docs.push_back(tokenize(t));
    return docs;
}

double finite_diff(const std::function<double(double)>& f, double eps = 1e-6) {
    return (f(eps) - f(-eps)) / (2.0 * eps);
}

} // namespace

TEST_CASE("sgns pair loss: value against the explicit formula") {
    std::vector<double> center = {0.3, -0.2, 0.5};
    std::vector<double> context = {-0.1, 0.4, 0.2};
    std::vector<double> neg1 = {0.7, 0.1, -0.3};
    std::vector<double> neg2 = {-0.2, -0.2, 0.1};

    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    auto sigma = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };

    auto grads = sgns_pair_loss(center, context, {std::span<const double>(neg1), neg2});
    const double expect = -std::log(sigma(dot(center, context))) -
                          std::log(sigma(-dot(center, neg1))) -
                          std::log(sigma(-dot(center, neg2)));
    CHECK(grads.loss == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sgns pair loss: gradients match central finite differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-0.8, 0.8);
    const std::size_t dim = 5;

    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> center(dim), context(dim), neg1(dim), neg2(dim);
        for (auto* v : {&center, &context, &neg1, &neg2})
            for (auto& x : *v) x = dist(rng);

        auto loss_at = [&](std::vector<double> c, std::vector<double> ctx, std::vector<double> n1,
                           std::vector<double> n2) {
            return sgns_pair_loss(c, ctx, {std::span<const double>(n1), n2}).loss;
        };

        auto grads = sgns_pair_loss(center, context, {std::span<const double>(neg1), neg2});

        for (std::size_t i = 0; i < dim; ++i) {
            auto fd_center = finite_diff([&](double e) {
                auto c = center;
                c[i] += e;
                return loss_at(c, context, neg1, neg2);
            });
            CHECK(grads.center[i] == doctest::Approx(fd_center).epsilon(1e-5));

            auto fd_context = finite_diff([&](double e) {
                auto ctx = context;
                ctx[i] += e;
                return loss_at(center, ctx, neg1, neg2);
            });
            CHECK(grads.context[i] == doctest::Approx(fd_context).epsilon(1e-5));

            auto fd_neg = finite_diff([&](double e) {
                auto n = neg1;
                n[i] += e;
                return loss_at(center, context, n, neg2);
            });
            CHECK(grads.negatives[0][i] == doctest::Approx(fd_neg).epsilon(1e-5));
        }
    }
}

TEST_CASE("noise distribution: cumulative table and unigram^0.75 sampling") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    auto noise = fit_noise(docs, vocab, 0.75);

    REQUIRE(noise.cumulative.size() == vocab.size());
    CHECK(noise.cumulative.back() == 1.0);
    for (std::size_t i = 1; i < noise.cumulative.size(); ++i)
        CHECK(noise.cumulative[i] >= noise.cumulative[i - 1]);

    // Expected mass from raw counts.
    std::vector<double> counts(vocab.size(), 0.0);
    for (const auto& doc : docs)
        for (const auto& tok : doc) counts[*vocab.index_of(tok)] += 1.0;
    double total = 0.0;
    for (double& c : counts) {
        c = std::pow(c, 0.75);
        total += c;
    }

    // Large-sample frequencies within 3 sigma of the expected mass.
    std::mt19937_64 rng(99);
    const std::size_t draws = 200000;
    std::vector<std::size_t> hits(vocab.size(), 0);
    for (std::size_t s = 0; s < draws; ++s) ++hits[noise.sample(rng)];
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const double p = counts[i] / total;
        const double sigma = std::sqrt(p * (1.0 - p) * static_cast<double>(draws));
        CHECK(std::abs(static_cast<double>(hits[i]) - p * static_cast<double>(draws)) <=
              3.5 * sigma + 1.0);
    }

    // Quantile sampling is exact at the table boundaries.
    CHECK(noise.sample(0.0) == 0);
    CHECK(noise.sample(noise.cumulative[0]) == 1);
    CHECK(noise.sample(std::nextafter(1.0, 0.0)) == vocab.size() - 1);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 16;
    config.window = 2;
    config.negatives = 3;
    config.epochs = 2;
    config.seed = 5;

    for (auto* train : {&train_skipgram, &train_cbow}) {
        auto a = (*train)(docs, vocab, config, nullptr);
        auto b = (*train)(docs, vocab, config, nullptr);
        REQUIRE(a.input.size() == b.input.size());
        for (std::size_t i = 0; i < a.input.size(); ++i) CHECK(a.input[i] == b.input[i]);
        for (std::size_t i = 0; i < a.output.size(); ++i) CHECK(a.output[i] == b.output[i]);
    }
}

TEST_CASE("epochs=0 returns the seeded init: input uniform in [-0.5/d, 0.5/d], output zero") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 8;
    config.epochs = 0;
    config.seed = 3;

    auto emb = train_skipgram(docs, vocab, config, nullptr);
    CHECK(emb.rows == vocab.size());
    CHECK(emb.dim == 8);
    const double bound = 0.5 / 8.0;
    bool any_nonzero = false;
    for (double w : emb.input) {
        CHECK(std::abs(w) <= bound);
        if (w != 0.0) any_nonzero = true;
    }
    CHECK(any_nonzero);
    for (double w : emb.output) CHECK(w == 0.0);

    // cbow shares the same init path.
    auto emb2 = train_cbow(docs, vocab, config, nullptr);
    for (std::size_t i = 0; i < emb.input.size(); ++i) CHECK(emb.input[i] == emb2.input[i]);
}

TEST_CASE("mean pair loss drops over epochs for both objectives") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 24;
    config.window = 2;
    config.negatives = 4;
    config.learning_rate = 0.05;
    // Single epochs fluctuate with the negative-sample draws on a corpus
    // this small; a longer run separates trend from noise.
    config.epochs = 30;
    config.seed = 1;

    auto tail_mean = [](const std::vector<double>& loss) {
        return (loss[loss.size() - 1] + loss[loss.size() - 2] + loss[loss.size() - 3]) / 3.0;
    };

    std::vector<double> loss;
    train_skipgram(docs, vocab, config, &loss);
    REQUIRE(loss.size() == 30);
    CHECK(tail_mean(loss) < loss.front() - 0.05);

    train_cbow(docs, vocab, config, &loss);
    REQUIRE(loss.size() == 30);
    CHECK(tail_mean(loss) < loss.front() - 0.05);
}

TEST_CASE("doc_embed averages input rows and ignores unknown tokens") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 4;
    config.epochs = 0; // embeddings stay at their init values
    auto emb = train_skipgram(docs, vocab, config, nullptr);

    const auto a = *vocab.index_of("fire");
    const auto b = *vocab.index_of("flood");
    auto vec = doc_embed({"fire", "flood", "zzz-unknown"}, emb, vocab);
    REQUIRE(vec.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(vec[i] ==
              doctest::Approx((emb.input[a * 4 + i] + emb.input[b * 4 + i]) / 2.0).epsilon(1e-15));

    auto zero = doc_embed({"zzz", "yyy"}, emb, vocab);
    for (double x : zero) CHECK(x == 0.0);
    CHECK(doc_embed({}, emb, vocab) == std::vector<double>(4, 0.0));
}

TEST_CASE("embedding geometry reflects the corpus topics") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 24;
    config.window = 3;
    config.negatives = 5;
    config.learning_rate = 0.05;
    config.epochs = 40;
    config.seed = 9;

    auto emb = train_skipgram(docs, vocab, config, nullptr);
    auto cosine = [&](const std::string& x, const std::string& y) {
        auto xi = emb.input_row(*vocab.index_of(x));
        auto yi = emb.input_row(*vocab.index_of(y));
        double num = 0, nx = 0, ny = 0;
        for (std::size_t i = 0; i < emb.dim; ++i) {
            num += xi[i] * yi[i];
            nx += xi[i] * xi[i];
            ny += yi[i] * yi[i];
        }
        return num / std::sqrt(nx * ny);
    };
    // In-topic similarity beats cross-topic similarity.
    CHECK(cosine("fire", "flood") > cosine("fire", "coffee"));
    CHECK(cosine("coffee", "movie") > cosine("coffee", "smoke"));
}

TEST_CASE("embed error paths") {
    auto docs = toy_corpus();
    auto vocab = build_vocab(docs);
    EmbedTrainConfig config;
    config.dim = 0;
    CHECK_THROWS_AS(train_skipgram(docs, vocab, config, nullptr), Error);

    Vocabulary empty;
    CHECK_THROWS_AS(fit_noise(docs, empty, 0.75), Error);

    std::vector<double> a = {1.0, 2.0};
    std::vector<double> b = {1.0};
    CHECK_THROWS_AS(sgns_pair_loss(a, b, {}), Error);
}
