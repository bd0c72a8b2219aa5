#include "dtwc/embed.hpp"

#include <algorithm>
#include <cmath>

#include "dtwc/kernels.hpp"

namespace dtwc {

namespace {

// 53-bit uniform in [0, 1); pinned so seeded runs are bit-identical
// regardless of standard-library distribution internals.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// -ln sigmoid(z), numerically stable.
double softplus_neg(double z) {
    if (z >= 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

std::vector<std::vector<std::size_t>> to_id_docs(const std::vector<TokenSequence>& docs,
                                                 const Vocabulary& vocab) {
    std::vector<std::vector<std::size_t>> id_docs;
    id_docs.reserve(docs.size());
    for (const auto& doc : docs) {
        std::vector<std::size_t> ids;
        ids.reserve(doc.size());
        for (const auto& tok : doc) {
            auto idx = vocab.index_of(tok);
            if (idx) ids.push_back(*idx);
        }
        id_docs.push_back(std::move(ids));
    }
    return id_docs;
}

EmbeddingMatrix init_matrix(std::size_t rows, std::size_t dim, std::mt19937_64& rng) {
    EmbeddingMatrix emb;
    emb.rows = rows;
    emb.dim = dim;
    emb.input.resize(rows * dim);
    emb.output.assign(rows * dim, 0.0);
    const double scale = 1.0 / static_cast<double>(dim);
    for (double& w : emb.input) w = (uniform01(rng) - 0.5) * scale;
    return emb;
}

struct TrainContext {
    const NoiseDistribution& noise;
    const EmbedTrainConfig& config;
    std::mt19937_64& rng;
    std::size_t total_pairs;
    std::size_t processed = 0;

    double next_lr() {
        const double frac = total_pairs == 0
                                ? 0.0
                                : static_cast<double>(processed) / static_cast<double>(total_pairs);
        ++processed;
        return std::max(config.learning_rate * (1.0 - frac), config.learning_rate * 1e-4);
    }
};

// One positive example against `hidden` (the center vector for skip-gram, the
// context mean for cbow), with immediate output updates and the accumulated
// hidden gradient returned through grad_hidden. Returns the pair loss.
double train_one(std::span<double> hidden, std::size_t positive, EmbeddingMatrix& emb,
                 TrainContext& ctx, std::vector<double>& grad_hidden) {
    const std::size_t dim = emb.dim;
    const double lr = ctx.next_lr();
    std::fill(grad_hidden.begin(), grad_hidden.end(), 0.0);

    auto u_pos = emb.output_row(positive);
    double f = kernels::dot(hidden.data(), u_pos.data(), dim);
    double loss = softplus_neg(f);
    double g = sigmoid(f) - 1.0; // d loss / d f for label 1
    kernels::axpy(g, u_pos.data(), grad_hidden.data(), dim);
    kernels::axpy(-lr * g, hidden.data(), u_pos.data(), dim);

    for (std::size_t k = 0; k < ctx.config.negatives; ++k) {
        std::size_t neg = ctx.noise.sample(ctx.rng);
        if (neg == positive) continue; // drawn noise equal to the target is dropped
        auto u_neg = emb.output_row(neg);
        double fn = kernels::dot(hidden.data(), u_neg.data(), dim);
        loss += softplus_neg(-fn);
        double gn = sigmoid(fn); // d loss / d f for label 0
        kernels::axpy(gn, u_neg.data(), grad_hidden.data(), dim);
        kernels::axpy(-lr * gn, hidden.data(), u_neg.data(), dim);
    }

    // Caller applies -lr * grad_hidden to the input rows involved.
    for (double& g_i : grad_hidden) g_i *= -lr;
    return loss;
}

enum class Mode { skipgram, cbow };

EmbeddingMatrix train_word2vec(Mode mode, const std::vector<TokenSequence>& docs,
                               const Vocabulary& vocab, const EmbedTrainConfig& config,
                               std::vector<double>* epoch_loss) {
    if (config.dim == 0) throw Error(ErrorCode::usage, "embedding dim must be >= 1");
    if (vocab.size() == 0) throw Error(ErrorCode::empty_corpus, "empty vocabulary");
    if (epoch_loss) epoch_loss->clear();

    std::mt19937_64 rng(config.seed);
    EmbeddingMatrix emb = init_matrix(vocab.size(), config.dim, rng);
    if (config.epochs == 0) return emb;

    NoiseDistribution noise = fit_noise(docs, vocab, config.noise_power);
    auto id_docs = to_id_docs(docs, vocab);

    // Count training pairs once so the learning-rate decay is exact.
    std::size_t pairs_per_epoch = 0;
    for (const auto& ids : id_docs) {
        const std::size_t n = ids.size();
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t lo = c >= config.window ? c - config.window : 0;
            const std::size_t hi = std::min(n, c + config.window + 1);
            const std::size_t ctx_count = hi - lo - 1;
            if (ctx_count == 0) continue;
            pairs_per_epoch += mode == Mode::skipgram ? ctx_count : 1;
        }
    }

    TrainContext ctx{noise, config, rng, pairs_per_epoch * config.epochs};
    std::vector<double> grad_hidden(config.dim, 0.0);
    std::vector<double> hidden(config.dim, 0.0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (const auto& ids : id_docs) {
            const std::size_t n = ids.size();
            for (std::size_t c = 0; c < n; ++c) {
                const std::size_t lo = c >= config.window ? c - config.window : 0;
                const std::size_t hi = std::min(n, c + config.window + 1);
                if (hi - lo <= 1) continue;
                if (mode == Mode::skipgram) {
                    auto v_center = emb.input_row(ids[c]);
                    for (std::size_t p = lo; p < hi; ++p) {
                        if (p == c) continue;
                        loss_sum += train_one(v_center, ids[p], emb, ctx, grad_hidden);
                        ++loss_count;
                        kernels::axpy(1.0, grad_hidden.data(), v_center.data(), emb.dim);
                    }
                } else {
                    const double inv_cw = 1.0 / static_cast<double>(hi - lo - 1);
                    std::fill(hidden.begin(), hidden.end(), 0.0);
                    for (std::size_t p = lo; p < hi; ++p) {
                        if (p == c) continue;
                        kernels::axpy(inv_cw, emb.input_row(ids[p]).data(), hidden.data(),
                                      emb.dim);
                    }
                    loss_sum += train_one(hidden, ids[c], emb, ctx, grad_hidden);
                    ++loss_count;
                    // Mean projection: each context row receives grad / cw.
                    for (std::size_t p = lo; p < hi; ++p) {
                        if (p == c) continue;
                        kernels::axpy(inv_cw, grad_hidden.data(), emb.input_row(ids[p]).data(),
                                      emb.dim);
                    }
                }
            }
        }
        if (epoch_loss)
            epoch_loss->push_back(loss_count == 0 ? 0.0
                                                  : loss_sum / static_cast<double>(loss_count));
    }
    return emb;
}

} // namespace

std::size_t NoiseDistribution::sample(double u) const {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
}

std::size_t NoiseDistribution::sample(std::mt19937_64& rng) const {
    return sample(uniform01(rng));
}

NoiseDistribution fit_noise(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                            double power) {
    if (vocab.size() == 0) throw Error(ErrorCode::empty_corpus, "empty vocabulary");

    std::vector<double> counts(vocab.size(), 0.0);
    for (const auto& doc : docs)
        for (const auto& tok : doc) {
            auto idx = vocab.index_of(tok);
            if (idx) counts[*idx] += 1.0;
        }

    double total = 0.0;
    for (double& c : counts) {
        c = c > 0.0 ? std::pow(c, power) : 0.0;
        total += c;
    }
    if (total <= 0.0)
        throw Error(ErrorCode::empty_corpus, "no in-vocabulary tokens in corpus");

    NoiseDistribution dist;
    dist.cumulative.resize(counts.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        acc += counts[i] / total;
        dist.cumulative[i] = acc;
    }
    dist.cumulative.back() = 1.0;
    return dist;
}

PairGrads sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                         const std::vector<std::span<const double>>& negatives) {
    const std::size_t dim = center.size();
    if (context.size() != dim)
        throw Error(ErrorCode::dimension_mismatch, "context dim differs from center dim");
    for (const auto& neg : negatives)
        if (neg.size() != dim)
            throw Error(ErrorCode::dimension_mismatch, "negative dim differs from center dim");

    PairGrads out;
    out.center.assign(dim, 0.0);
    out.context.assign(dim, 0.0);

    double f = kernels::dot(center.data(), context.data(), dim);
    out.loss = softplus_neg(f);
    double g = sigmoid(f) - 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
        out.center[i] += g * context[i];
        out.context[i] = g * center[i];
    }

    out.negatives.reserve(negatives.size());
    for (const auto& neg : negatives) {
        double fn = kernels::dot(center.data(), neg.data(), dim);
        out.loss += softplus_neg(-fn);
        double gn = sigmoid(fn);
        std::vector<double> grad_neg(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            out.center[i] += gn * neg[i];
            grad_neg[i] = gn * center[i];
        }
        out.negatives.push_back(std::move(grad_neg));
    }
    return out;
}

EmbeddingMatrix train_skipgram(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                               const EmbedTrainConfig& config, std::vector<double>* epoch_loss) {
    return train_word2vec(Mode::skipgram, docs, vocab, config, epoch_loss);
}

EmbeddingMatrix train_cbow(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                           const EmbedTrainConfig& config, std::vector<double>* epoch_loss) {
    return train_word2vec(Mode::cbow, docs, vocab, config, epoch_loss);
}

std::vector<double> doc_embed(const TokenSequence& doc, const EmbeddingMatrix& emb,
                              const Vocabulary& vocab) {
    std::vector<double> out(emb.dim, 0.0);
    std::size_t hits = 0;
    for (const auto& tok : doc) {
        auto idx = vocab.index_of(tok);
        if (!idx) continue;
        kernels::axpy(1.0, emb.input_row(*idx).data(), out.data(), emb.dim);
        ++hits;
    }
    if (hits > 0) kernels::scale(out.data(), 1.0 / static_cast<double>(hits), emb.dim);
    return out;
}

} // namespace dtwc
