#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dtwc/error.hpp"
#include "dtwc/vectorize.hpp"

namespace dtwc {

// Input (center/projection) and output (context) vectors, V x dim row-major.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> input;
    std::vector<double> output;

    std::span<double> input_row(std::size_t r) { return {input.data() + r * dim, dim}; }
    std::span<const double> input_row(std::size_t r) const {
        return {input.data() + r * dim, dim};
    }
    std::span<double> output_row(std::size_t r) { return {output.data() + r * dim, dim}; }
    std::span<const double> output_row(std::size_t r) const {
        return {output.data() + r * dim, dim};
    }
};

struct EmbedTrainConfig {
    std::size_t dim = 100;
    std::size_t window = 5;     // symmetric context half-width
    std::size_t negatives = 5;  // noise samples per positive pair
    double learning_rate = 0.025;
    std::size_t epochs = 5;
    double noise_power = 0.75;
    std::uint64_t seed = 0;
};

// Unigram^power noise distribution stored as a cumulative table.
struct NoiseDistribution {
    std::vector<double> cumulative; // strictly increasing, last element == 1

    std::size_t sample(double u) const; // u in [0, 1)
    std::size_t sample(std::mt19937_64& rng) const;
};

NoiseDistribution fit_noise(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                            double power);

struct PairGrads {
    double loss = 0.0;
    std::vector<double> center;               // d/d v_center
    std::vector<double> context;              // d/d u_context
    std::vector<std::vector<double>> negatives; // d/d u_neg, one per sample
};

// loss = -ln sigma(u_ctx . v_c) - sum_k ln sigma(-u_k . v_c)
PairGrads sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                         const std::vector<std::span<const double>>& negatives);

// Both trainers: input rows initialized uniform [-0.5/dim, 0.5/dim] from the
// seed, output rows zero; learning rate decays linearly over all processed
// pairs down to learning_rate * 1e-4. epoch_loss (optional) receives the mean
// pair loss per epoch.
EmbeddingMatrix train_skipgram(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                               const EmbedTrainConfig& config,
                               std::vector<double>* epoch_loss = nullptr);

EmbeddingMatrix train_cbow(const std::vector<TokenSequence>& docs, const Vocabulary& vocab,
                           const EmbedTrainConfig& config,
                           std::vector<double>* epoch_loss = nullptr);

// Mean of input vectors over in-vocabulary tokens; zero vector when none.
std::vector<double> doc_embed(const TokenSequence& doc, const EmbeddingMatrix& emb,
                              const Vocabulary& vocab);

} // namespace dtwc
