#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtwc/classify.hpp"
#include "dtwc/cleanse.hpp"
#include "dtwc/container.hpp"
#include "dtwc/corpus.hpp"
#include "dtwc/embed.hpp"
#include "dtwc/encoder.hpp"
#include "dtwc/eval.hpp"
#include "dtwc/vectorize.hpp"

namespace dtwc {

// Everything the train/eval/predict/sweep commands share. Negative values
// mean "use the per-model default" (resolved_* below).
struct PipelineOptions {
    std::string model = "nb";         // nb | logreg | svm | encoder
    std::string vectorizer = "tfidf"; // count | tfidf | cbow | skipgram
    double val_fraction = 0.15;
    std::uint64_t seed = 0;
    std::size_t min_df = 1;

    double alpha = 1.0; // nb smoothing

    double l2 = 1e-4; // linear models
    std::string optimizer = "adam";
    double lr = -1.0;
    long long epochs = -1;
    long long batch = -1;

    std::size_t dim = 100; // word2vec vectorizers
    std::size_t window = 5;
    std::size_t negatives = 5;
    double embed_lr = 0.025;
    std::size_t embed_epochs = 5;

    double dropout = 0.0; // encoder
    std::size_t enc_layers = 2;
    std::size_t hidden = 128;
    std::size_t heads = 4;
    std::size_t ffn = 512;
    std::size_t max_len = 64;

    double threshold = -1.0; // decision threshold; default 0.5 (margin models 0)

    double resolved_lr() const;
    std::size_t resolved_epochs() const;
    std::size_t resolved_batch() const;
    double resolved_threshold() const;
    bool is_encoder() const { return model == "encoder"; }
    bool embedding_vectorizer() const { return vectorizer == "cbow" || vectorizer == "skipgram"; }
    void validate() const; // throws Usage on bad names/combos
};

// Cleansed, split, vectorized data ready for any classical classifier.
struct FeatureSet {
    std::size_t n_features = 0;
    std::vector<SparseVector> train_x, val_x;
    std::vector<int> train_y, val_y;
    Vocabulary vocab;
    TfidfModel tfidf;        // vectorizer == tfidf
    EmbeddingMatrix embedding; // cbow / skipgram
};

FeatureSet build_features(const std::vector<TweetRecord>& records,
                          const PipelineOptions& options, const CleansingConfig& cleansing);

struct TrainedModel {
    PipelineOptions options;
    CleansingConfig cleansing;

    Vocabulary vocab;
    TfidfModel tfidf;
    EmbeddingMatrix embedding;
    NBModel nb;
    LinearModel linear;

    EncoderParams enc_params;
    EncoderVocab enc_vocab;
    std::vector<EpochStats> history;

    SparseVector vectorize_tokens(const TokenSequence& tokens) const;
    // P(class 1) for nb/logreg/encoder; signed margin for svm.
    double score_tokens(const TokenSequence& tokens) const;
    double score_text(const std::string& raw) const;
    int label_for(double score) const;
};

struct TrainReport {
    std::size_t train_size = 0;
    std::size_t val_size = 0;
    std::size_t duplicates_removed = 0;
    bool has_val_metrics = false;
    MetricsReport val_metrics;
    std::vector<EpochStats> history;
};

// dedup -> stratified split -> cleanse -> vectorize -> fit -> validate.
TrainedModel train_pipeline(const std::vector<TweetRecord>& records,
                            const PipelineOptions& options, const CleansingConfig& cleansing,
                            TrainReport* report = nullptr);

// Re-runs the model's own dedup/split on `records` (optionally overriding the
// split parameters) and scores the validation portion.
MetricsReport evaluate_split(const TrainedModel& model, const std::vector<TweetRecord>& records,
                             double val_fraction, std::uint64_t seed);

SparseVector densify(const std::vector<double>& dense);

ModelContainer to_container(const TrainedModel& model);
TrainedModel from_container(const ModelContainer& container);

} // namespace dtwc
