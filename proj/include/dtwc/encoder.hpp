#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtwc/cleanse.hpp"
#include "dtwc/corpus.hpp"
#include "dtwc/error.hpp"
#include "dtwc/optimize.hpp"

namespace dtwc {

// Reserved token ids for the encoder tokenizer.
inline constexpr std::size_t kClsId = 0;
inline constexpr std::size_t kPadId = 1;
inline constexpr std::size_t kUnkId = 2;
inline constexpr std::size_t kReservedTokens = 3;

// Desk-scale defaults; the full-size BERT geometry (24 layers, hidden 1024,
// 16 heads) is expressible through the same fields.
struct EncoderConfig {
    std::size_t vocab_size = 0; // includes the reserved ids
    std::size_t layers = 2;
    std::size_t hidden = 128;
    std::size_t heads = 4;
    std::size_t ffn_dim = 512;
    std::size_t max_len = 64;
    double dropout_rate = 0.0; // classification head only
    std::uint64_t seed = 0;

    std::size_t head_dim() const { return hidden / heads; }
    void validate() const; // throws Usage on inconsistent geometry
};

struct TensorInfo {
    std::string name;
    std::size_t offset = 0;
    std::vector<std::size_t> dims;
    std::size_t size = 0;
};

// Flat parameter layout: every logical tensor gets a named slice of one
// contiguous buffer, so the optimizer, the gradient checker, and the model
// container all see the same thing.
struct EncoderLayout {
    std::vector<TensorInfo> tensors;
    std::size_t total = 0;

    static EncoderLayout build(const EncoderConfig& config);
    const TensorInfo& find(const std::string& name) const; // throws Usage
};

struct EncoderParams {
    EncoderConfig config;
    EncoderLayout layout;
    std::vector<double> values;

    std::span<double> tensor(const std::string& name);
    std::span<const double> tensor(const std::string& name) const;
};

// Gaussian(0, 0.02^2) weights from the config seed; biases and layer-norm
// offsets zero, layer-norm scales one.
EncoderParams init_encoder(const EncoderConfig& config);

// --- building blocks, exposed for direct unit testing ---

double gelu(double x);            // exact form, via erf
double gelu_derivative(double x);

// Standardize x, then scale/offset elementwise. x_hat (optional) receives
// the standardized values.
void layer_norm(std::span<const double> x, std::span<const double> scale,
                std::span<const double> offset, std::span<double> out,
                double* x_hat = nullptr);

// In-place softmax over one row; -inf entries come out exactly 0.
void softmax_row(std::span<double> row);

struct AttentionTrace {
    std::size_t heads = 0;
    std::size_t seq = 0;
    std::vector<double> weights; // heads x seq x seq, rows sum to 1
};

// Single-layer multi-head self-attention on x (seq x hidden). mask[j] true
// means key j is padding and receives zero attention weight.
std::vector<double> multi_head_attention(std::span<const double> x, std::size_t seq,
                                         const EncoderParams& params, std::size_t layer,
                                         const std::vector<bool>& mask,
                                         AttentionTrace* trace = nullptr);

struct EncoderOutput {
    std::vector<double> pooled; // hidden values at the leading CLS position
    double logit = 0.0;
    double prob = 0.0;
};

// token_ids[0] must be the CLS id; ids must be < vocab_size and the sequence
// no longer than max_len. dropout_rng is only consulted when training and
// dropout_rate > 0.
EncoderOutput encoder_forward(const std::vector<std::size_t>& token_ids,
                              const EncoderParams& params, bool training = false,
                              std::mt19937_64* dropout_rng = nullptr);

// Binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7].
double bce_loss(double prob, int target);

// Mean loss over the batch; when grads is non-null it must have layout.total
// elements and receives the mean-loss gradient (accumulated on top of what
// it already holds). Backpropagation is exact for every parameter tensor.
double encoder_batch(const std::vector<std::vector<std::size_t>>& batch_ids,
                     const std::vector<int>& targets, const EncoderParams& params,
                     std::vector<double>* grads, bool training = false,
                     std::mt19937_64* dropout_rng = nullptr);

// --- tokenizer ---

struct EncoderVocab {
    std::vector<std::string> tokens; // [0..2] are the reserved markers
    std::unordered_map<std::string, std::size_t> token_to_id;

    std::size_t size() const { return tokens.size(); }

    static EncoderVocab build(const std::vector<TokenSequence>& docs, std::size_t min_df = 1);

    // [CLS] + token ids (unknowns -> UNK), truncated to max_len.
    std::vector<std::size_t> encode(const TokenSequence& doc, std::size_t max_len) const;
};

// --- fine-tuning ---

struct FineTuneConfig {
    double learning_rate = 6e-6;
    double dropout_rate = 0.0;
    std::size_t epochs = 3;
    std::size_t batch_size = 16;
    OptimizerConfig optimizer; // learning_rate field above wins
    double val_fraction = 0.15;
    std::uint64_t split_seed = 2;
    std::size_t vocab_min_df = 1;
};

struct EpochStats {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

struct FineTuneResult {
    EncoderParams params;
    EncoderVocab vocab;
    std::vector<EpochStats> history; // one entry per completed epoch
};

// Cleanses and tokenizes the records, splits off a stratified validation
// set, builds the vocabulary from the training portion, then trains with
// seeded shuffling. config.vocab_size is filled in from the built vocabulary.
FineTuneResult fine_tune(const std::vector<TweetRecord>& records, const FineTuneConfig& ft,
                         EncoderConfig config, const CleansingConfig& cleansing);

} // namespace dtwc
