#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtwc/cleanse.hpp"
#include "dtwc/error.hpp"

namespace dtwc {

// Token <-> dense index map with per-token document frequencies. Shared by
// the count/TF-IDF vectorizers, the word2vec trainers, and the encoder
// tokenizer.
struct Vocabulary {
    std::unordered_map<std::string, std::size_t> token_to_index;
    std::vector<std::string> tokens; // index -> token, first-occurrence order
    std::vector<std::size_t> df;     // documents containing the token
    std::size_t n_docs = 0;

    std::size_t size() const { return tokens.size(); }

    std::optional<std::size_t> index_of(const std::string& token) const {
        auto it = token_to_index.find(token);
        if (it == token_to_index.end()) return std::nullopt;
        return it->second;
    }
};

struct SparseEntry {
    std::uint32_t index;
    double value;
};

// Sparse document vector: strictly increasing indices, no stored zeros.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<SparseEntry> entries;
};

struct TfidfModel {
    std::vector<double> idf; // one weight per vocabulary index, all >= 1
};

// Tokens with document frequency >= min_df, indexed in first-occurrence
// order over the corpus scan.
Vocabulary build_vocab(const std::vector<TokenSequence>& docs, std::size_t min_df = 1);

// Raw occurrence counts; out-of-vocabulary tokens are ignored.
SparseVector count_vectorize(const TokenSequence& doc, const Vocabulary& vocab);

// Smooth idf: ln((1 + n_docs) / (1 + df)) + 1.
TfidfModel fit_idf(const std::vector<TokenSequence>& docs, const Vocabulary& vocab);

// count * idf, then L2 normalization. The zero vector passes through.
SparseVector tfidf_transform(const SparseVector& counts, const TfidfModel& model);

} // namespace dtwc
