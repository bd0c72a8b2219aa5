#include "dtwc/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dtwc/kernels.hpp"

namespace dtwc {

Vocabulary build_vocab(const std::vector<TokenSequence>& docs, std::size_t min_df) {
    if (min_df < 1) throw Error(ErrorCode::usage, "min_df must be >= 1");
    if (docs.empty()) throw Error(ErrorCode::empty_corpus, "no documents");

    std::vector<std::string> first_seen;
    std::unordered_map<std::string, std::size_t> raw_df;
    for (const auto& doc : docs) {
        std::unordered_set<std::string> seen_in_doc;
        for (const auto& tok : doc) {
            if (!seen_in_doc.insert(tok).second) continue;
            auto [it, inserted] = raw_df.try_emplace(tok, 0);
            if (inserted) first_seen.push_back(tok);
            ++it->second;
        }
    }
    if (first_seen.empty())
        throw Error(ErrorCode::empty_corpus, "all documents are empty");

    Vocabulary vocab;
    vocab.n_docs = docs.size();
    for (const auto& tok : first_seen) {
        std::size_t count = raw_df.at(tok);
        if (count < min_df) continue;
        vocab.token_to_index.emplace(tok, vocab.tokens.size());
        vocab.tokens.push_back(tok);
        vocab.df.push_back(count);
    }
    if (vocab.tokens.empty())
        throw Error(ErrorCode::empty_corpus, "min_df leaves no tokens");
    return vocab;
}

SparseVector count_vectorize(const TokenSequence& doc, const Vocabulary& vocab) {
    if (vocab.size() == 0) throw Error(ErrorCode::empty_corpus, "empty vocabulary");

    std::unordered_map<std::size_t, double> counts;
    for (const auto& tok : doc) {
        auto idx = vocab.index_of(tok);
        if (idx) counts[*idx] += 1.0;
    }

    SparseVector out;
    out.dim = vocab.size();
    out.entries.reserve(counts.size());
    for (const auto& [idx, value] : counts)
        out.entries.push_back({static_cast<std::uint32_t>(idx), value});
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    return out;
}

TfidfModel fit_idf(const std::vector<TokenSequence>& docs, const Vocabulary& vocab) {
    if (docs.empty()) throw Error(ErrorCode::empty_corpus, "no documents");
    if (vocab.size() == 0) throw Error(ErrorCode::empty_corpus, "empty vocabulary");

    std::vector<std::size_t> df(vocab.size(), 0);
    for (const auto& doc : docs) {
        std::unordered_set<std::size_t> seen;
        for (const auto& tok : doc) {
            auto idx = vocab.index_of(tok);
            if (idx) seen.insert(*idx);
        }
        for (std::size_t idx : seen) ++df[idx];
    }

    TfidfModel model;
    model.idf.resize(vocab.size());
    const double n = static_cast<double>(docs.size());
    for (std::size_t i = 0; i < df.size(); ++i)
        model.idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
    return model;
}

SparseVector tfidf_transform(const SparseVector& counts, const TfidfModel& model) {
    if (counts.dim != model.idf.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "vector dim " + std::to_string(counts.dim) + " vs idf dim " +
                        std::to_string(model.idf.size()));

    SparseVector out;
    out.dim = counts.dim;
    out.entries.reserve(counts.entries.size());
    double norm_sq = 0.0;
    for (const auto& e : counts.entries) {
        double w = e.value * model.idf[e.index];
        norm_sq += w * w;
        out.entries.push_back({e.index, w});
    }
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& e : out.entries) e.value *= inv;
    }
    return out;
}

} // namespace dtwc
