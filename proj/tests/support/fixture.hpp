#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtwc/corpus.hpp"

namespace dtwc::testfix {

// Deterministic Kaggle-shaped synthetic training corpus: exactly 7,613 rows
// (4,342 class 0, 3,271 class 1) with exact duplicates, conflicting-label
// duplicates, and tweet-style noise (urls, emails, html, emojis,
// abbreviations, stopwords, repeated punctuation, quoted CSV fields).
std::string synthetic_csv();

// Training CSV used by corpus-scale tests: $DTWC_TRAIN_CSV when set,
// otherwise the synthetic corpus written once under the build tree.
std::string corpus_path();

// Tiny labeled corpus for fast pipeline tests: two word families with some
// shared vocabulary, deterministic in `seed`.
std::vector<TweetRecord> small_labeled(std::size_t n, std::uint64_t seed);

// Directory holding the shipped word lists (stopwords etc.).
std::string data_dir();

} // namespace dtwc::testfix
