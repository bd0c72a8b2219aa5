#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtwc/error.hpp"

namespace dtwc {

// One row of the Kaggle-format disaster tweet CSV. target is absent for
// unlabeled (test-set) rows; 0 = Not Disaster, 1 = Disaster.
struct TweetRecord {
    std::int64_t id = 0;
    std::optional<std::string> keyword;
    std::optional<std::string> location;
    std::string text;
    std::optional<int> target;
};

struct DatasetStats {
    std::size_t total = 0;
    std::array<std::size_t, 2> per_class = {0, 0};
    std::size_t unlabeled = 0;
    std::size_t duplicates_removed = 0;
};

struct SplitSpec {
    double val_fraction = 0.15;
    std::uint64_t seed = 0;
    bool stratified = true;
};

// Parses a CSV with header id,keyword,location,text[,target]. Quoted fields
// may contain commas, quotes ("" escape) and newlines.
std::vector<TweetRecord> load_csv(const std::string& path);
std::vector<TweetRecord> parse_csv(const std::string& content);

DatasetStats dataset_stats(const std::vector<TweetRecord>& records);

// Collapses exact (text, target) duplicates to their first occurrence and
// drops every record whose text appears with more than one distinct target.
std::pair<std::vector<TweetRecord>, std::size_t> dedup(const std::vector<TweetRecord>& records);

// Seeded validation split; per-class validation count is round-half-up of
// val_fraction * class size, with any rounding remainder charged to the
// majority class.
std::pair<std::vector<TweetRecord>, std::vector<TweetRecord>>
stratified_split(const std::vector<TweetRecord>& records, const SplitSpec& spec);

} // namespace dtwc
