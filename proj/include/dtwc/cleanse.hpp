#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dtwc/error.hpp"

namespace dtwc {

// The nine text-normalization steps, applied in this order by default.
// Every step is idempotent on its own output.
enum class CleanseStep {
    case_normalization,
    remove_emails,
    remove_urls,
    remove_html_tags,
    remove_emojis,
    replace_abbreviations,
    remove_stopwords,
    remove_special_chars,
    remove_repeated_punct, // collapses repeated punctuation AND repeated words
};

inline constexpr std::size_t kCleanseStepCount = 9;

const std::array<CleanseStep, kCleanseStepCount>& default_step_order();
const char* step_name(CleanseStep step);
CleanseStep step_from_name(const std::string& name); // throws UnknownStep

struct CleansingConfig {
    std::vector<CleanseStep> steps;
    std::map<std::string, std::string> abbreviation_map; // keys lowercase [a-z0-9]+
    std::unordered_set<std::string> stopword_set;        // lowercase tokens
    std::vector<std::pair<char32_t, char32_t>> emoji_ranges;

    // All nine steps in default order, empty word lists.
    static CleansingConfig bare();
    // All nine steps plus the three data files.
    static CleansingConfig from_files(const std::string& stopwords_path,
                                      const std::string& abbreviations_path,
                                      const std::string& emoji_ranges_path);
};

std::unordered_set<std::string> load_stopwords(const std::string& path);
std::map<std::string, std::string> load_abbreviations(const std::string& path);
std::vector<std::pair<char32_t, char32_t>> load_emoji_ranges(const std::string& path);

// Applies exactly one step. Whitespace is left as the step produced it;
// cleanse_text does the final collapse.
std::string cleanse_step(CleanseStep step, const std::string& text, const CleansingConfig& config);
std::string cleanse_step(const std::string& step, const std::string& text, const CleansingConfig& config);

// Runs config.steps in order, then collapses whitespace runs and trims.
std::string cleanse_text(const std::string& raw, const CleansingConfig& config);

using TokenSequence = std::vector<std::string>;

// Splits on whitespace runs; input is expected to be already cleansed.
TokenSequence tokenize(const std::string& clean);

} // namespace dtwc
