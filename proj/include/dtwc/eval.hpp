#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtwc/error.hpp"

namespace dtwc {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix matrix;
};

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth);

// Zero-denominator conventions: precision/recall are 0 when undefined and f1
// is 0 when precision + recall is 0.
MetricsReport metrics(const ConfusionMatrix& matrix);

struct SuiteScore {
    std::string vectorizer;
    std::string model;
    double f1 = 0.0;
};

// Group scores by vectorizer and average; sorted by mean descending (ties by
// name ascending so output order is deterministic).
std::vector<std::pair<std::string, double>> mean_f1_by_vectorizer(
    const std::vector<SuiteScore>& scores);

} // namespace dtwc
