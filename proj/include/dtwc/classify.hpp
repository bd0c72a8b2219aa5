#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtwc/error.hpp"
#include "dtwc/optimize.hpp"
#include "dtwc/vectorize.hpp"

namespace dtwc {

// Multinomial naive Bayes over non-negative (possibly fractional) features.
struct NBModel {
    double alpha = 1.0;
    std::size_t n_features = 0;
    std::array<double, 2> class_log_prior{};
    std::vector<double> feature_log_prob; // 2 x n_features, row-major
};

NBModel nb_fit(const std::vector<SparseVector>& X, const std::vector<int>& y,
               double alpha = 1.0);

// Log posterior per class, normalized with log-sum-exp.
std::array<double, 2> nb_predict_log_proba(const NBModel& model, const SparseVector& x);

// Argmax of the posterior; exact ties go to class 1.
int nb_predict(const NBModel& model, const SparseVector& x);

enum class LossKind { logistic, hinge };

std::string loss_name(LossKind kind);

struct LinearModel {
    LossKind loss_kind = LossKind::logistic;
    double l2 = 0.0;
    double bias = 0.0;
    std::vector<double> weights;
};

struct LinearFitConfig {
    LossKind loss_kind = LossKind::logistic;
    double l2 = 1e-4;
    OptimizerConfig optimizer;
    std::size_t epochs = 10;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
};

// Mini-batch training on mean loss + (l2/2)*||w||^2; the bias is not
// regularized. Batch order is a seeded shuffle per epoch.
LinearModel linear_fit(const std::vector<SparseVector>& X, const std::vector<int>& y,
                       const LinearFitConfig& config);

double decision_function(const LinearModel& model, const SparseVector& x);

// Sigmoid of the decision value. Logistic models only: hinge-trained models
// raise InvalidModelKind.
double predict_proba(const LinearModel& model, const SparseVector& x);

// score >= threshold maps to 1.
int predict_label(double score, double threshold);

int linear_predict(const LinearModel& model, const SparseVector& x);

} // namespace dtwc
