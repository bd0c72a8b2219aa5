#include "dtwc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dtwc {

namespace {

void check_design(const std::vector<SparseVector>& X, const std::vector<int>& y) {
    if (X.size() != y.size())
        throw Error(ErrorCode::length_mismatch,
                    std::to_string(X.size()) + " rows vs " + std::to_string(y.size()) + " labels");
    if (X.empty()) throw Error(ErrorCode::empty_corpus, "no training rows");
    for (int label : y)
        if (label != 0 && label != 1)
            throw Error(ErrorCode::non_binary_target, "label " + std::to_string(label));
    bool has0 = false, has1 = false;
    for (int label : y) (label == 0 ? has0 : has1) = true;
    if (!has0 || !has1)
        throw Error(ErrorCode::single_class_corpus, "training data contains one class only");
    for (const auto& row : X)
        if (row.dim != X[0].dim)
            throw Error(ErrorCode::dimension_mismatch, "inconsistent feature dimensions");
}

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

NBModel nb_fit(const std::vector<SparseVector>& X, const std::vector<int>& y, double alpha) {
    check_design(X, y);
    if (!(alpha > 0.0))
        throw Error(ErrorCode::non_positive_alpha, "alpha = " + std::to_string(alpha));

    NBModel model;
    model.alpha = alpha;
    model.n_features = X[0].dim;

    std::array<std::size_t, 2> class_count{0, 0};
    std::vector<double> feature_count(2 * model.n_features, 0.0);
    std::array<double, 2> total_count{0.0, 0.0};
    for (std::size_t i = 0; i < X.size(); ++i) {
        const int c = y[i];
        ++class_count[c];
        for (const auto& e : X[i].entries) {
            if (e.value < 0.0)
                throw Error(ErrorCode::usage, "multinomial nb requires non-negative features");
            feature_count[c * model.n_features + e.index] += e.value;
            total_count[c] += e.value;
        }
    }

    const double n = static_cast<double>(X.size());
    const double n_feat = static_cast<double>(model.n_features);
    model.class_log_prior = {std::log(static_cast<double>(class_count[0]) / n),
                             std::log(static_cast<double>(class_count[1]) / n)};
    model.feature_log_prob.resize(2 * model.n_features);
    for (int c = 0; c < 2; ++c) {
        const double denom = std::log(total_count[c] + alpha * n_feat);
        for (std::size_t j = 0; j < model.n_features; ++j)
            model.feature_log_prob[c * model.n_features + j] =
                std::log(feature_count[c * model.n_features + j] + alpha) - denom;
    }
    return model;
}

std::array<double, 2> nb_predict_log_proba(const NBModel& model, const SparseVector& x) {
    if (x.dim != model.n_features)
        throw Error(ErrorCode::dimension_mismatch,
                    "vector dim " + std::to_string(x.dim) + " vs model dim " +
                        std::to_string(model.n_features));
    std::array<double, 2> joint = model.class_log_prior;
    for (const auto& e : x.entries) {
        joint[0] += e.value * model.feature_log_prob[e.index];
        joint[1] += e.value * model.feature_log_prob[model.n_features + e.index];
    }
    const double hi = std::max(joint[0], joint[1]);
    const double lse = hi + std::log(std::exp(joint[0] - hi) + std::exp(joint[1] - hi));
    return {joint[0] - lse, joint[1] - lse};
}

int nb_predict(const NBModel& model, const SparseVector& x) {
    auto log_proba = nb_predict_log_proba(model, x);
    return log_proba[1] >= log_proba[0] ? 1 : 0;
}

std::string loss_name(LossKind kind) {
    return kind == LossKind::logistic ? "logistic" : "hinge";
}

LinearModel linear_fit(const std::vector<SparseVector>& X, const std::vector<int>& y,
                       const LinearFitConfig& config) {
    check_design(X, y);
    if (config.batch_size == 0) throw Error(ErrorCode::usage, "batch_size must be >= 1");

    const std::size_t n = X.size();
    const std::size_t dim = X[0].dim;

    // params = [weights..., bias]
    std::vector<double> params(dim + 1, 0.0);
    std::vector<double> grad(dim + 1, 0.0);
    OptimizerState state;
    std::mt19937_64 rng(config.seed);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const SparseVector& x = X[order[k]];
                const double z = y[order[k]] == 1 ? 1.0 : -1.0;
                double score = params[dim];
                for (const auto& e : x.entries) score += params[e.index] * e.value;
                double coef = 0.0;
                if (config.loss_kind == LossKind::logistic) {
                    coef = -z * stable_sigmoid(-z * score);
                } else {
                    if (z * score < 1.0) coef = -z;
                }
                if (coef != 0.0) {
                    for (const auto& e : x.entries) grad[e.index] += coef * e.value;
                    grad[dim] += coef;
                }
            }
            for (std::size_t j = 0; j <= dim; ++j) grad[j] *= inv_batch;
            if (config.l2 != 0.0)
                for (std::size_t j = 0; j < dim; ++j) grad[j] += config.l2 * params[j];
            opt_step(params, grad, state, config.optimizer);
        }
    }

    LinearModel model;
    model.loss_kind = config.loss_kind;
    model.l2 = config.l2;
    model.bias = params[dim];
    model.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(dim));
    return model;
}

double decision_function(const LinearModel& model, const SparseVector& x) {
    if (x.dim != model.weights.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "vector dim " + std::to_string(x.dim) + " vs model dim " +
                        std::to_string(model.weights.size()));
    double score = model.bias;
    for (const auto& e : x.entries) score += model.weights[e.index] * e.value;
    return score;
}

double predict_proba(const LinearModel& model, const SparseVector& x) {
    if (model.loss_kind != LossKind::logistic)
        throw Error(ErrorCode::invalid_model_kind,
                    "probabilities are defined for logistic models only");
    return stable_sigmoid(decision_function(model, x));
}

int predict_label(double score, double threshold) {
    return score >= threshold ? 1 : 0;
}

int linear_predict(const LinearModel& model, const SparseVector& x) {
    if (model.loss_kind == LossKind::logistic)
        return predict_label(predict_proba(model, x), 0.5);
    return predict_label(decision_function(model, x), 0.0);
}

} // namespace dtwc
