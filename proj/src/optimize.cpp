#include "dtwc/optimize.hpp"

#include <cmath>

namespace dtwc {

std::string optimizer_name(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd_momentum: return "sgd";
        case OptimizerKind::rmsprop: return "rmsprop";
        case OptimizerKind::adam: return "adam";
    }
    return "?";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd" || name == "sgd_momentum") return OptimizerKind::sgd_momentum;
    if (name == "rmsprop") return OptimizerKind::rmsprop;
    if (name == "adam") return OptimizerKind::adam;
    throw Error(ErrorCode::usage, "unknown optimizer '" + name + "'");
}

void opt_step(std::span<double> params, std::span<const double> grads,
              OptimizerState& state, const OptimizerConfig& config) {
    if (params.size() != grads.size())
        throw Error(ErrorCode::shape_mismatch,
                    "params size " + std::to_string(params.size()) + " vs grads size " +
                        std::to_string(grads.size()));

    const std::size_t n = params.size();
    if (state.first_moment.empty() && state.second_moment.empty() && state.step_count == 0) {
        state.first_moment.assign(n, 0.0);
        state.second_moment.assign(n, 0.0);
    }
    if (state.first_moment.size() != n || state.second_moment.size() != n)
        throw Error(ErrorCode::shape_mismatch, "optimizer state sized for " +
                                                   std::to_string(state.first_moment.size()) +
                                                   " params, got " + std::to_string(n));

    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(grads[i]))
            throw Error(ErrorCode::non_finite_gradient,
                        "gradient element " + std::to_string(i) + " is not finite");

    state.step_count += 1;
    const double lr = config.learning_rate;

    switch (config.kind) {
        case OptimizerKind::sgd_momentum: {
            for (std::size_t i = 0; i < n; ++i) {
                double& v = state.first_moment[i];
                v = config.momentum * v + grads[i];
                double p_old = params[i];
                params[i] -= lr * v;
                if (config.weight_decay != 0.0) params[i] -= lr * config.weight_decay * p_old;
            }
            break;
        }
        case OptimizerKind::rmsprop: {
            for (std::size_t i = 0; i < n; ++i) {
                double& acc = state.second_moment[i];
                acc = config.rho * acc + (1.0 - config.rho) * grads[i] * grads[i];
                double p_old = params[i];
                params[i] -= lr * grads[i] / std::sqrt(acc + config.epsilon);
                if (config.weight_decay != 0.0) params[i] -= lr * config.weight_decay * p_old;
            }
            break;
        }
        case OptimizerKind::adam: {
            const double t = static_cast<double>(state.step_count);
            const double bc1 = 1.0 - std::pow(config.beta1, t);
            const double bc2 = 1.0 - std::pow(config.beta2, t);
            for (std::size_t i = 0; i < n; ++i) {
                double& m = state.first_moment[i];
                double& v = state.second_moment[i];
                m = config.beta1 * m + (1.0 - config.beta1) * grads[i];
                v = config.beta2 * v + (1.0 - config.beta2) * grads[i] * grads[i];
                const double m_hat = m / bc1;
                const double v_hat = v / bc2;
                double p_old = params[i];
                params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
                if (config.weight_decay != 0.0) params[i] -= lr * config.weight_decay * p_old;
            }
            break;
        }
    }
}

MinimizeResult minimize(const Objective& objective, std::vector<double> init,
                        const OptimizerConfig& config, std::size_t steps) {
    MinimizeResult result;
    result.params = std::move(init);
    result.loss_history.reserve(steps + 1);

    OptimizerState state;
    std::vector<double> grads(result.params.size(), 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        double loss = objective(result.params, grads);
        result.loss_history.push_back(loss);
        opt_step(result.params, grads, state, config);
    }
    // Final loss without a step; gradient output is discarded.
    result.loss_history.push_back(objective(result.params, grads));
    return result;
}

} // namespace dtwc
