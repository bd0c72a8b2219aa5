#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dtwc/error.hpp"

namespace dtwc {

enum class OptimizerKind { sgd_momentum, rmsprop, adam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name); // throws Usage

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double momentum = 0.9; // sgd_momentum
    double rho = 0.9;      // rmsprop decay
    double beta1 = 0.9;    // adam
    double beta2 = 0.999;  // adam
    double epsilon = 1e-8;
    double weight_decay = 0.0; // decoupled, applied as p -= lr * wd * p
};

// Per-parameter-buffer state. Moment buffers are lazily sized on the first
// step; afterwards a size change raises ShapeMismatch.
struct OptimizerState {
    std::uint64_t step_count = 0;
    std::vector<double> first_moment;  // momentum velocity / adam m
    std::vector<double> second_moment; // rmsprop E[g^2] / adam v
};

// One in-place update. Exactly one step_count increment per call.
void opt_step(std::span<double> params, std::span<const double> grads,
              OptimizerState& state, const OptimizerConfig& config);

// Objective fills grad_out (same length as x) and returns the loss.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad_out)>;

struct MinimizeResult {
    std::vector<double> params;
    std::vector<double> loss_history; // length steps + 1, history[0] = initial loss
};

MinimizeResult minimize(const Objective& objective, std::vector<double> init,
                        const OptimizerConfig& config, std::size_t steps);

} // namespace dtwc
