#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conetrack/perception.hpp"

namespace conetrack {

enum class Activation : std::uint8_t { Tanh = 0, Relu = 1, Linear = 2 };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected network. weights[k] maps layer k (dims[k]) to layer k+1 (dims[k+1]).
/// Hidden layers use `hidden_activation`, the last layer `output_activation`.
struct MlpModel {
    std::vector<int> layer_dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Linear;

    /// Glorot-uniform weights, zero biases.
    static MlpModel create(std::vector<int> dims, Activation hidden, Rng& rng);

    int input_size() const { return layer_dims.front(); }
    int output_size() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
    std::size_t parameter_count() const;
    bool all_finite() const;

    friend bool operator==(const MlpModel& a, const MlpModel& b);
};

/// Layer inputs and pre-activations retained for the backward pass.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;       ///< inputs[k] feeds layer k
    std::vector<Eigen::MatrixXd> activations;  ///< post-activation output of each layer
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd input;  ///< gradient with respect to the network input

    static Gradients zeros_like(const MlpModel& model);
};

/// Batched forward pass; `input` holds one sample per column. Throws ShapeMismatch.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const MlpModel& model, std::span<const double> input);

/// Reverse-mode gradients of sum(output_gradient .* output) for the cached batch.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_gradient);

/// Only the input gradient of the same quantity; skips the parameter gradients.
Eigen::MatrixXd input_gradient(const MlpModel& model, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_gradient);

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moments for every parameter of one model.
struct AdamState {
    AdamConfig config;
    std::vector<Eigen::MatrixXd> m_weights;
    std::vector<Eigen::MatrixXd> v_weights;
    std::vector<Eigen::VectorXd> m_biases;
    std::vector<Eigen::VectorXd> v_biases;
    long step_count = 0;

    static AdamState for_model(const MlpModel& model, AdamConfig config);
};

/// Adam state for a single scalar parameter.
struct ScalarAdam {
    AdamConfig config;
    double m = 0.0;
    double v = 0.0;
    long step_count = 0;

    double step(double param, double grad);
};

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state);

/// Exponential smoothing: target <- (1 - tau) * target + tau * source.
void soft_update(MlpModel& target, const MlpModel& source, double tau);

void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in);
void save_model(const std::string& path, const MlpModel& model);
/// Throws CorruptFile on bad magic, unknown version, inconsistent shape or truncation.
MlpModel load_model(const std::string& path);

} // namespace conetrack
