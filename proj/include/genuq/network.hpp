#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "genuq/dataset.hpp"
#include "genuq/rng.hpp"

namespace genuq {

// Structure of the conditional generator G(y, z): [y; z] -> affine -> ReLU
// (-> inverted dropout in train mode) per hidden layer, then a final affine
// with identity output.
struct Architecture {
    int input_dim = 1;     // q + d
    int hidden_layers = 1; // 1 or 2
    int hidden_width = 32;
    int output_dim = 1;    // d
    double dropout_rate = 0.0;

    void validate() const;
    nlohmann::json to_json() const;
    static Architecture from_json(const nlohmann::json& j);
};

std::size_t param_count(const Architecture& arch);

struct GeneratorModel {
    Architecture arch;
    std::vector<Eigen::MatrixXd> W;  // W[l]: fan_out x fan_in
    std::vector<Eigen::VectorXd> b;
    Scaler scaler;                 // attached by the training pipeline
    nlohmann::json provenance;     // schedule/flow/likelihood snapshot

    int n_layers() const { return arch.hidden_layers + 1; }
    void validate() const;
};

// Glorot-uniform weights, zero biases, deterministic per seed.
GeneratorModel init_model(const Architecture& arch, std::uint64_t seed);

// Eval-mode forward over a column-per-sample batch; no dropout, no scaling.
Eigen::MatrixXd forward_batch(const GeneratorModel& model, const Eigen::MatrixXd& inputs);

// Single-sample forward. train_mode applies inverted dropout with masks
// drawn from a stream keyed by dropout_seed.
Eigen::VectorXd forward(const GeneratorModel& model, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, bool train_mode = false,
                        std::uint64_t dropout_seed = 0);

struct Gradients {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

// Mean over batch and output coordinates of (G(y,z) - x)^2, with
// reverse-mode gradients through the same dropout masks as the forward
// pass. inputs: input_dim x B, targets: output_dim x B.
double mse_and_gradient(const GeneratorModel& model, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, bool train_mode,
                        RngStream& dropout_rng, Gradients& grads);

// Eval-mode loss only.
double mse_loss(const GeneratorModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets);

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;

    static AdamState zeros_like(const GeneratorModel& model);
};

// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8, bias correction.
void adam_step(GeneratorModel& model, const Gradients& grads, AdamState& state, double lr);

}  // namespace genuq
