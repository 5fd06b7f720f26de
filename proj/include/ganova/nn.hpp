#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganova/tape.hpp"
#include "ganova/tensor.hpp"

namespace ganova {

enum class Act { None, LeakyRelu, Tanh };

// Fully-connected network description. widths[0] is the input width; each
// later entry is one layer. acts and dropout have one entry per layer
// (widths.size() - 1 of them).
struct MlpSpec {
    std::vector<std::size_t> widths;
    std::vector<Act> acts;
    std::vector<double> dropout;
    double leaky_slope = 0.2;

    std::size_t layer_count() const { return widths.size() - 1; }
    std::size_t input_width() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }
    std::size_t param_count() const;
    void validate() const;

    // Hidden layers with leaky-relu, linear or tanh output, optional dropout
    // on hidden layers only.
    static MlpSpec dense(std::size_t input, const std::vector<std::size_t>& hidden,
                         std::size_t output, Act output_act, double hidden_dropout,
                         double leaky_slope = 0.2);
};

struct MlpParams {
    std::vector<Tensor> weights;  // weight_i: {widths[i], widths[i+1]}
    std::vector<Tensor> biases;   // bias_i:   {widths[i+1]}

    std::size_t layer_count() const { return weights.size(); }
};

MlpParams init_params(const MlpSpec& spec, RandomStream& rng);

// Parameters placed on a tape as leaves for one forward/backward pass.
struct MlpVars {
    std::vector<Var> weights;
    std::vector<Var> biases;
};

MlpVars params_to_tape(Tape& tape, const MlpParams& params);

Var mlp_forward(const MlpSpec& spec, const MlpVars& vars, Var input, bool training,
                RandomStream* rng);

// x~ = G(z|c): z and one-hot condition concatenated on the feature axis.
Var generator_forward(const MlpSpec& spec, const MlpVars& vars, Var z, Var c_onehot);

// One-Vs-All critic: raw scores, dropout active only in training mode.
Var critic_forward(const MlpSpec& spec, const MlpVars& vars, Var x, bool training,
                   RandomStream* rng);

struct AdamConfig {
    double alpha = 1e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    double eps_stab = 1e-8;

    void validate() const;
};

struct AdamState {
    std::vector<Tensor> m_weights, v_weights;
    std::vector<Tensor> m_biases, v_biases;
    std::uint64_t t = 0;

    static AdamState zeros_like(const MlpParams& params);
};

enum class Direction { Ascend, Descend };

// One bias-corrected Adam update. `vars` gives the tape node ids the
// gradients are keyed by; every parameter must have an entry in `grads`.
void adam_step(MlpParams& params, const MlpVars& vars, const GradientMap& grads,
               AdamState& state, const AdamConfig& cfg, Direction direction);

}  // namespace ganova
