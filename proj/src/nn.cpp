#include "ganova/nn.hpp"

#include <cmath>

namespace ganova {

void MlpSpec::validate() const {
    if (widths.size() < 2) {
        throw ConfigError("MlpSpec: need at least 2 widths (input + one layer)");
    }
    for (std::size_t w : widths) {
        if (w == 0) throw ConfigError("MlpSpec: widths must be positive");
    }
    if (acts.size() != layer_count() || dropout.size() != layer_count()) {
        throw ConfigError("MlpSpec: acts/dropout must have one entry per layer");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
        throw ConfigError("MlpSpec: leaky slope must be in (0,1)");
    }
    for (double r : dropout) {
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("MlpSpec: dropout rate must be in [0,1)");
    }
}

std::size_t MlpSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        n += widths[i] * widths[i + 1] + widths[i + 1];
    }
    return n;
}

MlpSpec MlpSpec::dense(std::size_t input, const std::vector<std::size_t>& hidden,
                       std::size_t output, Act output_act, double hidden_dropout,
                       double leaky_slope) {
    MlpSpec spec;
    spec.widths.push_back(input);
    for (std::size_t h : hidden) spec.widths.push_back(h);
    spec.widths.push_back(output);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        spec.acts.push_back(Act::LeakyRelu);
        spec.dropout.push_back(hidden_dropout);
    }
    spec.acts.push_back(output_act);
    spec.dropout.push_back(0.0);
    spec.leaky_slope = leaky_slope;
    spec.validate();
    return spec;
}

MlpParams init_params(const MlpSpec& spec, RandomStream& rng) {
    spec.validate();
    MlpParams params;
    for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
        Tensor w({spec.widths[i], spec.widths[i + 1]});
        for (double& x : w.v) x = rng.gaussian(0.0, 0.02);
        params.weights.push_back(std::move(w));
        params.biases.push_back(Tensor::zeros({spec.widths[i + 1]}));
    }
    return params;
}

MlpVars params_to_tape(Tape& tape, const MlpParams& params) {
    MlpVars vars;
    for (std::size_t i = 0; i < params.layer_count(); ++i) {
        vars.weights.push_back(tape.leaf(params.weights[i]));
        vars.biases.push_back(tape.leaf(params.biases[i]));
    }
    return vars;
}

Var mlp_forward(const MlpSpec& spec, const MlpVars& vars, Var input, bool training,
                RandomStream* rng) {
    spec.validate();
    if (vars.weights.size() != spec.layer_count()) {
        throw ContractError("mlp_forward: parameter count does not match spec");
    }
    const Tensor& in = input.value();
    if (in.rank() != 2 || in.cols() != spec.input_width()) {
        throw DimensionError("mlp_forward: input shape " + shape_str(in.shape) +
                             " does not match spec input width " +
                             std::to_string(spec.input_width()));
    }
    Var h = input;
    for (std::size_t i = 0; i < spec.layer_count(); ++i) {
        h = bias_add(matmul(h, vars.weights[i]), vars.biases[i]);
        switch (spec.acts[i]) {
            case Act::LeakyRelu: h = leaky_relu(h, spec.leaky_slope); break;
            case Act::Tanh: h = tanh(h); break;
            case Act::None: break;
        }
        if (spec.dropout[i] > 0.0 && training) {
            if (rng == nullptr) throw ContractError("mlp_forward: dropout needs an rng");
            h = dropout(h, spec.dropout[i], true, *rng);
        }
    }
    return h;
}

Var generator_forward(const MlpSpec& spec, const MlpVars& vars, Var z, Var c_onehot) {
    const Tensor& zv = z.value();
    const Tensor& cv = c_onehot.value();
    if (zv.rank() != 2 || cv.rank() != 2 || zv.rows() != cv.rows()) {
        throw DimensionError("generator_forward: batch extents differ, z " + shape_str(zv.shape) +
                             " vs c " + shape_str(cv.shape));
    }
    return mlp_forward(spec, vars, concat_cols(z, c_onehot), /*training=*/false, nullptr);
}

Var critic_forward(const MlpSpec& spec, const MlpVars& vars, Var x, bool training,
                   RandomStream* rng) {
    return mlp_forward(spec, vars, x, training, rng);
}

void AdamConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("AdamConfig: alpha must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("AdamConfig: beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("AdamConfig: beta2 must be in [0,1)");
    if (!(eps_stab > 0.0)) throw ConfigError("AdamConfig: eps_stab must be positive");
}

AdamState AdamState::zeros_like(const MlpParams& params) {
    AdamState s;
    for (std::size_t i = 0; i < params.layer_count(); ++i) {
        s.m_weights.push_back(Tensor::zeros(params.weights[i].shape));
        s.v_weights.push_back(Tensor::zeros(params.weights[i].shape));
        s.m_biases.push_back(Tensor::zeros(params.biases[i].shape));
        s.v_biases.push_back(Tensor::zeros(params.biases[i].shape));
    }
    return s;
}

namespace {

void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                 const AdamConfig& cfg, std::uint64_t t, double sign) {
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        double g = grad.v[i];
        m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g;
        v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g * g;
        double m_hat = m.v[i] / bc1;
        double v_hat = v.v[i] / bc2;
        param.v[i] += sign * cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.eps_stab);
    }
}

const Tensor& grad_for(const GradientMap& grads, Var var, const std::string& name) {
    auto it = grads.find(var.id);
    if (it == grads.end()) {
        throw ContractError("adam_step: missing gradient for parameter " + name);
    }
    return it->second;
}

}  // namespace

void adam_step(MlpParams& params, const MlpVars& vars, const GradientMap& grads,
               AdamState& state, const AdamConfig& cfg, Direction direction) {
    cfg.validate();
    if (vars.weights.size() != params.layer_count()) {
        throw ContractError("adam_step: vars do not match params");
    }
    state.t += 1;
    double sign = direction == Direction::Descend ? -1.0 : 1.0;
    for (std::size_t i = 0; i < params.layer_count(); ++i) {
        std::string idx = std::to_string(i);
        adam_update(params.weights[i], grad_for(grads, vars.weights[i], "weight_" + idx),
                    state.m_weights[i], state.v_weights[i], cfg, state.t, sign);
        adam_update(params.biases[i], grad_for(grads, vars.biases[i], "bias_" + idx),
                    state.m_biases[i], state.v_biases[i], cfg, state.t, sign);
    }
}

}  // namespace ganova
