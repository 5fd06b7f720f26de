#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ganova/tape.hpp"

namespace ganova {

enum class Method { JS, EM };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

// One-Vs-All head layout. JS adds a fake class behind the N real ones; EM
// keeps N outputs and encodes real/fake in the target sign.
struct TargetScheme {
    Method method;
    int n_classes;

    static TargetScheme js(int n) { return {Method::JS, n}; }
    static TargetScheme em(int n) { return {Method::EM, n}; }

    std::size_t width() const {
        return static_cast<std::size_t>(method == Method::JS ? n_classes + 1 : n_classes);
    }
    int fake_index() const;  // JS only
};

struct PenaltyConfig {
    double lambda = 10.0;

    void validate() const;
};

struct LossBundle {
    Var loss;  // single-element, to minimize
    std::map<std::string, double> diagnostics;
};

// Target rows: real -> one-hot at label, fake -> one-hot at the fake class.
Tensor build_targets_js(const std::vector<int>& labels, const TargetScheme& scheme, bool is_real);
// Target rows: real -> +one-hot, fake -> -one-hot.
Tensor build_targets_em(const std::vector<int>& labels, const TargetScheme& scheme, bool is_real);

// Softmax cross-entropy of each row against a one-hot target, mean over rows.
// Shared by the JS and ACGAN losses.
Var softmax_xent_mean(Var logits, const Tensor& onehot_targets);

LossBundle loss_d_js(Var real_logits, Var fake_logits, const std::vector<int>& real_labels,
                     const std::vector<int>& fake_labels, const TargetScheme& scheme);
LossBundle loss_g_js(Var fake_logits, const std::vector<int>& labels, const TargetScheme& scheme);

LossBundle loss_d_em(Var real_scores, Var fake_scores, const std::vector<int>& real_labels,
                     const std::vector<int>& fake_labels, const TargetScheme& scheme,
                     const LossBundle* penalty, const PenaltyConfig& cfg);
LossBundle loss_g_em(Var fake_scores, const std::vector<int>& labels, const TargetScheme& scheme);

// x_hat = eps*x + (1-eps)*x_tilde, eps drawn uniform per sample
Var interpolate_samples(Var x, Var x_tilde, RandomStream& rng);

// Mean over the batch of (||grad_xhat s(x_hat)||_2 - 1)^2, where s is the
// condition-selected critic score. Differentiable w.r.t. critic parameters
// (double backprop through grad_graph).
LossBundle gradient_penalty(const std::function<Var(Var)>& critic, Var x_hat,
                            const std::vector<int>& labels, const TargetScheme& scheme);

// Vanilla GAN, scores are pre-sigmoid: one column per sample.
LossBundle loss_vanilla_d(Var real_score, Var fake_score);
LossBundle loss_vanilla_g(Var fake_score);  // non-saturating -log D(G(z))

struct AcganLosses {
    LossBundle d;
    LossBundle g;
};

// ACGAN baseline: vanilla adversarial term plus N-class cross-entropy on both
// real and fake samples (shared labels).
AcganLosses loss_acgan(Var real_adv, Var fake_adv, Var real_cls_logits, Var fake_cls_logits,
                       const std::vector<int>& labels, int n_classes);

}  // namespace ganova
