#include "ganova/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace ganova {

Method method_from_string(const std::string& s) {
    if (s == "js" || s == "JS") return Method::JS;
    if (s == "em" || s == "EM") return Method::EM;
    throw ConfigError("unknown method '" + s + "' (expected js or em)");
}

std::string method_to_string(Method m) {
    return m == Method::JS ? "js" : "em";
}

int TargetScheme::fake_index() const {
    if (method != Method::JS) throw ContractError("fake_index: only the JS scheme has a fake class");
    return n_classes;
}

void PenaltyConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("PenaltyConfig: lambda must be >= 0");
}

namespace {

void check_labels(const std::vector<int>& labels, int n_classes) {
    for (int l : labels) {
        if (l < 0 || l >= n_classes) {
            throw DataError("label " + std::to_string(l) + " out of range [0, " +
                            std::to_string(n_classes) + ")");
        }
    }
}

void check_width(const Var& scores, const TargetScheme& scheme, const char* op) {
    const Tensor& t = scores.value();
    if (t.rank() != 2 || t.cols() != scheme.width()) {
        throw ContractError(std::string(op) + ": score width must be " +
                            std::to_string(scheme.width()) + ", got shape " + shape_str(t.shape));
    }
}

Tensor onehot_rows(const std::vector<int>& labels, std::size_t width, double value) {
    Tensor t({labels.size(), width});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        t.at(i, static_cast<std::size_t>(labels[i])) = value;
    }
    return t;
}

// Mean over the batch of the label-selected score component.
Var selected_mean(Var scores, const std::vector<int>& labels, const TargetScheme& scheme) {
    Tape& tape = *scores.tape;
    Tensor sel = onehot_rows(labels, scheme.width(), 1.0);
    double inv_m = 1.0 / static_cast<double>(labels.size());
    return scale(sum(mul(scores, tape.leaf(sel))), inv_m);
}

}  // namespace

Tensor build_targets_js(const std::vector<int>& labels, const TargetScheme& scheme, bool is_real) {
    check_labels(labels, scheme.n_classes);
    if (is_real) return onehot_rows(labels, scheme.width(), 1.0);
    std::vector<int> fake(labels.size(), scheme.fake_index());
    return onehot_rows(fake, scheme.width(), 1.0);
}

Tensor build_targets_em(const std::vector<int>& labels, const TargetScheme& scheme, bool is_real) {
    check_labels(labels, scheme.n_classes);
    return onehot_rows(labels, scheme.width(), is_real ? 1.0 : -1.0);
}

Var softmax_xent_mean(Var logits, const Tensor& targets) {
    Tape& tape = *logits.tape;
    const Tensor& x = logits.value();
    if (x.rank() != 2 || x.shape != targets.shape) {
        throw ContractError("softmax_xent_mean: logits " + shape_str(x.shape) +
                            " vs targets " + shape_str(targets.shape));
    }
    std::size_t m = x.rows(), n = x.cols();
    // detached per-row max keeps logsumexp overflow-safe without touching the
    // gradient (constant shift)
    Tensor row_max({m});
    for (std::size_t i = 0; i < m; ++i) {
        row_max.v[i] = *std::max_element(&x.v[i * n], &x.v[i * n] + n);
    }
    Var mx = tape.leaf(row_max);
    Var shifted = sub(logits, broadcast_cols(mx, n));
    Var lse = add(log(sum_rows(exp(shifted))), mx);
    Var selected = sum_rows(mul(logits, tape.leaf(targets)));
    return scale(sum(sub(lse, selected)), 1.0 / static_cast<double>(m));
}

LossBundle loss_d_js(Var real_logits, Var fake_logits, const std::vector<int>& real_labels,
                     const std::vector<int>& fake_labels, const TargetScheme& scheme) {
    check_width(real_logits, scheme, "loss_d_js");
    check_width(fake_logits, scheme, "loss_d_js");
    Var real_ce = softmax_xent_mean(real_logits, build_targets_js(real_labels, scheme, true));
    Var fake_ce = softmax_xent_mean(fake_logits, build_targets_js(fake_labels, scheme, false));
    // mean over the pooled real+fake rows
    double mr = static_cast<double>(real_labels.size());
    double mf = static_cast<double>(fake_labels.size());
    Var loss = add(scale(real_ce, mr / (mr + mf)), scale(fake_ce, mf / (mr + mf)));
    LossBundle out{loss, {}};
    out.diagnostics["real_ce"] = real_ce.value().v[0];
    out.diagnostics["fake_ce"] = fake_ce.value().v[0];
    return out;
}

LossBundle loss_g_js(Var fake_logits, const std::vector<int>& labels, const TargetScheme& scheme) {
    check_width(fake_logits, scheme, "loss_g_js");
    // non-saturating: push generated samples toward their condition class
    Var loss = softmax_xent_mean(fake_logits, build_targets_js(labels, scheme, true));
    return {loss, {}};
}

LossBundle loss_d_em(Var real_scores, Var fake_scores, const std::vector<int>& real_labels,
                     const std::vector<int>& fake_labels, const TargetScheme& scheme,
                     const LossBundle* penalty, const PenaltyConfig& cfg) {
    check_width(real_scores, scheme, "loss_d_em");
    check_width(fake_scores, scheme, "loss_d_em");
    cfg.validate();
    check_labels(real_labels, scheme.n_classes);
    check_labels(fake_labels, scheme.n_classes);
    Var gap = sub(selected_mean(real_scores, real_labels, scheme),
                  selected_mean(fake_scores, fake_labels, scheme));
    Var loss = neg(gap);
    double penalty_value = 0.0;
    if (penalty != nullptr && cfg.lambda > 0.0) {
        loss = add(loss, scale(penalty->loss, cfg.lambda));
        penalty_value = penalty->loss.value().v[0];
    }
    LossBundle out{loss, {}};
    out.diagnostics["w_estimate"] = gap.value().v[0];
    out.diagnostics["penalty"] = penalty_value;
    return out;
}

LossBundle loss_g_em(Var fake_scores, const std::vector<int>& labels, const TargetScheme& scheme) {
    check_width(fake_scores, scheme, "loss_g_em");
    check_labels(labels, scheme.n_classes);
    return {neg(selected_mean(fake_scores, labels, scheme)), {}};
}

Var interpolate_samples(Var x, Var x_tilde, RandomStream& rng) {
    Tape& tape = *x.tape;
    const Tensor& xv = x.value();
    if (xv.shape != x_tilde.value().shape) {
        throw DimensionError("interpolate_samples: shape mismatch " + shape_str(xv.shape) +
                             " vs " + shape_str(x_tilde.value().shape));
    }
    std::size_t m = xv.rows(), d = xv.cols();
    Tensor eps({m, d});
    for (std::size_t i = 0; i < m; ++i) {
        double e = rng.uniform();
        for (std::size_t j = 0; j < d; ++j) eps.at(i, j) = e;
    }
    Tensor one_minus = eps;
    for (double& v : one_minus.v) v = 1.0 - v;
    return add(mul(x, tape.leaf(eps)), mul(x_tilde, tape.leaf(one_minus)));
}

LossBundle gradient_penalty(const std::function<Var(Var)>& critic, Var x_hat,
                            const std::vector<int>& labels, const TargetScheme& scheme) {
    Tape& tape = *x_hat.tape;
    check_labels(labels, scheme.n_classes);
    if (labels.size() != x_hat.value().rows()) {
        throw ContractError("gradient_penalty: one label per interpolated row required");
    }
    Var scores = critic(x_hat);
    check_width(scores, scheme, "gradient_penalty");
    // rows are independent, so the batch-summed selected score gives each
    // row's own input gradient in one sweep
    Tensor sel = onehot_rows(labels, scheme.width(), 1.0);
    Var selected_sum = sum(mul(scores, tape.leaf(sel)));
    Var grad = tape.grad_graph(selected_sum, x_hat);
    Var norms = l2_norm_rows(grad);
    Var loss = mean(square(affine(norms, 1.0, -1.0)));
    LossBundle out{loss, {}};
    out.diagnostics["penalty"] = loss.value().v[0];
    return out;
}

namespace {

Var per_sample_column(Var score, const char* op) {
    const Tensor& t = score.value();
    if (t.rank() == 1) return score;
    if (t.rank() == 2 && t.cols() == 1) return score;
    throw ContractError(std::string(op) + ": expected one score per sample, got shape " +
                        shape_str(t.shape));
}

}  // namespace

LossBundle loss_vanilla_d(Var real_score, Var fake_score) {
    Var r = per_sample_column(real_score, "loss_vanilla_d");
    Var f = per_sample_column(fake_score, "loss_vanilla_d");
    Var real_term = mean(softplus(neg(r)));  // -log D(x)
    Var fake_term = mean(softplus(f));       // -log(1 - D(x~))
    LossBundle out{add(real_term, fake_term), {}};
    out.diagnostics["real_term"] = real_term.value().v[0];
    out.diagnostics["fake_term"] = fake_term.value().v[0];
    return out;
}

LossBundle loss_vanilla_g(Var fake_score) {
    Var f = per_sample_column(fake_score, "loss_vanilla_g");
    return {mean(softplus(neg(f))), {}};
}

AcganLosses loss_acgan(Var real_adv, Var fake_adv, Var real_cls_logits, Var fake_cls_logits,
                       const std::vector<int>& labels, int n_classes) {
    check_labels(labels, n_classes);
    const Tensor& rc = real_cls_logits.value();
    const Tensor& fc = fake_cls_logits.value();
    std::size_t n = static_cast<std::size_t>(n_classes);
    if (rc.rank() != 2 || rc.cols() != n || fc.rank() != 2 || fc.cols() != n) {
        throw ContractError("loss_acgan: classifier logits must have width " +
                            std::to_string(n_classes));
    }
    Tensor targets = onehot_rows(labels, n, 1.0);
    Var real_ce = softmax_xent_mean(real_cls_logits, targets);
    Var fake_ce = softmax_xent_mean(fake_cls_logits, targets);

    LossBundle adv_d = loss_vanilla_d(real_adv, fake_adv);
    LossBundle adv_g = loss_vanilla_g(fake_adv);

    AcganLosses out;
    out.d.loss = add(adv_d.loss, add(real_ce, fake_ce));
    out.d.diagnostics = adv_d.diagnostics;
    out.d.diagnostics["real_ce"] = real_ce.value().v[0];
    out.d.diagnostics["fake_ce"] = fake_ce.value().v[0];
    out.g.loss = add(adv_g.loss, fake_ce);
    out.g.diagnostics["fake_ce"] = fake_ce.value().v[0];
    return out;
}

}  // namespace ganova
