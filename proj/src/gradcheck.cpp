#include "ganova/gradcheck.hpp"

#include <cmath>

namespace ganova {

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                  double step) {
    Tensor grad(x.shape);
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe.v[i] = x.v[i] + step;
        double hi = f(probe);
        probe.v[i] = x.v[i] - step;
        double lo = f(probe);
        probe.v[i] = x.v[i];
        grad.v[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

double max_rel_err(const Tensor& analytic, const Tensor& numeric, double floor) {
    if (analytic.shape != numeric.shape) {
        throw DimensionError("max_rel_err: shape mismatch " + shape_str(analytic.shape) + " vs " +
                             shape_str(numeric.shape));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double a = analytic.v[i], n = numeric.v[i];
        double denom = std::max({std::abs(a), std::abs(n), floor});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

bool GradcheckReport::all_passed() const {
    for (const OpCheck& c : ops) {
        if (!c.passed) return false;
    }
    return true;
}

namespace {

Tensor random_tensor(Shape shape, RandomStream& rng, double lo, double hi) {
    Tensor t(std::move(shape));
    for (double& v : t.v) v = rng.uniform(lo, hi);
    return t;
}

// A check case maps the probed input to a scalar Var. `aux_seed` regenerates
// any constants inside the expression identically on every evaluation.
struct Case {
    std::string name;
    Shape input_shape;
    double lo, hi;
    std::function<Var(Tape&, Var, std::uint64_t aux_seed)> build;
};

std::vector<Case> primitive_cases() {
    auto rand_leaf = [](Tape& t, Shape shape, std::uint64_t seed, double lo, double hi) {
        RandomStream rng(seed);
        return t.leaf(random_tensor(std::move(shape), rng, lo, hi));
    };
    // weighted sum turns any tensor output into a scalar without masking
    // per-element errors
    auto pool = [rand_leaf](Tape& t, Var y, std::uint64_t seed) {
        RandomStream rng(seed ^ 0x9e3779b97f4a7c15ull);
        Tensor w = random_tensor(y.shape(), rng, -1.0, 1.0);
        return sum(mul(y, t.leaf(std::move(w))));
    };

    std::vector<Case> cases;
    auto simple = [&](std::string name, Shape shape, double lo, double hi,
                      std::function<Var(Tape&, Var, std::uint64_t)> op) {
        cases.push_back({std::move(name), std::move(shape), lo, hi,
                         [op, pool](Tape& t, Var x, std::uint64_t seed) {
                             return pool(t, op(t, x, seed), seed);
                         }});
    };

    simple("add", {3, 4}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return add(x, rand_leaf(t, {3, 4}, s, -2, 2));
    });
    simple("sub", {3, 4}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return sub(x, rand_leaf(t, {3, 4}, s, -2, 2));
    });
    simple("mul", {3, 4}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return mul(x, rand_leaf(t, {3, 4}, s, -2, 2));
    });
    simple("div", {3, 4}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return div(x, rand_leaf(t, {3, 4}, s, 0.5, 2.0));
    });
    simple("affine", {3, 4}, -2, 2,
           [](Tape&, Var x, std::uint64_t) { return affine(x, 1.7, -0.3); });
    simple("exp", {3, 4}, -2, 2, [](Tape&, Var x, std::uint64_t) { return exp(x); });
    simple("log", {3, 4}, 0.2, 3.0, [](Tape&, Var x, std::uint64_t) { return log(x); });
    simple("square", {3, 4}, -2, 2, [](Tape&, Var x, std::uint64_t) { return square(x); });
    simple("sqrt", {3, 4}, 0.2, 3.0, [](Tape&, Var x, std::uint64_t) { return sqrt(x); });
    simple("tanh", {3, 4}, -2, 2, [](Tape&, Var x, std::uint64_t) { return tanh(x); });
    simple("sigmoid", {3, 4}, -4, 4, [](Tape&, Var x, std::uint64_t) { return sigmoid(x); });
    simple("softplus", {3, 4}, -4, 4, [](Tape&, Var x, std::uint64_t) { return softplus(x); });
    // stay away from the origin kink: finite differences straddle it
    simple("leaky_relu", {3, 4}, 0.05, 2.0, [](Tape&, Var x, std::uint64_t) {
        return leaky_relu(x, 0.2);
    });
    simple("leaky_relu_neg", {3, 4}, -2.0, -0.05, [](Tape&, Var x, std::uint64_t) {
        return leaky_relu(x, 0.2);
    });
    simple("dropout", {6, 6}, -2, 2, [](Tape& t, Var x, std::uint64_t s) {
        RandomStream rng(s + 17);  // identical mask on every evaluation
        return dropout(x, 0.4, true, rng);
    });
    simple("matmul_lhs", {3, 5}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return matmul(x, rand_leaf(t, {5, 4}, s, -2, 2));
    });
    simple("matmul_rhs", {5, 4}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return matmul(rand_leaf(t, {3, 5}, s, -2, 2), x);
    });
    simple("transpose", {3, 5}, -2, 2, [](Tape&, Var x, std::uint64_t) { return transpose(x); });
    simple("sum", {4, 3}, -2, 2, [](Tape&, Var x, std::uint64_t) { return sum(x); });
    simple("mean", {4, 3}, -2, 2, [](Tape&, Var x, std::uint64_t) { return mean(x); });
    simple("sum_rows", {4, 3}, -2, 2, [](Tape&, Var x, std::uint64_t) { return sum_rows(x); });
    simple("sum_cols", {4, 3}, -2, 2, [](Tape&, Var x, std::uint64_t) { return sum_cols(x); });
    simple("broadcast_cols", {4}, -2, 2,
           [](Tape&, Var x, std::uint64_t) { return broadcast_cols(x, 3); });
    simple("broadcast_rows", {4}, -2, 2,
           [](Tape&, Var x, std::uint64_t) { return broadcast_rows(x, 3); });
    simple("broadcast_scalar", {1}, -2, 2,
           [](Tape&, Var x, std::uint64_t) { return broadcast_scalar(x, {3, 4}); });
    simple("bias_add_input", {4, 3}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return bias_add(x, rand_leaf(t, {3}, s, -1, 1));
    });
    simple("bias_add_bias", {3}, -1, 1, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return bias_add(rand_leaf(t, {4, 3}, s, -2, 2), x);
    });
    simple("softmax_rows", {4, 5}, -3, 3,
           [](Tape&, Var x, std::uint64_t) { return softmax_rows(x); });
    simple("concat_cols", {3, 2}, -2, 2, [rand_leaf](Tape& t, Var x, std::uint64_t s) {
        return concat_cols(x, rand_leaf(t, {3, 4}, s, -2, 2));
    });
    simple("slice_cols", {3, 6}, -2, 2,
           [](Tape&, Var x, std::uint64_t) { return slice_cols(x, 1, 3); });
    simple("l2_norm_rows", {4, 3}, 0.3, 2.0,
           [](Tape&, Var x, std::uint64_t) { return l2_norm_rows(x); });
    return cases;
}

// grad-of-grad probe: s(x) = (sum x^2)^2 / 4, outer(x) = sum((grad_x s)^2)
// = (sum x^2)^3. The forward path of `outer` itself runs a backward sweep.
Var second_order_scalar(Tape& t, Var x) {
    Var s = scale(square(sum(square(x))), 0.25);
    Var inner_grad = t.grad_graph(s, x);
    return sum(square(inner_grad));
}

}  // namespace

GradcheckReport run_gradcheck(std::uint64_t seed, int points, bool corrupt_fixture) {
    GradcheckReport report;
    RandomStream rng(seed);
    constexpr double kFirstOrderTol = 1e-5;
    constexpr double kSecondOrderTol = 1e-4;

    for (const Case& c : primitive_cases()) {
        double worst = 0.0;
        for (int p = 0; p < points; ++p) {
            std::uint64_t aux_seed = rng.next_u64();
            Tensor x0 = random_tensor(c.input_shape, rng, c.lo, c.hi);
            Tape tape;
            Var x = tape.leaf(x0);
            Var scalar = c.build(tape, x, aux_seed);
            GradientMap grads = tape.backward(scalar);
            Tensor analytic = grads.count(x.id) ? grads.at(x.id) : Tensor::zeros(x0.shape);
            Tensor numeric = finite_difference_gradient(
                [&](const Tensor& probe) {
                    Tape t2;
                    return c.build(t2, t2.leaf(probe), aux_seed).value().v[0];
                },
                x0);
            worst = std::max(worst, max_rel_err(analytic, numeric));
        }
        report.ops.push_back({c.name, worst, kFirstOrderTol, worst <= kFirstOrderTol});
    }

    {
        double worst = 0.0;
        for (int p = 0; p < points; ++p) {
            Tensor x0 = random_tensor({5}, rng, -1.5, 1.5);
            Tape tape;
            Var x = tape.leaf(x0);
            Var outer = second_order_scalar(tape, x);
            GradientMap grads = tape.backward(outer);
            Tensor analytic = grads.at(x.id);
            Tensor numeric = finite_difference_gradient(
                [&](const Tensor& probe) {
                    Tape t2;
                    return second_order_scalar(t2, t2.leaf(probe)).value().v[0];
                },
                x0);
            worst = std::max(worst, max_rel_err(analytic, numeric));
        }
        report.ops.push_back({"grad_graph_second_order", worst, kSecondOrderTol,
                              worst <= kSecondOrderTol});
    }

    if (corrupt_fixture) {
        // negative control: analytic gradient of a deliberately different
        // function must blow past the tolerance
        Tensor x0 = random_tensor({3, 3}, rng, -1.0, 1.0);
        Tape tape;
        Var wrong = sum(tanh(scale(tape.leaf(x0), 1.25)));
        Tensor analytic = tape.backward(wrong).at(0);
        Tensor numeric = finite_difference_gradient(
            [](const Tensor& probe) {
                Tape t2;
                return sum(tanh(t2.leaf(probe))).value().v[0];
            },
            x0);
        double err = max_rel_err(analytic, numeric);
        report.ops.push_back({"corrupted_fixture", err, kFirstOrderTol, err <= kFirstOrderTol});
    }

    return report;
}

}  // namespace ganova
