#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ganova/tape.hpp"

namespace ganova {

// Central finite differences (step 1e-5 by default). `f` re-evaluates the
// whole computation per perturbation, so the oracle is independent of the
// backward rules it checks.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                  double step = 1e-5);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_rel_err(const Tensor& analytic, const Tensor& numeric, double floor = 1e-6);

struct OpCheck {
    std::string op;
    double worst_rel_err = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct GradcheckReport {
    std::vector<OpCheck> ops;

    bool all_passed() const;
};

// Checks every autodiff primitive against finite differences at `points`
// random inputs, plus one second-order (grad-of-grad) case. `corrupt_fixture`
// injects a deliberately wrong analytic gradient (negative control for the
// verification-failure exit path).
GradcheckReport run_gradcheck(std::uint64_t seed = 20240901, int points = 10,
                              bool corrupt_fixture = false);

}  // namespace ganova
