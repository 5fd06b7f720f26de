#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ganova/training.hpp"

namespace ganova {

// Fixed generator snapshot usable for sampling without a training loop.
struct GeneratorHandle {
    MlpSpec spec;
    MlpParams params;
    std::size_t d_z = 0;
    int n_classes = 0;

    // cond_rows: {m, n_classes} arbitrary condition codes, z: {m, d_z}
    Tensor generate(const Tensor& cond_rows, const Tensor& z) const;
    // one-hot conditions for `labels` with fresh noise from `rng`
    Tensor generate_labels(const std::vector<int>& labels, RandomStream& rng) const;
};

GeneratorHandle generator_from_checkpoint(const CheckpointBundle& bundle);

// --- Wasserstein-estimate series ---------------------------------------------

struct WassersteinSeries {
    std::vector<std::size_t> iters;
    std::vector<double> raw;       // un-penalized critic gap
    std::vector<double> smoothed;  // moving average
    std::size_t window = 0;
};

// Centered-on-trailing moving average; window = max(10, 1% of run length),
// clamped to the series length. InapplicableError -> ContractError for JS
// metrics (no gap column).
WassersteinSeries wasserstein_estimate(const std::vector<MetricsRow>& metrics);

std::vector<double> moving_average(const std::vector<double>& xs, std::size_t window);

// --- conditional fidelity -------------------------------------------------------

// Maps one sample row to an oracle class label.
using Oracle = std::function<int(std::span<const double>)>;

// Nearest-class-mean assignment against the radius-0.7 mixture layout.
Oracle mixture_oracle(int n_classes);
// Nearest row of an explicit {n_classes, d} mean matrix.
Oracle nearest_mean_oracle(Tensor class_means);

struct FidelityReport {
    std::vector<std::size_t> requested;
    std::vector<std::size_t> matched;
    std::vector<double> mean_error;  // L2 distance of generated class mean from reference mean
    double fidelity = 0.0;           // sum(matched) / sum(requested)

    std::string to_csv() const;  // class,requested,matched,mean_error
};

// Generates per_class samples for every condition and scores them with the
// oracle. `reference_means` ({n_classes, d}) drives the mean-error column.
FidelityReport conditional_fidelity(const GeneratorHandle& gen, const Oracle& oracle,
                                    const Tensor& reference_means, std::size_t per_class,
                                    RandomStream& rng);

// --- MNIST oracle classifier ----------------------------------------------------

struct OracleClassifier {
    MlpSpec spec;
    MlpParams params;

    int classify(std::span<const double> row) const;
    double accuracy(const Dataset& ds) const;
    Oracle as_oracle() const;
};

// Small softmax MLP trained on the real split; refuses (CalibrationError)
// below `accuracy_floor` on the test split.
OracleClassifier train_oracle_classifier(const Dataset& train, const Dataset& test,
                                         std::uint64_t seed, std::size_t epochs = 4,
                                         double accuracy_floor = 0.97);

// --- condition-code probes ---------------------------------------------------------

struct SweepSpec {
    int class_index = 0;
    double code_min = 0.5;
    double code_max = 1.85;
    std::size_t steps = 10;
    std::uint64_t seed = 0;

    void validate(int n_classes) const;
};

// One-hot scaled to values linearly spaced in [code_min, code_max], fixed
// noise. Returns {steps, d_x}.
Tensor condition_sweep(const GeneratorHandle& gen, const SweepSpec& spec);

// Condition (1-t)*onehot(a) + t*onehot(b), t linearly spaced in [0,1], fixed
// noise. Returns {steps, d_x}.
Tensor condition_interpolation(const GeneratorHandle& gen, int class_a, int class_b,
                               std::size_t steps, std::uint64_t seed);

// --- rendering ------------------------------------------------------------------

// Binary PGM (P5) grid. 784-wide rows render as 28x28 cells; 2-wide rows as
// points rasterized into 64x64 cells. Cells are separated by 2-pixel white
// gutters.
void render_grid_pgm(const Tensor& images, std::size_t rows, std::size_t cols,
                     const std::string& path);

}  // namespace ganova
