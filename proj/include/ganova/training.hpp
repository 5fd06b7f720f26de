#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ganova/data.hpp"
#include "ganova/nn.hpp"
#include "ganova/objectives.hpp"

namespace ganova {

struct TrainConfig {
    std::string method = "em";  // "js" | "em"
    int k = 5;                  // critic updates per generator update
    std::size_t m = 100;        // batch size
    std::size_t iterations = 1000;
    double lambda = 10.0;       // gradient-penalty weight (em only)
    double alpha_g = 1e-4, beta1_g = 0.0, beta2_g = 0.9;
    double alpha_d = 1e-4, beta1_d = 0.0, beta2_d = 0.9;
    double eps_stab = 1e-8;
    std::size_t d_z = 100;
    std::uint64_t seed = 0;
    std::string dataset = "mixture";  // "mixture" | "mnist"
    std::string checkpoint_path;
    std::string metrics_path;
    std::size_t log_interval = 50;
    double dropout = 0.3;  // critic hidden layers
    double leaky_slope = 0.2;
    int mixture_classes = 4;
    std::size_t mixture_per_class = 2500;
    double mixture_sigma = 0.05;
    // Empty -> per-dataset defaults (mnist: 256-512-1024 / 512-512-512,
    // mixture: 64-64 both).
    std::vector<std::size_t> gen_hidden;
    std::vector<std::size_t> critic_hidden;

    void validate() const;
    Method method_enum() const { return method_from_string(method); }
    AdamConfig adam_g() const { return {alpha_g, beta1_g, beta2_g, eps_stab}; }
    AdamConfig adam_d() const { return {alpha_d, beta1_d, beta2_d, eps_stab}; }

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
    static const std::vector<std::string>& known_keys();
    // Apply "key=value" overrides; unknown keys raise ConfigError naming the key.
    void apply_override(const std::string& key, const std::string& value);
};

// Network shapes for a dataset (x dimension, class count) under a config.
struct ModelShapes {
    MlpSpec generator;
    MlpSpec critic;
    TargetScheme scheme;
};
ModelShapes make_model_shapes(const TrainConfig& cfg, int n_classes, std::size_t d_x);

struct CheckpointBundle {
    std::uint8_t version = 1;
    TrainConfig config;
    MlpParams generator;
    MlpParams critic;
    AdamState adam_g;
    AdamState adam_d;
    std::uint64_t iteration = 0;
    std::string rng_state;
    BatchIterator::State batch_state;
    std::size_t d_x = 0;
    int n_classes = 0;
};

void save_checkpoint(const CheckpointBundle& bundle, const std::string& path);
CheckpointBundle load_checkpoint(const std::string& path);

struct MetricsRow {
    std::size_t iter = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    std::optional<double> w_estimate;  // em only
    double penalty = 0.0;
    double seconds = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

struct TrainResult {
    CheckpointBundle checkpoint;
    std::vector<MetricsRow> metrics;
    bool aborted = false;          // non-finite loss encountered
    std::size_t abort_iter = 0;
};

// Runs Algorithm 1 (js) or Algorithm 2 (em): per outer iteration, k critic
// updates on fresh batches, then one generator update. Resumes from `resume`
// when given. Writes metrics/checkpoints to the configured paths; on a
// non-finite loss it stops without overwriting the last good checkpoint.
TrainResult train(const TrainConfig& cfg, const Dataset& data,
                  const CheckpointBundle* resume = nullptr);

}  // namespace ganova
