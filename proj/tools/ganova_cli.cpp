#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ganova/eval.hpp"
#include "ganova/gradcheck.hpp"
#include "ganova/training.hpp"

namespace fs = std::filesystem;
using namespace ganova;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

Dataset load_training_dataset(const TrainConfig& cfg) {
    if (cfg.dataset == "mixture") {
        RandomStream data_rng(cfg.seed + 0x9e3779b97f4a7c15ull);
        return mixture_dataset(cfg.mixture_classes, cfg.mixture_per_class, cfg.mixture_sigma,
                               data_rng);
    }
    const char* dir = std::getenv("GANOVA_DATA_DIR");
    if (dir == nullptr) {
        throw ConfigError("dataset 'mnist' needs GANOVA_DATA_DIR pointing at the IDX files");
    }
    fs::path root(dir);
    Dataset full = load_mnist((root / "train-images-idx3-ubyte").string(),
                              (root / "train-labels-idx1-ubyte").string());
    return mnist_split(full, true);
}

void apply_set_overrides(TrainConfig& cfg, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + kv + "' is not of the form key=value");
        }
        cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
    }
}

struct GridShape {
    std::size_t rows, cols;
};

GridShape grid_for(std::size_t count) {
    auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    std::size_t rows = (count + cols - 1) / cols;
    return {rows, cols};
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& out_root, const std::string& resume_path) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = TrainConfig::from_json(read_text_file(config_path));
    apply_set_overrides(cfg, sets);
    cfg.validate();

    fs::path run_dir = fs::path(out_root) /
                       (cfg.dataset + "-" + cfg.method + "-" + std::to_string(cfg.seed));
    fs::create_directories(run_dir);
    if (cfg.checkpoint_path.empty()) cfg.checkpoint_path = (run_dir / "checkpoint.ckpt").string();
    if (cfg.metrics_path.empty()) cfg.metrics_path = (run_dir / "metrics.csv").string();
    write_text_file((run_dir / "config.json").string(), cfg.to_json() + "\n");

    Dataset data = load_training_dataset(cfg);

    CheckpointBundle resume;
    const CheckpointBundle* resume_ptr = nullptr;
    if (!resume_path.empty()) {
        resume = load_checkpoint(resume_path);
        resume_ptr = &resume;
    }

    TrainResult result = train(cfg, data, resume_ptr);
    if (result.aborted) {
        std::cerr << "non-finite loss at iteration " << result.abort_iter
                  << "; last good checkpoint kept at " << cfg.checkpoint_path << "\n";
        return kExitNumerical;
    }
    std::cout << "trained " << cfg.iterations << " iterations (" << cfg.method << ", "
              << cfg.dataset << ", seed " << cfg.seed << ")\n"
              << "checkpoint: " << cfg.checkpoint_path << "\n"
              << "metrics:    " << cfg.metrics_path << "\n";
    return kExitOk;
}

int cmd_generate(const std::string& ckpt_path, int cls, std::size_t count, std::uint64_t seed,
                 const std::string& out_path) {
    CheckpointBundle bundle = load_checkpoint(ckpt_path);
    GeneratorHandle gen = generator_from_checkpoint(bundle);
    if (cls < 0 || cls >= gen.n_classes) {
        throw DataError("class " + std::to_string(cls) + " out of range [0, " +
                        std::to_string(gen.n_classes) + ")");
    }
    if (count < 1) throw ConfigError("count must be >= 1");
    RandomStream rng(seed);
    Tensor samples = gen.generate_labels(std::vector<int>(count, cls), rng);
    GridShape grid = grid_for(count);
    render_grid_pgm(samples, grid.rows, grid.cols, out_path);
    std::cout << "wrote " << count << " class-" << cls << " samples to " << out_path << " ("
              << grid.rows << "x" << grid.cols << " grid)\n";
    return kExitOk;
}

int cmd_sweep(const std::string& ckpt_path, const SweepSpec& spec, const std::string& out_path) {
    CheckpointBundle bundle = load_checkpoint(ckpt_path);
    GeneratorHandle gen = generator_from_checkpoint(bundle);
    Tensor strip = condition_sweep(gen, spec);
    render_grid_pgm(strip, 1, spec.steps, out_path);
    std::cout << "wrote sweep of class " << spec.class_index << " codes [" << spec.code_min
              << ", " << spec.code_max << "] to " << out_path << "\n";
    return kExitOk;
}

int cmd_interpolate(const std::string& ckpt_path, int class_a, int class_b, std::size_t steps,
                    std::uint64_t seed, const std::string& out_path) {
    CheckpointBundle bundle = load_checkpoint(ckpt_path);
    GeneratorHandle gen = generator_from_checkpoint(bundle);
    Tensor strip = condition_interpolation(gen, class_a, class_b, steps, seed);
    render_grid_pgm(strip, 1, steps, out_path);
    std::cout << "wrote interpolation " << class_a << " -> " << class_b << " to " << out_path
              << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, std::size_t per_class, std::uint64_t seed,
             const std::string& out_path, const std::string& metrics_path) {
    CheckpointBundle bundle = load_checkpoint(ckpt_path);
    GeneratorHandle gen = generator_from_checkpoint(bundle);

    Oracle oracle;
    Tensor reference_means;
    if (bundle.config.dataset == "mixture") {
        oracle = mixture_oracle(gen.n_classes);
        reference_means = Tensor({static_cast<std::size_t>(gen.n_classes), 2});
        for (int c = 0; c < gen.n_classes; ++c) {
            double angle = 2.0 * M_PI * c / gen.n_classes;
            reference_means.at(static_cast<std::size_t>(c), 0) = 0.7 * std::cos(angle);
            reference_means.at(static_cast<std::size_t>(c), 1) = 0.7 * std::sin(angle);
        }
    } else {
        const char* dir = std::getenv("GANOVA_DATA_DIR");
        if (dir == nullptr) {
            throw ConfigError("evaluating an mnist checkpoint needs GANOVA_DATA_DIR");
        }
        fs::path root(dir);
        Dataset full = load_mnist((root / "train-images-idx3-ubyte").string(),
                                  (root / "train-labels-idx1-ubyte").string());
        Dataset train_split = mnist_split(full, true);
        Dataset test_split = mnist_split(full, false);
        OracleClassifier clf = train_oracle_classifier(train_split, test_split, seed);
        oracle = clf.as_oracle();
        reference_means = train_split.class_means();
    }

    RandomStream rng(seed);
    FidelityReport report = conditional_fidelity(gen, oracle, reference_means, per_class, rng);
    std::string csv = report.to_csv();
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text_file(out_path, csv);
    }
    std::cout << "fidelity: " << report.fidelity << "\n";

    if (!metrics_path.empty()) {
        WassersteinSeries series = wasserstein_estimate(read_metrics_csv(metrics_path));
        std::cout << "wasserstein estimate (window " << series.window
                  << "): first " << series.smoothed.front() << ", last "
                  << series.smoothed.back() << "\n";
    }
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, int points, bool corrupt_fixture) {
    GradcheckReport report = run_gradcheck(seed, points, corrupt_fixture);
    for (const OpCheck& op : report.ops) {
        std::printf("%-28s worst rel err %.3e (threshold %.0e) %s\n", op.op.c_str(),
                    op.worst_rel_err, op.threshold, op.passed ? "ok" : "FAIL");
    }
    if (!report.all_passed()) {
        std::cerr << "gradient verification failed\n";
        return kExitVerification;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional GAN toolkit with a one-vs-all critic"};
    app.require_subcommand(1);

    std::string config_path, out_root = ".", resume_path;
    std::vector<std::string> sets;
    auto* train_cmd = app.add_subcommand("train", "run the training loop");
    train_cmd->add_option("--config", config_path, "JSON config file");
    train_cmd->add_option("--set", sets, "key=value config override (repeatable)");
    train_cmd->add_option("--out", out_root, "root directory for run outputs");
    train_cmd->add_option("--resume", resume_path, "checkpoint to resume from");
    // common knobs as first-class flags, sugar over --set
    for (const char* key : {"method", "dataset", "seed", "iterations", "k", "m", "lambda"}) {
        train_cmd->add_option_function<std::string>(
            std::string("--") + key,
            [&sets, key](const std::string& v) { sets.push_back(std::string(key) + "=" + v); },
            std::string("config override for ") + key);
    }
    train_cmd->add_option_function<std::string>(
        "--iters", [&sets](const std::string& v) { sets.push_back("iterations=" + v); },
        "alias for --iterations");

    std::string ckpt_path, out_path;
    int cls = 0;
    std::size_t count = 100;
    std::uint64_t seed = 0;
    auto* gen_cmd = app.add_subcommand("generate", "sample a class grid from a checkpoint");
    gen_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    gen_cmd->add_option("--class", cls, "condition class index")->required();
    gen_cmd->add_option("--count", count, "number of samples");
    gen_cmd->add_option("--seed", seed, "noise seed");
    gen_cmd->add_option("--out", out_path, "output PGM path")->required();

    SweepSpec sweep_spec;
    auto* sweep_cmd = app.add_subcommand("sweep", "vary one condition code at fixed noise");
    sweep_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    sweep_cmd->add_option("--class", sweep_spec.class_index, "condition class index");
    sweep_cmd->add_option("--min", sweep_spec.code_min, "lowest condition code");
    sweep_cmd->add_option("--max", sweep_spec.code_max, "highest condition code");
    sweep_cmd->add_option("--steps", sweep_spec.steps, "grid resolution");
    sweep_cmd->add_option("--seed", sweep_spec.seed, "noise seed");
    sweep_cmd->add_option("--out", out_path, "output PGM path")->required();

    int class_a = 0, class_b = 1;
    std::size_t steps = 10;
    auto* interp_cmd = app.add_subcommand("interpolate", "morph between two conditions");
    interp_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    interp_cmd->add_option("--class-a", class_a, "start class");
    interp_cmd->add_option("--class-b", class_b, "end class");
    interp_cmd->add_option("--steps", steps, "grid resolution");
    interp_cmd->add_option("--seed", seed, "noise seed");
    interp_cmd->add_option("--out", out_path, "output PGM path")->required();

    std::size_t per_class = 100;
    std::string metrics_path;
    auto* eval_cmd = app.add_subcommand("eval", "score conditional fidelity of a checkpoint");
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("--per-class", per_class, "samples per condition");
    eval_cmd->add_option("--seed", seed, "sampling seed");
    eval_cmd->add_option("--out", out_path, "fidelity CSV path (stdout when omitted)");
    eval_cmd->add_option("--metrics", metrics_path, "metrics CSV for a gap-trend summary");

    std::uint64_t gc_seed = 20240901;
    int gc_points = 10;
    bool corrupt_fixture = false;
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference verification of autodiff");
    gc_cmd->add_option("--seed", gc_seed, "evaluation-point seed");
    gc_cmd->add_option("--points", gc_points, "random points per primitive");
    gc_cmd->add_flag("--corrupt-fixture", corrupt_fixture, "")->group("");  // negative control

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, sets, out_root, resume_path);
        if (gen_cmd->parsed()) return cmd_generate(ckpt_path, cls, count, seed, out_path);
        if (sweep_cmd->parsed()) return cmd_sweep(ckpt_path, sweep_spec, out_path);
        if (interp_cmd->parsed()) {
            return cmd_interpolate(ckpt_path, class_a, class_b, steps, seed, out_path);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(ckpt_path, per_class, seed, out_path, metrics_path);
        }
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_seed, gc_points, corrupt_fixture);
    } catch (const CalibrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerification;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
