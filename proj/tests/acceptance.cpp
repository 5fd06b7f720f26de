// Acceptance gate: one pass/fail line per criterion, exit 0 only when all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ganova/eval.hpp"
#include "ganova/gradcheck.hpp"

using namespace ganova;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* what, bool passed, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL", criterion, what,
                detail.c_str());
    std::fflush(stdout);
    if (!passed) g_failures++;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "ganova_acceptance";
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

double median3(double a, double b, double c) {
    std::vector<double> v{a, b, c};
    std::sort(v.begin(), v.end());
    return v[1];
}

// ---- criterion 1: first-order gradient correctness ---------------------------

void criterion_1() {
    double start = now_seconds();
    GradcheckReport rep = run_gradcheck(20240901, 10);
    double secs = now_seconds() - start;
    double worst = 0.0;
    std::string failing;
    for (const OpCheck& op : rep.ops) {
        worst = std::max(worst, op.worst_rel_err / op.threshold);
        if (!op.passed) failing += " " + op.op;
    }
    bool ok = rep.all_passed() && secs < 60.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu ops, worst err/threshold %.2e, %.1fs%s", rep.ops.size(),
                  worst, secs, failing.c_str());
    report(1, "finite-difference gradient checks", ok, buf);
}

// ---- criterion 2: second-order engine -----------------------------------------

double linear_penalty(double wx, double wy) {
    Tape tape;
    Tensor w = Tensor::zeros({2, 2});
    w.at(0, 0) = wx;
    w.at(1, 0) = wy;
    w.at(0, 1) = -1.3;
    w.at(1, 1) = 2.1;
    Var wv = tape.leaf(w);
    auto critic = [&](Var x) { return matmul(x, wv); };
    RandomStream rng(3);
    Tensor x({5, 2});
    for (double& v : x.v) v = rng.uniform(-1, 1);
    return gradient_penalty(critic, tape.leaf(x), {0, 0, 0, 0, 0}, TargetScheme::em(2))
        .loss.value()
        .v[0];
}

void criterion_2() {
    // analytic cases on a linear critic
    double unit = linear_penalty(0.6, 0.8);    // ||w|| = 1 -> 0
    double three = linear_penalty(3.0, 0.0);   // ||w|| = 3 -> (3-1)^2 = 4
    bool analytic_ok = std::abs(unit - 0.0) <= 1e-10 && std::abs(three - 4.0) <= 1e-10;

    // nested finite differences on a 2-layer critic
    TargetScheme scheme = TargetScheme::em(2);
    MlpSpec spec = MlpSpec::dense(2, {6}, 2, Act::None, 0.0);
    RandomStream rng(17);
    MlpParams params = init_params(spec, rng);
    for (Tensor& w : params.weights) {
        for (double& v : w.v) v *= 20.0;
    }
    Tensor x({3, 2});
    for (double& v : x.v) v = rng.uniform(-1, 1);
    std::vector<int> labels{0, 1, 0};

    auto value = [&](const MlpParams& p) {
        Tape tape;
        MlpVars vars = params_to_tape(tape, p);
        auto critic = [&](Var in) { return critic_forward(spec, vars, in, false, nullptr); };
        return gradient_penalty(critic, tape.leaf(x), labels, scheme).loss.value().v[0];
    };

    Tape tape;
    MlpVars vars = params_to_tape(tape, params);
    auto critic = [&](Var in) { return critic_forward(spec, vars, in, false, nullptr); };
    GradientMap grads = tape.backward(gradient_penalty(critic, tape.leaf(x), labels, scheme).loss);

    double h = 1e-5, worst = 0.0;
    for (std::size_t layer = 0; layer < params.layer_count(); ++layer) {
        const Tensor& analytic = grads.at(vars.weights[layer].id);
        for (std::size_t i = 0; i < params.weights[layer].size(); ++i) {
            MlpParams plus = params, minus = params;
            plus.weights[layer].v[i] += h;
            minus.weights[layer].v[i] -= h;
            double numeric = (value(plus) - value(minus)) / (2.0 * h);
            double denom = std::max({std::abs(analytic.v[i]), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(analytic.v[i] - numeric) / denom);
        }
    }
    bool fd_ok = worst <= 1e-4;

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "analytic |0-err|=%.1e |4-err|=%.1e, nested-FD worst rel err %.2e",
                  std::abs(unit), std::abs(three - 4.0), worst);
    report(2, "second-order gradient-penalty engine", analytic_ok && fd_ok, buf);
}

// ---- criterion 3: objective reductions ----------------------------------------

void criterion_3() {
    RandomStream rng(31);
    double worst_em = 0.0, worst_js = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t m = 8;
        Tape tape;
        Tensor real({m, 1}), fake({m, 1});
        for (double& v : real.v) v = rng.uniform(-2, 2);
        for (double& v : fake.v) v = rng.uniform(-2, 2);
        std::vector<int> labels(m, 0);

        LossBundle em = loss_d_em(tape.leaf(real), tape.leaf(fake), labels, labels,
                                  TargetScheme::em(1), nullptr, PenaltyConfig{0.0});
        LossBundle emg = loss_g_em(tape.leaf(fake), labels, TargetScheme::em(1));
        double mr = 0.0, mf = 0.0;
        for (double v : real.v) mr += v / static_cast<double>(m);
        for (double v : fake.v) mf += v / static_cast<double>(m);
        worst_em = std::max(worst_em, std::abs(em.loss.value().v[0] - (-(mr - mf))));
        worst_em = std::max(worst_em, std::abs(emg.loss.value().v[0] - (-mf)));

        Tensor real2({m, 2}), fake2({m, 2});
        for (double& v : real2.v) v = rng.uniform(-2, 2);
        for (double& v : fake2.v) v = rng.uniform(-2, 2);
        LossBundle js = loss_d_js(tape.leaf(real2), tape.leaf(fake2), labels, labels,
                                  TargetScheme::js(1));
        double expected = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double dr = real2.at(i, 0) - real2.at(i, 1);
            double df = fake2.at(i, 0) - fake2.at(i, 1);
            expected += std::log1p(std::exp(-dr)) + std::log1p(std::exp(df));
        }
        expected /= static_cast<double>(2 * m);
        worst_js = std::max(worst_js, std::abs(js.loss.value().v[0] - expected));
    }
    bool ok = worst_em <= 1e-12 && worst_js <= 1e-9;
    char buf[120];
    std::snprintf(buf, sizeof buf, "N=1 em dev %.1e (<=1e-12), js dev %.1e (<=1e-9)", worst_em,
                  worst_js);
    report(3, "single-class objective reductions", ok, buf);
}

// ---- criteria 4 and 5: mixture EM runs -----------------------------------------

struct MixtureRun {
    double fidelity = 0.0;
    std::vector<double> mean_error;
    double trend_ratio = 0.0;
    double seconds = 0.0;
    bool aborted = false;
};

MixtureRun mixture_run(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.method = "em";
    cfg.dataset = "mixture";
    cfg.k = 5;
    cfg.m = 100;
    cfg.lambda = 10.0;
    cfg.iterations = 5000;
    cfg.seed = seed;
    cfg.alpha_g = 1e-3;
    cfg.alpha_d = 1e-3;
    cfg.dropout = 0.0;
    cfg.log_interval = 50;

    double start = now_seconds();
    RandomStream data_rng(seed + 1000);
    Dataset data = mixture_dataset(4, 2500, 0.05, data_rng);
    TrainResult result = train(cfg, data);

    MixtureRun run;
    run.seconds = now_seconds() - start;
    run.aborted = result.aborted;
    if (result.aborted) return run;

    GeneratorHandle gen = generator_from_checkpoint(result.checkpoint);
    RandomStream eval_rng(99);
    FidelityReport rep =
        conditional_fidelity(gen, mixture_oracle(4), data.class_means(), 250, eval_rng);
    run.fidelity = rep.fidelity;
    run.mean_error = rep.mean_error;

    WassersteinSeries series = wasserstein_estimate(result.metrics);
    std::size_t n = series.smoothed.size();
    std::size_t decile = std::max<std::size_t>(1, n / 10);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < decile; ++i) head += series.smoothed[i];
    for (std::size_t i = n - decile; i < n; ++i) tail += series.smoothed[i];
    head = std::abs(head / static_cast<double>(decile));
    tail = std::abs(tail / static_cast<double>(decile));
    run.trend_ratio = head > 0.0 ? tail / head : 0.0;
    return run;
}

void criteria_4_and_5() {
    std::vector<MixtureRun> runs;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) runs.push_back(mixture_run(seed));

    bool aborted = runs[0].aborted || runs[1].aborted || runs[2].aborted;
    double max_secs = std::max({runs[0].seconds, runs[1].seconds, runs[2].seconds});
    if (aborted) {
        report(4, "mixture em conditional fidelity", false, "a run aborted on non-finite loss");
        report(5, "wasserstein-estimate convergence trend", false, "a run aborted");
        return;
    }

    double med_fidelity = median3(runs[0].fidelity, runs[1].fidelity, runs[2].fidelity);
    double worst_med_err = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        worst_med_err = std::max(worst_med_err, median3(runs[0].mean_error[c],
                                                        runs[1].mean_error[c],
                                                        runs[2].mean_error[c]));
    }
    bool ok4 = med_fidelity >= 0.90 && worst_med_err <= 0.10 && max_secs <= 900.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "median fidelity %.3f (>=0.90), worst median class-mean err %.3f (<=0.10), "
                  "slowest run %.0fs (<=900)",
                  med_fidelity, worst_med_err, max_secs);
    report(4, "mixture em conditional fidelity", ok4, buf);

    double med_ratio = median3(runs[0].trend_ratio, runs[1].trend_ratio, runs[2].trend_ratio);
    bool ok5 = med_ratio <= 0.50;
    std::snprintf(buf, sizeof buf, "median final/initial gap ratio %.3f (<=0.50)", med_ratio);
    report(5, "wasserstein-estimate convergence trend", ok5, buf);
}

// ---- synthetic IDX fixtures (used when real data is absent) ---------------------

void write_be_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

// class-dependent blob images: a bright 8x8 square whose position encodes the
// digit, plus per-pixel noise
void synth_idx_pair(const fs::path& images, const fs::path& labels, std::size_t count,
                    std::uint64_t seed) {
    RandomStream rng(seed);
    std::ofstream img(images, std::ios::binary | std::ios::trunc);
    std::ofstream lab(labels, std::ios::binary | std::ios::trunc);
    write_be_u32(img, 2051);
    write_be_u32(img, static_cast<std::uint32_t>(count));
    write_be_u32(img, 28);
    write_be_u32(img, 28);
    write_be_u32(lab, 2049);
    write_be_u32(lab, static_cast<std::uint32_t>(count));
    std::vector<unsigned char> pixels(784);
    for (std::size_t i = 0; i < count; ++i) {
        int c = static_cast<int>(i % 10);
        std::size_t ox = static_cast<std::size_t>(c % 5) * 4 + 2;
        std::size_t oy = static_cast<std::size_t>(c / 5) * 10 + 4;
        for (std::size_t p = 0; p < 784; ++p) {
            pixels[p] = static_cast<unsigned char>(rng.index(40));
        }
        for (std::size_t y = 0; y < 8; ++y) {
            for (std::size_t x = 0; x < 8; ++x) {
                pixels[(oy + y) * 28 + ox + x] =
                    static_cast<unsigned char>(200 + rng.index(56));
            }
        }
        img.write(reinterpret_cast<char*>(pixels.data()), 784);
        unsigned char l = static_cast<unsigned char>(c);
        lab.write(reinterpret_cast<char*>(&l), 1);
    }
}

struct MnistFiles {
    fs::path images, labels;
    bool real = false;
};

MnistFiles locate_mnist() {
    if (const char* dir = std::getenv("GANOVA_DATA_DIR")) {
        fs::path root(dir);
        fs::path img = root / "train-images-idx3-ubyte";
        fs::path lab = root / "train-labels-idx1-ubyte";
        if (fs::exists(img) && fs::exists(lab)) return {img, lab, true};
    }
    fs::path img = work_dir() / "synth-images-idx3-ubyte";
    fs::path lab = work_dir() / "synth-labels-idx1-ubyte";
    if (!fs::exists(img) || !fs::exists(lab)) synth_idx_pair(img, lab, 60000, 424242);
    return {img, lab, false};
}

// ---- criterion 6: one-epoch mnist-scale js smoke --------------------------------

void criterion_6() {
    MnistFiles files = locate_mnist();
    Dataset full = load_mnist(files.images.string(), files.labels.string());
    Dataset train_split = mnist_split(full, true);

    TrainConfig cfg;
    cfg.method = "js";
    cfg.dataset = "mnist";
    cfg.k = 1;
    cfg.m = 100;
    cfg.iterations = train_split.size() / cfg.m;  // one epoch
    cfg.seed = 11;
    cfg.log_interval = 50;

    double start = now_seconds();
    TrainResult result = train(cfg, train_split);
    double secs = now_seconds() - start;

    bool finite = !result.aborted;
    for (const MetricsRow& row : result.metrics) {
        finite = finite && std::isfinite(row.d_loss) && std::isfinite(row.g_loss) &&
                 !row.w_estimate.has_value();
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu iterations on %s data, %.0fs, losses finite: %s",
                  cfg.iterations, files.real ? "mnist" : "synthetic idx", secs,
                  finite ? "yes" : "no");
    report(6, "one-epoch js smoke at full network widths", finite, buf);
}

// ---- criterion 7: determinism ----------------------------------------------------

TrainConfig tiny_em_config(std::uint64_t seed, const std::string& ckpt) {
    TrainConfig cfg;
    cfg.method = "em";
    cfg.dataset = "mixture";
    cfg.k = 5;
    cfg.m = 100;
    cfg.lambda = 10.0;
    cfg.iterations = 100;
    cfg.seed = seed;
    cfg.alpha_g = 1e-3;
    cfg.alpha_d = 1e-3;
    cfg.dropout = 0.0;
    cfg.log_interval = 50;
    cfg.checkpoint_path = ckpt;
    return cfg;
}

void criterion_7() {
    fs::path a = work_dir() / "det_a.ckpt";
    fs::path b = work_dir() / "det_b.ckpt";
    TrainConfig cfg_a = tiny_em_config(5, a.string());
    TrainConfig cfg_b = cfg_a;  // identical run, different file target only after training
    cfg_b.checkpoint_path = a.string();

    RandomStream data_rng_a(5 + 1000), data_rng_b(5 + 1000);
    Dataset data_a = mixture_dataset(4, 2500, 0.05, data_rng_a);
    Dataset data_b = mixture_dataset(4, 2500, 0.05, data_rng_b);

    TrainResult run_a = train(cfg_a, data_a);
    std::string bytes_a = read_file(a);
    TrainResult run_b = train(cfg_b, data_b);
    std::string bytes_b = read_file(a);
    save_checkpoint(run_b.checkpoint, b.string());

    bool ckpt_ok = !bytes_a.empty() && bytes_a == bytes_b &&
                   run_a.checkpoint.iteration == 100 && bytes_a == read_file(b);

    GeneratorHandle gen_a = generator_from_checkpoint(run_a.checkpoint);
    GeneratorHandle gen_b = generator_from_checkpoint(run_b.checkpoint);
    fs::path pgm_a = work_dir() / "det_a.pgm";
    fs::path pgm_b = work_dir() / "det_b.pgm";
    RandomStream noise_a(21), noise_b(21);
    render_grid_pgm(gen_a.generate_labels(std::vector<int>(16, 2), noise_a), 4, 4,
                    pgm_a.string());
    render_grid_pgm(gen_b.generate_labels(std::vector<int>(16, 2), noise_b), 4, 4,
                    pgm_b.string());
    bool pgm_ok = read_file(pgm_a) == read_file(pgm_b);

    char buf[120];
    std::snprintf(buf, sizeof buf, "checkpoints at iter 100 identical: %s, pgm identical: %s",
                  ckpt_ok ? "yes" : "no", pgm_ok ? "yes" : "no");
    report(7, "seeded determinism", ckpt_ok && pgm_ok, buf);
}

// ---- criterion 8: format fidelity ------------------------------------------------

bool expect_kind(const std::function<void()>& fn, ParseError::Kind kind) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.kind() == kind;
    } catch (...) {
        return false;
    }
    return false;
}

void criterion_8() {
    MnistFiles files = locate_mnist();
    bool load_ok = false;
    try {
        Dataset full = load_mnist(files.images.string(), files.labels.string());
        Dataset train_split = mnist_split(full, true);
        Dataset test_split = mnist_split(full, false);
        load_ok = full.size() == 60000 && train_split.size() == 50000 &&
                  test_split.size() == 10000;
    } catch (const Error&) {
        load_ok = false;
    }

    // five crafted corruptions, each with its designated error kind
    std::string img_bytes = read_file(files.images);
    auto write_case = [&](const std::string& name, const std::string& bytes) {
        fs::path p = work_dir() / name;
        std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
        return p;
    };
    std::string bad_magic = img_bytes.substr(0, 4096);
    bad_magic[3] = 0x07;
    std::string label_magic = img_bytes.substr(0, 4096);
    label_magic[3] = 0x01;  // label magic on an image payload
    std::string truncated = img_bytes.substr(0, img_bytes.size() / 3);
    std::string overflow = img_bytes.substr(0, 4096);
    overflow[4] = overflow[5] = overflow[6] = overflow[7] = static_cast<char>(0xFF);
    std::string header_stub = img_bytes.substr(0, 9);

    int corrupt_hits = 0;
    fs::path p1 = write_case("c1.idx", bad_magic);
    corrupt_hits += expect_kind([&] { load_idx_images(p1.string()); }, ParseError::Kind::BadMagic);
    fs::path p2 = write_case("c2.idx", label_magic);
    corrupt_hits += expect_kind([&] { load_idx_images(p2.string()); }, ParseError::Kind::BadMagic);
    fs::path p3 = write_case("c3.idx", truncated);
    corrupt_hits +=
        expect_kind([&] { load_idx_images(p3.string()); }, ParseError::Kind::Truncated);
    fs::path p4 = write_case("c4.idx", overflow);
    corrupt_hits +=
        expect_kind([&] { load_idx_images(p4.string()); }, ParseError::Kind::DimOverflow);
    fs::path p5 = write_case("c5.idx", header_stub);
    corrupt_hits +=
        expect_kind([&] { load_idx_images(p5.string()); }, ParseError::Kind::Truncated);

    // interrupted/resumed training reproduces the uninterrupted run bit-exactly
    fs::path full_ckpt = work_dir() / "resume_full.ckpt";
    fs::path resumed_ckpt = work_dir() / "resume_split.ckpt";
    TrainConfig cfg = tiny_em_config(6, full_ckpt.string());
    cfg.iterations = 60;
    RandomStream data_rng(6 + 1000);
    Dataset data = mixture_dataset(4, 2500, 0.05, data_rng);
    train(cfg, data);

    TrainConfig half = cfg;
    half.iterations = 30;
    half.checkpoint_path = resumed_ckpt.string();
    TrainResult mid = train(half, data);
    TrainConfig rest = cfg;
    rest.checkpoint_path = resumed_ckpt.string();
    CheckpointBundle mid_bundle = load_checkpoint(resumed_ckpt.string());
    mid_bundle.config.iterations = 60;  // as if the original run had been interrupted
    mid_bundle.config.checkpoint_path = rest.checkpoint_path;
    train(rest, data, &mid_bundle);

    std::string full_bytes = read_file(full_ckpt);
    std::string resumed_bytes = read_file(resumed_ckpt);
    // the two files differ only in the recorded checkpoint path; compare after
    // normalizing the embedded config
    CheckpointBundle bundle_full = load_checkpoint(full_ckpt.string());
    CheckpointBundle bundle_res = load_checkpoint(resumed_ckpt.string());
    bundle_res.config.checkpoint_path = bundle_full.config.checkpoint_path;
    fs::path renorm = work_dir() / "resume_renorm.ckpt";
    save_checkpoint(bundle_res, renorm.string());
    bool resume_ok = read_file(renorm) == full_bytes;

    bool ok = load_ok && corrupt_hits == 5 && resume_ok;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "60k/10k split on %s data: %s, corruptions rejected %d/5, resume bit-exact: %s",
                  files.real ? "official mnist" : "conformant synthetic idx",
                  load_ok ? "ok" : "FAILED", corrupt_hits, resume_ok ? "yes" : "no");
    report(8, "idx and checkpoint format fidelity", ok, buf);
}

// ---- criterion 9: sweep/interpolation mechanics ---------------------------------

void criterion_9() {
    fs::path ckpt = work_dir() / "mech.ckpt";
    TrainConfig cfg = tiny_em_config(7, ckpt.string());
    cfg.iterations = 50;
    RandomStream data_rng(7 + 1000);
    Dataset data = mixture_dataset(4, 2500, 0.05, data_rng);
    TrainResult run = train(cfg, data);
    GeneratorHandle gen = generator_from_checkpoint(run.checkpoint);

    SweepSpec spec;  // defaults under test
    spec.class_index = 1;
    spec.steps = 10;
    spec.seed = 17;
    bool range_ok = spec.code_min == 0.5 && spec.code_max == 1.85;

    // direct conditional generation: explicit condition rows, the same
    // replicated fixed-noise row the probes document
    RandomStream noise_rng(17);
    Tensor z_row = sample_noise(NoisePrior{gen.d_z}, 1, noise_rng);
    Tensor z({spec.steps, gen.d_z});
    for (std::size_t i = 0; i < spec.steps; ++i) {
        std::copy_n(z_row.v.begin(), gen.d_z,
                    z.v.begin() + static_cast<std::ptrdiff_t>(i * gen.d_z));
    }
    Tensor sweep_cond = Tensor::zeros({spec.steps, 4});
    for (std::size_t i = 0; i < spec.steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(spec.steps - 1);
        sweep_cond.at(i, 1) = 0.5 + t * (1.85 - 0.5);
    }
    Tensor direct_sweep = gen.generate(sweep_cond, z);
    Tensor sweep = condition_sweep(gen, spec);
    bool sweep_ok = sweep.v == direct_sweep.v && sweep_cond.at(0, 1) == 0.5 &&
                    sweep_cond.at(spec.steps - 1, 1) == 1.85;

    Tensor interp_cond = Tensor::zeros({spec.steps, 4});
    for (std::size_t i = 0; i < spec.steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(spec.steps - 1);
        interp_cond.at(i, 0) = 1.0 - t;
        interp_cond.at(i, 3) = t;
    }
    Tensor direct_interp = gen.generate(interp_cond, z);
    Tensor interp = condition_interpolation(gen, 0, 3, spec.steps, 17);
    bool interp_ok = interp.v == direct_interp.v && interp_cond.at(0, 0) == 1.0 &&
                     interp_cond.at(spec.steps - 1, 3) == 1.0;

    // endpoint identity holds across repeated invocations
    Tensor sweep2 = condition_sweep(gen, spec);
    bool repeat_ok = sweep.v == sweep2.v;

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "default range [0.5, 1.85]: %s, sweep bit-exact: %s, interpolation "
                  "bit-exact: %s, repeatable: %s",
                  range_ok ? "yes" : "no", sweep_ok ? "yes" : "no", interp_ok ? "yes" : "no",
                  repeat_ok ? "yes" : "no");
    report(9, "sweep and interpolation mechanics", range_ok && sweep_ok && interp_ok && repeat_ok,
           buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
