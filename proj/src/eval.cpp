#include "ganova/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ganova {

Tensor GeneratorHandle::generate(const Tensor& cond_rows, const Tensor& z) const {
    if (cond_rows.rank() != 2 || cond_rows.cols() != static_cast<std::size_t>(n_classes)) {
        throw DimensionError("generate: condition rows must be {m, " +
                             std::to_string(n_classes) + "}, got " + shape_str(cond_rows.shape));
    }
    if (z.rank() != 2 || z.cols() != d_z || z.rows() != cond_rows.rows()) {
        throw DimensionError("generate: noise shape " + shape_str(z.shape) +
                             " does not match conditions " + shape_str(cond_rows.shape));
    }
    Tape tape;
    MlpVars vars = params_to_tape(tape, params);
    Var out = generator_forward(spec, vars, tape.leaf(z), tape.leaf(cond_rows));
    return out.value();
}

Tensor GeneratorHandle::generate_labels(const std::vector<int>& labels, RandomStream& rng) const {
    Tensor z = sample_noise(NoisePrior{d_z}, labels.size(), rng);
    return generate(one_hot(labels, n_classes), z);
}

GeneratorHandle generator_from_checkpoint(const CheckpointBundle& bundle) {
    ModelShapes shapes = make_model_shapes(bundle.config, bundle.n_classes, bundle.d_x);
    return GeneratorHandle{shapes.generator, bundle.generator, bundle.config.d_z,
                           bundle.n_classes};
}

std::vector<double> moving_average(const std::vector<double>& xs, std::size_t window) {
    if (window < 1) throw ContractError("moving_average: window must be >= 1");
    if (xs.empty()) return {};
    if (window >= xs.size()) {
        double s = 0.0;
        for (double x : xs) s += x;
        return {s / static_cast<double>(xs.size())};
    }
    std::vector<double> out(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += xs[i];
        if (i >= window) acc -= xs[i - window];
        out[i] = acc / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

WassersteinSeries wasserstein_estimate(const std::vector<MetricsRow>& metrics) {
    WassersteinSeries series;
    for (const MetricsRow& row : metrics) {
        if (row.w_estimate) {
            series.iters.push_back(row.iter);
            series.raw.push_back(*row.w_estimate);
        }
    }
    if (series.raw.empty()) {
        throw ContractError(
            "wasserstein_estimate: metrics carry no gap column (js runs have none)");
    }
    series.window = std::max<std::size_t>(10, series.raw.size() / 100);
    series.smoothed = moving_average(series.raw, series.window);
    return series;
}

Oracle mixture_oracle(int n_classes) {
    Tensor means({static_cast<std::size_t>(n_classes), 2});
    for (int c = 0; c < n_classes; ++c) {
        double angle = 2.0 * M_PI * c / n_classes;
        means.at(static_cast<std::size_t>(c), 0) = 0.7 * std::cos(angle);
        means.at(static_cast<std::size_t>(c), 1) = 0.7 * std::sin(angle);
    }
    return nearest_mean_oracle(std::move(means));
}

Oracle nearest_mean_oracle(Tensor class_means) {
    return [means = std::move(class_means)](std::span<const double> row) -> int {
        if (row.size() != means.cols()) {
            throw DimensionError("oracle: sample width " + std::to_string(row.size()) +
                                 " != mean width " + std::to_string(means.cols()));
        }
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < means.rows(); ++c) {
            double d = 0.0;
            for (std::size_t j = 0; j < means.cols(); ++j) {
                double diff = row[j] - means.at(c, j);
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        return best;
    };
}

std::string FidelityReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "class,requested,matched,mean_error\n";
    for (std::size_t c = 0; c < requested.size(); ++c) {
        os << c << ',' << requested[c] << ',' << matched[c] << ',' << mean_error[c] << '\n';
    }
    return os.str();
}

FidelityReport conditional_fidelity(const GeneratorHandle& gen, const Oracle& oracle,
                                    const Tensor& reference_means, std::size_t per_class,
                                    RandomStream& rng) {
    if (per_class < 1) throw ConfigError("conditional_fidelity: per_class must be >= 1");
    auto n = static_cast<std::size_t>(gen.n_classes);
    FidelityReport report;
    report.requested.assign(n, per_class);
    report.matched.assign(n, 0);
    report.mean_error.assign(n, 0.0);
    std::size_t total_matched = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<int> labels(per_class, static_cast<int>(c));
        Tensor samples = gen.generate_labels(labels, rng);
        std::size_t d = samples.cols();
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = 0; i < per_class; ++i) {
            std::span<const double> row(&samples.v[i * d], d);
            if (oracle(row) == static_cast<int>(c)) report.matched[c]++;
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
        }
        total_matched += report.matched[c];
        double err = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double diff = mean[j] / static_cast<double>(per_class) - reference_means.at(c, j);
            err += diff * diff;
        }
        report.mean_error[c] = std::sqrt(err);
    }
    report.fidelity = static_cast<double>(total_matched) / static_cast<double>(n * per_class);
    return report;
}

int OracleClassifier::classify(std::span<const double> row) const {
    Tape tape;
    MlpVars vars = params_to_tape(tape, params);
    Tensor x({1, row.size()}, std::vector<double>(row.begin(), row.end()));
    Var logits = mlp_forward(spec, vars, tape.leaf(std::move(x)), false, nullptr);
    const Tensor& t = logits.value();
    return static_cast<int>(std::max_element(t.v.begin(), t.v.end()) - t.v.begin());
}

double OracleClassifier::accuracy(const Dataset& ds) const {
    std::size_t hits = 0;
    std::size_t d = ds.dim();
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < ds.size(); start += kChunk) {
        std::size_t count = std::min(kChunk, ds.size() - start);
        Tensor x({count, d});
        std::copy_n(ds.samples.v.begin() + static_cast<std::ptrdiff_t>(start * d), count * d,
                    x.v.begin());
        Tape tape;
        MlpVars vars = params_to_tape(tape, params);
        const Tensor& logits = mlp_forward(spec, vars, tape.leaf(std::move(x)), false, nullptr)
                                   .value();
        for (std::size_t i = 0; i < count; ++i) {
            const double* row = &logits.v[i * logits.cols()];
            int pred = static_cast<int>(std::max_element(row, row + logits.cols()) - row);
            if (pred == ds.labels[start + i]) hits++;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

Oracle OracleClassifier::as_oracle() const {
    return [self = *this](std::span<const double> row) { return self.classify(row); };
}

OracleClassifier train_oracle_classifier(const Dataset& train, const Dataset& test,
                                         std::uint64_t seed, std::size_t epochs,
                                         double accuracy_floor) {
    RandomStream rng(seed);
    OracleClassifier clf;
    clf.spec = MlpSpec::dense(train.dim(), {128},
                              static_cast<std::size_t>(train.n_classes), Act::None, 0.0);
    clf.params = init_params(clf.spec, rng);
    AdamState state = AdamState::zeros_like(clf.params);
    AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
    std::size_t batch_size = 100;
    BatchIterator batches(train, batch_size, rng);
    std::size_t steps = epochs * batches.batches_per_epoch();
    for (std::size_t s = 0; s < steps; ++s) {
        ConditionedBatch batch = batches.next();
        Tape tape;
        MlpVars vars = params_to_tape(tape, clf.params);
        Var logits = mlp_forward(clf.spec, vars, tape.leaf(batch.samples), true, &rng);
        Var loss = softmax_xent_mean(logits, one_hot(batch.labels, train.n_classes));
        GradientMap grads = tape.backward(loss);
        adam_step(clf.params, vars, grads, state, adam, Direction::Descend);
    }
    double acc = clf.accuracy(test);
    if (acc < accuracy_floor) {
        throw CalibrationError("oracle classifier reached only " + std::to_string(acc) +
                               " test accuracy, below the " + std::to_string(accuracy_floor) +
                               " floor");
    }
    return clf;
}

void SweepSpec::validate(int n_classes) const {
    if (class_index < 0 || class_index >= n_classes) {
        throw DataError("sweep: class index " + std::to_string(class_index) +
                        " out of range [0, " + std::to_string(n_classes) + ")");
    }
    if (!(code_min < code_max)) {
        throw ContractError("sweep: code_min must be strictly below code_max");
    }
    if (steps < 2) throw ContractError("sweep: need at least 2 steps");
}

namespace {

Tensor fixed_noise(std::uint64_t seed, std::size_t rows, std::size_t d_z) {
    RandomStream rng(seed);
    Tensor one = sample_noise(NoisePrior{d_z}, 1, rng);
    Tensor z({rows, d_z});
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(one.v.begin(), d_z, z.v.begin() + static_cast<std::ptrdiff_t>(i * d_z));
    }
    return z;
}

}  // namespace

Tensor condition_sweep(const GeneratorHandle& gen, const SweepSpec& spec) {
    spec.validate(gen.n_classes);
    Tensor cond({spec.steps, static_cast<std::size_t>(gen.n_classes)});
    for (std::size_t i = 0; i < spec.steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(spec.steps - 1);
        cond.at(i, static_cast<std::size_t>(spec.class_index)) =
            spec.code_min + t * (spec.code_max - spec.code_min);
    }
    return gen.generate(cond, fixed_noise(spec.seed, spec.steps, gen.d_z));
}

Tensor condition_interpolation(const GeneratorHandle& gen, int class_a, int class_b,
                               std::size_t steps, std::uint64_t seed) {
    if (class_a == class_b) throw ContractError("interpolation: classes must differ");
    if (class_a < 0 || class_b < 0 || class_a >= gen.n_classes || class_b >= gen.n_classes) {
        throw DataError("interpolation: class out of range");
    }
    if (steps < 2) throw ContractError("interpolation: need at least 2 steps");
    Tensor cond({steps, static_cast<std::size_t>(gen.n_classes)});
    for (std::size_t i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        cond.at(i, static_cast<std::size_t>(class_a)) = 1.0 - t;
        cond.at(i, static_cast<std::size_t>(class_b)) = t;
    }
    return gen.generate(cond, fixed_noise(seed, steps, gen.d_z));
}

namespace {

unsigned char to_pixel(double v) {
    double p = std::round((v + 1.0) * 127.5);
    return static_cast<unsigned char>(std::clamp(p, 0.0, 255.0));
}

}  // namespace

void render_grid_pgm(const Tensor& images, std::size_t rows, std::size_t cols,
                     const std::string& path) {
    if (images.rank() != 2) throw ContractError("render_grid_pgm: images must be rank 2");
    std::size_t n = images.rows();
    std::size_t width = images.cols();
    if (n > rows * cols) {
        throw ContractError("render_grid_pgm: " + std::to_string(n) + " images exceed a " +
                            std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    }
    std::size_t cell;
    if (width == 784) {
        cell = 28;
    } else if (width == 2) {
        cell = 64;
    } else {
        throw ContractError("render_grid_pgm: unsupported payload width " +
                            std::to_string(width));
    }
    constexpr std::size_t kGutter = 2;
    std::size_t img_w = cols * cell + (cols - 1) * kGutter;
    std::size_t img_h = rows * cell + (rows - 1) * kGutter;
    std::vector<unsigned char> canvas(img_w * img_h, 255);  // gutters stay white

    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t idx = r * cols + c;
            std::size_t oy = r * (cell + kGutter);
            std::size_t ox = c * (cell + kGutter);
            // blank (black) cell when the grid is larger than the image count
            for (std::size_t y = 0; y < cell; ++y) {
                for (std::size_t x = 0; x < cell; ++x) canvas[(oy + y) * img_w + ox + x] = 0;
            }
            if (idx >= n) continue;
            if (width == 784) {
                for (std::size_t y = 0; y < 28; ++y) {
                    for (std::size_t x = 0; x < 28; ++x) {
                        canvas[(oy + y) * img_w + ox + x] = to_pixel(images.at(idx, y * 28 + x));
                    }
                }
            } else {
                // one 2D point per cell, drawn as a 3x3 white dot
                double px = std::clamp(images.at(idx, 0), -1.0, 1.0);
                double py = std::clamp(images.at(idx, 1), -1.0, 1.0);
                auto cx = static_cast<std::ptrdiff_t>(std::round((px + 1.0) / 2.0 * 63.0));
                auto cy = static_cast<std::ptrdiff_t>(63 - std::round((py + 1.0) / 2.0 * 63.0));
                for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
                    for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                        std::ptrdiff_t y = cy + dy, x = cx + dx;
                        if (y < 0 || y >= 64 || x < 0 || x >= 64) continue;
                        canvas[(oy + static_cast<std::size_t>(y)) * img_w + ox +
                               static_cast<std::size_t>(x)] = 255;
                    }
                }
            }
        }
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write PGM to " + path);
    os << "P5\n" << img_w << ' ' << img_h << "\n255\n";
    os.write(reinterpret_cast<const char*>(canvas.data()),
             static_cast<std::streamsize>(canvas.size()));
    if (!os) throw DataError("write failure on " + path);
}

}  // namespace ganova
