#include "ganova/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

namespace ganova {

void Dataset::validate() const {
    if (n_classes < 1) throw ConfigError("Dataset: need at least one class");
    if (samples.rank() != 2 || samples.rows() != labels.size()) {
        throw DimensionError("Dataset: sample/label counts disagree");
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) {
        if (l < 0 || l >= n_classes) throw DataError("Dataset: label out of range");
        counts[static_cast<std::size_t>(l)]++;
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw DataError("Dataset: class " + std::to_string(c) + " is empty");
    }
    if (!samples.all_finite()) throw DataError("Dataset: non-finite sample value");
}

Tensor Dataset::class_means() const {
    std::size_t d = dim();
    Tensor means({static_cast<std::size_t>(n_classes), d});
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = 0; i < size(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        counts[c]++;
        for (std::size_t j = 0; j < d; ++j) means.at(c, j) += samples.at(i, j);
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        for (std::size_t j = 0; j < d; ++j) means.at(c, j) /= static_cast<double>(counts[c]);
    }
    return means;
}

namespace {

constexpr std::uint32_t kImagesMagic = 2051;  // 0x00000803
constexpr std::uint32_t kLabelsMagic = 2049;  // 0x00000801
constexpr std::uint64_t kMaxIdxElements = 1ull << 32;

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ParseError(ParseError::Kind::Truncated, "truncated IDX header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

}  // namespace

Tensor load_idx_images(const std::string& path) {
    std::ifstream in = open_binary(path);
    std::uint32_t magic = read_be_u32(in, path);
    if (magic != kImagesMagic) {
        throw ParseError(ParseError::Kind::BadMagic,
                         path + ": expected image magic 2051, got " + std::to_string(magic));
    }
    std::uint64_t count = read_be_u32(in, path);
    std::uint64_t rows = read_be_u32(in, path);
    std::uint64_t cols = read_be_u32(in, path);
    if (count == 0 || rows == 0 || cols == 0 || count * rows * cols > kMaxIdxElements) {
        throw ParseError(ParseError::Kind::DimOverflow,
                         path + ": implausible IDX dimensions " + std::to_string(count) + "x" +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::size_t total = static_cast<std::size_t>(count * rows * cols);
    std::vector<unsigned char> pixels(total);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(total));
    if (static_cast<std::size_t>(in.gcount()) != total) {
        throw ParseError(ParseError::Kind::Truncated,
                         path + ": payload ends before declared " + std::to_string(count) +
                             " images");
    }
    Tensor out({static_cast<std::size_t>(count), static_cast<std::size_t>(rows * cols)});
    for (std::size_t i = 0; i < total; ++i) {
        out.v[i] = static_cast<double>(pixels[i]) / 127.5 - 1.0;
    }
    return out;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in = open_binary(path);
    std::uint32_t magic = read_be_u32(in, path);
    if (magic != kLabelsMagic) {
        throw ParseError(ParseError::Kind::BadMagic,
                         path + ": expected label magic 2049, got " + std::to_string(magic));
    }
    std::uint64_t count = read_be_u32(in, path);
    if (count == 0 || count > kMaxIdxElements) {
        throw ParseError(ParseError::Kind::DimOverflow,
                         path + ": implausible label count " + std::to_string(count));
    }
    std::vector<unsigned char> raw(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw ParseError(ParseError::Kind::Truncated,
                         path + ": payload ends before declared " + std::to_string(count) +
                             " labels");
    }
    return std::vector<int>(raw.begin(), raw.end());
}

Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    Dataset ds;
    ds.samples = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path);
    ds.n_classes = 10;
    ds.id = "mnist";
    if (ds.samples.rows() != ds.labels.size()) {
        throw ParseError(ParseError::Kind::Corrupt,
                         "image count " + std::to_string(ds.samples.rows()) +
                             " != label count " + std::to_string(ds.labels.size()));
    }
    ds.validate();
    return ds;
}

Dataset mnist_split(const Dataset& full, bool train) {
    constexpr std::size_t kTrain = 50000;
    constexpr std::size_t kTest = 10000;
    if (full.size() != kTrain + kTest) {
        throw ConfigError("mnist_split expects the 60,000-sample training file, got " +
                          std::to_string(full.size()));
    }
    std::size_t begin = train ? 0 : kTrain;
    std::size_t count = train ? kTrain : kTest;
    Dataset out;
    out.n_classes = full.n_classes;
    out.id = full.id + (train ? "-train" : "-test");
    out.samples = Tensor({count, full.dim()});
    out.labels.assign(full.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      full.labels.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::copy_n(full.samples.v.begin() + static_cast<std::ptrdiff_t>(begin * full.dim()),
                count * full.dim(), out.samples.v.begin());
    out.validate();
    return out;
}

Dataset mixture_dataset(int n_classes, std::size_t per_class, double sigma, RandomStream& rng) {
    if (n_classes < 2) throw ConfigError("mixture_dataset: need at least 2 classes");
    if (per_class < 1) throw ConfigError("mixture_dataset: per_class must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("mixture_dataset: sigma must be positive");
    auto n = static_cast<std::size_t>(n_classes);
    Dataset ds;
    ds.n_classes = n_classes;
    ds.id = "mixture";
    ds.samples = Tensor({n * per_class, 2});
    ds.labels.resize(n * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < n; ++c) {
        double angle = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(n);
        double mx = 0.7 * std::cos(angle);
        double my = 0.7 * std::sin(angle);
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            ds.samples.at(row, 0) = std::clamp(rng.gaussian(mx, sigma), -1.0, 1.0);
            ds.samples.at(row, 1) = std::clamp(rng.gaussian(my, sigma), -1.0, 1.0);
            ds.labels[row] = static_cast<int>(c);
        }
    }
    return ds;
}

Tensor one_hot(const std::vector<int>& labels, int n_classes) {
    Tensor t({labels.size(), static_cast<std::size_t>(n_classes)});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw DataError("one_hot: label " + std::to_string(labels[i]) + " out of range [0, " +
                            std::to_string(n_classes) + ")");
        }
        t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

Tensor sample_noise(const NoisePrior& prior, std::size_t m, RandomStream& rng) {
    if (prior.d_z < 1) throw ConfigError("NoisePrior: d_z must be >= 1");
    if (m < 1) throw ConfigError("sample_noise: m must be >= 1");
    Tensor z({m, prior.d_z});
    for (double& v : z.v) v = rng.uniform(-1.0, 1.0);
    return z;
}

BatchIterator::BatchIterator(const Dataset& ds, std::size_t batch_size, RandomStream& rng)
    : dataset_(&ds), batch_size_(batch_size), rng_(&rng) {
    if (batch_size < 1 || batch_size > ds.size()) {
        throw ConfigError("BatchIterator: batch size " + std::to_string(batch_size) +
                          " exceeds dataset size " + std::to_string(ds.size()));
    }
    reshuffle();
}

void BatchIterator::reshuffle() {
    perm_.resize(dataset_->size());
    for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
    rng_->shuffle(perm_);
    cursor_ = 0;
}

ConditionedBatch BatchIterator::next() {
    if (cursor_ + batch_size_ > perm_.size()) reshuffle();  // drop-last
    ConditionedBatch batch;
    batch.samples = Tensor({batch_size_, dataset_->dim()});
    batch.labels.resize(batch_size_);
    std::size_t d = dataset_->dim();
    for (std::size_t i = 0; i < batch_size_; ++i) {
        auto src = static_cast<std::size_t>(perm_[cursor_ + i]);
        batch.labels[i] = dataset_->labels[src];
        std::copy_n(dataset_->samples.v.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                    batch.samples.v.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    cursor_ += batch_size_;
    return batch;
}

BatchIterator::State BatchIterator::state() const {
    return State{perm_, cursor_};
}

void BatchIterator::restore(const State& s) {
    if (s.permutation.size() != dataset_->size() || s.cursor > s.permutation.size()) {
        throw ParseError(ParseError::Kind::Corrupt, "batch iterator state does not fit dataset");
    }
    perm_ = s.permutation;
    cursor_ = s.cursor;
}

}  // namespace ganova
