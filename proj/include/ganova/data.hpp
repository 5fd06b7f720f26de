#pragma once

#include <string>
#include <vector>

#include "ganova/tensor.hpp"

namespace ganova {

struct Dataset {
    Tensor samples;           // {m_total, d_x}, values in [-1, 1]
    std::vector<int> labels;  // in [0, n_classes)
    int n_classes = 0;
    std::string id;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return samples.cols(); }
    void validate() const;

    // per-class mean vectors, {n_classes, d_x}
    Tensor class_means() const;
};

// IDX (big-endian) readers. Pixels are rescaled from [0,255] to [-1,1] and
// images flattened row-major.
Tensor load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

Dataset load_mnist(const std::string& images_path, const std::string& labels_path);

// First 50,000 samples as training split, last 10,000 as test split.
Dataset mnist_split(const Dataset& full, bool train);

// 2D Gaussian mixture: class i centered at 0.7*(cos, sin)(2*pi*i/N), clamped
// to [-1,1]. Desk-scale stand-in with a closed-form class oracle.
Dataset mixture_dataset(int n_classes, std::size_t per_class, double sigma, RandomStream& rng);

Tensor one_hot(const std::vector<int>& labels, int n_classes);

struct NoisePrior {
    std::size_t d_z = 100;
};

// i.i.d. uniform on [-1, 1], shape {m, d_z}
Tensor sample_noise(const NoisePrior& prior, std::size_t m, RandomStream& rng);

struct ConditionedBatch {
    Tensor samples;  // {m, d_x}
    std::vector<int> labels;
};

// Shuffled-without-replacement epochs; the final short batch is dropped so
// every batch has exactly m rows. The permutation is drawn from the shared
// stream at each epoch start; state() / restore() let a checkpoint capture a
// mid-epoch position.
class BatchIterator {
public:
    BatchIterator(const Dataset& ds, std::size_t batch_size, RandomStream& rng);

    ConditionedBatch next();

    std::size_t batches_per_epoch() const { return dataset_->size() / batch_size_; }

    struct State {
        std::vector<std::uint64_t> permutation;
        std::uint64_t cursor = 0;
    };
    State state() const;
    void restore(const State& s);

private:
    void reshuffle();

    const Dataset* dataset_;
    std::size_t batch_size_;
    RandomStream* rng_;
    std::vector<std::uint64_t> perm_;
    std::size_t cursor_ = 0;
};

}  // namespace ganova
