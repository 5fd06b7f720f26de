#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ganova {

// Error taxonomy. Every failure surfaced by the library derives from Error,
// so callers can catch one base type and still branch on the kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Incompatible tensor extents (message names both shapes).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Math domain violation (log of non-positive input and friends).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value (dropout rate >= 1, k < 1, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Broken API contract (non-scalar backward seed, missing gradient, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

// Bad payload data (out-of-range label, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed file. `kind` distinguishes the corruption classes.
class ParseError : public Error {
public:
    enum class Kind { BadMagic, BadVersion, Truncated, DimOverflow, Corrupt };

    ParseError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Evaluation oracle below its required accuracy floor.
class CalibrationError : public Error {
public:
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of 64-bit reals. Rank 1 and 2 cover everything the
// toolkit needs; elementwise ops accept any rank.
struct Tensor {
    Shape shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(Shape s);
    Tensor(Shape s, std::vector<double> values);

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
    static Tensor full(Shape s, double value);
    static Tensor ones(Shape s) { return full(std::move(s), 1.0); }
    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor row_major(std::size_t rows, std::size_t cols,
                            std::initializer_list<double> values);

    std::size_t size() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
};

// Deterministic random stream. One instance drives a whole training run so
// the seed fully determines every sample, mask, and epsilon draw. Box-Muller
// is used instead of std::normal_distribution to keep the draw sequence
// independent of the standard library implementation.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    double gaussian(double mean, double stddev);

    // uniform integer on [0, n), rejection-sampled (unbiased)
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::swap(xs[i - 1], xs[index(i)]);
        }
    }

    std::string serialize() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
};

}  // namespace ganova
