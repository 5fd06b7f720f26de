#include "ganova/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace ganova {

std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(s[i]);
    }
    out += ")";
    return out;
}

namespace {

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) {
        if (e == 0) throw DimensionError("tensor extent must be positive, got shape " + shape_str(s));
        n *= e;
    }
    return s.empty() ? 0 : n;
}

}  // namespace

Tensor::Tensor(Shape s) : shape(std::move(s)), v(shape_size(shape), 0.0) {}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), v(std::move(values)) {
    if (shape_size(shape) != v.size()) {
        throw DimensionError("value count " + std::to_string(v.size()) +
                             " does not match shape " + shape_str(shape));
    }
}

Tensor Tensor::full(Shape s, double value) {
    Tensor t(std::move(s));
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
}

Tensor Tensor::row_major(std::size_t rows, std::size_t cols,
                         std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
    if (rank() == 1) return shape[0];
    if (rank() == 2) return shape[0];
    throw DimensionError("rows() needs rank 1 or 2, got shape " + shape_str(shape));
}

std::size_t Tensor::cols() const {
    if (rank() == 2) return shape[1];
    throw DimensionError("cols() needs rank 2, got shape " + shape_str(shape));
}

double& Tensor::at(std::size_t i, std::size_t j) {
    return v[i * cols() + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    return v[i * cols() + j];
}

bool Tensor::all_finite() const {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double RandomStream::uniform() {
    // 53-bit mantissa, uniform on [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RandomStream::gaussian(double mean, double stddev) {
    // Box-Muller; consumes exactly two uniforms per draw (no cached spare,
    // keeps the stream state trivially serializable)
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

std::size_t RandomStream::index(std::size_t n) {
    if (n == 0) throw ContractError("RandomStream::index(0)");
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
}

std::string RandomStream::serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void RandomStream::restore(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (is.fail()) throw ParseError(ParseError::Kind::Corrupt, "bad rng state string");
}

}  // namespace ganova
