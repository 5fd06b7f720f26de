#include "ganova/tape.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ganova {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

void require_same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw ContractError("operands belong to different tapes");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape != b.shape) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                             " vs " + shape_str(b.shape));
    }
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got shape " +
                             shape_str(t.shape));
    }
}

Var make(Tape& t, Tensor value, std::vector<int> parents, Tape::BackwardFn bw) {
    return Var{&t, t.add(std::move(value), std::move(parents), std::move(bw))};
}

// Unary elementwise helper: forward maps each value, backward multiplies the
// upstream gradient by a factor built from tape ops (keeps it differentiable).
template <typename Fwd, typename Bwd>
Var unary_op(Var x, Fwd fwd, Bwd bwd_factor) {
    Tensor out(x.shape());
    const Tensor& in = x.value();
    for (std::size_t i = 0; i < in.size(); ++i) out.v[i] = fwd(in.v[i]);
    int pid = x.id;
    return make(*x.tape, std::move(out), {pid},
                [pid, bwd_factor](Tape& t, int out_id, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    Var ov{&t, out_id};
                    Var pv{&t, pid};
                    return {mul(gv, bwd_factor(t, pv, ov)).id};
                });
}

Var pad_cols(Var x, std::size_t start, std::size_t total);

}  // namespace

const Tensor& Var::value() const {
    if (!valid()) throw ContractError("use of invalid Var");
    return tape->value(id);
}

const Shape& Var::shape() const { return value().shape; }

int Tape::add(Tensor value, std::vector<int> parents, BackwardFn backward) {
    for (int p : parents) {
        if (p < 0 || static_cast<std::size_t>(p) >= nodes_.size()) {
            throw ContractError("parent node id out of range");
        }
    }
    nodes_.push_back(Node{std::move(value), std::move(parents), std::move(backward)});
    return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::leaf(Tensor value) {
    return Var{this, add(std::move(value), {}, nullptr)};
}

std::unordered_map<int, int> Tape::backward_ids(Var scalar) {
    if (scalar.tape != this) throw ContractError("backward: node is not on this tape");
    if (scalar.value().size() != 1) {
        throw ContractError("backward: seed must be a single-element tensor, got shape " +
                            shape_str(scalar.shape()));
    }
    std::unordered_map<int, int> grads;
    grads[scalar.id] = leaf(Tensor::ones(scalar.shape())).id;
    for (int i = scalar.id; i >= 0; --i) {
        auto it = grads.find(i);
        if (it == grads.end()) continue;
        // copies: backward rules append nodes and may reallocate nodes_
        std::vector<int> parents = nodes_[static_cast<std::size_t>(i)].parents;
        BackwardFn backward = nodes_[static_cast<std::size_t>(i)].backward;
        if (!backward) continue;
        int grad_id = it->second;
        std::vector<int> parent_grads = backward(*this, i, grad_id);
        if (parent_grads.size() != parents.size()) {
            throw ContractError("backward rule returned wrong gradient count");
        }
        for (std::size_t k = 0; k < parents.size(); ++k) {
            int pg = parent_grads[k];
            if (pg < 0) continue;
            int p = parents[k];
            auto pit = grads.find(p);
            if (pit == grads.end()) {
                grads[p] = pg;
            } else {
                pit->second = ganova::add(Var{this, pit->second}, Var{this, pg}).id;
            }
        }
    }
    return grads;
}

GradientMap Tape::backward(Var scalar) {
    GradientMap out;
    for (auto [node_id, grad_id] : backward_ids(scalar)) {
        out.emplace(node_id, value(grad_id));
    }
    return out;
}

Var Tape::grad_graph(Var scalar, Var wrt) {
    if (wrt.tape != this) throw ContractError("grad_graph: wrt is not on this tape");
    auto grads = backward_ids(scalar);
    auto it = grads.find(wrt.id);
    if (it == grads.end()) return leaf(Tensor::zeros(wrt.shape()));
    return Var{this, it->second};
}

// --- binary elementwise ----------------------------------------------------

Var add(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += bv.v[i];
    return make(*a.tape, std::move(out), {a.id, b.id},
                [](Tape&, int, int g) -> std::vector<int> { return {g, g}; });
}

Var sub(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= bv.v[i];
    return make(*a.tape, std::move(out), {a.id, b.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {g, neg(Var{&t, g}).id};
                });
}

Var mul(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= bv.v[i];
    int pa = a.id, pb = b.id;
    return make(*a.tape, std::move(out), {pa, pb},
                [pa, pb](Tape& t, int, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    return {mul(gv, Var{&t, pb}).id, mul(gv, Var{&t, pa}).id};
                });
}

Var div(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "div");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] /= bv.v[i];
    int pa = a.id, pb = b.id;
    return make(*a.tape, std::move(out), {pa, pb},
                [pa, pb](Tape& t, int, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    Var av{&t, pa}, bv2{&t, pb};
                    Var da = div(gv, bv2);
                    Var db = neg(div(mul(gv, av), square(bv2)));
                    return {da.id, db.id};
                });
}

Var affine(Var x, double k, double b) {
    Tensor out = x.value();
    for (double& v : out.v) v = k * v + b;
    return make(*x.tape, std::move(out), {x.id},
                [k](Tape& t, int, int g) -> std::vector<int> {
                    return {scale(Var{&t, g}, k).id};
                });
}

// --- unary elementwise -----------------------------------------------------

Var exp(Var x) {
    return unary_op(x, [](double v) { return std::exp(v); },
                    [](Tape&, Var, Var out) { return out; });
}

Var log(Var x) {
    for (double v : x.value().v) {
        if (!(v > 0.0)) {
            throw DomainError("log: input must be strictly positive, got " + std::to_string(v));
        }
    }
    return unary_op(x, [](double v) { return std::log(v); },
                    [](Tape& t, Var in, Var) {
                        return div(t.leaf(Tensor::ones(in.shape())), in);
                    });
}

Var square(Var x) {
    return unary_op(x, [](double v) { return v * v; },
                    [](Tape&, Var in, Var) { return scale(in, 2.0); });
}

Var sqrt(Var x) {
    for (double v : x.value().v) {
        if (v < 0.0) throw DomainError("sqrt: negative input " + std::to_string(v));
    }
    return unary_op(x, [](double v) { return std::sqrt(v); },
                    [](Tape& t, Var, Var out) {
                        return div(t.leaf(Tensor::ones(out.shape())), scale(out, 2.0));
                    });
}

Var tanh(Var x) {
    return unary_op(x, [](double v) { return std::tanh(v); },
                    [](Tape&, Var, Var out) { return affine(square(out), -1.0, 1.0); });
}

Var sigmoid(Var x) {
    auto sig = [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
    };
    return unary_op(x, sig, [](Tape&, Var, Var out) {
        return mul(out, affine(out, -1.0, 1.0));
    });
}

Var softplus(Var x) {
    auto sp = [](double v) {
        return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
    };
    return unary_op(x, sp, [](Tape&, Var in, Var) { return sigmoid(in); });
}

Var leaky_relu(Var x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw ConfigError("leaky_relu: slope must be in (0,1), got " + std::to_string(slope));
    }
    const Tensor& in = x.value();
    Tensor out(in.shape);
    Tensor mask(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) {
        // x == 0 takes the positive branch
        bool pos = in.v[i] >= 0.0;
        mask.v[i] = pos ? 1.0 : slope;
        out.v[i] = mask.v[i] * in.v[i];
    }
    return make(*x.tape, std::move(out), {x.id},
                [mask](Tape& t, int, int g) -> std::vector<int> {
                    return {mul(Var{&t, g}, t.leaf(mask)).id};
                });
}

Var dropout(Var x, double rate, bool training, RandomStream& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) return x;
    const Tensor& in = x.value();
    Tensor out(in.shape);
    Tensor mask(in.shape);
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < in.size(); ++i) {
        mask.v[i] = rng.uniform() < rate ? 0.0 : keep_scale;
        out.v[i] = mask.v[i] * in.v[i];
    }
    return make(*x.tape, std::move(out), {x.id},
                [mask](Tape& t, int, int g) -> std::vector<int> {
                    return {mul(Var{&t, g}, t.leaf(mask)).id};
                });
}

// --- linear algebra ----------------------------------------------------------

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank2(av, "matmul");
    require_rank2(bv, "matmul");
    if (av.cols() != bv.rows()) {
        throw DimensionError("matmul: inner extents differ, " + shape_str(av.shape) +
                             " x " + shape_str(bv.shape));
    }
    Tensor out({av.rows(), bv.cols()});
    ConstMapRM ma(av.v.data(), static_cast<Eigen::Index>(av.rows()),
                  static_cast<Eigen::Index>(av.cols()));
    ConstMapRM mb(bv.v.data(), static_cast<Eigen::Index>(bv.rows()),
                  static_cast<Eigen::Index>(bv.cols()));
    MapRM mo(out.v.data(), ma.rows(), mb.cols());
    mo.noalias() = ma * mb;
    int pa = a.id, pb = b.id;
    return make(*a.tape, std::move(out), {pa, pb},
                [pa, pb](Tape& t, int, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    Var da = matmul(gv, transpose(Var{&t, pb}));
                    Var db = matmul(transpose(Var{&t, pa}), gv);
                    return {da.id, db.id};
                });
}

Var transpose(Var a) {
    const Tensor& av = a.value();
    require_rank2(av, "transpose");
    Tensor out({av.cols(), av.rows()});
    for (std::size_t i = 0; i < av.rows(); ++i) {
        for (std::size_t j = 0; j < av.cols(); ++j) out.at(j, i) = av.at(i, j);
    }
    return make(*a.tape, std::move(out), {a.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {transpose(Var{&t, g}).id};
                });
}

// --- reductions and broadcasts ----------------------------------------------

Var sum(Var x) {
    const Tensor& in = x.value();
    double s = 0.0;
    for (double v : in.v) s += v;
    Shape in_shape = in.shape;
    return make(*x.tape, Tensor::scalar(s), {x.id},
                [in_shape](Tape& t, int, int g) -> std::vector<int> {
                    return {broadcast_scalar(Var{&t, g}, in_shape).id};
                });
}

Var mean(Var x) {
    return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var broadcast_scalar(Var x, Shape target) {
    if (x.value().size() != 1) {
        throw DimensionError("broadcast_scalar: source must be single-element, got shape " +
                             shape_str(x.shape()));
    }
    Tensor out = Tensor::full(target, x.value().v[0]);
    return make(*x.tape, std::move(out), {x.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {sum(Var{&t, g}).id};
                });
}

Var sum_rows(Var x) {
    const Tensor& in = x.value();
    require_rank2(in, "sum_rows");
    Tensor out({in.rows()});
    for (std::size_t i = 0; i < in.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < in.cols(); ++j) s += in.at(i, j);
        out.v[i] = s;
    }
    std::size_t n = in.cols();
    return make(*x.tape, std::move(out), {x.id},
                [n](Tape& t, int, int g) -> std::vector<int> {
                    return {broadcast_cols(Var{&t, g}, n).id};
                });
}

Var broadcast_cols(Var x, std::size_t n) {
    const Tensor& in = x.value();
    if (in.rank() != 1) {
        throw DimensionError("broadcast_cols: expected rank-1 tensor, got shape " +
                             shape_str(in.shape));
    }
    Tensor out({in.size(), n});
    for (std::size_t i = 0; i < in.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = in.v[i];
    }
    return make(*x.tape, std::move(out), {x.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {sum_rows(Var{&t, g}).id};
                });
}

Var sum_cols(Var x) {
    const Tensor& in = x.value();
    require_rank2(in, "sum_cols");
    Tensor out({in.cols()});
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < in.cols(); ++j) out.v[j] += in.at(i, j);
    }
    std::size_t m = in.rows();
    return make(*x.tape, std::move(out), {x.id},
                [m](Tape& t, int, int g) -> std::vector<int> {
                    return {broadcast_rows(Var{&t, g}, m).id};
                });
}

Var broadcast_rows(Var x, std::size_t m) {
    const Tensor& in = x.value();
    if (in.rank() != 1) {
        throw DimensionError("broadcast_rows: expected rank-1 tensor, got shape " +
                             shape_str(in.shape));
    }
    Tensor out({m, in.size()});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < in.size(); ++j) out.at(i, j) = in.v[j];
    }
    return make(*x.tape, std::move(out), {x.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {sum_cols(Var{&t, g}).id};
                });
}

Var bias_add(Var x, Var bias) {
    require_same_tape(x, bias);
    const Tensor& in = x.value();
    const Tensor& bv = bias.value();
    require_rank2(in, "bias_add");
    if (bv.rank() != 1 || bv.size() != in.cols()) {
        throw DimensionError("bias_add: bias shape " + shape_str(bv.shape) +
                             " does not match input " + shape_str(in.shape));
    }
    Tensor out = in;
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < in.cols(); ++j) out.at(i, j) += bv.v[j];
    }
    return make(*x.tape, std::move(out), {x.id, bias.id},
                [](Tape& t, int, int g) -> std::vector<int> {
                    return {g, sum_cols(Var{&t, g}).id};
                });
}

Var softmax_rows(Var x) {
    const Tensor& in = x.value();
    require_rank2(in, "softmax_rows");
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.rows(); ++i) {
        double mx = in.at(i, 0);
        for (std::size_t j = 1; j < in.cols(); ++j) mx = std::max(mx, in.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < in.cols(); ++j) denom += std::exp(in.at(i, j) - mx);
        for (std::size_t j = 0; j < in.cols(); ++j) {
            out.at(i, j) = std::exp(in.at(i, j) - mx) / denom;
        }
    }
    std::size_t n = in.cols();
    return make(*x.tape, std::move(out), {x.id},
                [n](Tape& t, int out_id, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    Var y{&t, out_id};
                    Var inner = broadcast_cols(sum_rows(mul(gv, y)), n);
                    return {mul(y, sub(gv, inner)).id};
                });
}

// --- column concat / slice ----------------------------------------------------

Var concat_cols(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank2(av, "concat_cols");
    require_rank2(bv, "concat_cols");
    if (av.rows() != bv.rows()) {
        throw DimensionError("concat_cols: row counts differ, " + shape_str(av.shape) +
                             " vs " + shape_str(bv.shape));
    }
    std::size_t p = av.cols(), q = bv.cols();
    Tensor out({av.rows(), p + q});
    for (std::size_t i = 0; i < av.rows(); ++i) {
        for (std::size_t j = 0; j < p; ++j) out.at(i, j) = av.at(i, j);
        for (std::size_t j = 0; j < q; ++j) out.at(i, p + j) = bv.at(i, j);
    }
    return make(*a.tape, std::move(out), {a.id, b.id},
                [p, q](Tape& t, int, int g) -> std::vector<int> {
                    Var gv{&t, g};
                    return {slice_cols(gv, 0, p).id, slice_cols(gv, p, q).id};
                });
}

Var slice_cols(Var x, std::size_t start, std::size_t width) {
    const Tensor& in = x.value();
    require_rank2(in, "slice_cols");
    if (start + width > in.cols() || width == 0) {
        throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                             std::to_string(start + width) + ") out of range for shape " +
                             shape_str(in.shape));
    }
    Tensor out({in.rows(), width});
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < width; ++j) out.at(i, j) = in.at(i, start + j);
    }
    std::size_t total = in.cols();
    return make(*x.tape, std::move(out), {x.id},
                [start, total](Tape& t, int, int g) -> std::vector<int> {
                    return {pad_cols(Var{&t, g}, start, total).id};
                });
}

namespace {

// Embed a {m,w} block into a {m,total} zero tensor at column `start`.
// Inverse of slice_cols; they are each other's backward rule.
Var pad_cols(Var x, std::size_t start, std::size_t total) {
    const Tensor& in = x.value();
    require_rank2(in, "pad_cols");
    std::size_t width = in.cols();
    Tensor out({in.rows(), total});
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < width; ++j) out.at(i, start + j) = in.at(i, j);
    }
    return make(*x.tape, std::move(out), {x.id},
                [start, width](Tape& t, int, int g) -> std::vector<int> {
                    return {slice_cols(Var{&t, g}, start, width).id};
                });
}

}  // namespace

Var l2_norm_rows(Var x) {
    return sqrt(sum_rows(square(x)));
}

}  // namespace ganova
