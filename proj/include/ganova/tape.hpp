#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "ganova/tensor.hpp"

namespace ganova {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& value() const;
    const Shape& shape() const;
};

// node id -> gradient tensor of the same shape as the source node
using GradientMap = std::unordered_map<int, Tensor>;

// Define-by-run recording of a differentiable computation. Backward rules are
// expressed through tape operations themselves, so a gradient is again a tape
// node and can be differentiated (grad_graph enables the gradient-penalty
// double backprop). Nodes are appended in topological order by construction.
class Tape {
public:
    // Given (tape, output id, upstream-gradient id), produce one gradient node
    // id per parent (-1 where no gradient flows).
    using BackwardFn = std::function<std::vector<int>(Tape&, int, int)>;

    int add(Tensor value, std::vector<int> parents, BackwardFn backward);

    // Leaf node: gradients accumulate into it but do not propagate further.
    Var leaf(Tensor value);

    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse sweep from a single-element node. Returns node ids of the
    // gradients; every id in the map is reachable from `scalar`.
    std::unordered_map<int, int> backward_ids(Var scalar);

    // Same sweep, materialized as tensors.
    GradientMap backward(Var scalar);

    // Gradient of `scalar` w.r.t. `wrt` as a new tape node, itself
    // differentiable. Zero tensor if `wrt` does not influence `scalar`.
    Var grad_graph(Var scalar, Var wrt);

private:
    struct Node {
        Tensor value;
        std::vector<int> parents;
        BackwardFn backward;  // empty for leaves
    };

    std::vector<Node> nodes_;
};

// --- primitive operations -------------------------------------------------
// Elementwise ops require identical shapes (broadcasting is limited to the
// dedicated bias/row/column ops below).

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

// k*x + b, elementwise with scalar constants
Var affine(Var x, double k, double b);
inline Var scale(Var x, double k) { return affine(x, k, 0.0); }
inline Var neg(Var x) { return affine(x, -1.0, 0.0); }

Var exp(Var x);
Var log(Var x);  // DomainError on non-positive input
Var square(Var x);
Var sqrt(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var softplus(Var x);  // log(1 + e^x), overflow-safe
Var leaky_relu(Var x, double slope);  // slope in (0,1); x == 0 takes the positive branch
Var dropout(Var x, double rate, bool training, RandomStream& rng);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var sum(Var x);                             // any rank -> scalar {1}
Var mean(Var x);                            // sum / element count
Var sum_rows(Var x);                        // {m,n} -> {m}
Var sum_cols(Var x);                        // {m,n} -> {n}
Var broadcast_cols(Var x, std::size_t n);   // {m} -> {m,n}, copy across columns
Var broadcast_rows(Var x, std::size_t m);   // {n} -> {m,n}, copy across rows
Var broadcast_scalar(Var x, Shape target);  // {1} -> target shape
Var bias_add(Var x, Var bias);              // {m,n} + {n} per row

Var softmax_rows(Var x);  // max-subtracted, rows sum to 1

Var concat_cols(Var a, Var b);                              // {m,p} ++ {m,q} -> {m,p+q}
Var slice_cols(Var x, std::size_t start, std::size_t width);

// sqrt(sum of squares per row): {m,n} -> {m}. Composite of primitives, so it
// stays differentiable to any order.
Var l2_norm_rows(Var x);

}  // namespace ganova
