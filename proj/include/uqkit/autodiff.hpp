#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "uqkit/matrix.hpp"

// Reverse-mode automatic differentiation over matrix-valued nodes.
//
// Binary elementwise ops broadcast any operand dimension of size 1. Gradients
// flowing into a broadcast operand are summed over the broadcast axis.
//
// Subgradient conventions at non-differentiable points:
//   relu(0)     -> derivative 0
//   max_rows    -> all gradient goes to the first maximal column
namespace uqkit::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    /// Value of a 1x1 node.
    double scalar() const;

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

enum class Op {
    leaf,
    add,
    sub,
    mul,
    div,
    exp,
    log,
    tanh,
    relu,
    matmul,
    sum,
    sum_rows,
    max_rows,
    slice,
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf that receives a gradient.
    Var variable(Matrix value);
    /// Leaf treated as a constant.
    Var constant(Matrix value);
    Var constant(double value) { return constant(Matrix(1, 1, value)); }

    /// Seeds d(out)/d(out) = 1; `out` must be 1x1.
    void backward(Var out);
    /// Propagates an arbitrary cotangent `seed` (shape of `out`) back through the tape.
    void backward(Var out, const Matrix& seed);

    /// Gradient accumulated by the last backward call. Zero matrix for constants.
    const Matrix& grad(Var v) const;
    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    std::size_t size() const noexcept { return nodes_.size(); }

    Var push(Op op, Var a, Var b, Matrix value, std::size_t offset = 0,
             std::vector<std::size_t> index = {});

private:
    struct Node {
        Op op = Op::leaf;
        std::size_t a = 0;
        std::size_t b = 0;
        bool requires_grad = false;
        Matrix value;
        Matrix grad;
        std::size_t offset = 0;          // slice start
        std::vector<std::size_t> index;  // max_rows argmax per row
    };

    void propagate(const Node& node);
    Matrix& grad_of(std::size_t id);

    std::deque<Node> nodes_;  // deque keeps value references stable across push
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator+(Var a, double b);
Var operator-(Var a, double b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator-(double a, Var b);
Var operator-(Var a);

Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var relu(Var a);
Var matmul(Var a, Var b);
/// Sum of all entries, 1x1.
Var sum(Var a);
/// Per-row sums, n x 1.
Var sum_rows(Var a);
/// Per-row maxima, n x 1.
Var max_rows(Var a);
/// Contiguous run of `rows * cols` entries of `a` starting at `offset`, reshaped row-major.
Var slice(Var a, std::size_t offset, std::size_t rows, std::size_t cols);
Var mean(Var a);

struct ValueAndGrad {
    double value = 0.0;
    std::vector<double> grad;
};

/// f receives the tape and a 1 x P variable holding theta; it must return a 1x1 node.
using ScalarFunction = std::function<Var(Tape&, Var)>;

ValueAndGrad value_and_grad(const ScalarFunction& f, std::span<const double> theta);

} // namespace uqkit::ad
