#include "uqkit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/kernels.hpp"

namespace uqkit::ad {

namespace {

std::size_t broadcast_dim(std::size_t a, std::size_t b, const char* op) {
    if (a == b || b == 1) {
        return a;
    }
    if (a == 1) {
        return b;
    }
    throw InvalidInput(std::string(op) + ": shapes cannot be broadcast");
}

inline double at(const Matrix& m, std::size_t r, std::size_t c) {
    return m(m.rows() == 1 ? 0 : r, m.cols() == 1 ? 0 : c);
}

// Adds `g` (full output shape) into `target`, summing over broadcast axes.
inline void accumulate(Matrix& target, std::size_t r, std::size_t c, double g) {
    target(target.rows() == 1 ? 0 : r, target.cols() == 1 ? 0 : c) += g;
}

Tape& same_tape(Var a, Var b) {
    if (a.tape() == nullptr || a.tape() != b.tape()) {
        throw InvalidInput("autodiff operands belong to different tapes");
    }
    return *a.tape();
}

template <class F>
Var binary(Op op, Var a, Var b, const char* name, F f) {
    Tape& tape = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    const std::size_t rows = broadcast_dim(av.rows(), bv.rows(), name);
    const std::size_t cols = broadcast_dim(av.cols(), bv.cols(), name);
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out(r, c) = f(at(av, r, c), at(bv, r, c));
        }
    }
    return tape.push(op, a, b, std::move(out));
}

template <class F>
Var unary(Op op, Var a, F f) {
    Matrix out = a.value();
    for (double& v : out.flat()) {
        v = f(v);
    }
    return a.tape()->push(op, a, a, std::move(out));
}

} // namespace

const Matrix& Var::value() const {
    if (tape_ == nullptr) {
        throw InvalidInput("autodiff variable is not attached to a tape");
    }
    return tape_->value(id_);
}

double Var::scalar() const {
    const Matrix& v = value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw InvalidInput("scalar() on a non-1x1 node");
    }
    return v(0, 0);
}

Var Tape::variable(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::push(Op op, Var a, Var b, Matrix value, std::size_t offset, std::vector<std::size_t> index) {
    Node n;
    n.op = op;
    n.a = a.id();
    n.b = b.id();
    n.requires_grad = nodes_[n.a].requires_grad || nodes_[n.b].requires_grad;
    n.value = std::move(value);
    n.offset = offset;
    n.index = std::move(index);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Matrix& Tape::grad_of(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
        n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

const Matrix& Tape::grad(Var v) const {
    return nodes_[v.id()].grad;
}

void Tape::backward(Var out) {
    const Matrix& v = out.value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw InvalidInput("backward(out) needs a 1x1 output; pass a seed otherwise");
    }
    backward(out, Matrix(1, 1, 1.0));
}

void Tape::backward(Var out, const Matrix& seed) {
    const Matrix& v = out.value();
    if (seed.rows() != v.rows() || seed.cols() != v.cols()) {
        throw InvalidInput("backward seed shape differs from output shape");
    }
    for (auto& n : nodes_) {
        n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    nodes_[out.id()].grad = seed;
    // Inputs always precede their consumers, so a reverse sweep is topological.
    for (std::size_t i = out.id() + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        if (n.op != Op::leaf && n.requires_grad) {
            propagate(n);
        }
    }
}

void Tape::propagate(const Node& node) {
    const Matrix& g = node.grad;
    const bool need_a = nodes_[node.a].requires_grad;
    const bool need_b = nodes_[node.b].requires_grad;
    const Matrix& av = nodes_[node.a].value;
    const Matrix& bv = nodes_[node.b].value;

    switch (node.op) {
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
        Matrix* ga = need_a ? &grad_of(node.a) : nullptr;
        Matrix* gb = need_b ? &grad_of(node.b) : nullptr;
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) {
                const double gv = g(r, c);
                const double x = at(av, r, c);
                const double y = at(bv, r, c);
                double da = 0.0;
                double db = 0.0;
                switch (node.op) {
                case Op::add: da = gv; db = gv; break;
                case Op::sub: da = gv; db = -gv; break;
                case Op::mul: da = gv * y; db = gv * x; break;
                default: da = gv / y; db = -gv * x / (y * y); break;
                }
                if (ga) accumulate(*ga, r, c, da);
                if (gb) accumulate(*gb, r, c, db);
            }
        }
        break;
    }
    case Op::exp: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.flat()[i] += g.flat()[i] * node.value.flat()[i];
        break;
    }
    case Op::log: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.flat()[i] += g.flat()[i] / av.flat()[i];
        break;
    }
    case Op::tanh: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = node.value.flat()[i];
            ga.flat()[i] += g.flat()[i] * (1.0 - t * t);
        }
        break;
    }
    case Op::relu: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (av.flat()[i] > 0.0) ga.flat()[i] += g.flat()[i];
        }
        break;
    }
    case Op::matmul: {
        if (need_a) {
            const Matrix d = kernels::parallel::gemm_nt(g, bv);
            Matrix& ga = grad_of(node.a);
            for (std::size_t i = 0; i < d.size(); ++i) ga.flat()[i] += d.flat()[i];
        }
        if (need_b) {
            const Matrix d = kernels::parallel::gemm_tn(av, g);
            Matrix& gb = grad_of(node.b);
            for (std::size_t i = 0; i < d.size(); ++i) gb.flat()[i] += d.flat()[i];
        }
        break;
    }
    case Op::sum: {
        Matrix& ga = grad_of(node.a);
        for (double& v : ga.flat()) v += g(0, 0);
        break;
    }
    case Op::sum_rows: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t r = 0; r < ga.rows(); ++r) {
            for (double& v : ga.row(r)) v += g(r, 0);
        }
        break;
    }
    case Op::max_rows: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t r = 0; r < ga.rows(); ++r) ga(r, node.index[r]) += g(r, 0);
        break;
    }
    case Op::slice: {
        Matrix& ga = grad_of(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.flat()[node.offset + i] += g.flat()[i];
        break;
    }
    case Op::leaf:
        break;
    }
}

Var operator+(Var a, Var b) { return binary(Op::add, a, b, "add", [](double x, double y) { return x + y; }); }
Var operator-(Var a, Var b) { return binary(Op::sub, a, b, "sub", [](double x, double y) { return x - y; }); }
Var operator*(Var a, Var b) { return binary(Op::mul, a, b, "mul", [](double x, double y) { return x * y; }); }
Var operator/(Var a, Var b) { return binary(Op::div, a, b, "div", [](double x, double y) { return x / y; }); }
Var operator+(Var a, double b) { return a + a.tape()->constant(b); }
Var operator-(Var a, double b) { return a - a.tape()->constant(b); }
Var operator*(Var a, double b) { return a * a.tape()->constant(b); }
Var operator*(double a, Var b) { return b.tape()->constant(a) * b; }
Var operator/(Var a, double b) { return a / a.tape()->constant(b); }
Var operator-(double a, Var b) { return b.tape()->constant(a) - b; }
Var operator-(Var a) { return a.tape()->constant(0.0) - a; }

Var exp(Var a) { return unary(Op::exp, a, [](double x) { return std::exp(x); }); }
Var log(Var a) { return unary(Op::log, a, [](double x) { return std::log(x); }); }
Var tanh(Var a) { return unary(Op::tanh, a, [](double x) { return std::tanh(x); }); }
Var relu(Var a) { return unary(Op::relu, a, [](double x) { return x > 0.0 ? x : 0.0; }); }

Var matmul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    Matrix out = kernels::parallel::gemm(a.value(), b.value());
    return tape.push(Op::matmul, a, b, std::move(out));
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().flat()) s += v;
    return a.tape()->push(Op::sum, a, a, Matrix(1, 1, s));
}

Var sum_rows(Var a) {
    const Matrix& av = a.value();
    Matrix out(av.rows(), 1);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        double s = 0.0;
        for (double v : av.row(r)) s += v;
        out(r, 0) = s;
    }
    return a.tape()->push(Op::sum_rows, a, a, std::move(out));
}

Var max_rows(Var a) {
    const Matrix& av = a.value();
    if (av.cols() == 0) {
        throw InvalidInput("max_rows of a matrix without columns");
    }
    Matrix out(av.rows(), 1);
    std::vector<std::size_t> index(av.rows());
    for (std::size_t r = 0; r < av.rows(); ++r) {
        const auto row = av.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        index[r] = best;
        out(r, 0) = row[best];
    }
    return a.tape()->push(Op::max_rows, a, a, std::move(out), 0, std::move(index));
}

Var slice(Var a, std::size_t offset, std::size_t rows, std::size_t cols) {
    const Matrix& av = a.value();
    if (offset + rows * cols > av.size()) {
        throw InvalidInput("slice exceeds source size");
    }
    const auto src = av.flat().subspan(offset, rows * cols);
    Matrix out(rows, cols, std::vector<double>(src.begin(), src.end()));
    return a.tape()->push(Op::slice, a, a, std::move(out), offset);
}

Var mean(Var a) {
    return sum(a) / static_cast<double>(a.value().size());
}

ValueAndGrad value_and_grad(const ScalarFunction& f, std::span<const double> theta) {
    for (double v : theta) {
        if (!std::isfinite(v)) {
            throw InvalidInput("value_and_grad: parameters must be finite");
        }
    }
    Tape tape;
    Var x = tape.variable(Matrix::row_vector(theta));
    Var y = f(tape, x);
    tape.backward(y);
    const Matrix& g = tape.grad(x);
    return {y.scalar(), g.data()};
}

} // namespace uqkit::ad
