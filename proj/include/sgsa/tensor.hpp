#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "sgsa/errors.hpp"

namespace sgsa {

class Tape;

namespace detail {

struct TensorNode {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // same length as value once allocated
    bool requires_grad = false;
    Tape* tape = nullptr;

    std::size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

// Boolean matrix used to mask attention scores. allowed[r*cols + c] != 0
// means entry (r, c) participates.
struct Mask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> allowed;

    bool at(int r, int c) const { return allowed[static_cast<std::size_t>(r) * cols + c] != 0; }
};

// Dense row-major matrix of doubles. Copying a Tensor copies the handle,
// not the storage; two copies see the same values and gradient.
class Tensor {
public:
    Tensor() : node_(std::make_shared<detail::TensorNode>()) {}
    Tensor(int rows, int cols);
    Tensor(int rows, int cols, std::vector<double> values);
    Tensor(std::initializer_list<std::initializer_list<double>> rows);

    // Gradient-tracked leaf recorded on `tape`.
    static Tensor leaf(Tape& tape, int rows, int cols, std::vector<double> values);
    static Tensor identity(int n);
    static Tensor filled(int rows, int cols, double v);

    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    std::size_t size() const { return node_->size(); }
    bool is_scalar() const { return node_->rows == 1 && node_->cols == 1; }
    double scalar_value() const;

    double operator()(int r, int c) const { return node_->value[static_cast<std::size_t>(r) * cols() + c]; }
    double& operator()(int r, int c) { return node_->value[static_cast<std::size_t>(r) * cols() + c]; }

    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& mutable_values() { return node_->value; }
    const std::vector<double>& grad() const;
    std::vector<double>& mutable_grad();
    double grad_at(int r, int c) const;

    bool requires_grad() const { return node_->requires_grad; }
    Tape* tape() const { return node_->tape; }
    void zero_grad();

    bool all_finite() const;
    std::string shape_str() const;

    // Deep copy of values into a fresh untracked constant.
    Tensor detached_copy() const;

    detail::TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<detail::TensorNode>& node_ptr() const { return node_; }

private:
    std::shared_ptr<detail::TensorNode> node_;
};

// Reverse-mode tape: ops append a backward closure as they execute, so the
// record order is already topological. One backward() walk accumulates
// gradients for every tracked leaf reachable from the loss.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(std::function<void()> backward_step) { steps_.push_back(std::move(backward_step)); }

    // Seeds d(loss)/d(loss) = 1 and runs every recorded step in reverse.
    void backward(const Tensor& loss);

    // Drops recorded steps (and with them the intermediate nodes they keep
    // alive). Leaves held elsewhere survive.
    void reset() { steps_.clear(); }
    std::size_t size() const { return steps_.size(); }

    bool recording() const { return recording_; }

    // Pauses recording for inference; restores on destruction.
    class NoGrad {
    public:
        explicit NoGrad(Tape& tape) : tape_(tape), prev_(tape.recording_) { tape_.recording_ = false; }
        ~NoGrad() { tape_.recording_ = prev_; }
        NoGrad(const NoGrad&) = delete;
        NoGrad& operator=(const NoGrad&) = delete;

    private:
        Tape& tape_;
        bool prev_;
    };

private:
    std::vector<std::function<void()>> steps_;
    bool recording_ = true;
};

// ---- differentiable ops ----------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_row_vector(const Tensor& a, const Tensor& row);  // [m x n] + [1 x n]
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
Tensor masked_fill(const Tensor& x, const Mask& mask, double fill);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int begin, int end);  // rows [begin, end)
Tensor sum_all(const Tensor& a);                         // -> 1x1
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
// Mean over rows of -log softmax(logits)[target]; stable log-sum-exp.
Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& targets);

// y = x * w + bias (bias broadcast over rows)
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

// ---- gradient verification -------------------------------------------------

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued f. f receives untracked copies for the difference
// probes, so anything it captures must be constant.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x0, double step);

}  // namespace sgsa
