#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "aclite/errors.hpp"

namespace aclite {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Dense row-major 64-bit tensor with an optional gradient buffer.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // same length as data when requires_grad
    bool requires_grad = false;

    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    void enable_grad();
    void zero_grad();

    static TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr scalar(double v);
    static TensorPtr from_vector(std::vector<double> v);
    static TensorPtr from_matrix(std::size_t rows, std::size_t cols, std::vector<double> v);
};

std::string shape_str(const std::vector<std::size_t>& shape);

/// Records primitive operations in execution order. Backward replays the
/// adjoints in reverse registration order, which keeps gradient accumulation
/// order fixed and therefore bit-reproducible. Also keeps a running
/// multiply-accumulate count for the complexity analyzer.
class Tape {
public:
    bool grad_enabled = true;

    void push(const char* name, std::uint64_t macs, std::function<void()> adjoint);
    void backward(const TensorPtr& loss);
    void reset();

    std::uint64_t total_macs() const { return macs_; }
    std::size_t num_ops() const { return adjoints_.size(); }

private:
    std::vector<std::function<void()>> adjoints_;
    std::uint64_t macs_ = 0;
    bool consumed_ = false;
};

namespace ops {

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr hadamard(Tape& tape, const TensorPtr& a, const TensorPtr& b);
/// v is d-vector, m is d x n; multiplies v into every column of m.
TensorPtr mul_col_broadcast(Tape& tape, const TensorPtr& v, const TensorPtr& m);
TensorPtr sigmoid(Tape& tape, const TensorPtr& x);
TensorPtr tanh(Tape& tape, const TensorPtr& x);
TensorPtr scale(Tape& tape, const TensorPtr& x, double c);
TensorPtr add_scalar(Tape& tape, const TensorPtr& x, double c);
/// Softmax along the last axis (1-D vector, or per row of a 2-D matrix).
TensorPtr softmax(Tape& tape, const TensorPtr& x);
TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts);
TensorPtr stack_rows(Tape& tape, const std::vector<TensorPtr>& rows);
TensorPtr mean_over_columns(Tape& tape, const TensorPtr& m);
TensorPtr gather_row(Tape& tape, const TensorPtr& table, std::size_t row);
TensorPtr sum(Tape& tape, const TensorPtr& x);
TensorPtr reshape(Tape& tape, const TensorPtr& x, std::vector<std::size_t> shape);
/// Mean negative log-likelihood of targets under logits (T x |V|), restricted
/// to positions where mask is nonzero.
TensorPtr cross_entropy(Tape& tape, const TensorPtr& logits, const std::vector<int>& targets,
                        const std::vector<std::uint8_t>& mask);
/// 2-D convolution over a C x H x W input with OC x C x KH x KW weights.
TensorPtr conv2d(Tape& tape, const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias,
                 std::size_t stride, std::size_t pad);

}  // namespace ops

/// Ordered named parameter collection. Iteration order is insertion order;
/// every routine that walks the store does so in that fixed order.
class ParamStore {
public:
    TensorPtr add(const std::string& name, TensorPtr t);
    TensorPtr get(const std::string& name) const;
    bool contains(const std::string& name) const;

    const std::vector<std::pair<std::string, TensorPtr>>& items() const { return items_; }
    std::size_t total_scalars() const;
    void zero_grads();

private:
    std::vector<std::pair<std::string, TensorPtr>> items_;
};

struct AdamState {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;

    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    std::vector<std::pair<std::string, Moments>> moments;

    Moments& moments_for(const std::string& name, std::size_t size);
};

/// One Adam update with bias correction over every parameter in the store;
/// zeroes all gradients afterwards.
void adam_step(ParamStore& params, AdamState& state);

/// Seeded Glorot-style uniform init in +-sqrt(6/(fan_in+fan_out)).
void init_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

}  // namespace aclite
