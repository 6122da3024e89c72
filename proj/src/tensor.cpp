#include "aclite/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace aclite {

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

namespace {

std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

void require_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape) {
        throw DimensionError(std::string(op) + ": shapes " + shape_str(a->shape) + " and " +
                             shape_str(b->shape) + " differ");
    }
}

bool want_grad(const Tape& tape, const TensorPtr& a) { return tape.grad_enabled && a->requires_grad; }

TensorPtr make_output(std::vector<std::size_t> shape, bool needs_grad) {
    auto t = Tensor::zeros(std::move(shape));
    if (needs_grad) t->enable_grad();
    return t;
}

}  // namespace

void Tensor::enable_grad() {
    requires_grad = true;
    grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data.assign(numel(t->shape), 0.0);
    if (requires_grad) t->enable_grad();
    return t;
}

TensorPtr Tensor::scalar(double v) {
    auto t = zeros({1});
    t->data[0] = v;
    return t;
}

TensorPtr Tensor::from_vector(std::vector<double> v) {
    auto t = std::make_shared<Tensor>();
    t->shape = {v.size()};
    t->data = std::move(v);
    return t;
}

TensorPtr Tensor::from_matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    if (v.size() != rows * cols) {
        throw DimensionError("from_matrix: " + std::to_string(v.size()) + " values for " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    auto t = std::make_shared<Tensor>();
    t->shape = {rows, cols};
    t->data = std::move(v);
    return t;
}

void Tape::push(const char* /*name*/, std::uint64_t macs, std::function<void()> adjoint) {
    macs_ += macs;
    if (grad_enabled && adjoint) adjoints_.push_back(std::move(adjoint));
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) {
        throw NumericError("backward: loss must be scalar, got shape " + shape_str(loss->shape));
    }
    if (consumed_) {
        throw NumericError("backward: tape already consumed; reset before reusing");
    }
    if (!loss->requires_grad) {
        throw NumericError("backward: loss does not require grad (nothing was recorded)");
    }
    consumed_ = true;
    loss->grad[0] = 1.0;
    for (auto it = adjoints_.rbegin(); it != adjoints_.rend(); ++it) (*it)();
}

void Tape::reset() {
    adjoints_.clear();
    macs_ = 0;
    consumed_ = false;
}

namespace ops {

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0]) {
        throw DimensionError("matmul: " + shape_str(a->shape) + " x " + shape_str(b->shape));
    }
    const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    bool needs = want_grad(tape, a) || want_grad(tape, b);
    auto out = make_output({m, n}, needs);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a->data[i * k + p] * b->data[p * n + j];
            out->data[i * n + j] = acc;
        }
    std::function<void()> adj;
    if (needs) {
        adj = [a, b, out, m, k, n] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j)
                            acc += out->grad[i * n + j] * b->data[p * n + j];
                        a->grad[i * k + p] += acc;
                    }
            if (b->requires_grad)
                for (std::size_t p = 0; p < k; ++p)
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < m; ++i)
                            acc += a->data[i * k + p] * out->grad[i * n + j];
                        b->grad[p * n + j] += acc;
                    }
        };
    }
    tape.push("matmul", static_cast<std::uint64_t>(m) * k * n, std::move(adj));
    return out;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("add", a, b);
    bool needs = want_grad(tape, a) || want_grad(tape, b);
    auto out = make_output(a->shape, needs);
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] + b->data[i];
    std::function<void()> adj;
    if (needs) {
        adj = [a, b, out] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < out->size(); ++i) b->grad[i] += out->grad[i];
        };
    }
    tape.push("add", 0, std::move(adj));
    return out;
}

TensorPtr hadamard(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("hadamard", a, b);
    bool needs = want_grad(tape, a) || want_grad(tape, b);
    auto out = make_output(a->shape, needs);
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] * b->data[i];
    std::function<void()> adj;
    if (needs) {
        adj = [a, b, out] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i] * b->data[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < out->size(); ++i) b->grad[i] += out->grad[i] * a->data[i];
        };
    }
    tape.push("hadamard", out->size(), std::move(adj));
    return out;
}

TensorPtr mul_col_broadcast(Tape& tape, const TensorPtr& v, const TensorPtr& m) {
    const std::size_t d = v->size();
    if (m->shape.size() != 2 || m->shape[0] != d) {
        throw DimensionError("mul_col_broadcast: vector " + shape_str(v->shape) + " vs matrix " +
                             shape_str(m->shape));
    }
    const std::size_t n = m->shape[1];
    bool needs = want_grad(tape, v) || want_grad(tape, m);
    auto out = make_output(m->shape, needs);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < n; ++j) out->data[i * n + j] = v->data[i] * m->data[i * n + j];
    std::function<void()> adj;
    if (needs) {
        adj = [v, m, out, d, n] {
            if (v->requires_grad)
                for (std::size_t i = 0; i < d; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += out->grad[i * n + j] * m->data[i * n + j];
                    v->grad[i] += acc;
                }
            if (m->requires_grad)
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        m->grad[i * n + j] += out->grad[i * n + j] * v->data[i];
        };
    }
    tape.push("mul_col_broadcast", static_cast<std::uint64_t>(d) * n, std::move(adj));
    return out;
}

TensorPtr sigmoid(Tape& tape, const TensorPtr& x) {
    bool needs = want_grad(tape, x);
    auto out = make_output(x->shape, needs);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = 1.0 / (1.0 + std::exp(-x->data[i]));
    std::function<void()> adj;
    if (needs) {
        adj = [x, out] {
            for (std::size_t i = 0; i < x->size(); ++i) {
                const double s = out->data[i];
                x->grad[i] += out->grad[i] * s * (1.0 - s);
            }
        };
    }
    tape.push("sigmoid", 0, std::move(adj));
    return out;
}

TensorPtr tanh(Tape& tape, const TensorPtr& x) {
    bool needs = want_grad(tape, x);
    auto out = make_output(x->shape, needs);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = std::tanh(x->data[i]);
    std::function<void()> adj;
    if (needs) {
        adj = [x, out] {
            for (std::size_t i = 0; i < x->size(); ++i) {
                const double t = out->data[i];
                x->grad[i] += out->grad[i] * (1.0 - t * t);
            }
        };
    }
    tape.push("tanh", 0, std::move(adj));
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& x, double c) {
    bool needs = want_grad(tape, x);
    auto out = make_output(x->shape, needs);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] * c;
    std::function<void()> adj;
    if (needs) {
        adj = [x, out, c] {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i] * c;
        };
    }
    tape.push("scale", x->size(), std::move(adj));
    return out;
}

TensorPtr add_scalar(Tape& tape, const TensorPtr& x, double c) {
    bool needs = want_grad(tape, x);
    auto out = make_output(x->shape, needs);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] + c;
    std::function<void()> adj;
    if (needs) {
        adj = [x, out] {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i];
        };
    }
    tape.push("add_scalar", 0, std::move(adj));
    return out;
}

TensorPtr softmax(Tape& tape, const TensorPtr& x) {
    for (double v : x->data) {
        if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");
    }
    const std::size_t rows = x->shape.size() == 2 ? x->shape[0] : 1;
    const std::size_t n = x->shape.size() == 2 ? x->shape[1] : x->size();
    bool needs = want_grad(tape, x);
    auto out = make_output(x->shape, needs);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xd = x->data.data() + r * n;
        double* od = out->data.data() + r * n;
        double mx = xd[0];
        for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, xd[i]);
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            od[i] = std::exp(xd[i] - mx);
            z += od[i];
        }
        for (std::size_t i = 0; i < n; ++i) od[i] /= z;
    }
    std::function<void()> adj;
    if (needs) {
        adj = [x, out, rows, n] {
            for (std::size_t r = 0; r < rows; ++r) {
                const double* od = out->data.data() + r * n;
                const double* gd = out->grad.data() + r * n;
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += gd[i] * od[i];
                for (std::size_t i = 0; i < n; ++i) x->grad[r * n + i] += od[i] * (gd[i] - dot);
            }
        };
    }
    tape.push("softmax", 0, std::move(adj));
    return out;
}

TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts) {
    std::size_t total = 0;
    bool needs = false;
    for (const auto& p : parts) {
        total += p->size();
        needs = needs || want_grad(tape, p);
    }
    auto out = make_output({total}, needs);
    std::size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p->data.begin(), p->data.end(), out->data.begin() + off);
        off += p->size();
    }
    std::function<void()> adj;
    if (needs) {
        adj = [parts, out] {
            std::size_t off = 0;
            for (const auto& p : parts) {
                if (p->requires_grad)
                    for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += out->grad[off + i];
                off += p->size();
            }
        };
    }
    tape.push("concat", 0, std::move(adj));
    return out;
}

TensorPtr stack_rows(Tape& tape, const std::vector<TensorPtr>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows: empty input");
    const std::size_t n = rows[0]->size();
    bool needs = false;
    for (const auto& r : rows) {
        if (r->size() != n) throw DimensionError("stack_rows: ragged rows");
        needs = needs || want_grad(tape, r);
    }
    auto out = make_output({rows.size(), n}, needs);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r]->data.begin(), rows[r]->data.end(), out->data.begin() + r * n);
    std::function<void()> adj;
    if (needs) {
        adj = [rows, out, n] {
            for (std::size_t r = 0; r < rows.size(); ++r)
                if (rows[r]->requires_grad)
                    for (std::size_t i = 0; i < n; ++i) rows[r]->grad[i] += out->grad[r * n + i];
        };
    }
    tape.push("stack_rows", 0, std::move(adj));
    return out;
}

TensorPtr mean_over_columns(Tape& tape, const TensorPtr& m) {
    if (m->shape.size() != 2) throw DimensionError("mean_over_columns: need matrix, got " + shape_str(m->shape));
    const std::size_t d = m->shape[0], n = m->shape[1];
    bool needs = want_grad(tape, m);
    auto out = make_output({d}, needs);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += m->data[i * n + j];
        out->data[i] = acc / static_cast<double>(n);
    }
    std::function<void()> adj;
    if (needs) {
        adj = [m, out, d, n] {
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < n; ++j) m->grad[i * n + j] += out->grad[i] * inv;
        };
    }
    tape.push("mean_over_columns", d, std::move(adj));
    return out;
}

TensorPtr gather_row(Tape& tape, const TensorPtr& table, std::size_t row) {
    if (table->shape.size() != 2 || row >= table->shape[0]) {
        throw VocabularyError("gather_row: row " + std::to_string(row) + " out of " +
                              shape_str(table->shape));
    }
    const std::size_t n = table->shape[1];
    bool needs = want_grad(tape, table);
    auto out = make_output({n}, needs);
    std::copy(table->data.begin() + row * n, table->data.begin() + (row + 1) * n, out->data.begin());
    std::function<void()> adj;
    if (needs) {
        adj = [table, out, row, n] {
            for (std::size_t i = 0; i < n; ++i) table->grad[row * n + i] += out->grad[i];
        };
    }
    tape.push("gather_row", 0, std::move(adj));
    return out;
}

TensorPtr sum(Tape& tape, const TensorPtr& x) {
    bool needs = want_grad(tape, x);
    auto out = make_output({1}, needs);
    double acc = 0.0;
    for (double v : x->data) acc += v;
    out->data[0] = acc;
    std::function<void()> adj;
    if (needs) {
        adj = [x, out] {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[0];
        };
    }
    tape.push("sum", 0, std::move(adj));
    return out;
}

TensorPtr reshape(Tape& tape, const TensorPtr& x, std::vector<std::size_t> shape) {
    if (numel(shape) != x->size()) {
        throw DimensionError("reshape: " + shape_str(x->shape) + " to " + shape_str(shape));
    }
    bool needs = want_grad(tape, x);
    auto out = make_output(std::move(shape), needs);
    out->data = x->data;
    std::function<void()> adj;
    if (needs) {
        adj = [x, out] {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i];
        };
    }
    tape.push("reshape", 0, std::move(adj));
    return out;
}

TensorPtr cross_entropy(Tape& tape, const TensorPtr& logits, const std::vector<int>& targets,
                        const std::vector<std::uint8_t>& mask) {
    if (logits->shape.size() != 2) throw DimensionError("cross_entropy: logits must be T x |V|");
    const std::size_t T = logits->shape[0], V = logits->shape[1];
    if (targets.size() != T || mask.size() != T) {
        throw DimensionError("cross_entropy: " + std::to_string(T) + " rows vs " +
                             std::to_string(targets.size()) + " targets, " +
                             std::to_string(mask.size()) + " mask entries");
    }
    std::size_t count = 0;
    for (std::size_t t = 0; t < T; ++t) {
        if (!mask[t]) continue;
        if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= V)
            throw VocabularyError("cross_entropy: target id " + std::to_string(targets[t]) +
                                  " outside vocabulary of size " + std::to_string(V));
        ++count;
    }
    if (count == 0) throw NumericError("cross_entropy: all positions masked");

    bool needs = want_grad(tape, logits);
    auto out = make_output({1}, needs);
    // store per-row softmax for the adjoint
    auto probs = std::make_shared<std::vector<double>>(T * V, 0.0);
    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (!mask[t]) continue;
        const double* row = logits->data.data() + t * V;
        double mx = row[0];
        for (std::size_t j = 1; j < V; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < V; ++j) z += std::exp(row[j] - mx);
        const double lse = mx + std::log(z);
        loss += lse - row[static_cast<std::size_t>(targets[t])];
        for (std::size_t j = 0; j < V; ++j) (*probs)[t * V + j] = std::exp(row[j] - lse);
    }
    out->data[0] = loss / static_cast<double>(count);
    std::function<void()> adj;
    if (needs) {
        auto tgt = targets;
        auto msk = mask;
        adj = [logits, out, probs, tgt, msk, T, V, count] {
            const double g = out->grad[0] / static_cast<double>(count);
            for (std::size_t t = 0; t < T; ++t) {
                if (!msk[t]) continue;
                for (std::size_t j = 0; j < V; ++j)
                    logits->grad[t * V + j] += g * (*probs)[t * V + j];
                logits->grad[t * V + static_cast<std::size_t>(tgt[t])] -= g;
            }
        };
    }
    tape.push("cross_entropy", 0, std::move(adj));
    return out;
}

TensorPtr conv2d(Tape& tape, const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias,
                 std::size_t stride, std::size_t pad) {
    if (input->shape.size() != 3 || weight->shape.size() != 4 || input->shape[0] != weight->shape[1]) {
        throw DimensionError("conv2d: input " + shape_str(input->shape) + " weight " +
                             shape_str(weight->shape));
    }
    const std::size_t C = input->shape[0], H = input->shape[1], W = input->shape[2];
    const std::size_t OC = weight->shape[0], KH = weight->shape[2], KW = weight->shape[3];
    if (bias && bias->size() != OC) throw DimensionError("conv2d: bias size mismatch");
    if (H + 2 * pad < KH || W + 2 * pad < KW) throw DimensionError("conv2d: kernel larger than padded input");
    const std::size_t OH = (H + 2 * pad - KH) / stride + 1;
    const std::size_t OW = (W + 2 * pad - KW) / stride + 1;

    bool needs = want_grad(tape, input) || want_grad(tape, weight) || (bias && want_grad(tape, bias));
    auto out = make_output({OC, OH, OW}, needs);
    auto in_at = [&](std::size_t c, long long y, long long x) -> double {
        if (y < 0 || x < 0 || y >= static_cast<long long>(H) || x >= static_cast<long long>(W)) return 0.0;
        return input->data[(c * H + static_cast<std::size_t>(y)) * W + static_cast<std::size_t>(x)];
    };
    for (std::size_t oc = 0; oc < OC; ++oc)
        for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox) {
                double acc = bias ? bias->data[oc] : 0.0;
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t ky = 0; ky < KH; ++ky)
                        for (std::size_t kx = 0; kx < KW; ++kx) {
                            const long long y = static_cast<long long>(oy * stride + ky) - static_cast<long long>(pad);
                            const long long x = static_cast<long long>(ox * stride + kx) - static_cast<long long>(pad);
                            acc += in_at(c, y, x) * weight->data[((oc * C + c) * KH + ky) * KW + kx];
                        }
                out->data[(oc * OH + oy) * OW + ox] = acc;
            }
    std::function<void()> adj;
    if (needs) {
        adj = [input, weight, bias, out, C, H, W, OC, KH, KW, OH, OW, stride, pad] {
            for (std::size_t oc = 0; oc < OC; ++oc)
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        const double g = out->grad[(oc * OH + oy) * OW + ox];
                        if (g == 0.0) continue;
                        if (bias && bias->requires_grad) bias->grad[oc] += g;
                        for (std::size_t c = 0; c < C; ++c)
                            for (std::size_t ky = 0; ky < KH; ++ky)
                                for (std::size_t kx = 0; kx < KW; ++kx) {
                                    const long long y = static_cast<long long>(oy * stride + ky) -
                                                        static_cast<long long>(pad);
                                    const long long x = static_cast<long long>(ox * stride + kx) -
                                                        static_cast<long long>(pad);
                                    if (y < 0 || x < 0 || y >= static_cast<long long>(H) ||
                                        x >= static_cast<long long>(W))
                                        continue;
                                    const std::size_t iidx =
                                        (c * H + static_cast<std::size_t>(y)) * W + static_cast<std::size_t>(x);
                                    const std::size_t widx = ((oc * C + c) * KH + ky) * KW + kx;
                                    if (weight->requires_grad) weight->grad[widx] += g * input->data[iidx];
                                    if (input->requires_grad) input->grad[iidx] += g * weight->data[widx];
                                }
                    }
        };
    }
    tape.push("conv2d", static_cast<std::uint64_t>(OC) * OH * OW * C * KH * KW, std::move(adj));
    return out;
}

}  // namespace ops

TensorPtr ParamStore::add(const std::string& name, TensorPtr t) {
    if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
    t->enable_grad();
    items_.emplace_back(name, t);
    return t;
}

TensorPtr ParamStore::get(const std::string& name) const {
    for (const auto& [n, t] : items_)
        if (n == name) return t;
    throw ConfigError("unknown parameter: " + name);
}

bool ParamStore::contains(const std::string& name) const {
    for (const auto& [n, t] : items_)
        if (n == name) return true;
    return false;
}

std::size_t ParamStore::total_scalars() const {
    std::size_t total = 0;
    for (const auto& [n, t] : items_) total += t->size();
    return total;
}

void ParamStore::zero_grads() {
    for (auto& [n, t] : items_) t->zero_grad();
}

AdamState::Moments& AdamState::moments_for(const std::string& name, std::size_t size) {
    for (auto& [n, m] : moments)
        if (n == name) return m;
    moments.emplace_back(name, Moments{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)});
    return moments.back().second;
}

void adam_step(ParamStore& params, AdamState& state) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& [name, p] : params.items()) {
        if (!p->requires_grad || p->grad.size() != p->data.size())
            throw OptimizerError("parameter without gradient: " + name);
        auto& mom = state.moments_for(name, p->size());
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double g = p->grad[i];
            mom.m[i] = state.beta1 * mom.m[i] + (1.0 - state.beta1) * g;
            mom.v[i] = state.beta2 * mom.v[i] + (1.0 - state.beta2) * g * g;
            const double mhat = mom.m[i] / bc1;
            const double vhat = mom.v[i] / bc2;
            p->data[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
        p->zero_grad();
    }
}

void init_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data) v = dist(rng);
}

}  // namespace aclite
