#include "sgsa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace sgsa {

namespace {

std::string shape_of(int r, int c) {
    std::ostringstream os;
    os << "[" << r << "x" << c << "]";
    return os.str();
}

struct OpCtx {
    Tape* tape = nullptr;
    bool track = false;
};

// Finds the tape shared by the operands and decides whether this op is
// recorded. Tracked inputs on two different tapes is a caller bug.
OpCtx op_ctx(std::initializer_list<const Tensor*> ins) {
    OpCtx ctx;
    bool any_grad = false;
    Tape* tape = nullptr;
    for (const Tensor* t : ins) {
        if (t->requires_grad()) any_grad = true;
        if (t->tape() != nullptr) {
            if (tape != nullptr && tape != t->tape())
                throw ContractError("operands recorded on different tapes");
            tape = t->tape();
        }
    }
    if (any_grad && tape != nullptr && tape->recording()) {
        ctx.tape = tape;
        ctx.track = true;
    }
    return ctx;
}

void mark_tracked(Tensor& out, const OpCtx& ctx, std::initializer_list<const Tensor*> ins) {
    out.node()->requires_grad = true;
    out.node()->tape = ctx.tape;
    out.node()->ensure_grad();
    for (const Tensor* t : ins)
        if (t->requires_grad()) t->node()->ensure_grad();
}

}  // namespace

Tensor::Tensor(int rows, int cols) : node_(std::make_shared<detail::TensorNode>()) {
    if (rows < 0 || cols < 0) throw DimensionError("negative tensor dimension");
    node_->rows = rows;
    node_->cols = cols;
    node_->value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor::Tensor(int rows, int cols, std::vector<double> values) : node_(std::make_shared<detail::TensorNode>()) {
    if (values.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionError("value count " + std::to_string(values.size()) + " does not fill " + shape_of(rows, cols));
    node_->rows = rows;
    node_->cols = cols;
    node_->value = std::move(values);
}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows)
    : node_(std::make_shared<detail::TensorNode>()) {
    node_->rows = static_cast<int>(rows.size());
    node_->cols = rows.size() ? static_cast<int>(rows.begin()->size()) : 0;
    node_->value.reserve(static_cast<std::size_t>(node_->rows) * node_->cols);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != node_->cols) throw DimensionError("ragged initializer rows");
        node_->value.insert(node_->value.end(), r.begin(), r.end());
    }
}

Tensor Tensor::leaf(Tape& tape, int rows, int cols, std::vector<double> values) {
    Tensor t(rows, cols, std::move(values));
    t.node_->requires_grad = true;
    t.node_->tape = &tape;
    t.node_->ensure_grad();
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::filled(int rows, int cols, double v) {
    Tensor t(rows, cols);
    std::fill(t.node_->value.begin(), t.node_->value.end(), v);
    return t;
}

double Tensor::scalar_value() const {
    if (!is_scalar()) throw ContractError("expected scalar tensor, got " + shape_str());
    return node_->value[0];
}

const std::vector<double>& Tensor::grad() const {
    if (node_->grad.size() != node_->value.size())
        throw ContractError("gradient not populated for this tensor");
    return node_->grad;
}

std::vector<double>& Tensor::mutable_grad() {
    if (node_->grad.size() != node_->value.size())
        throw ContractError("gradient not populated for this tensor");
    return node_->grad;
}

double Tensor::grad_at(int r, int c) const { return grad()[static_cast<std::size_t>(r) * cols() + c]; }

void Tensor::zero_grad() {
    node_->grad.assign(node_->value.size(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : node_->value)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const { return shape_of(rows(), cols()); }

Tensor Tensor::detached_copy() const {
    return Tensor(rows(), cols(), node_->value);
}

void Tape::backward(const Tensor& loss) {
    if (!loss.is_scalar()) throw ContractError("backward requires a scalar loss, got " + loss.shape_str());
    if (!loss.requires_grad() || loss.tape() != this)
        throw ContractError("loss is not recorded on this tape");
    loss.node()->ensure_grad();
    loss.node()->grad[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

// ---- ops --------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree: " + a.shape_str() + " vs " + b.shape_str());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out(m, n);
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.mutable_values();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += av[i * k + p] * bv[p * n + j];
            ov[i * n + j] = acc;
        }
    OpCtx ctx = op_ctx({&a, &b});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a, &b});
        auto an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, bn, on, m, k, n] {
            const auto& og = on->grad;
            if (an->requires_grad) {
                auto& ag = an->grad;
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j) acc += og[i * n + j] * bn->value[p * n + j];
                        ag[i * k + p] += acc;
                    }
            }
            if (bn->requires_grad) {
                auto& bg = bn->grad;
                for (int p = 0; p < k; ++p)
                    for (int j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i) acc += an->value[i * k + p] * og[i * n + j];
                        bg[p * n + j] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    Tensor out(n, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out(j, i) = a(i, j);
    OpCtx ctx = op_ctx({&a});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a});
        auto an = a.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, on, m, n] {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) an->grad[i * n + j] += on->grad[j * m + i];
        });
    }
    return out;
}

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(op) + ": shapes disagree: " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    Tensor out(a.rows(), a.cols());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.mutable_values()[i] = a.values()[i] + b.values()[i];
    OpCtx ctx = op_ctx({&a, &b});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a, &b});
        auto an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, bn, on, n] {
            for (std::size_t i = 0; i < n; ++i) {
                if (an->requires_grad) an->grad[i] += on->grad[i];
                if (bn->requires_grad) bn->grad[i] += on->grad[i];
            }
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    Tensor out(a.rows(), a.cols());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.mutable_values()[i] = a.values()[i] - b.values()[i];
    OpCtx ctx = op_ctx({&a, &b});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a, &b});
        auto an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, bn, on, n] {
            for (std::size_t i = 0; i < n; ++i) {
                if (an->requires_grad) an->grad[i] += on->grad[i];
                if (bn->requires_grad) bn->grad[i] -= on->grad[i];
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    Tensor out(a.rows(), a.cols());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.mutable_values()[i] = a.values()[i] * b.values()[i];
    OpCtx ctx = op_ctx({&a, &b});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a, &b});
        auto an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, bn, on, n] {
            for (std::size_t i = 0; i < n; ++i) {
                if (an->requires_grad) an->grad[i] += bn->value[i] * on->grad[i];
                if (bn->requires_grad) bn->grad[i] += an->value[i] * on->grad[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.rows(), a.cols());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.mutable_values()[i] = a.values()[i] * s;
    OpCtx ctx = op_ctx({&a});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a});
        auto an = a.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, on, n, s] {
            for (std::size_t i = 0; i < n; ++i) an->grad[i] += s * on->grad[i];
        });
    }
    return out;
}

Tensor add_row_vector(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols())
        throw DimensionError("add_row_vector: " + a.shape_str() + " vs " + row.shape_str());
    const int m = a.rows(), n = a.cols();
    Tensor out(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = a(i, j) + row(0, j);
    OpCtx ctx = op_ctx({&a, &row});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a, &row});
        auto an = a.node_ptr(), rn = row.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, rn, on, m, n] {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    if (an->requires_grad) an->grad[i * n + j] += on->grad[i * n + j];
                    if (rn->requires_grad) rn->grad[j] += on->grad[i * n + j];
                }
        });
    }
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out(a.rows(), a.cols());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.mutable_values()[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
    OpCtx ctx = op_ctx({&a});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a});
        auto an = a.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, on, n] {
            for (std::size_t i = 0; i < n; ++i)
                if (an->value[i] > 0.0) an->grad[i] += on->grad[i];
        });
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    const int m = x.rows(), n = x.cols();
    if (n < 1) throw DimensionError("softmax_rows: empty rows in " + x.shape_str());
    Tensor out(m, n);
    for (int i = 0; i < m; ++i) {
        double mx = x(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, x(i, j));
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(x(i, j) - mx);
            out(i, j) = e;
            denom += e;
        }
        for (int j = 0; j < n; ++j) out(i, j) /= denom;
    }
    OpCtx ctx = op_ctx({&x});
    if (ctx.track) {
        mark_tracked(out, ctx, {&x});
        auto xn = x.node_ptr(), on = out.node_ptr();
        ctx.tape->record([xn, on, m, n] {
            for (int i = 0; i < m; ++i) {
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += on->grad[i * n + j] * on->value[i * n + j];
                for (int j = 0; j < n; ++j)
                    xn->grad[i * n + j] += on->value[i * n + j] * (on->grad[i * n + j] - dot);
            }
        });
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const int m = x.rows(), n = x.cols();
    if (n < 1) throw DimensionError("layer_norm: empty rows in " + x.shape_str());
    if (eps <= 0.0) throw ContractError("layer_norm: eps must be positive");
    if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n)
        throw DimensionError("layer_norm: gain/bias " + gain.shape_str() + "/" + bias.shape_str() +
                             " do not match row width of " + x.shape_str());
    Tensor out(m, n);
    std::vector<double> inv_sigma(m), xhat(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += x(i, j);
        mean /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = x(i, j) - mean;
            var += d * d;
        }
        var /= n;
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[i] = is;
        for (int j = 0; j < n; ++j) {
            const double h = (x(i, j) - mean) * is;
            xhat[static_cast<std::size_t>(i) * n + j] = h;
            out(i, j) = h * gain(0, j) + bias(0, j);
        }
    }
    OpCtx ctx = op_ctx({&x, &gain, &bias});
    if (ctx.track) {
        mark_tracked(out, ctx, {&x, &gain, &bias});
        auto xn = x.node_ptr(), gn = gain.node_ptr(), bn = bias.node_ptr(), on = out.node_ptr();
        ctx.tape->record([xn, gn, bn, on, m, n, inv_sigma, xhat] {
            for (int i = 0; i < m; ++i) {
                double sum_g = 0.0, sum_gh = 0.0;
                for (int j = 0; j < n; ++j) {
                    const std::size_t k = static_cast<std::size_t>(i) * n + j;
                    const double g = on->grad[k] * gn->value[j];
                    sum_g += g;
                    sum_gh += g * xhat[k];
                    if (gn->requires_grad) gn->grad[j] += on->grad[k] * xhat[k];
                    if (bn->requires_grad) bn->grad[j] += on->grad[k];
                }
                if (xn->requires_grad) {
                    const double mg = sum_g / n, mgh = sum_gh / n;
                    for (int j = 0; j < n; ++j) {
                        const std::size_t k = static_cast<std::size_t>(i) * n + j;
                        const double g = on->grad[k] * gn->value[j];
                        xn->grad[k] += inv_sigma[i] * (g - mg - xhat[k] * mgh);
                    }
                }
            }
        });
    }
    return out;
}

Tensor masked_fill(const Tensor& x, const Mask& mask, double fill) {
    if (mask.rows != x.rows() || mask.cols != x.cols())
        throw DimensionError("masked_fill: mask [" + std::to_string(mask.rows) + "x" + std::to_string(mask.cols) +
                             "] vs " + x.shape_str());
    const int m = x.rows(), n = x.cols();
    Tensor out(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = mask.at(i, j) ? x(i, j) : fill;
    OpCtx ctx = op_ctx({&x});
    if (ctx.track) {
        mark_tracked(out, ctx, {&x});
        auto xn = x.node_ptr(), on = out.node_ptr();
        auto allowed = mask.allowed;
        ctx.tape->record([xn, on, m, n, allowed] {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    if (allowed[static_cast<std::size_t>(i) * n + j]) xn->grad[i * n + j] += on->grad[i * n + j];
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no parts");
    const int m = parts.front().rows();
    int total = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != m)
            throw DimensionError("concat_cols: row counts disagree: " + parts.front().shape_str() + " vs " +
                                 p.shape_str());
        total += p.cols();
    }
    Tensor out(m, total);
    int off = 0;
    for (const Tensor& p : parts) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < p.cols(); ++j) out(i, off + j) = p(i, j);
        off += p.cols();
    }
    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    OpCtx ctx;
    {
        bool any_grad = false;
        Tape* tape = nullptr;
        for (const Tensor* t : ptrs) {
            if (t->requires_grad()) any_grad = true;
            if (t->tape() != nullptr) {
                if (tape != nullptr && tape != t->tape())
                    throw ContractError("operands recorded on different tapes");
                tape = t->tape();
            }
        }
        if (any_grad && tape != nullptr && tape->recording()) {
            ctx.tape = tape;
            ctx.track = true;
        }
    }
    if (ctx.track) {
        out.node()->requires_grad = true;
        out.node()->tape = ctx.tape;
        out.node()->ensure_grad();
        std::vector<std::shared_ptr<detail::TensorNode>> nodes;
        std::vector<int> offsets, widths;
        int o = 0;
        for (const Tensor& p : parts) {
            if (p.requires_grad()) p.node()->ensure_grad();
            nodes.push_back(p.node_ptr());
            offsets.push_back(o);
            widths.push_back(p.cols());
            o += p.cols();
        }
        auto on = out.node_ptr();
        ctx.tape->record([nodes, offsets, widths, on, m, total] {
            for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
                if (!nodes[pi]->requires_grad) continue;
                const int w = widths[pi], off2 = offsets[pi];
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < w; ++j)
                        nodes[pi]->grad[i * w + j] += on->grad[static_cast<std::size_t>(i) * total + off2 + j];
            }
        });
    }
    return out;
}

Tensor slice_rows(const Tensor& a, int begin, int end) {
    if (begin < 0 || end > a.rows() || begin >= end)
        throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") invalid for " + a.shape_str());
    const int n = a.cols(), m = end - begin;
    Tensor out(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = a(begin + i, j);
    OpCtx ctx = op_ctx({&a});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a});
        auto an = a.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, on, begin, m, n] {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) an->grad[(begin + i) * n + j] += on->grad[i * n + j];
        });
    }
    return out;
}

Tensor sum_all(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    Tensor out(1, 1, {acc});
    OpCtx ctx = op_ctx({&a});
    if (ctx.track) {
        mark_tracked(out, ctx, {&a});
        auto an = a.node_ptr(), on = out.node_ptr();
        ctx.tape->record([an, on] {
            for (double& g : an->grad) g += on->grad[0];
        });
    }
    return out;
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
    const int n = table.cols();
    Tensor out(static_cast<int>(ids.size()), n);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table.rows())
            throw ContractError("gather_rows: id " + std::to_string(ids[i]) + " outside " + table.shape_str());
        for (int j = 0; j < n; ++j) out(static_cast<int>(i), j) = table(ids[i], j);
    }
    OpCtx ctx = op_ctx({&table});
    if (ctx.track) {
        mark_tracked(out, ctx, {&table});
        auto tn = table.node_ptr(), on = out.node_ptr();
        auto idv = ids;
        ctx.tape->record([tn, on, idv, n] {
            for (std::size_t i = 0; i < idv.size(); ++i)
                for (int j = 0; j < n; ++j) tn->grad[idv[i] * n + j] += on->grad[i * n + j];
        });
    }
    return out;
}

Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& targets) {
    const int m = logits.rows(), n = logits.cols();
    if (static_cast<int>(targets.size()) != m)
        throw DimensionError("cross_entropy_rows: " + std::to_string(targets.size()) + " targets for " +
                             logits.shape_str());
    std::vector<double> probs(static_cast<std::size_t>(m) * n);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        const int t = targets[i];
        if (t < 0 || t >= n) throw ContractError("cross_entropy_rows: target " + std::to_string(t) + " outside row width");
        double mx = logits(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, logits(i, j));
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(logits(i, j) - mx);
            probs[static_cast<std::size_t>(i) * n + j] = e;
            denom += e;
        }
        for (int j = 0; j < n; ++j) probs[static_cast<std::size_t>(i) * n + j] /= denom;
        total += std::log(denom) + mx - logits(i, t);
    }
    Tensor out(1, 1, {total / m});
    OpCtx ctx = op_ctx({&logits});
    if (ctx.track) {
        mark_tracked(out, ctx, {&logits});
        auto ln = logits.node_ptr(), on = out.node_ptr();
        auto tg = targets;
        ctx.tape->record([ln, on, tg, probs, m, n] {
            const double up = on->grad[0] / m;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    const double ind = (j == tg[i]) ? 1.0 : 0.0;
                    ln->grad[i * n + j] += up * (probs[static_cast<std::size_t>(i) * n + j] - ind);
                }
        });
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    return add_row_vector(matmul(x, w), bias);
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x0, double step) {
    if (step < 1e-7 || step > 1e-3) throw ContractError("grad_check: step outside [1e-7, 1e-3]");
    Tape tape;
    Tensor x = Tensor::leaf(tape, x0.rows(), x0.cols(), x0.values());
    Tensor y = f(x);
    if (!y.is_scalar()) throw ContractError("grad_check: f must be scalar-valued, got " + y.shape_str());
    tape.backward(y);
    const std::vector<double> analytic = x.grad();

    double worst = 0.0;
    Tensor probe = x0.detached_copy();
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe.mutable_values()[i];
        probe.mutable_values()[i] = orig + step;
        const double fp = f(probe).scalar_value();
        probe.mutable_values()[i] = orig - step;
        const double fm = f(probe).scalar_value();
        probe.mutable_values()[i] = orig;
        const double fd = (fp - fm) / (2.0 * step);
        const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace sgsa
