#include "timegraphs/tape.hpp"

#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow for large |x|.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace

Tape::Id Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop) {
    nodes_.push_back(Node{std::move(value), std::move(backprop)});
    return static_cast<Id>(nodes_.size()) - 1;
}

const Tensor& Tape::val(Id id) const { return nodes_[id].value; }

Tape::Id Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

Tape::Id Tape::param(Tensor& storage) {
    // One node per distinct parameter so reuse accumulates into one gradient.
    for (const auto& [p, existing] : params_)
        if (p == &storage) return existing;
    Id id = push(storage, nullptr);
    params_.emplace_back(&storage, id);
    return id;
}

Tape::Id Tape::add(Id a, Id b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb))
        throw shape_error("add: " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (int i = 0; i < out.size(); ++i) out.data[i] += tb.data[i];
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Tape::Id Tape::add_rowvec(Id a, Id b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (tb.rows != 1 || tb.cols != ta.cols)
        throw shape_error("add_rowvec: " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) out.at(r, c) += tb.at(0, c);
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        Tensor gb(1, g.cols);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::matmul(Id a, Id b) {
    Tensor out = timegraphs::matmul(val(a), val(b));
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        const Tensor& ta = t.val(a);
        const Tensor& tb = t.val(b);
        // dA = g * B^T
        Tensor ga(ta.rows, ta.cols);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) {
                double gij = g.at(i, j);
                if (gij == 0.0) continue;
                for (int k = 0; k < ta.cols; ++k) ga.at(i, k) += gij * tb.at(k, j);
            }
        // dB = A^T * g
        Tensor gb(tb.rows, tb.cols);
        for (int i = 0; i < ta.rows; ++i)
            for (int k = 0; k < ta.cols; ++k) {
                double aik = ta.at(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < g.cols; ++j) gb.at(k, j) += aik * g.at(i, j);
            }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::mul(Id a, Id b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb))
        throw shape_error("mul: " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (int i = 0; i < out.size(); ++i) out.data[i] *= tb.data[i];
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        const Tensor& ta = t.val(a);
        const Tensor& tb = t.val(b);
        Tensor ga = g;
        Tensor gb = g;
        for (int i = 0; i < g.size(); ++i) {
            ga.data[i] *= tb.data[i];
            gb.data[i] *= ta.data[i];
        }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::mul_scalar(Id a, Id s) {
    const Tensor& ts = val(s);
    if (ts.rows != 1 || ts.cols != 1)
        throw shape_error("mul_scalar: scale must be 1x1, got " + ts.shape_str());
    double sv = ts.data[0];
    Tensor out = val(a);
    for (double& v : out.data) v *= sv;
    return push(std::move(out), [a, s](Tape& t, const Tensor& g) {
        const Tensor& ta = t.val(a);
        double sv = t.val(s).data[0];
        Tensor ga = g;
        for (double& v : ga.data) v *= sv;
        t.accumulate(a, ga);
        double gs = 0.0;
        for (int i = 0; i < g.size(); ++i) gs += g.data[i] * ta.data[i];
        t.accumulate(s, Tensor::scalar(gs));
    });
}

Tape::Id Tape::affine(Id a, double scale, double shift) {
    Tensor out = val(a);
    for (double& v : out.data) v = scale * v + shift;
    return push(std::move(out), [a, scale](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (double& v : ga.data) v *= scale;
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::sigmoid(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = sigma(v);
    Id id = push(std::move(out), nullptr);
    nodes_[id].backprop = [a, id](Tape& t, const Tensor& g) {
        const Tensor& y = t.val(id);
        Tensor ga = g;
        for (int i = 0; i < g.size(); ++i) ga.data[i] *= y.data[i] * (1.0 - y.data[i]);
        t.accumulate(a, ga);
    };
    return id;
}

Tape::Id Tape::log(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = std::log(v);
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga = g;
        for (int i = 0; i < g.size(); ++i) ga.data[i] /= x.data[i];
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::relu(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga = g;
        for (int i = 0; i < g.size(); ++i)
            if (x.data[i] <= 0.0) ga.data[i] = 0.0;
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::tanh(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = std::tanh(v);
    Id id = push(std::move(out), nullptr);
    nodes_[id].backprop = [a, id](Tape& t, const Tensor& g) {
        const Tensor& y = t.val(id);
        Tensor ga = g;
        for (int i = 0; i < g.size(); ++i) ga.data[i] *= 1.0 - y.data[i] * y.data[i];
        t.accumulate(a, ga);
    };
    return id;
}

Tape::Id Tape::log_sigmoid(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = -softplus(-v);
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga = g;
        // d/dx log(sigma(x)) = 1 - sigma(x) = sigma(-x)
        for (int i = 0; i < g.size(); ++i) ga.data[i] *= sigma(-x.data[i]);
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::log_one_minus_sigmoid(Id a) {
    Tensor out = val(a);
    for (double& v : out.data) v = -softplus(v);
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga = g;
        // d/dx log(1 - sigma(x)) = -sigma(x)
        for (int i = 0; i < g.size(); ++i) ga.data[i] *= -sigma(x.data[i]);
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::mean_rows(Id a) {
    const Tensor& ta = val(a);
    if (ta.rows == 0) throw shape_error("mean_rows: empty tensor");
    Tensor out(1, ta.cols);
    for (int r = 0; r < ta.rows; ++r)
        for (int c = 0; c < ta.cols; ++c) out.at(0, c) += ta.at(r, c);
    for (double& v : out.data) v /= ta.rows;
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga(x.rows, x.cols);
        double inv = 1.0 / x.rows;
        for (int r = 0; r < x.rows; ++r)
            for (int c = 0; c < x.cols; ++c) ga.at(r, c) = g.at(0, c) * inv;
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::sum_all(Id a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    return push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga(x.rows, x.cols);
        for (double& v : ga.data) v = g.data[0];
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::concat_cols(Id a, Id b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (ta.rows != tb.rows)
        throw shape_error("concat_cols: " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out(ta.rows, ta.cols + tb.cols);
    for (int r = 0; r < ta.rows; ++r) {
        for (int c = 0; c < ta.cols; ++c) out.at(r, c) = ta.at(r, c);
        for (int c = 0; c < tb.cols; ++c) out.at(r, ta.cols + c) = tb.at(r, c);
    }
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        const Tensor& ta = t.val(a);
        const Tensor& tb = t.val(b);
        Tensor ga(ta.rows, ta.cols);
        Tensor gb(tb.rows, tb.cols);
        for (int r = 0; r < ta.rows; ++r) {
            for (int c = 0; c < ta.cols; ++c) ga.at(r, c) = g.at(r, c);
            for (int c = 0; c < tb.cols; ++c) gb.at(r, c) = g.at(r, ta.cols + c);
        }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::gather_rows(Id a, std::vector<int> idx) {
    const Tensor& ta = val(a);
    Tensor out(static_cast<int>(idx.size()), ta.cols);
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= ta.rows)
            throw shape_error("gather_rows: index out of range");
        for (int c = 0; c < ta.cols; ++c) out.at(static_cast<int>(r), c) = ta.at(idx[r], c);
    }
    return push(std::move(out), [a, idx = std::move(idx)](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga(x.rows, x.cols);
        for (size_t r = 0; r < idx.size(); ++r)
            for (int c = 0; c < g.cols; ++c) ga.at(idx[r], c) += g.at(static_cast<int>(r), c);
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::scatter_rows(Id a, std::vector<int> idx, int out_rows) {
    const Tensor& ta = val(a);
    if (static_cast<int>(idx.size()) != ta.rows)
        throw shape_error("scatter_rows: index count must equal row count");
    Tensor out(out_rows, ta.cols);
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= out_rows)
            throw shape_error("scatter_rows: index out of range");
        for (int c = 0; c < ta.cols; ++c) out.at(idx[r], c) += ta.at(static_cast<int>(r), c);
    }
    return push(std::move(out), [a, idx = std::move(idx)](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga(x.rows, x.cols);
        for (size_t r = 0; r < idx.size(); ++r)
            for (int c = 0; c < g.cols; ++c) ga.at(static_cast<int>(r), c) += g.at(idx[r], c);
        t.accumulate(a, ga);
    });
}

Tape::Id Tape::neighbor_mean(Id a, const std::vector<std::vector<int>>& nbrs) {
    const Tensor& ta = val(a);
    Tensor out(static_cast<int>(nbrs.size()), ta.cols);
    for (size_t i = 0; i < nbrs.size(); ++i) {
        if (nbrs[i].empty()) continue;
        for (int j : nbrs[i]) {
            if (j < 0 || j >= ta.rows) throw shape_error("neighbor_mean: index out of range");
            for (int c = 0; c < ta.cols; ++c) out.at(static_cast<int>(i), c) += ta.at(j, c);
        }
        double inv = 1.0 / static_cast<double>(nbrs[i].size());
        for (int c = 0; c < ta.cols; ++c) out.at(static_cast<int>(i), c) *= inv;
    }
    return push(std::move(out), [a, nbrs](Tape& t, const Tensor& g) {
        const Tensor& x = t.val(a);
        Tensor ga(x.rows, x.cols);
        for (size_t i = 0; i < nbrs.size(); ++i) {
            if (nbrs[i].empty()) continue;
            double inv = 1.0 / static_cast<double>(nbrs[i].size());
            for (int j : nbrs[i])
                for (int c = 0; c < g.cols; ++c) ga.at(j, c) += g.at(static_cast<int>(i), c) * inv;
        }
        t.accumulate(a, ga);
    });
}

const Tensor& Tape::grad(Id id) const {
    if (!ran_backward_) throw numeric_error("grad() before backward()");
    return grads_[id];
}

void Tape::accumulate(Id id, const Tensor& g) {
    Tensor& dst = grads_[id];
    if (dst.size() == 0) dst = Tensor(nodes_[id].value.rows, nodes_[id].value.cols);
    for (int i = 0; i < g.size(); ++i) dst.data[i] += g.data[i];
}

void Tape::backward(Id root) {
    if (ran_backward_) throw numeric_error("backward() called twice on one tape");
    const Tensor& rv = val(root);
    if (rv.rows != 1 || rv.cols != 1)
        throw shape_error("backward: root must be 1x1, got " + rv.shape_str());
    ran_backward_ = true;
    grads_.assign(nodes_.size(), Tensor());
    accumulate(root, Tensor::scalar(1.0));
    for (Id id = root; id >= 0; --id) {
        if (grads_[id].size() == 0) continue;  // not reachable from root
        if (nodes_[id].backprop) nodes_[id].backprop(*this, grads_[id]);
    }
    // Parameters never touched by the root get explicit zero gradients.
    for (auto& [storage, id] : params_) {
        if (grads_[id].size() == 0) grads_[id] = Tensor(storage->rows, storage->cols);
    }
}

std::vector<std::pair<Tensor*, const Tensor*>> Tape::param_grads() const {
    if (!ran_backward_) throw numeric_error("param_grads() before backward()");
    std::vector<std::pair<Tensor*, const Tensor*>> out;
    out.reserve(params_.size());
    for (const auto& [storage, id] : params_) out.emplace_back(storage, &grads_[id]);
    return out;
}

}  // namespace timegraphs
