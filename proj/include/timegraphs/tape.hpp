#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "timegraphs/tensor.hpp"

namespace timegraphs {

// Reverse-mode autodiff tape. Values are computed eagerly; backward() walks
// the nodes in reverse creation order, which is a valid topological order
// because every op only references earlier nodes. One tape per computation,
// confined to a single thread.
class Tape {
public:
    using Id = int;

    // Constant leaf; receives a gradient but is not reported as a parameter.
    Id leaf(Tensor value);
    // Trainable leaf bound to external storage. The binding is used to pull
    // per-parameter gradients after backward().
    Id param(Tensor& storage);

    Id add(Id a, Id b);                    // same shape
    Id add_rowvec(Id a, Id b);             // a: n x m, b: 1 x m broadcast over rows
    Id matmul(Id a, Id b);
    Id mul(Id a, Id b);                    // elementwise, same shape
    Id mul_scalar(Id a, Id s);             // s must be 1x1
    Id affine(Id a, double scale, double shift);  // scale * a + shift elementwise
    Id sigmoid(Id a);
    Id log(Id a);
    Id relu(Id a);
    Id tanh(Id a);
    Id log_sigmoid(Id a);                  // log(sigma(x)), numerically stable
    Id log_one_minus_sigmoid(Id a);        // log(1 - sigma(x)), numerically stable
    Id mean_rows(Id a);                    // n x m -> 1 x m
    Id sum_all(Id a);                      // -> 1 x 1
    Id concat_cols(Id a, Id b);
    Id gather_rows(Id a, std::vector<int> idx);
    // Places row j of `a` at row idx[j] of an out_rows-tall result; other rows zero.
    Id scatter_rows(Id a, std::vector<int> idx, int out_rows);
    // out[i] = mean over rows nbrs[i] of `a`; zero row when nbrs[i] is empty.
    Id neighbor_mean(Id a, const std::vector<std::vector<int>>& nbrs);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& grad(Id id) const;

    // Backpropagates from a 1x1 root. May be called once per tape.
    void backward(Id root);

    // (parameter storage, gradient) pairs in registration order; valid after backward().
    std::vector<std::pair<Tensor*, const Tensor*>> param_grads() const;

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::function<void(Tape&, const Tensor&)> backprop;  // null for leaves
    };

    Id push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop);
    void accumulate(Id id, const Tensor& g);
    const Tensor& val(Id id) const;

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    std::vector<std::pair<Tensor*, Id>> params_;
    bool ran_backward_ = false;
};

}  // namespace timegraphs
