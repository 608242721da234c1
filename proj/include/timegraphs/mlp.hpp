#pragma once

#include <functional>
#include <string>
#include <vector>

#include "timegraphs/rng.hpp"
#include "timegraphs/tape.hpp"
#include "timegraphs/tensor.hpp"

namespace timegraphs {

enum class Activation { Relu, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Callback for enumerating named trainable tensors in a stable order.
using ParamVisitor = std::function<void(const std::string&, Tensor&)>;

struct DenseLayer {
    Tensor weight;  // in x out
    Tensor bias;    // 1 x out
};

struct Mlp {
    std::vector<DenseLayer> layers;
    Activation hidden = Activation::Relu;

    int input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }

    void visit(const std::string& prefix, const ParamVisitor& f);
};

// dims = {in, h1, ..., out}; weights Xavier-uniform, biases zero.
Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Rng& rng);

Tensor xavier_uniform(int rows, int cols, Rng& rng);

// Forward pass on the tape; x is n x input_dim. The hidden activation is
// applied between layers, the output layer is linear.
Tape::Id mlp_forward(Tape& tape, Mlp& mlp, Tape::Id x);

// Value-only forward used by selection paths that need no gradients.
Tensor mlp_forward_value(const Mlp& mlp, const Tensor& x);

}  // namespace timegraphs
