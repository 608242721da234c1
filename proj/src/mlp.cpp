#include "timegraphs/mlp.hpp"

#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw config_error("unknown activation: " + s);
}

void Mlp::visit(const std::string& prefix, const ParamVisitor& f) {
    for (size_t i = 0; i < layers.size(); ++i) {
        f(prefix + ".w" + std::to_string(i), layers[i].weight);
        f(prefix + ".b" + std::to_string(i), layers[i].bias);
    }
}

Tensor xavier_uniform(int rows, int cols, Rng& rng) {
    Tensor t(rows, cols);
    double bound = std::sqrt(6.0 / (rows + cols));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Rng& rng) {
    if (dims.size() < 2) throw config_error("make_mlp: need at least input and output dims");
    Mlp mlp;
    mlp.hidden = hidden;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer layer;
        layer.weight = xavier_uniform(dims[i], dims[i + 1], rng);
        layer.bias = Tensor(1, dims[i + 1]);
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

Tape::Id mlp_forward(Tape& tape, Mlp& mlp, Tape::Id x) {
    if (mlp.layers.empty()) throw config_error("mlp_forward: empty MLP");
    if (tape.value(x).cols != mlp.input_dim())
        throw shape_error("mlp_forward: input dim " + tape.value(x).shape_str() +
                          " vs expected " + std::to_string(mlp.input_dim()));
    Tape::Id h = x;
    for (size_t i = 0; i < mlp.layers.size(); ++i) {
        Tape::Id w = tape.param(mlp.layers[i].weight);
        Tape::Id b = tape.param(mlp.layers[i].bias);
        h = tape.add_rowvec(tape.matmul(h, w), b);
        if (i + 1 < mlp.layers.size())
            h = mlp.hidden == Activation::Relu ? tape.relu(h) : tape.tanh(h);
    }
    return h;
}

Tensor mlp_forward_value(const Mlp& mlp, const Tensor& x) {
    if (mlp.layers.empty()) throw config_error("mlp_forward_value: empty MLP");
    Tensor h = x;
    for (size_t i = 0; i < mlp.layers.size(); ++i) {
        Tensor z = matmul(h, mlp.layers[i].weight);
        for (int r = 0; r < z.rows; ++r)
            for (int c = 0; c < z.cols; ++c) z.at(r, c) += mlp.layers[i].bias.at(0, c);
        if (i + 1 < mlp.layers.size()) {
            if (mlp.hidden == Activation::Relu) {
                for (double& v : z.data) v = v > 0.0 ? v : 0.0;
            } else {
                for (double& v : z.data) v = std::tanh(v);
            }
        }
        h = std::move(z);
    }
    return h;
}

}  // namespace timegraphs
