#pragma once

#include <string>
#include <vector>

namespace timegraphs {

// Dense row-major matrix of doubles, rank <= 2. Scalars are 1x1, row vectors
// 1xN. All trainable parameters and intermediate values use this type.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor scalar(double v);
    static Tensor row(const std::vector<double>& values);
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    int size() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;

    // Value of a 1x1 tensor; throws shape error otherwise.
    double item() const;

    bool all_finite() const;
};

// Plain (non-differentiable) matrix product, used by value-only paths.
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace timegraphs
