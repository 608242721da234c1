#include "timegraphs/tensor.hpp"

#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
}

Tensor Tensor::row(const std::vector<double>& values) {
    Tensor t(1, static_cast<int>(values.size()));
    t.data = values;
    return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Tensor();
    Tensor t(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw shape_error("from_rows: ragged row lengths");
        for (size_t c = 0; c < rows[r].size(); ++c) t.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return t;
}

std::string Tensor::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

double Tensor::item() const {
    if (rows != 1 || cols != 1)
        throw shape_error("item() requires a 1x1 tensor, got " + shape_str());
    return data[0];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols != b.rows)
        throw shape_error("matmul: " + a.shape_str() + " * " + b.shape_str());
    Tensor out(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
        double* orow = &out.data[static_cast<size_t>(i) * out.cols];
        for (int k = 0; k < a.cols; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

}  // namespace timegraphs
