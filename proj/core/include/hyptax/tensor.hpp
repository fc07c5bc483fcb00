// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace hyptax::autodiff {

/// Dense row-major 2-D array of doubles. Scalars are 1x1, row vectors 1xn,
/// column vectors nx1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor full(int r, int c, double v);
    static Tensor scalar(double v);
    static Tensor row(const std::vector<double>& v);
    static Tensor column(const std::vector<double>& v);

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    int size() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool is_scalar() const { return rows == 1 && cols == 1; }
    double scalar_value() const { return data[0]; }

    bool all_finite() const;
};

}  // namespace hyptax::autodiff
