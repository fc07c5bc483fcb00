// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/tensor.hpp"

#include <cmath>

namespace hyptax::autodiff {

Tensor Tensor::full(int r, int c, double v) {
    Tensor t(r, c);
    for (double& x : t.data) x = v;
    return t;
}

Tensor Tensor::scalar(double v) { return full(1, 1, v); }

Tensor Tensor::row(const std::vector<double>& v) {
    Tensor t(1, static_cast<int>(v.size()));
    t.data = v;
    return t;
}

Tensor Tensor::column(const std::vector<double>& v) {
    Tensor t(static_cast<int>(v.size()), 1);
    t.data = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace hyptax::autodiff
