// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "hyptax/manifold.hpp"
#include "hyptax/rng.hpp"
#include "hyptax/tensor.hpp"

namespace hyptax::testing {

inline manifold::TangentVector random_tangent(Rng& rng, std::size_t dim,
                                              double min_norm, double max_norm) {
    manifold::TangentVector v;
    v.space.resize(dim);
    double norm_sq = 0.0;
    for (double& x : v.space) {
        x = rng.gaussian();
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    const double target = min_norm + (max_norm - min_norm) * rng.uniform();
    for (double& x : v.space) x *= target / norm;
    return v;
}

/// Random on-manifold point with radius in [min_r, max_r].
inline manifold::LorentzPoint random_point(Rng& rng, std::size_t dim,
                                           const manifold::ManifoldConfig& cfg,
                                           double min_r, double max_r) {
    return manifold::exp_map_origin(random_tangent(rng, dim, min_r, max_r), cfg);
}

/// Point at radius r along (cos theta, sin theta, 0, ...) from the origin,
/// curvature from cfg.
inline manifold::LorentzPoint planar_point(double r, double theta,
                                           const manifold::ManifoldConfig& cfg,
                                           std::size_t dim = 2) {
    manifold::TangentVector v;
    v.space.assign(dim, 0.0);
    v.space[0] = r * std::cos(theta);
    v.space[1] = r * std::sin(theta);
    return manifold::exp_map_origin(v, cfg);
}

inline autodiff::Tensor random_tensor(Rng& rng, int rows, int cols, double sigma = 1.0) {
    autodiff::Tensor t(rows, cols);
    for (double& x : t.data) x = sigma * rng.gaussian();
    return t;
}

}  // namespace hyptax::testing
