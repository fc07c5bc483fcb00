// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/manifold.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hyptax::manifold {

namespace {

// Relative on-manifold tolerance. The residual of a stored double-precision
// point grows with c*time^2, so the check has to scale with it.
constexpr double kOnManifoldTol = 1e-6;

double space_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void require_on_manifold(const LorentzPoint& x, const ManifoldConfig& cfg,
                         const char* who) {
    const double scale = std::max(1.0, cfg.curvature * x.time * x.time);
    if (std::abs(manifold_residual(x, cfg)) > kOnManifoldTol * scale) {
        throw std::invalid_argument(std::string(who) +
                                    ": point is off the hyperboloid");
    }
}

}  // namespace

void ManifoldConfig::validate() const {
    if (!(curvature > 0.0)) {
        throw std::invalid_argument("ManifoldConfig: curvature must be > 0");
    }
    if (!(r_min > 0.0)) {
        throw std::invalid_argument("ManifoldConfig: r_min must be > 0");
    }
    if (!(eps > 0.0 && eps < 1e-4)) {
        throw std::invalid_argument("ManifoldConfig: eps must be in (0, 1e-4)");
    }
}

LorentzPoint origin(std::size_t dim, const ManifoldConfig& cfg) {
    LorentzPoint p;
    p.time = 1.0 / cfg.sqrt_c();
    p.space.assign(dim, 0.0);
    return p;
}

double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y) {
    if (x.dim() != y.dim()) {
        throw std::invalid_argument("lorentz_inner: dimension mismatch (" +
                                    std::to_string(x.dim()) + " vs " +
                                    std::to_string(y.dim()) + ")");
    }
    return -x.time * y.time + space_dot(x.space, y.space);
}

double manifold_residual(const LorentzPoint& x, const ManifoldConfig& cfg) {
    return cfg.curvature * lorentz_inner(x, x) + 1.0;
}

LorentzPoint exp_map_origin(const TangentVector& v, const ManifoldConfig& cfg) {
    for (double vi : v.space) {
        if (!std::isfinite(vi)) {
            throw std::invalid_argument("exp_map_origin: non-finite tangent vector");
        }
    }
    const double sc = cfg.sqrt_c();
    const double norm = std::sqrt(space_dot(v.space, v.space));
    const double z = sc * norm;

    // sinh(z)/z, series below the cancellation threshold
    const double sinhc = (z < 1e-8) ? 1.0 + z * z / 6.0 : std::sinh(z) / z;

    LorentzPoint p;
    p.time = std::cosh(z) / sc;
    p.space.resize(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) p.space[i] = sinhc * v.space[i];
    return p;
}

double geodesic_distance(const LorentzPoint& x, const LorentzPoint& y,
                         const ManifoldConfig& cfg) {
    require_on_manifold(x, cfg, "geodesic_distance");
    require_on_manifold(y, cfg, "geodesic_distance");
    // acosh near 1 amplifies rounding by a square root; identical inputs get
    // the exact answer directly
    if (x.time == y.time && x.space == y.space) return 0.0;
    const double arg = std::max(-cfg.curvature * lorentz_inner(x, y), 1.0);
    return std::acosh(arg) / cfg.sqrt_c();
}

double exterior_angle(const LorentzPoint& u, const LorentzPoint& w,
                      const ManifoldConfig& cfg) {
    const double u_space_norm = std::sqrt(space_dot(u.space, u.space));
    if (u_space_norm <= cfg.eps) {
        throw std::invalid_argument(
            "exterior_angle: cone apex undefined at the origin");
    }
    const double c = cfg.curvature;
    const double ci = c * lorentz_inner(u, w);
    const double num = w.time + u.time * ci;
    const double den =
        u_space_norm * std::sqrt(std::max(ci * ci - 1.0, cfg.eps));
    const double cosine = std::clamp(num / den, -1.0, 1.0);
    return std::acos(cosine);
}

double half_aperture(const LorentzPoint& u, const ManifoldConfig& cfg) {
    const double u_space_norm = std::sqrt(space_dot(u.space, u.space));
    const double ratio = cfg.cone_k() / std::max(u_space_norm, cfg.eps);
    return std::asin(std::min(ratio, 1.0));
}

}  // namespace hyptax::manifold
