// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace hyptax::manifold {

/// Geometry constants for the curvature-c Lorentz model.
///
/// Points live on the upper hyperboloid sheet {x : <x,x>_L = -1/c, x.time > 0}
/// where <.,.>_L is the Lorentzian inner product. cone_k() is the entailment
/// cone boundary constant K = 2*r_min/sqrt(c); eps guards denominators and the
/// gradient-side clamps of arccos/asin.
struct ManifoldConfig {
    double curvature = 1.0;  // c > 0, units 1/length^2
    double r_min = 0.1;      // cone boundary radius near the origin
    double eps = 1e-8;       // 0 < eps < 1e-4

    double cone_k() const { return 2.0 * r_min / std::sqrt(curvature); }
    double sqrt_c() const { return std::sqrt(curvature); }

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Point on the hyperboloid: one time-like plus d space-like coordinates.
struct LorentzPoint {
    double time = 0.0;
    std::vector<double> space;

    std::size_t dim() const { return space.size(); }
};

/// Tangent vector at the origin; the time component is implicitly zero there.
struct TangentVector {
    std::vector<double> space;

    std::size_t dim() const { return space.size(); }
};

/// The origin (1/sqrt(c), 0, ..., 0) of the d-dimensional model.
LorentzPoint origin(std::size_t dim, const ManifoldConfig& cfg);

/// Lorentzian inner product <x,y>_L = -x.time*y.time + dot(x.space, y.space).
/// On-manifold points satisfy <x,x>_L = -1/c.
/// Throws std::invalid_argument on dimension mismatch.
double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y);

/// Residual of the on-manifold constraint, c*<x,x>_L + 1 (zero on the sheet).
double manifold_residual(const LorentzPoint& x, const ManifoldConfig& cfg);

/// Exponential map at the origin:
///   time  = cosh(sqrt(c)*|v|) / sqrt(c)
///   space = sinh(sqrt(c)*|v|) / (sqrt(c)*|v|) * v
/// with the series limit sinh(t)/t -> 1 as |v| -> 0.
/// Throws std::invalid_argument on non-finite input.
LorentzPoint exp_map_origin(const TangentVector& v, const ManifoldConfig& cfg);

/// Geodesic distance d(x,y) = acosh(max(-c*<x,y>_L, 1)) / sqrt(c).
/// The curvature factor inside acosh makes d(x,x) = 0 for every c.
/// Throws std::invalid_argument when an argument is off-manifold beyond
/// a scale-aware tolerance.
double geodesic_distance(const LorentzPoint& x, const LorentzPoint& y,
                         const ManifoldConfig& cfg);

/// Exterior angle at u between the geodesic toward w and the ray from the
/// origin through u:
///   ext(u,w) = arccos( (w.time + u.time*c*<u,w>_L)
///                      / (|u.space| * sqrt((c*<u,w>_L)^2 - 1)) )
/// The arccos argument is clamped into [-1, 1] (the value is exact at the
/// clamp; only gradients need an eps margin) and the sqrt argument is floored
/// at eps. Result is in [0, pi].
/// Throws std::invalid_argument when u is at the origin (cone apex undefined).
double exterior_angle(const LorentzPoint& u, const LorentzPoint& w,
                      const ManifoldConfig& cfg);

/// Half-aperture of the entailment cone at u:
///   aper(u) = asin(K / |u.space|),  K = 2*r_min/sqrt(c)
/// using the Euclidean norm of the space components. Returns pi/2 when
/// |u.space| <= K (the cone is fully open near the origin). Result in
/// (0, pi/2].
double half_aperture(const LorentzPoint& u, const ManifoldConfig& cfg);

}  // namespace hyptax::manifold
