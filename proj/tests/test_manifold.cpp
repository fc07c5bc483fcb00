// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hyptax/manifold.hpp"
#include "test_helpers.hpp"

using namespace hyptax;
using namespace hyptax::manifold;
using hyptax::testing::planar_point;
using hyptax::testing::random_point;
using hyptax::testing::random_tangent;

namespace {

constexpr double kPi = std::numbers::pi;

ManifoldConfig config_with_c(double c) {
    ManifoldConfig cfg;
    cfg.curvature = c;
    return cfg;
}

// largest sqrt(c)*|v| at which the double-precision residual stays below 1e-9
constexpr double kRadiusCap = 7.5;

double radius_cap(const ManifoldConfig& cfg) {
    return std::min(10.0, kRadiusCap / cfg.sqrt_c());
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("config validation") {
    ManifoldConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.cone_k() == doctest::Approx(0.2));

    cfg.curvature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ManifoldConfig{};
    cfg.eps = 1e-3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("lorentz inner product") {
    const ManifoldConfig cfg;
    const LorentzPoint o = origin(2, cfg);
    CHECK(lorentz_inner(o, o) == doctest::Approx(-1.0).epsilon(1e-12));

    LorentzPoint x{std::cosh(1.0), {std::sinh(1.0), 0.0}};
    LorentzPoint y{1.0, {0.0, 0.0}};
    CHECK(lorentz_inner(x, y) == doctest::Approx(-std::cosh(1.0)).epsilon(1e-12));
    CHECK(lorentz_inner(x, y) == doctest::Approx(-1.5431).epsilon(1e-4));

    LorentzPoint a{std::sqrt(2.0), {1.0, 0.0}};
    LorentzPoint b{std::sqrt(2.0), {0.0, 1.0}};
    CHECK(lorentz_inner(a, b) == doctest::Approx(-2.0).epsilon(1e-12));

    LorentzPoint c{1.0, {0.0}};
    CHECK_THROWS_AS(lorentz_inner(x, c), std::invalid_argument);
}

TEST_CASE("exp map at the origin") {
    const ManifoldConfig cfg;
    const LorentzPoint zero = exp_map_origin(TangentVector{{0.0, 0.0}}, cfg);
    CHECK(zero.time == doctest::Approx(1.0));
    CHECK(zero.space[0] == 0.0);
    CHECK(zero.space[1] == 0.0);

    const LorentzPoint unit = exp_map_origin(TangentVector{{1.0, 0.0}}, cfg);
    CHECK(unit.time == doctest::Approx(1.5431).epsilon(1e-4));
    CHECK(unit.space[0] == doctest::Approx(1.1752).epsilon(1e-4));
    CHECK(unit.space[1] == 0.0);

    const ManifoldConfig c4 = config_with_c(4.0);
    const LorentzPoint p = exp_map_origin(TangentVector{{0.6, 0.8}}, c4);
    CHECK(p.time == doctest::Approx(1.8810).epsilon(1e-4));
    CHECK(p.space[0] == doctest::Approx(1.0880).epsilon(1e-4));
    CHECK(p.space[1] == doctest::Approx(1.4507).epsilon(1e-4));
    CHECK(lorentz_inner(p, p) == doctest::Approx(-0.25).epsilon(1e-12));

    CHECK_THROWS_AS(exp_map_origin(TangentVector{{1.0, std::nan("")}}, cfg),
                    std::invalid_argument);
}

TEST_CASE("geodesic distance") {
    const ManifoldConfig cfg;
    Rng rng(11);

    SUBCASE("identity of indiscernibles") {
        for (int k = 0; k < 32; ++k) {
            const LorentzPoint x = random_point(rng, 3, cfg, 0.0, 5.0);
            CHECK(geodesic_distance(x, x, cfg) == 0.0);
        }
    }
    SUBCASE("radial isometry of the origin map, any curvature") {
        for (double c : {0.25, 1.0, 4.0}) {
            const ManifoldConfig mc = config_with_c(c);
            const LorentzPoint x = exp_map_origin(TangentVector{{0.6, 0.8}}, mc);
            CHECK(geodesic_distance(origin(2, mc), x, mc) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("reflected points") {
        LorentzPoint x{std::cosh(1.0), {std::sinh(1.0), 0.0}};
        LorentzPoint y{std::cosh(1.0), {-std::sinh(1.0), 0.0}};
        CHECK(geodesic_distance(x, y, cfg) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("off-manifold rejection") {
        LorentzPoint bad{2.0, {0.0, 0.0}};
        const LorentzPoint o = origin(2, cfg);
        CHECK_THROWS_AS(geodesic_distance(bad, o, cfg), std::invalid_argument);
    }
}

TEST_CASE("exterior angle") {
    const ManifoldConfig cfg;

    SUBCASE("collinear outward child") {
        const LorentzPoint u = planar_point(0.5, 0.0, cfg);
        const LorentzPoint w = planar_point(1.0, 0.0, cfg);
        CHECK(exterior_angle(u, w, cfg) <= 1e-6);
    }
    SUBCASE("child at the origin") {
        LorentzPoint u{std::cosh(1.0), {std::sinh(1.0), 0.0}};
        CHECK(exterior_angle(u, origin(2, cfg), cfg) ==
              doctest::Approx(kPi).epsilon(1e-9));
    }
    SUBCASE("orthogonally rotated point") {
        LorentzPoint u{std::cosh(1.0), {std::sinh(1.0), 0.0}};
        LorentzPoint w{std::cosh(1.0), {0.0, std::sinh(1.0)}};
        // frozen from two independent evaluations: the closed form in long
        // double and the hyperbolic law of cosines (pi minus the interior
        // angle at u of the triangle origin-u-w)
        CHECK(exterior_angle(u, w, cfg) == doctest::Approx(2.5666).epsilon(1e-4));

        // cross-check against a high-precision evaluation of the closed form
        const long double ch = std::cosh(1.0L), sh = std::sinh(1.0L);
        const long double inner = -ch * ch;
        const long double expected = std::acos(
            static_cast<long double>((ch + ch * inner) / (sh * std::sqrt(inner * inner - 1.0L))));
        CHECK(exterior_angle(u, w, cfg) ==
              doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
    }
    SUBCASE("apex at the origin is rejected") {
        CHECK_THROWS_AS(exterior_angle(origin(2, cfg), planar_point(1.0, 0.3, cfg), cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("half aperture") {
    const ManifoldConfig cfg;  // c = 1, r_min = 0.1, K = 0.2

    auto point_with_norm = [&](double n) {
        LorentzPoint u;
        u.time = std::sqrt(1.0 + n * n);
        u.space = {n, 0.0};
        return u;
    };
    CHECK(half_aperture(point_with_norm(0.2), cfg) == doctest::Approx(kPi / 2));
    CHECK(half_aperture(point_with_norm(0.4), cfg) ==
          doctest::Approx(0.5236).epsilon(1e-4));
    CHECK(half_aperture(point_with_norm(0.4), cfg) ==
          doctest::Approx(kPi / 6).epsilon(1e-12));
    CHECK(half_aperture(point_with_norm(0.1), cfg) == doctest::Approx(kPi / 2));
}

TEST_CASE("property: on-manifold constraint") {
    for (double c : {0.25, 1.0, 4.0}) {
        const ManifoldConfig cfg = config_with_c(c);
        Rng rng(101 + static_cast<int>(c * 4));
        for (int k = 0; k < 2000; ++k) {
            const std::size_t dim = 1 + rng.below(16);
            const LorentzPoint x =
                random_point(rng, dim, cfg, 0.0, radius_cap(cfg));
            CHECK(std::abs(manifold_residual(x, cfg)) <= 1e-9);
        }
    }
}

TEST_CASE("property: radial isometry") {
    for (double c : {0.25, 1.0, 4.0}) {
        const ManifoldConfig cfg = config_with_c(c);
        Rng rng(211 + static_cast<int>(c * 4));
        for (int k = 0; k < 2000; ++k) {
            const auto v = random_tangent(rng, 1 + rng.below(16), 1e-3, radius_cap(cfg));
            double norm_sq = 0.0;
            for (double x : v.space) norm_sq += x * x;
            const double r = std::sqrt(norm_sq);
            const LorentzPoint p = exp_map_origin(v, cfg);
            CHECK(std::abs(geodesic_distance(origin(v.dim(), cfg), p, cfg) - r) <= 1e-9);
        }
    }
}

TEST_CASE("property: metric axioms") {
    for (double c : {0.25, 1.0, 4.0}) {
        const ManifoldConfig cfg = config_with_c(c);
        Rng rng(307 + static_cast<int>(c * 4));
        for (int k = 0; k < 600; ++k) {
            const std::size_t dim = 2 + rng.below(8);
            const double cap = radius_cap(cfg);
            const LorentzPoint x = random_point(rng, dim, cfg, 0.0, cap);
            const LorentzPoint y = random_point(rng, dim, cfg, 0.0, cap);
            const LorentzPoint z = random_point(rng, dim, cfg, 0.0, cap);
            const double dxy = geodesic_distance(x, y, cfg);
            const double dyx = geodesic_distance(y, x, cfg);
            const double dxz = geodesic_distance(x, z, cfg);
            const double dyz = geodesic_distance(y, z, cfg);
            CHECK(dxy == dyx);  // bitwise symmetric
            CHECK(dxy >= 0.0);
            CHECK(dxz <= dxy + dyz + 1e-9);
        }
    }
}

TEST_CASE("property: angle ranges and aperture monotonicity") {
    const ManifoldConfig cfg;
    Rng rng(401);
    for (int k = 0; k < 500; ++k) {
        const LorentzPoint u = random_point(rng, 3, cfg, 0.3, 5.0);
        const LorentzPoint w = random_point(rng, 3, cfg, 0.0, 5.0);
        const double ext = exterior_angle(u, w, cfg);
        CHECK(ext >= 0.0);
        CHECK(ext <= kPi);
        const double aper = half_aperture(u, cfg);
        CHECK(aper > 0.0);
        CHECK(aper <= kPi / 2);
    }
    // strictly decreasing beyond |space| = K
    double prev = kPi;
    for (double n = 0.25; n < 6.0; n += 0.25) {
        LorentzPoint u{std::sqrt(1.0 + n * n), {n, 0.0}};
        const double aper = half_aperture(u, cfg);
        CHECK(aper < prev);
        prev = aper;
    }
}

TEST_CASE("property: collinear outward containment") {
    const ManifoldConfig cfg;
    Rng rng(503);
    for (int k = 0; k < 200; ++k) {
        const double theta = 2.0 * kPi * rng.uniform();
        const double ru = 0.3 + 2.0 * rng.uniform();  // sinh(0.3) > K
        const double rw = ru + 0.1 + 2.0 * rng.uniform();
        const LorentzPoint u = planar_point(ru, theta, cfg);
        const LorentzPoint w = planar_point(rw, theta, cfg);
        const double ext = exterior_angle(u, w, cfg);
        CHECK(ext <= 1e-6);
        CHECK(ext <= half_aperture(u, cfg));
    }
}

}  // TEST_SUITE
