#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace cgolab;
using namespace testsupport;

TEST_CASE("ball domain preconditions") {
    CHECK_NOTHROW(BallDomain({0, 0, 0}, 1.0, 2.5, 128));
    CHECK_THROWS_AS(BallDomain({0, 0, 0}, 0.0, 2.5, 64), std::invalid_argument);
    CHECK_THROWS_AS(BallDomain({0, 0, 0}, 1.0, 1.5, 64), std::invalid_argument);  // L < 2R
    CHECK_THROWS_AS(BallDomain({0, 0, 0}, 1.0, 2.5, 16), std::invalid_argument);
    CHECK_THROWS_AS(BallDomain({0, 0, 0}, 1.0, 2.5, 63), std::invalid_argument);
    CHECK_THROWS_AS(BallDomain({2.0, 0, 0}, 1.0, 2.5, 64), std::invalid_argument);
    const BallDomain d({0, 0, 0}, 1.0, 2.5, 128);
    CHECK(d.spacing() == doctest::Approx(5.0 / 128));
    CHECK(d.contains({0.5, 0.5, 0.5}));
    CHECK_FALSE(d.contains({0.8, 0.8, 0.0}));
}

TEST_CASE("plane frame is orthonormal and canonical") {
    CHECK_THROWS_AS(Plane({1, 0, 0}, {1, 1, 0}, {0, 0, 0}), std::invalid_argument);
    for (int t = 0; t < 200; ++t) {
        const Vec3 n = random_unit();
        const double off = uniform(-0.9, 0.9);
        const Plane p = Plane::from_normal(n, off);
        CHECK(std::abs(dot(p.omega_R(), p.omega_I())) <= 1e-12);
        CHECK(std::abs(1.0 - norm(p.omega_R())) <= 1e-12);
        CHECK(std::abs(1.0 - norm(p.omega_I())) <= 1e-12);
        CHECK(norm(p.normal() - n) <= 1e-12);
        CHECK(p.signed_offset({}) == doctest::Approx(off).epsilon(1e-12));
        // base point is the closest point to the reference
        CHECK(norm(p.base_point() - off * n) <= 1e-12);
    }
    const Plane q({1, 0, 0}, {0, 1, 0}, {3.0, -2.0, 0.4});
    CHECK(norm(q.base_point() - Vec3{0, 0, 0.4}) <= 1e-14);
}

TEST_CASE("gamma curve") {
    const BallDomain d({0, 0, 0}, 1.0, 2.5, 64);
    auto g0 = gamma_curve(Plane::from_normal({0, 0, 1}, 0.0), d);
    REQUIRE(g0);
    CHECK(g0->radius == doctest::Approx(1.0));
    CHECK_FALSE(gamma_curve(Plane::from_normal({0, 0, 1}, 1.0), d));
    auto g6 = gamma_curve(Plane::from_normal({0, 1, 0}, 0.6), d);
    REQUIRE(g6);
    CHECK(g6->radius == doctest::Approx(std::sqrt(1.0 - 0.36)).epsilon(1e-14));
    CHECK(g6->radius == doctest::Approx(0.8).epsilon(1e-14));
    for (int t = 0; t < 200; ++t) {
        const Plane p = Plane::from_normal(random_unit(), uniform(-0.99, 0.99));
        auto g = gamma_curve(p, d);
        REQUIRE(g);
        const double dist = std::abs(p.signed_offset(d.center()));
        CHECK(std::abs(g->radius * g->radius + dist * dist - 1.0) <= 1e-12);
        CHECK(std::abs(norm(g->point(uniform(0, 7))) - 1.0) <= 1e-12);
    }
}

TEST_CASE("patch containing gamma") {
    const BallDomain d({0, 0, 0}, 1.0, 2.5, 64);
    CHECK_THROWS_AS(patch_containing_gamma(Plane::from_normal({0, 0, 1}, 0.0), d, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(patch_containing_gamma(Plane::from_normal({0, 0, 1}, 1.2), d, 0.1), std::invalid_argument);
    const SurfacePatch p0 = patch_containing_gamma(Plane::from_normal({0, 0, 1}, 0.0), d, 0.1);
    CHECK(p0.angular_radius == doctest::Approx(std::numbers::pi / 2 + 0.1));
    const SurfacePatch p9 = patch_containing_gamma(Plane::from_normal({1, 0, 0}, 0.9), d, 0.05);
    CHECK(p9.angular_radius == doctest::Approx(std::acos(0.9) + 0.05).epsilon(1e-14));
    CHECK(p9.angular_radius == doctest::Approx(0.5011).epsilon(1e-4));
    for (int t = 0; t < 50; ++t) {
        const Plane pl = Plane::from_normal(random_unit(), uniform(-0.95, 0.95));
        const SurfacePatch patch = patch_containing_gamma(pl, d, 0.05);
        const auto g = gamma_curve(pl, d);
        for (int k = 0; k < 64; ++k) CHECK(patch.contains(g->point(2 * std::numbers::pi * k / 64), d.center()));
    }
}

TEST_CASE("plane sampling") {
    const BallDomain d({0, 0, 0}, 1.0, 2.5, 64);
    const auto one = sample_planes(1, 1, d);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one[0].signed_offset({})) <= 1e-15);
    const auto fifty = sample_planes(10, 5, d);
    CHECK(fifty.size() == 50);
    for (const auto& p : fifty) CHECK(std::abs(p.signed_offset({})) < 1.0);
    CHECK(hemisphere_covering_radius(hemisphere_directions(200)) <= 0.25);
    const auto offs = plane_offsets(41, 1.0);
    CHECK(offs[20] == 0.0);
    CHECK(offs.front() == doctest::Approx(-20.0 / 21.0));
}

TEST_CASE("cap depth") {
    CHECK(cap_depth(0.0, 1.0) == 0.0);
    CHECK(cap_depth(1.0, 1.0) == 1.0);
    CHECK(cap_depth(0.6, 1.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK_THROWS_AS(cap_depth(1.1, 1.0), std::domain_error);
    for (int t = 0; t < 1000; ++t) {
        const double R = uniform(0.1, 3.0);
        const double r = uniform(0.0, R);
        CHECK(cap_depth(r, R) >= r * r / (2 * R) - 1e-15);
    }
}
