#include <cmath>
#include <numbers>

#include "cgolab/cgo.hpp"
#include "cgolab/transform.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cgolab;
using namespace testsupport;

namespace {

const BallDomain kDom({0, 0, 0}, 1.0, 2.5, 128);
const double pi = std::numbers::pi;

std::vector<PlaneSample> sample_phantom(const Phantom& q, int dirs, int offsets, const BallDomain& dom = kDom) {
    std::vector<PlaneSample> out;
    for (const Plane& p : sample_planes(dirs, offsets, dom))
        out.push_back({p, relative_plane_integral([&](const Vec3& x) { return cplx(q(x)); }, p, dom)});
    return out;
}

double rel_l2_on_omega(const GridField& rec, const Phantom& q) {
    const GridField ref = sample_potential(q, rec.grid(), Frame::identity(), kDom);
    return norm_l2(rec - ref, kDom) / norm_l2(ref, kDom);
}

Vec3 argmax_point(const GridField& f) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i]) > std::abs(f[best])) best = i;
    return f.grid().point(best);
}

}  // namespace

TEST_CASE("plane integrals of a Gaussian and of the indicator") {
    const Grid g(kDom);
    const GridField gauss = GridField::from_function(g, [](const Vec3& x) { return cplx(std::exp(-dot(x, x))); });
    const GridField one(g, 1.0);
    for (int t = 0; t < 8; ++t) {
        const Vec3 n = random_unit();
        const double d = uniform(-0.95, 0.95);
        const Plane p = Plane::from_normal(n, d);
        CHECK(std::abs(plane_integral(gauss, p) - pi * std::exp(-d * d)) <= 5e-3);  // trilinear sampling, O(h^2)
        CHECK(std::abs(relative_plane_integral(one, p, kDom) - pi * (1 - d * d)) <= 1e-10);
        const auto exact = [](const Vec3& x) { return cplx(std::exp(-dot(x, x))); };
        // int_{disc} exp(-(d^2 + r^2)) = pi e^{-d^2} (1 - e^{-(1-d^2)})
        CHECK(std::abs(relative_plane_integral(exact, p, kDom) - pi * std::exp(-d * d) * (1 - std::exp(-(1 - d * d)))) <=
              1e-10);
    }
    const Plane miss = Plane::from_normal({0, 1, 0}, 1.2);
    CHECK(relative_plane_integral(one, miss, kDom) == cplx(0.0));
}

TEST_CASE("slab estimate") {
    const Grid g(kDom);
    const GridField one(g, 1.0);
    const Plane p = Plane::from_normal({0, 0, 1}, 0.0);
    const SlabResult r = slab_estimate(one, p, kDom, {0.1});
    CHECK(std::abs(r.values[0] - pi * (1 - 0.01 / 3)) <= 0.02 * pi);

    // Resolved Gaussian against the disc quadrature.
    const GridField gauss = GridField::from_function(g, [](const Vec3& x) { return cplx(std::exp(-dot(x, x) / 0.09)); });
    const double h = g.spacing();
    for (double d : {0.0, 0.2, -0.35}) {
        const Plane pl = Plane::from_normal(normalized(Vec3{0.2, -0.5, 0.8}), d);
        const SlabResult s = slab_estimate(gauss, pl, kDom, {4 * h, 3.5 * h, 3 * h, 2.5 * h, 2 * h});
        const cplx ref = relative_plane_integral(gauss, pl, kDom, 8);
        CHECK(std::abs(s.limit - ref) <= 0.005 * std::abs(ref));
    }
    CHECK_THROWS_AS(slab_estimate(one, p, kDom, {}), std::invalid_argument);
}

TEST_CASE("FBP of zero data and linearity") {
    const Grid g(64, 2.5);
    const BallDomain dom({0, 0, 0}, 1.0, 2.5, 64);
    std::vector<PlaneSample> zero;
    for (const Plane& p : sample_planes(30, 11, dom)) zero.push_back({p, 0.0});
    CHECK(radon_invert_fbp(zero, dom, g).max_abs() == 0.0);

    auto a = zero, b = zero, c = zero;
    const cplx alpha(0.7, -0.3);
    for (std::size_t i = 0; i < zero.size(); ++i) {
        a[i].value = cplx(uniform(-1, 1), uniform(-1, 1));
        b[i].value = cplx(uniform(-1, 1), uniform(-1, 1));
        c[i].value = alpha * a[i].value + b[i].value;
    }
    const GridField lhs = radon_invert_fbp(c, dom, g);
    const GridField rhs = alpha * radon_invert_fbp(a, dom, g) + radon_invert_fbp(b, dom, g);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-10 * rhs.max_abs());
}

TEST_CASE("FBP recovers a Gaussian") {
    const Grid g(kDom);
    const Phantom q = gaussian_phantom({0, 0, 0}, 0.25);
    const GridField rec = radon_invert_fbp(sample_phantom(q, 200, 41), kDom, g);
    const double err = rel_l2_on_omega(rec, q);
    MESSAGE("FBP relative error " << err);
    CHECK(err <= 0.10);

    const Vec3 c{0.2, -0.1, 0.15};
    const GridField shifted = radon_invert_fbp(sample_phantom(gaussian_phantom(c, 0.25), 200, 41), kDom, g);
    CHECK(norm(argmax_point(shifted) - c) <= 2 * g.spacing());
}

TEST_CASE("support localization") {
    const Grid g(64, 2.5);
    const BallDomain dom({0, 0, 0}, 1.0, 2.5, 64);

    std::vector<PlaneSample> zero;
    for (const Plane& p : sample_planes(30, 21, dom)) zero.push_back({p, 0.0});
    const SupportRegion none = support_localize(zero, dom, g, 1e-6);
    CHECK(none.empty);
    CHECK(none.count() == 0);

    const double tol = 1e-3;
    const Phantom gauss = gaussian_phantom({0, 0, 0}, 0.3);
    const auto samples = sample_phantom(gauss, 50, 41, dom);
    double vmax = 0.0;
    for (const auto& s : samples) vmax = std::max(vmax, std::abs(s.value));
    const SupportRegion reg = support_localize(samples, dom, g, tol * vmax);
    CHECK_FALSE(reg.empty);
    CHECK(reg.max_radius <= 0.3 * std::sqrt(std::log(1.0 / tol)) + 3 * g.spacing());
    for (std::size_t i = 0; i < g.size(); ++i)
        if (dom.contains(g.point(i)) && gauss(g.point(i)) >= 0.5) REQUIRE(reg.contains(i));

    // Two separated bumps: the estimate spans both.
    const Phantom two = sum(bump_phantom({-0.5, 0, 0}, 0.2), bump_phantom({0.5, 0, 0}, 0.2));
    const SupportRegion hull = support_localize(sample_phantom(two, 50, 41, dom), dom, g, 1e-12);
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (hull.contains(i)) {
            lo = std::min(lo, g.point(i).x);
            hi = std::max(hi, g.point(i).x);
        }
    CHECK(hi - lo >= 1.0 - 3 * g.spacing());
}

TEST_CASE("holomorphic moments") {
    const Plane p = Plane::from_normal(normalized(Vec3{1, 1, 0}), 0.0);
    const auto one = [](const Vec3&) { return cplx(1.0); };
    CHECK(std::abs(holomorphic_moment(one, p, 0, kDom) - pi) <= 1e-10);
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(holomorphic_moment(one, p, k, kDom)) <= 1e-10);
    const auto gauss = [](const Vec3& x) { return cplx(std::exp(-dot(x, x) / 0.09)); };
    CHECK(std::abs(holomorphic_moment(gauss, p, 0, kDom) - relative_plane_integral(gauss, p, kDom)) <= 1e-14);
}

TEST_CASE("plane frames and sample organization") {
    for (int t = 0; t < 100; ++t) {
        const Plane p = Plane::from_normal(random_unit(), uniform(-1, 1));
        CHECK(std::abs(dot(p.omega_R(), p.omega_I())) <= 1e-14);
        CHECK(std::abs(norm(p.omega_R()) - 1.0) <= 1e-14);
        CHECK(std::abs(norm(p.omega_I()) - 1.0) <= 1e-14);
    }
    const BallDomain dom({0, 0, 0}, 1.0, 2.5, 64);
    std::vector<PlaneSample> s;
    for (const Plane& p : sample_planes(6, 5, dom)) s.push_back({p, 1.0});
    const PlaneSampleSet set = organize_samples(s, dom.center());
    CHECK(set.normals.size() == 6);
    CHECK(set.offsets.size() == 5);
    s.pop_back();
    CHECK_THROWS_AS(organize_samples(s, dom.center()), std::invalid_argument);
}
