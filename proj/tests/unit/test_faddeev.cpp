#include <cmath>

#include "cgolab/faddeev.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cgolab;
using namespace testsupport;

namespace {

RhoParam rho_at(double s) { return RhoParam(Plane::from_normal({0, 0, 1}, 0.0), s, 1); }

// Coefficient of mode m in f (raw FFT, normalized).
cplx mode_coefficient(const GridField& f, int m1, int m2, int m3) {
    return to_spectrum(f).at(m1, m2, m3);
}

}  // namespace

TEST_CASE("rho parameter constraints") {
    const Plane p = Plane::from_normal({0, 0, 1}, 0.0);
    CHECK_THROWS_AS(RhoParam(p, 8, 1, 0.25, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(RhoParam(p, 8, 1, 0.15, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(RhoParam(p, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(RhoParam(p, 8, 0), std::invalid_argument);
    const RhoParam r(p, 8, -1);
    const CVec3 v = r.vector();
    const cplx rr = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    CHECK(std::abs(rr) <= 1e-12);
    CHECK(r.delta() == doctest::Approx(std::pow(8.0, -0.15)));
    CHECK(r.eps() == doctest::Approx(0.2));
}

TEST_CASE("symbol and distance to the characteristic circle") {
    CHECK(symbol_sigma({0, 0, 0}, 10.0) == cplx(0.0));
    CHECK(symbol_sigma({0, 10, 0}, 10.0) == cplx(100.0));
    CHECK(std::abs(symbol_sigma({1, 0, 0}, 10.0) - cplx(-1.0, -20.0)) <= 1e-14);
    CHECK(dist_sigma({0, 0, 0}, 5.0) == doctest::Approx(0.0));
    CHECK(dist_sigma({0, 10, 0}, 5.0) <= 1e-12);
    CHECK(dist_sigma({0, 5, 0}, 5.0) == doctest::Approx(5.0));
}

TEST_CASE("convention pin") {
    const Grid g(32, 2.5);
    const RhoParam rho = rho_at(8.0);
    for (int t = 0; t < 50; ++t) {
        const int m1 = uniform_int(-15, 15), m2 = uniform_int(-15, 15), m3 = uniform_int(-15, 15);
        const GridField f = lattice_mode(g, m1, m2, m3);
        const Vec3 k{m1 * g.dual_spacing(), m2 * g.dual_spacing(), m3 * g.dual_spacing()};
        const cplx ratio = mode_coefficient(apply_Delta_rho(f, rho), m1, m2, m3) / mode_coefficient(f, m1, m2, m3);
        const cplx expect = symbol_sigma(-k, rho);
        CHECK(std::abs(ratio - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
        // Against the conjugated Laplacian applied by hand: -|k|^2 + 2 i rho.k with rho = s(e1 + i e2).
        const cplx direct = -dot(k, k) + 2.0 * cplx(0, 1) * cplx(8.0 * k.x, 8.0 * k.y);
        CHECK(std::abs(ratio - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("Delta_rho kills constants and matches the conjugation oracle") {
    const Grid g(64, 2.5);
    const RhoParam rho = rho_at(6.0);
    CHECK(apply_Delta_rho(GridField(g, 1.0), rho).max_abs() <= 1e-10);
    // exp(-rho.x) Delta(exp(rho.x) f) with f a compact Gaussian, evaluated on |x| <= 0.8.
    const double w = 0.3;
    const GridField f = GridField::from_function(g, [&](const Vec3& x) { return cplx(std::exp(-dot(x, x) / (w * w))); });
    const GridField v = GridField::from_function(g, [&](const Vec3& x) {
        return std::exp(cplx(6.0 * x.x, 6.0 * x.y)) * std::exp(-dot(x, x) / (w * w));
    });
    const GridField lap_v = spectral_laplacian(v);
    const GridField lhs = apply_Delta_rho(f, rho);
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 x = g.point(i);
        if (dot(x, x) > 0.64) continue;
        const cplx rhs = std::exp(-cplx(6.0 * x.x, 6.0 * x.y)) * lap_v[i];
        err = std::max(err, std::abs(lhs[i] - rhs));
        ref = std::max(ref, std::abs(rhs));
    }
    CHECK(err / ref <= 1e-6);
}

TEST_CASE("projection onto the tube") {
    const Grid g(32, 2.5);
    const RhoParam rho = rho_at(8.0);
    const FaddeevOperators ops(g, rho);
    const auto& tube = ops.in_tube();
    std::size_t in = 0, out = 0;
    for (std::size_t i = 0; i < g.size() && (!in || !out); ++i) {
        if (tube[i] && !in) in = i;
        if (!tube[i] && !out) out = i;
    }
    REQUIRE(in);
    REQUIRE(out);
    auto mode_at = [&](std::size_t flat) {
        const int i = flat % g.n, j = (flat / g.n) % g.n, k = flat / (g.n * g.n);
        return lattice_mode(g, g.freq_index(i), g.freq_index(j), g.freq_index(k));
    };
    const GridField fin = mode_at(in), fout = mode_at(out);
    CHECK(max_abs_diff(ops.P(fin), fin) <= 1e-12);
    CHECK(ops.P(fout).max_abs() <= 1e-12);
    CHECK(ops.Gtilde(fin).max_abs() <= 1e-12);
    const Vec3 k = g.frequency(out);
    const GridField gout = ops.Gtilde(fout);
    CHECK(max_abs_diff(gout, (1.0 / symbol_sigma(-k, rho)) * fout) <= 1e-12);

    for (int t = 0; t < 10; ++t) {
        const GridField f = random_field(g), h = random_field(g);
        const GridField pf = ops.P(f);
        const double n2 = std::pow(norm_l2(f), 2);
        CHECK(std::abs(std::pow(norm_l2(pf), 2) + std::pow(norm_l2(f - pf), 2) - n2) <= 1e-10 * n2);
        CHECK(max_abs_diff(ops.P(pf), pf) <= 1e-12 * f.max_abs());
        CHECK(std::abs(inner(ops.P(f), h) - inner(f, ops.P(h))) <= 1e-12 * norm_l2(f) * norm_l2(h));
        CHECK(ops.P(ops.Gtilde(f)).max_abs() <= 1e-14 * f.max_abs());
    }
}

TEST_CASE("truncated inverse identity for every s in the sweep") {
    const Grid g(64, 2.5);
    for (double s : {6.0, 8.0, 12.0, 16.0, 24.0}) {
        const FaddeevOperators ops(g, rho_at(s));
        for (int t = 0; t < 3; ++t) {
            const GridField f = random_field(g);
            const GridField lhs = ops.Delta_rho(ops.Gtilde(f));
            CHECK(norm_l2(lhs - (f - ops.P(f))) <= 1e-9 * norm_l2(f));
        }
    }
}

TEST_CASE("regularized inverse") {
    const Grid g(32, 2.5);
    const RhoParam rho = rho_at(8.0);
    const FaddeevOperators ops(g, rho);
    CHECK(ops.G_reg(GridField(g), 0.008).max_abs() == 0.0);
    // Single mode with |sigma| = 5 is not available on every lattice; use any mode and its own |sigma|.
    const GridField m = lattice_mode(g, 3, 1, 2);
    const GridField back = ops.Delta_rho(ops.G_reg(m, 0.0));
    CHECK(max_abs_diff(back, m) <= 1e-12);
    const double tau = 1e-3 * 8.0;
    const GridField f = random_field(g);
    const GridField r = ops.Delta_rho(ops.G_reg(f, tau)) - f;
    double bound = 0.0;
    const auto& sig = ops.sigma();
    for (const cplx& v : sig) bound = std::max(bound, tau * tau / (std::norm(v) + tau * tau));
    CHECK(norm_l2(r) / norm_l2(f) <= bound + 1e-12);
    CHECK_THROWS_AS(ops.G_reg(f, 0.0), std::domain_error);  // f occupies the zero mode
}

TEST_CASE("symbol lower bounds at s = 12") {
    const Grid g(128, 2.5);
    const LowerBoundReport rep = check_lower_bounds(g, 12.0, 0.1);
    CHECK(rep.checked_inner > 0);
    CHECK(rep.checked_outer > 0);
    CHECK(rep.violations_inner == 0);
    CHECK(rep.violations_outer == 0);
}

TEST_CASE("lattice zero avoidance") {
    const Grid g(32, 2.5);
    bool moved = false;
    const RhoParam r = avoid_lattice_zeros(g, rho_at(g.dual_spacing() * 4), &moved);
    CHECK(moved);
    CHECK(r.s() != g.dual_spacing() * 4);
    CHECK(std::abs(r.s() / (g.dual_spacing() * 4) - 1.0) < 1e-4);
}
