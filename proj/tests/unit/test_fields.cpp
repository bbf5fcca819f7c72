#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "cgolab/quadrature.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cgolab;
using namespace testsupport;

TEST_CASE("spectrum of constant and pure modes") {
    const Grid g(32, 2.5);
    const Spectrum F = to_spectrum(GridField(g, cplx(2.0, -1.0)));
    for (std::size_t i = 1; i < F.size(); ++i) CHECK(std::abs(F[i]) <= 1e-12);
    CHECK(std::abs(F.at(0, 0, 0)) > 1.0);

    const Spectrum M = to_spectrum(lattice_mode(g, 3, -2, 5));
    for (int a = -16; a < 16; ++a)
        for (int b = -16; b < 16; ++b)
            for (int c = -16; c < 16; ++c)
                if (!(a == 3 && b == -2 && c == 5)) REQUIRE(std::abs(M.at(a, b, c)) <= 1e-10);
    CHECK(std::abs(M.at(3, -2, 5)) > 1.0);
}

TEST_CASE("round trip and Parseval") {
    const Grid g(32, 2.5);
    for (int t = 0; t < 100; ++t) {
        const GridField f = random_field(g);
        const Spectrum F = to_spectrum(f);
        const double n2 = std::pow(norm_l2(f), 2);
        CHECK(std::abs(n2 - F.energy()) <= 1e-10 * n2);
        if (t < 10) CHECK(max_abs_diff(to_field(F), f) <= 1e-12 * f.max_abs() * 10);
    }
}

TEST_CASE("norms and inner products") {
    const Grid g(64, 2.5);
    CHECK(norm_l2(GridField(g)) == 0.0);
    const BallDomain unit({0, 0, 0}, 1.0, 2.5, 64);
    const double ball = norm_l2(GridField(g, 1.0), unit);
    CHECK(std::abs(ball - std::sqrt(4 * std::numbers::pi / 3)) <= 2 * g.spacing());
    const Grid g128(128, 2.5);
    const GridField gauss = GridField::from_function(g128, [](const Vec3& x) { return cplx(std::exp(-dot(x, x))); });
    CHECK(std::abs(norm_l2(gauss) - std::pow(std::numbers::pi / 2, 0.75)) <= 1e-3);

    const GridField f = random_field(g), h = random_field(g);
    CHECK(std::abs(inner(f, f) - std::pow(norm_l2(f), 2)) <= 1e-12 * std::pow(norm_l2(f), 2));
    CHECK(std::abs(inner(lattice_mode(g, 1, 2, 3), lattice_mode(g, 1, 2, 4))) <= 1e-12);
    CHECK(std::abs(inner(f, h) - std::conj(inner(h, f))) <= 1e-12 * norm_l2(f) * norm_l2(h));
    CHECK_THROWS_AS(inner(f, GridField(Grid(32, 2.5))), std::invalid_argument);
}

TEST_CASE("spectral derivatives") {
    const Grid g(64, 2.5);
    const GridField one(g, 1.0);
    CHECK(spectral_derivative(one, {1, 0, 0}).max_abs() <= 1e-12);
    const GridField m = lattice_mode(g, 4, 0, -3);
    const GridField d1 = spectral_derivative(m, {1, 0, 0});
    CHECK(max_abs_diff(d1, cplx(0.0, 4 * g.dual_spacing()) * m) <= 1e-11);

    const Grid g128(128, 2.5);
    const double a = 4.0;  // exp(-a r^2), Laplacian (4 a^2 r^2 - 6 a) exp(-a r^2)
    const GridField f = GridField::from_function(g128, [&](const Vec3& x) { return cplx(std::exp(-a * dot(x, x))); });
    const GridField lap = spectral_laplacian(f);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g128.size(); ++i) {
        const Vec3 x = g128.point(i);
        const double r2 = dot(x, x);
        if (r2 > 1.0) continue;
        const double exact = (4 * a * a * r2 - 6 * a) * std::exp(-a * r2);
        err = std::max(err, std::abs(lap[i] - exact));
        ref = std::max(ref, std::abs(exact));
    }
    CHECK(err / ref <= 1e-6);
}

TEST_CASE("operators are linear") {
    const Grid g(32, 2.5);
    const GridField f = random_field(g), h = random_field(g);
    const cplx a(0.3, -1.2), b(-2.0, 0.5);
    const GridField lhs = spectral_derivative(a * f + b * h, {0, 1, 1});
    const GridField rhs = a * spectral_derivative(f, {0, 1, 1}) + b * spectral_derivative(h, {0, 1, 1});
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * rhs.max_abs() * 100);
}

TEST_CASE("interpolation reproduces low-degree polynomials") {
    const Grid g(32, 2.5);
    const GridField lin = GridField::from_function(g, [](const Vec3& x) { return cplx(1 + 2 * x.x - x.y + 0.5 * x.z); });
    for (int t = 0; t < 50; ++t) {
        const Vec3 y{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
        const double exact = 1 + 2 * y.x - y.y + 0.5 * y.z;
        CHECK(std::abs(interp_trilinear(lin, y) - exact) <= 1e-12);
        CHECK(std::abs(interp_lagrange(lin, y, 8) - exact) <= 1e-11);
    }
}

TEST_CASE("dump format") {
    const Grid g(32, 2.5);
    const GridField f = random_field(g);
    const std::string path = "test_field_dump.bin";
    write_field_dump(path, f);
    std::ifstream is(path, std::ios::binary);
    std::string header;
    std::getline(is, header);
    CHECK(header.find("\"n\":3") != std::string::npos);
    CHECK(header.find("\"N\":32") != std::string::npos);
    CHECK(header.find("\"kind\":\"grid\"") != std::string::npos);
    double first[2];
    is.read(reinterpret_cast<char*>(first), sizeof first);
    CHECK(first[0] == f[0].real());
    CHECK(first[1] == f[0].imag());
    const GridField back = read_field_dump(path);
    CHECK(back.grid() == g);
    CHECK(max_abs_diff(back, f) == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("gauss-legendre rule") {
    const GaussRule r = gauss_legendre(12);
    double s = 0, m4 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        s += r.weights[i];
        m4 += r.weights[i] * std::pow(r.nodes[i], 4);
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m4 == doctest::Approx(0.4).epsilon(1e-14));
}
