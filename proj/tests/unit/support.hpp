#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cgolab/fields.hpp"
#include "cgolab/geometry.hpp"

namespace testsupport {

using namespace cgolab;

inline std::mt19937_64& rng() {
    static std::mt19937_64 r(20240917);
    return r;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng()); }

inline Vec3 random_unit() {
    std::normal_distribution<double> nd;
    Vec3 v{nd(rng()), nd(rng()), nd(rng())};
    return normalized(v);
}

/// White complex noise.
inline GridField random_field(const Grid& g) {
    std::normal_distribution<double> nd;
    GridField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(nd(rng()), nd(rng()));
    return f;
}

/// Sum of a few random Gaussians, smooth and well inside the box.
inline GridField random_smooth_field(const Grid& g, int terms = 3) {
    struct T {
        Vec3 c;
        double w;
        cplx a;
    };
    std::vector<T> ts;
    for (int k = 0; k < terms; ++k)
        ts.push_back({{uniform(-0.4, 0.4), uniform(-0.4, 0.4), uniform(-0.4, 0.4)} , uniform(0.25, 0.45),
                      cplx(uniform(-1, 1), uniform(-1, 1))});
    return GridField::from_function(g, [&](const Vec3& x) {
        cplx s = 0.0;
        for (const auto& t : ts) s += t.a * std::exp(-dot(x - t.c, x - t.c) / (t.w * t.w));
        return s;
    });
}

/// Single lattice mode exp(i k.x) at signed indices m.
inline GridField lattice_mode(const Grid& g, int m1, int m2, int m3) {
    const Vec3 k{m1 * g.dual_spacing(), m2 * g.dual_spacing(), m3 * g.dual_spacing()};
    return GridField::from_function(g, [&](const Vec3& x) { return std::exp(cplx(0.0, dot(k, x))); });
}

inline double max_abs_diff(const GridField& a, const GridField& b) { return (a - b).max_abs(); }

}  // namespace testsupport
