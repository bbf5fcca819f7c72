#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace cgolab {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double a) {
        x *= a;
        y *= a;
        z *= a;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

/// Complex 3-vector, used for rho on the null cone.
using CVec3 = std::array<cplx, 3>;

inline cplx dot(const CVec3& a, const Vec3& b) { return a[0] * b.x + a[1] * b.y + a[2] * b.z; }

/// Orthonormal right-handed frame with an origin. Local coordinates y are
/// related to world coordinates x by x = origin + y1 e1 + y2 e2 + y3 e3.
struct Frame {
    Vec3 origin{};
    Vec3 e1{1, 0, 0};
    Vec3 e2{0, 1, 0};
    Vec3 e3{0, 0, 1};

    Vec3 to_local(const Vec3& x) const {
        const Vec3 d = x - origin;
        return {dot(e1, d), dot(e2, d), dot(e3, d)};
    }
    Vec3 to_world(const Vec3& y) const { return origin + y.x * e1 + y.y * e2 + y.z * e3; }
    Vec3 direction_to_local(const Vec3& v) const { return {dot(e1, v), dot(e2, v), dot(e3, v)}; }
    Vec3 direction_to_world(const Vec3& v) const { return v.x * e1 + v.y * e2 + v.z * e3; }

    static Frame identity() { return {}; }
};

}  // namespace cgolab
