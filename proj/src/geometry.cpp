#include "cgolab/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cgolab {

BallDomain::BallDomain(Vec3 center, double radius, double half_width, int n)
    : center_(center), radius_(radius), half_width_(half_width), n_(n) {
    if (!(radius > 0.0)) throw std::invalid_argument("BallDomain: radius must be positive");
    if (!(radius < half_width)) throw std::invalid_argument("BallDomain: ball must fit strictly inside the box (R < L)");
    if (half_width < 2.0 * radius)
        throw std::invalid_argument("BallDomain: padding guard violated, need L >= 2 R (L = " +
                                    std::to_string(half_width) + ", R = " + std::to_string(radius) + ")");
    if (n < 32 || n % 2 != 0) throw std::invalid_argument("BallDomain: N must be an even integer >= 32");
    for (int i = 0; i < 3; ++i)
        if (std::abs(center[i]) + radius >= half_width)
            throw std::invalid_argument("BallDomain: ball leaves the box");
}

bool BallDomain::contains(const Vec3& x) const {
    const Vec3 d = x - center_;
    return dot(d, d) <= radius_ * radius_;
}

Plane::Plane(Vec3 omega_R, Vec3 omega_I, Vec3 point, Vec3 reference) : omega_R_(omega_R), omega_I_(omega_I) {
    constexpr double tol = 1e-12;
    if (std::abs(norm(omega_R) - 1.0) > tol || std::abs(norm(omega_I) - 1.0) > tol)
        throw std::invalid_argument("Plane: frame vectors must be unit length");
    if (std::abs(dot(omega_R, omega_I)) > tol) throw std::invalid_argument("Plane: frame vectors must be orthogonal");
    const Vec3 n = cross(omega_R, omega_I);
    base_point_ = reference + dot(n, point - reference) * n;
}

Plane Plane::from_normal(Vec3 normal, double offset, Vec3 reference) {
    const Vec3 n = normalized(normal);
    // Cross with the axis least aligned with n.
    Vec3 axis{1, 0, 0};
    if (std::abs(n.y) <= std::abs(n.x) && std::abs(n.y) <= std::abs(n.z))
        axis = {0, 1, 0};
    else if (std::abs(n.z) <= std::abs(n.x) && std::abs(n.z) <= std::abs(n.y))
        axis = {0, 0, 1};
    Vec3 wr = normalized(cross(axis, n));
    Vec3 wi = cross(n, wr);
    // Re-orthonormalize to keep the invariants at 1e-12.
    wi = normalized(wi - dot(wi, wr) * wr);
    return Plane(wr, wi, reference + offset * n, reference);
}

Plane Plane::in_frame(const Frame& f) const {
    return Plane(f.direction_to_local(omega_R_), f.direction_to_local(omega_I_), f.to_local(base_point_),
                 f.to_local(base_point_));
}

bool SurfacePatch::contains(const Vec3& x, const Vec3& center) const {
    const Vec3 d = x - center;
    const double c = std::clamp(dot(normalized(d), center_direction), -1.0, 1.0);
    return std::acos(c) < angular_radius;
}

Vec3 Circle::point(double angle) const { return center + radius * (std::cos(angle) * u + std::sin(angle) * v); }

std::optional<Circle> gamma_curve(const Plane& plane, const BallDomain& dom) {
    const double d = plane.signed_offset(dom.center());
    const double R = dom.radius();
    if (std::abs(d) >= R) return std::nullopt;
    const Vec3 c = dom.center() + d * plane.normal();
    return Circle{c, std::sqrt(R * R - d * d), plane.omega_R(), plane.omega_I()};
}

SurfacePatch patch_containing_gamma(const Plane& plane, const BallDomain& dom, double margin) {
    if (!(margin > 0.0)) throw std::invalid_argument("patch_containing_gamma: margin must be positive");
    if (!gamma_curve(plane, dom)) throw std::invalid_argument("patch_containing_gamma: plane misses the domain");
    const double d = plane.signed_offset(dom.center());
    const Vec3 foot = d >= 0.0 ? plane.normal() : -plane.normal();
    const double half_angle = std::acos(std::abs(d) / dom.radius());
    return {foot, std::min(half_angle + margin, std::numbers::pi)};
}

std::vector<Vec3> hemisphere_directions(int count) {
    if (count < 1) throw std::invalid_argument("hemisphere_directions: count must be >= 1");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (i + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        out.push_back(normalized(Vec3{r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
}

std::vector<double> plane_offsets(int count, double radius) {
    if (count < 1 || count % 2 == 0) throw std::invalid_argument("plane_offsets: count must be odd and >= 1");
    std::vector<double> out(count);
    const double step = 2.0 * radius / (count + 1);
    const int mid = count / 2;
    for (int j = 0; j < count; ++j) out[j] = (j - mid) * step;
    return out;
}

std::vector<Plane> sample_planes(int dirs, int offsets, const BallDomain& dom) {
    const auto normals = hemisphere_directions(dirs);
    const auto offs = plane_offsets(offsets, dom.radius());
    std::vector<Plane> planes;
    planes.reserve(static_cast<std::size_t>(dirs) * offsets);
    for (const auto& n : normals)
        for (double p : offs) planes.push_back(Plane::from_normal(n, p, dom.center()));
    return planes;
}

double hemisphere_covering_radius(const std::vector<Vec3>& dirs, int probes) {
    const auto probe_dirs = hemisphere_directions(probes);
    double worst = 0.0;
    for (const auto& p : probe_dirs) {
        double best = 0.0;
        for (const auto& d : dirs) best = std::max(best, std::abs(dot(p, d)));
        worst = std::max(worst, std::acos(std::clamp(best, -1.0, 1.0)));
    }
    return worst;
}

double cap_depth(double r, double R) {
    if (r < 0.0 || r > R) throw std::domain_error("cap_depth: need 0 <= r <= R");
    return R - std::sqrt(R * R - r * r);
}

}  // namespace cgolab
