#pragma once

#include <optional>
#include <vector>

#include "cgolab/vec3.hpp"

namespace cgolab {

/// Closed ball Omega inside the periodic box [-L, L)^3 sampled with N points per axis.
class BallDomain {
public:
    BallDomain(Vec3 center, double radius, double half_width, int n);

    const Vec3& center() const { return center_; }
    double radius() const { return radius_; }
    double half_width() const { return half_width_; }
    int n() const { return n_; }
    double spacing() const { return 2.0 * half_width_ / n_; }

    bool contains(const Vec3& x) const;

    /// Same ball expressed in a frame whose origin is the ball center.
    BallDomain centered() const { return BallDomain(Vec3{}, radius_, half_width_, n_); }

private:
    Vec3 center_;
    double radius_;
    double half_width_;
    int n_;
};

/// Affine two-plane base_point + span{omega_R, omega_I}.
class Plane {
public:
    /// Builds a plane through `point`; the stored base point is the point of the
    /// plane closest to `reference` (normally the domain center).
    Plane(Vec3 omega_R, Vec3 omega_I, Vec3 point, Vec3 reference = {});

    /// Plane {x : n.(x - reference) = offset} with a deterministic in-plane frame.
    static Plane from_normal(Vec3 normal, double offset, Vec3 reference = {});

    const Vec3& omega_R() const { return omega_R_; }
    const Vec3& omega_I() const { return omega_I_; }
    const Vec3& base_point() const { return base_point_; }
    Vec3 normal() const { return cross(omega_R_, omega_I_); }

    /// Signed distance n.(base - reference).
    double signed_offset(const Vec3& reference) const { return dot(normal(), base_point_ - reference); }
    double distance_to(const Vec3& x) const { return std::abs(dot(normal(), x - base_point_)); }

    /// Frame (origin, omega_R, omega_I, normal).
    Frame frame() const { return {base_point_, omega_R_, omega_I_, normal()}; }

    /// The same plane with coordinates expressed in `f`.
    Plane in_frame(const Frame& f) const;

private:
    Vec3 omega_R_;
    Vec3 omega_I_;
    Vec3 base_point_;
};

/// Geodesic cap on the sphere boundary of a ball.
struct SurfacePatch {
    Vec3 center_direction;
    double angular_radius;

    /// Strict interior membership for a point on (or near) the sphere around `center`.
    bool contains(const Vec3& x, const Vec3& center) const;
};

struct Circle {
    Vec3 center;
    double radius;
    Vec3 u;  // in-plane orthonormal pair
    Vec3 v;

    Vec3 point(double angle) const;
};

/// gamma_Pi = Pi intersected with the sphere; empty when the plane misses or is tangent.
std::optional<Circle> gamma_curve(const Plane& plane, const BallDomain& dom);

/// Cap about the normal-foot direction covering gamma_Pi with an angular margin.
SurfacePatch patch_containing_gamma(const Plane& plane, const BallDomain& dom, double margin);

/// Fibonacci-lattice hemisphere normals.
std::vector<Vec3> hemisphere_directions(int count);

/// Signed offsets -R + (j+1) 2R/(count+1), j = 0..count-1.
std::vector<double> plane_offsets(int count, double radius);

/// dirs x offsets planes, direction-major.
std::vector<Plane> sample_planes(int dirs, int offsets, const BallDomain& dom);

/// Largest angle from any unit vector to the nearest direction (antipodes identified),
/// estimated on a dense probe set.
double hemisphere_covering_radius(const std::vector<Vec3>& dirs, int probes = 20000);

/// Depth R - sqrt(R^2 - r^2) cut from a ball of radius R by a plane whose circle has radius r.
double cap_depth(double r, double R);

}  // namespace cgolab
