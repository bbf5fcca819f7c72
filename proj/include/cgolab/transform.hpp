#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgolab/fields.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

struct PlaneSample {
    Plane plane;
    cplx value;
};

/// Samples organized by direction: values[d * offsets.size() + j].
struct PlaneSampleSet {
    Vec3 center{};
    std::vector<Vec3> normals;
    std::vector<double> offsets;
    std::vector<cplx> values;

    cplx& at(std::size_t d, std::size_t j) { return values[d * offsets.size() + j]; }
    const cplx& at(std::size_t d, std::size_t j) const { return values[d * offsets.size() + j]; }
    std::vector<PlaneSample> to_list() const;
};

/// Groups a flat list into a direction x offset table; ragged sampling throws.
PlaneSampleSet organize_samples(const std::vector<PlaneSample>& samples, const Vec3& center);

/// Tensor quadrature with step h over the plane inside the box, trilinear sampling.
cplx plane_integral(const GridField& f, const Plane& plane);

/// Quadrature over the disc Pi cap Omega (Gauss-Legendre in radius, uniform angle),
/// sampling f with Lagrange interpolation of the given order (2 = trilinear).
cplx relative_plane_integral(const GridField& f, const Plane& plane, const BallDomain& dom, int order = 2);
cplx relative_plane_integral(const std::function<cplx(const Vec3&)>& f, const Plane& plane, const BallDomain& dom);

struct SlabResult {
    std::vector<double> eps;
    std::vector<cplx> values;
    cplx limit;
};

/// Slab averages (1/(2 eps)) int_{Omega, dist < eps} f; the limit is a least-squares polynomial
/// in eps^2 (degree up to 2) evaluated at 0.
SlabResult slab_estimate(const GridField& f, const Plane& plane, const BallDomain& dom,
                         const std::vector<double>& eps_list);

struct FbpOptions {
    bool apodize = true;
    int pad_factor = 4;
};

/// 3-D Radon inversion: second derivative in offset, hemisphere backprojection, -1/(4 pi^2) hemisphere weight.
GridField radon_invert_fbp(const PlaneSampleSet& samples, const BallDomain& dom, const Grid& grid,
                           const FbpOptions& opt = {});
GridField radon_invert_fbp(const std::vector<PlaneSample>& samples, const BallDomain& dom, const Grid& grid,
                           const FbpOptions& opt = {});

struct SupportRegion {
    Grid grid;
    std::vector<double> sdf;  // > 0 outside, <= 0 inside the estimate
    std::vector<Vec3> normals;
    std::vector<double> lower;  // per direction band edges
    std::vector<double> upper;
    bool empty = false;
    double max_radius = 0.0;       // max |x - c| over region points
    double certified_depth = 0.0;  // R - max_radius, 0 when the region reaches the boundary

    bool contains(std::size_t flat) const { return sdf[flat] <= 0.0; }
    std::size_t count() const;
};

/// Helgason-type localization: per direction, half-spaces beyond the outer runs of vanishing samples.
SupportRegion support_localize(const std::vector<PlaneSample>& samples, const BallDomain& dom, const Grid& grid,
                               double vanish_tol);

/// int_{Pi cap Omega} q z^k, z = (x - base).omega_R + i (x - base).omega_I.
cplx holomorphic_moment(const GridField& q, const Plane& plane, int k, const BallDomain& dom, int order = 2);
cplx holomorphic_moment(const std::function<cplx(const Vec3&)>& q, const Plane& plane, int k,
                        const BallDomain& dom);

/// CSV: nx,ny,nz,offset,re,im.
void write_plane_csv(const std::string& path, const std::vector<PlaneSample>& samples, const Vec3& center);

}  // namespace cgolab
