#pragma once

#include <string>
#include <vector>

#include "cgolab/fields.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

/// Gauss-Legendre (in cos theta) x uniform (in phi) product mesh on the sphere.
struct BoundaryMesh {
    Vec3 center;
    double radius = 0.0;
    int n_theta = 0;
    int n_phi = 0;
    std::vector<Vec3> nodes;
    std::vector<Vec3> normals;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

BoundaryMesh make_sphere_mesh(const BallDomain& dom, int n_theta, int n_phi);

struct CauchyData {
    std::vector<cplx> trace;
    std::vector<cplx> normal_derivative;
};

/// Trace by tensor Lagrange interpolation, normal derivative by a 6th-order central
/// difference with step h. `frame` maps world points to grid coordinates.
CauchyData extract_cauchy(const GridField& v, const BoundaryMesh& mesh, const Frame& frame = Frame::identity(),
                          int interp_order = 8);

struct CauchyComparison {
    bool equal = false;
    double max_trace_dev = 0.0;
    double max_deriv_dev = 0.0;
    std::size_t nodes_in_patch = 0;
};

CauchyComparison cauchy_equal_on(const CauchyData& a, const CauchyData& b, const BoundaryMesh& mesh,
                                 const SurfacePatch& patch, double tol_trace, double tol_deriv);

/// sum w (dn v1 v2 - v1 dn v2).
cplx I_boundary(const CauchyData& a, const CauchyData& b, const BoundaryMesh& mesh);

/// int_Omega (q2 - q1) v1 v2 (no conjugation); `mask` in the grid's coordinates.
cplx I_volume(const GridField& q1, const GridField& q2, const GridField& v1, const GridField& v2,
              const BallDomain& mask);

/// Boundary form for conjugated factors: sum w (dn u1 u2 - u1 dn u2 + 2 (rho.n) u1 u2), rho in world coordinates.
cplx I_conjugated(const CauchyData& u1, const CauchyData& u2, const CVec3& rho, const BoundaryMesh& mesh);

/// Mesh-wide L2 norm of a trace.
double trace_norm(const CauchyData& cd, const BoundaryMesh& mesh);

/// CSV: x,y,z,nx,ny,nz,weight,re_trace,im_trace,re_dn,im_dn.
void write_cauchy_csv(const std::string& path, const BoundaryMesh& mesh, const CauchyData& cd);

}  // namespace cgolab
