#include "cgolab/boundary.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "cgolab/quadrature.hpp"

namespace cgolab {

BoundaryMesh make_sphere_mesh(const BallDomain& dom, int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 3) throw std::invalid_argument("make_sphere_mesh: need n_theta >= 2, n_phi >= 3");
    BoundaryMesh mesh;
    mesh.center = dom.center();
    mesh.radius = dom.radius();
    mesh.n_theta = n_theta;
    mesh.n_phi = n_phi;
    const GaussRule rule = gauss_legendre(n_theta);
    const double R = dom.radius();
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    for (int a = 0; a < n_theta; ++a) {
        const double ct = rule.nodes[a];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int b = 0; b < n_phi; ++b) {
            // Half-step rotation between rings avoids aligned nodes.
            const double phi = (b + 0.5 * (a % 2)) * dphi;
            const Vec3 n{st * std::cos(phi), st * std::sin(phi), ct};
            mesh.normals.push_back(normalized(n));
            mesh.nodes.push_back(dom.center() + R * mesh.normals.back());
            mesh.weights.push_back(R * R * rule.weights[a] * dphi);
        }
    }
    return mesh;
}

CauchyData extract_cauchy(const GridField& v, const BoundaryMesh& mesh, const Frame& frame, int interp_order) {
    const Grid& g = v.grid();
    const double h = g.spacing();
    const double reach = 3.0 * h + 0.5 * interp_order * h;
    auto sample = [&](const Vec3& y) {
        return interp_order == 2 ? interp_trilinear(v, y) : interp_lagrange(v, y, interp_order);
    };
    CauchyData cd;
    cd.trace.resize(mesh.size());
    cd.normal_derivative.resize(mesh.size());
    static constexpr double c[3] = {45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0};
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const Vec3 y = frame.to_local(mesh.nodes[i]);
        const Vec3 n = frame.direction_to_local(mesh.normals[i]);
        for (int d = 0; d < 3; ++d)
            if (std::abs(y[d]) + reach >= g.half_width)
                throw std::invalid_argument("extract_cauchy: boundary node too close to the box edge for the stencil");
        cd.trace[i] = sample(y);
        cplx dn = 0.0;
        for (int k = 1; k <= 3; ++k) dn += c[k - 1] * (sample(y + (k * h) * n) - sample(y - (k * h) * n));
        cd.normal_derivative[i] = dn / h;
    }
    return cd;
}

CauchyComparison cauchy_equal_on(const CauchyData& a, const CauchyData& b, const BoundaryMesh& mesh,
                                 const SurfacePatch& patch, double tol_trace, double tol_deriv) {
    if (a.trace.size() != mesh.size() || b.trace.size() != mesh.size())
        throw std::invalid_argument("cauchy_equal_on: data does not match the mesh");
    CauchyComparison cmp;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (!patch.contains(mesh.nodes[i], mesh.center)) continue;
        ++cmp.nodes_in_patch;
        cmp.max_trace_dev = std::max(cmp.max_trace_dev, std::abs(a.trace[i] - b.trace[i]));
        cmp.max_deriv_dev = std::max(cmp.max_deriv_dev, std::abs(a.normal_derivative[i] - b.normal_derivative[i]));
    }
    if (cmp.nodes_in_patch == 0) throw std::invalid_argument("cauchy_equal_on: patch contains no mesh nodes");
    cmp.equal = cmp.max_trace_dev <= tol_trace && cmp.max_deriv_dev <= tol_deriv;
    return cmp;
}

cplx I_boundary(const CauchyData& a, const CauchyData& b, const BoundaryMesh& mesh) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        s += mesh.weights[i] * (a.normal_derivative[i] * b.trace[i] - a.trace[i] * b.normal_derivative[i]);
    return s;
}

cplx I_volume(const GridField& q1, const GridField& q2, const GridField& v1, const GridField& v2,
              const BallDomain& mask) {
    const Grid& g = v1.grid();
    if (!(q1.grid() == g && q2.grid() == g && v2.grid() == g)) throw std::invalid_argument("I_volume: grid mismatch");
    const double r2 = mask.radius() * mask.radius();
    cplx s = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i, ++idx) {
                const Vec3 d = g.point(i, j, k) - mask.center();
                if (dot(d, d) > r2) continue;
                s += (q2[idx] - q1[idx]) * v1[idx] * v2[idx];
            }
    return s * std::pow(g.spacing(), 3);
}

cplx I_conjugated(const CauchyData& u1, const CauchyData& u2, const CVec3& rho, const BoundaryMesh& mesh) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const cplx rn = dot(rho, mesh.normals[i]);
        s += mesh.weights[i] * (u1.normal_derivative[i] * u2.trace[i] - u1.trace[i] * u2.normal_derivative[i] +
                                2.0 * rn * u1.trace[i] * u2.trace[i]);
    }
    return s;
}

double trace_norm(const CauchyData& cd, const BoundaryMesh& mesh) {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) s += mesh.weights[i] * std::norm(cd.trace[i]);
    return std::sqrt(s);
}

void write_cauchy_csv(const std::string& path, const BoundaryMesh& mesh, const CauchyData& cd) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "x,y,z,nx,ny,nz,weight,re_trace,im_trace,re_dn,im_dn\n";
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const Vec3& x = mesh.nodes[i];
        const Vec3& n = mesh.normals[i];
        os << x.x << ',' << x.y << ',' << x.z << ',' << n.x << ',' << n.y << ',' << n.z << ',' << mesh.weights[i]
           << ',' << cd.trace[i].real() << ',' << cd.trace[i].imag() << ',' << cd.normal_derivative[i].real() << ','
           << cd.normal_derivative[i].imag() << '\n';
    }
}

}  // namespace cgolab
