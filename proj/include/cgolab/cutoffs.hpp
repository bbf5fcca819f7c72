#pragma once

#include <vector>

#include "cgolab/fields.hpp"

namespace cgolab {

enum class ProfileKind { exponential_bump, smoothstep };

struct BumpSpec {
    ProfileKind kind;
    double core_radius;
    double width;
    double normalization;
};

/// psi1(t) = c exp(-1/(1-t^2)) on |t| < 1 with int psi1^2 = 1.
struct Psi1 {
    double c;
    double operator()(double t) const;
    double derivative(double t) const;
    BumpSpec spec() const { return {ProfileKind::exponential_bump, 0.0, 1.0, c}; }
};

Psi1 make_psi1();

/// C-infinity monotone step: 0 for t <= 0, 1 for t >= 1, normalized integral of exp(-1/(u(1-u))).
double smoothstep(double t);
double smoothstep_derivative(double t);

/// chi1(x'') = delta^{-1/2} psi1((x'' - x0)/delta).
struct Chi1 {
    double delta;
    double x0;
    Psi1 psi;
    double operator()(double x3) const { return psi((x3 - x0) / delta) / std::sqrt(delta); }
    double second_derivative(double x3) const;
};

/// Throws when [x0 - delta, x0 + delta] leaves (-L, L).
Chi1 make_chi1(double delta, double x0pp, double half_width);

/// Radial planar cutoff: 1 on |x'| <= R_cut, 0 beyond R_cut + width.
struct Chi0 {
    double r_cut;
    double width;
    double c0;  // L2 norm over the plane
    double radial(double r) const { return 1.0 - smoothstep((r - r_cut) / width); }
    double operator()(double x1, double x2) const { return radial(std::hypot(x1, x2)); }
    BumpSpec spec() const { return {ProfileKind::smoothstep, r_cut, width, c0}; }
};

/// `domain_radius` is the Omega shadow radius the identity region must cover.
Chi0 make_chi0(double r_cut, double width, double domain_radius, double half_width);

/// chi3(x'') = psi3((x'' - x0)/delta): 1 on |t| <= 1, 0 for |t| >= 2.
struct Chi3 {
    double delta;
    double x0;
    double operator()(double x3) const;
};

Chi3 make_chi3(double delta, double x0pp, double half_width);

/// weight(z) chi0(x'), z = x1 + i x2, weight given by polynomial coefficients (constant first).
struct Chi0Holomorphic {
    Chi0 base;
    std::vector<cplx> weight;
    cplx operator()(double x1, double x2) const;
};

Chi0Holomorphic make_chi0_holomorphic(std::vector<cplx> weight, double r_cut, double width, double domain_radius,
                                      double half_width);

/// Samples a function of x3 only, or of (x1, x2) only, on the grid.
GridField sample_x3(const Grid& g, const std::function<double(double)>& fn);
GridField sample_x12(const Grid& g, const std::function<cplx(double, double)>& fn);

}  // namespace cgolab
