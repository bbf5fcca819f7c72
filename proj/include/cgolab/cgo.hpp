#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cgolab/cutoffs.hpp"
#include "cgolab/faddeev.hpp"
#include "cgolab/fields.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

/// One smooth term of a test potential.
struct PhantomTerm {
    enum class Kind { gaussian, bump };
    Kind kind = Kind::gaussian;
    Vec3 center{};
    double width = 0.25;  // gaussian: a exp(-|x-c|^2/w^2); bump: support radius
    double amplitude = 1.0;
};

/// Analytic potential, restricted to Omega when sampled on a grid.
struct Phantom {
    std::string name = "zero";
    std::vector<PhantomTerm> terms;

    double operator()(const Vec3& x) const;
    bool is_zero() const { return terms.empty(); }
    /// Radius of a ball about `c` outside which every bump term vanishes (infinite for gaussians).
    double support_radius(const Vec3& c) const;
};

Phantom zero_phantom();
Phantom gaussian_phantom(Vec3 center, double width, double amplitude = 1.0, std::string name = "gaussian");
Phantom bump_phantom(Vec3 center, double radius, double amplitude = 1.0, std::string name = "bump");
Phantom sum(const Phantom& a, const Phantom& b, double scale_b = 1.0);

/// Samples q(frame.to_world(y)) on the local grid, zero outside the ball.
GridField sample_potential(const Phantom& q, const Grid& g, const Frame& frame, const BallDomain& dom);
/// Resamples a world-grid potential into a local frame with trilinear interpolation.
GridField resample_potential(const GridField& q_world, const Frame& frame, const BallDomain& dom);

struct CutoffParams {
    double r_cut_factor = 1.1;  // R_cut = factor R
    double width_factor = 0.3;  // width = factor R
    std::vector<cplx> holomorphic_weight;  // empty: plain chi0
};

/// Everything needed to build a CGO for one (plane, s, sign) in its plane-adapted frame.
struct CgoContext {
    BallDomain dom;        // world domain
    BallDomain local_dom;  // same ball centered at the local origin
    Grid grid;
    RhoParam rho;
    Frame frame;
    Plane local_plane;
    double x0pp;
    Chi0 chi0;
    Chi1 chi1;
    Chi3 chi3;
    std::vector<cplx> weight;
};

CgoContext make_context(const BallDomain& dom, const RhoParam& rho, const CutoffParams& cut = {});

GridField build_u0(const CgoContext& ctx);

struct R0Result {
    GridField r0;
    double slab_gap = 0.0;       // max |r0 - (chi0 chi1'' + q u0)| / max |chi0 chi1'' + q u0| on |x'| <= R_cut
    double norm_inside = 0.0;    // ||r0|| over |x'| <= R_cut
    double norm_annulus = 0.0;   // ||r0|| over R_cut < |x'| < R_cut + width
    double norm_outside = 0.0;   // ||r0|| beyond the annulus
};

R0Result residual_r0(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0, const GridField& q);

/// u1 = -chi3 Gtilde((Delta_rho + q) u0).
GridField build_u1(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0, const GridField& q);

struct NormReport {
    double p_norm = 0.0;    // ||P (Delta_rho + q) u0||_Omega
    double dpp_norm = 0.0;  // || |D''| Gtilde (Delta_rho + q) u0 ||_Omega
    double g_norm = 0.0;    // || Gtilde (Delta_rho + q) u0 ||_Omega
};

NormReport estimate_norms(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0,
                          const GridField& q);

struct U2Options {
    double tau = -1.0;  // negative: 1e-3 s
    int max_iters = 50;
    double tol = 1e-6;
    int restart = 10;
};

struct U2Result {
    GridField u2;
    double achieved_residual = 0.0;  // ||(Delta_rho + q) u2 + r|| / ||r||
    int iterations = 0;
    std::vector<double> trace;
};

/// GMRES on (Delta_rho + q) u2 = -r, right-preconditioned by G_reg.
U2Result solve_u2(const FaddeevOperators& ops, const GridField& r, const GridField& q, const U2Options& opt);

struct ResidualReport {
    double residual_box = 0.0;
    double residual_omega = 0.0;
    NormReport norms;
    double u0_norm_box = 0.0;
    double u_app_norm_box = 0.0;
    double u1_norm_omega = 0.0;
    double mass_outside_slab = 0.0;  // fraction of ||u_app||^2 beyond 2 delta from the plane
    double slab_gap = 0.0;
    double u2_residual = std::numeric_limits<double>::quiet_NaN();
    int u2_iters = 0;
    double u_norm_omega = 0.0;  // ||u0 + u1 + u2||_Omega
};

struct ApproxSolution {
    CgoContext ctx;
    GridField q;
    GridField u0;
    GridField u1;
    std::optional<GridField> u2;
    ResidualReport report;
    double delta() const { return ctx.rho.delta(); }
    /// u0 + u1 (+ u2 when present).
    GridField total() const;
};

struct BuildOptions {
    bool with_norms = true;   // residuals and estimate norms (extra transforms)
    bool with_u2 = false;
    U2Options u2;
    const FaddeevOperators* ops = nullptr;  // reuse precomputed symbols (same grid and s)
};

ApproxSolution build_approx(const CgoContext& ctx, const GridField& q, const BuildOptions& opt = {});

/// v = exp(rho.(x - origin)) u in the local frame where rho = s(e1 + i e2).
GridField exact_v(const GridField& u, const RhoParam& rho);

/// Rotates a local-frame field by a half turn about e3: (y1, y2, y3) -> (-y1, -y2, y3).
GridField half_turn(const GridField& f);

/// |inner(u0a u0b, f, Omega) - relative_plane_integral(f chi0^2, plane, Omega)| in the local frame.
double weak_limit_gap(const GridField& u0a, const GridField& u0b, const GridField& f, const CgoContext& ctx);

struct CgoCsvRow {
    int plane_id;
    double s, beta, eps0;
    double p_norm, dpp_norm, g_norm;
    double residual_box, residual_omega;
    double u2_residual;
    int u2_iters;
};

void write_cgo_csv(const std::string& path, const std::vector<CgoCsvRow>& rows);

}  // namespace cgolab
