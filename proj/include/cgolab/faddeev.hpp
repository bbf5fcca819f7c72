#pragma once

#include <string>
#include <vector>

#include "cgolab/fields.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

/// rho = sign s (omega_R + i omega_I) on the null cone.
class RhoParam {
public:
    RhoParam(Plane plane, double s, int sign, double beta = 0.15, double eps0 = 0.1);

    const Plane& plane() const { return plane_; }
    double s() const { return s_; }
    int sign() const { return sign_; }
    double beta() const { return beta_; }
    double eps0() const { return eps0_; }
    double delta() const { return std::pow(s_, -beta_); }
    double eps() const { return 0.5 * (1.0 - 4.0 * beta_); }
    double tube_radius() const { return std::pow(s_, -0.5 - eps0_); }

    /// World-coordinate rho vector.
    CVec3 vector() const;
    /// Plane-adapted frame e1 = sign omega_R, e2 = sign omega_I, e3 = e1 x e2 centered at `origin`;
    /// in it rho = s (e1 + i e2).
    Frame frame(const Vec3& origin) const;

    RhoParam with_s(double s) const { return RhoParam(plane_, s, sign_, beta_, eps0_); }
    RhoParam with_sign(int sign) const { return RhoParam(plane_, s_, sign, beta_, eps0_); }

private:
    Plane plane_;
    double s_;
    int sign_;
    double beta_;
    double eps0_;
};

/// Verbatim symbol -[(|xi - s e2|^2 - s^2) + 2 i s xi1] in frame coordinates.
cplx symbol_sigma(const Vec3& xi, double s);
inline cplx symbol_sigma(const Vec3& xi, const RhoParam& rho) { return symbol_sigma(xi, rho.s()); }

/// Distance from xi to the circle {xi1 = 0, |xi - s e2| = s}.
double dist_sigma(const Vec3& xi, double s);
inline double dist_sigma(const Vec3& xi, const RhoParam& rho) { return dist_sigma(xi, rho.s()); }

/// Multiplier of Delta_rho at lattice frequency k under the exp(-i k.x) analysis kernel.
/// The symbol variable is the dual point xi = -k.
inline cplx delta_rho_multiplier(const Vec3& k, double s) { return symbol_sigma(-k, s); }

/// Precomputed Fourier tables for one (grid, s, eps0).
class FaddeevOperators {
public:
    FaddeevOperators(const Grid& g, const RhoParam& rho);

    const Grid& grid() const { return grid_; }
    double s() const { return s_; }
    double tube_radius() const { return tube_; }
    const std::vector<cplx>& sigma() const { return sigma_; }
    const std::vector<char>& in_tube() const { return tube_mask_; }

    GridField P(const GridField& f) const;
    GridField Gtilde(const GridField& f) const;
    GridField Delta_rho(const GridField& f) const;
    GridField G_reg(const GridField& f, double tau) const;

    /// Multiplier tables on raw FFT coefficients.
    std::vector<cplx> gtilde_table() const;
    std::vector<cplx> greg_table(double tau) const;

private:
    Grid grid_;
    double s_;
    double tube_;
    std::vector<cplx> sigma_;
    std::vector<char> tube_mask_;
};

GridField apply_P(const GridField& f, const RhoParam& rho);
GridField apply_Gtilde(const GridField& f, const RhoParam& rho);
GridField apply_Delta_rho(const GridField& f, const RhoParam& rho);
GridField apply_G_reg(const GridField& f, const RhoParam& rho, double tau);

/// Returns rho with s nudged by one part in 1e6 (repeatedly) while any nonzero lattice frequency has
/// |sigma| < 1e-9 s^2. `perturbed` reports whether a change was made.
RhoParam avoid_lattice_zeros(const Grid& g, const RhoParam& rho, bool* perturbed = nullptr);

struct LowerBoundReport {
    std::size_t checked_inner = 0;
    std::size_t checked_outer = 0;
    std::size_t violations_inner = 0;
    std::size_t violations_outer = 0;
    double worst_inner_ratio = 0.0;  // min |sigma| / (s dist)
    double worst_outer_ratio = 0.0;  // min |sigma| / |xi|^2
};

/// Sweeps every lattice frequency: |sigma| >= c s dist for |xi| <= 3 s, |sigma| >= c |xi|^2 beyond.
LowerBoundReport check_lower_bounds(const Grid& g, double s, double c = 0.1);

}  // namespace cgolab
