#include "cgolab/faddeev.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cgolab {

RhoParam::RhoParam(Plane plane, double s, int sign, double beta, double eps0)
    : plane_(std::move(plane)), s_(s), sign_(sign), beta_(beta), eps0_(eps0) {
    if (!(s > 0.0)) throw std::invalid_argument("RhoParam: s must be positive");
    if (sign != 1 && sign != -1) throw std::invalid_argument("RhoParam: sign must be +1 or -1");
    if (!(beta > 0.0 && beta < 0.25)) throw std::invalid_argument("RhoParam: need 0 < beta < 1/4");
    if (!(eps0 > 0.0 && eps0 < 2.0 * (0.25 - beta)))
        throw std::invalid_argument("RhoParam: need 0 < eps0 < 2 (1/4 - beta)");
}

CVec3 RhoParam::vector() const {
    const Vec3& a = plane_.omega_R();
    const Vec3& b = plane_.omega_I();
    const double k = sign_ * s_;
    return {cplx(k * a.x, k * b.x), cplx(k * a.y, k * b.y), cplx(k * a.z, k * b.z)};
}

Frame RhoParam::frame(const Vec3& origin) const {
    const Vec3 e1 = static_cast<double>(sign_) * plane_.omega_R();
    const Vec3 e2 = static_cast<double>(sign_) * plane_.omega_I();
    return {origin, e1, e2, cross(e1, e2)};
}

cplx symbol_sigma(const Vec3& xi, double s) {
    const Vec3 d{xi.x, xi.y - s, xi.z};
    return -cplx(dot(d, d) - s * s, 2.0 * s * xi.x);
}

double dist_sigma(const Vec3& xi, double s) {
    const double r = std::hypot(xi.y - s, xi.z);
    return std::hypot(xi.x, r - s);
}

FaddeevOperators::FaddeevOperators(const Grid& g, const RhoParam& rho)
    : grid_(g), s_(rho.s()), tube_(rho.tube_radius()), sigma_(g.size()), tube_mask_(g.size()) {
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i, ++idx) {
                const Vec3 xi = -g.frequency(i, j, k);
                sigma_[idx] = symbol_sigma(xi, s_);
                tube_mask_[idx] = dist_sigma(xi, s_) < tube_ ? 1 : 0;
            }
}

GridField FaddeevOperators::P(const GridField& f) const {
    std::vector<cplx> t(grid_.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tube_mask_[i] ? 1.0 : 0.0;
    return apply_multiplier_table(f, t);
}

std::vector<cplx> FaddeevOperators::gtilde_table() const {
    std::vector<cplx> t(grid_.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tube_mask_[i] ? cplx(0.0) : 1.0 / sigma_[i];
    return t;
}

std::vector<cplx> FaddeevOperators::greg_table(double tau) const {
    std::vector<cplx> t(grid_.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = std::norm(sigma_[i]) + tau * tau;
        t[i] = d == 0.0 ? cplx(0.0) : std::conj(sigma_[i]) / d;
    }
    return t;
}

GridField FaddeevOperators::Gtilde(const GridField& f) const { return apply_multiplier_table(f, gtilde_table()); }

GridField FaddeevOperators::Delta_rho(const GridField& f) const { return apply_multiplier_table(f, sigma_); }

GridField FaddeevOperators::G_reg(const GridField& f, double tau) const {
    if (tau < 0.0) throw std::invalid_argument("apply_G_reg: tau must be >= 0");
    if (tau == 0.0) {
        std::vector<cplx> data = f.values();
        fft_inplace(grid_, data, -1);
        double peak = 0.0;
        for (const auto& c : data) peak = std::max(peak, std::abs(c));
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (std::abs(data[i]) > 1e-13 * peak && std::abs(sigma_[i]) < 1e-12) {
                std::ostringstream msg;
                const Vec3 xi = -grid_.frequency(i);
                msg << "apply_G_reg: tau = 0 with near-singular occupied frequency xi = (" << xi.x << ", " << xi.y
                    << ", " << xi.z << "), |sigma| = " << std::abs(sigma_[i]);
                throw std::domain_error(msg.str());
            }
        }
    }
    return apply_multiplier_table(f, greg_table(tau));
}

GridField apply_P(const GridField& f, const RhoParam& rho) { return FaddeevOperators(f.grid(), rho).P(f); }
GridField apply_Gtilde(const GridField& f, const RhoParam& rho) { return FaddeevOperators(f.grid(), rho).Gtilde(f); }
GridField apply_Delta_rho(const GridField& f, const RhoParam& rho) {
    return FaddeevOperators(f.grid(), rho).Delta_rho(f);
}
GridField apply_G_reg(const GridField& f, const RhoParam& rho, double tau) {
    return FaddeevOperators(f.grid(), rho).G_reg(f, tau);
}

RhoParam avoid_lattice_zeros(const Grid& g, const RhoParam& rho, bool* perturbed) {
    RhoParam cur = rho;
    if (perturbed) *perturbed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const double s = cur.s();
        bool hit = false;
        for (std::size_t i = 1; i < g.size() && !hit; ++i)
            if (std::abs(symbol_sigma(-g.frequency(i), s)) < 1e-9 * s * s) hit = true;
        if (!hit) return cur;
        cur = cur.with_s(s * (1.0 + 1e-6));
        if (perturbed) *perturbed = true;
    }
    throw std::runtime_error("avoid_lattice_zeros: could not clear lattice zeros of sigma");
}

LowerBoundReport check_lower_bounds(const Grid& g, double s, double c) {
    LowerBoundReport rep;
    rep.worst_inner_ratio = std::numeric_limits<double>::infinity();
    rep.worst_outer_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 xi = -g.frequency(i);
        const double mag = norm(xi);
        const double sig = std::abs(symbol_sigma(xi, s));
        if (mag <= 3.0 * s) {
            ++rep.checked_inner;
            const double d = dist_sigma(xi, s);
            if (d > 0.0) rep.worst_inner_ratio = std::min(rep.worst_inner_ratio, sig / (s * d));
            if (sig < c * s * d) ++rep.violations_inner;
        }
        if (mag >= 3.0 * s) {
            ++rep.checked_outer;
            rep.worst_outer_ratio = std::min(rep.worst_outer_ratio, sig / (mag * mag));
            if (sig < c * mag * mag) ++rep.violations_outer;
        }
    }
    return rep;
}

}  // namespace cgolab
