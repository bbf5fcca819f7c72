#include "cgolab/cutoffs.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgolab {

namespace {

using boost::math::quadrature::gauss_kronrod;

double bump_exponent(double t) { return -1.0 / (1.0 - t * t); }

// Integrated bump exp(-1/(u(1-u))) tabulated with exact derivatives; cubic Hermite in between.
class StepTable {
public:
    static const StepTable& instance() {
        static const StepTable table;
        return table;
    }

    double value(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double x = t * cells_;
        const int k = std::min(static_cast<int>(x), cells_ - 1);
        const double u = x - k;
        const double hcell = 1.0 / cells_;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        const double h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u);
        const double h11 = u * u * (u - 1);
        const double v = h00 * s_[k] + h10 * hcell * d_[k] + h01 * s_[k + 1] + h11 * hcell * d_[k + 1];
        return std::clamp(v, 0.0, 1.0);
    }

    double derivative(double t) const {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        return raw(t) / total_;
    }

private:
    static double raw(double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return std::exp(-1.0 / (u * (1.0 - u)));
    }

    StepTable() : s_(cells_ + 1), d_(cells_ + 1) {
        std::vector<double> cum(cells_ + 1, 0.0);
        for (int k = 0; k < cells_; ++k) {
            const double a = static_cast<double>(k) / cells_;
            const double b = static_cast<double>(k + 1) / cells_;
            cum[k + 1] = cum[k] + gauss_kronrod<double, 31>::integrate(raw, a, b, 5, 1e-15);
        }
        total_ = cum[cells_];
        for (int k = 0; k <= cells_; ++k) {
            s_[k] = cum[k] / total_;
            d_[k] = raw(static_cast<double>(k) / cells_) / total_;
        }
        s_[0] = 0.0;
        s_[cells_] = 1.0;
    }

    static constexpr int cells_ = 4096;
    std::vector<double> s_;
    std::vector<double> d_;
    double total_ = 0.0;
};

void require_in_box(double lo, double hi, double half_width, const char* what) {
    if (lo <= -half_width || hi >= half_width)
        throw std::invalid_argument(std::string(what) + ": support leaves the box");
}

}  // namespace

double smoothstep(double t) { return StepTable::instance().value(t); }
double smoothstep_derivative(double t) { return StepTable::instance().derivative(t); }

double Psi1::operator()(double t) const {
    if (std::abs(t) >= 1.0) return 0.0;
    return c * std::exp(bump_exponent(t));
}

double Psi1::derivative(double t) const {
    if (std::abs(t) >= 1.0) return 0.0;
    const double w = 1.0 - t * t;
    return (*this)(t) * (-2.0 * t / (w * w));
}

Psi1 make_psi1() {
    const auto sq = [](double t) { return std::abs(t) >= 1.0 ? 0.0 : std::exp(2.0 * bump_exponent(t)); };
    const double integral = gauss_kronrod<double, 61>::integrate(sq, -1.0, 1.0, 15, 1e-14);
    return Psi1{1.0 / std::sqrt(integral)};
}

double Chi1::second_derivative(double x3) const {
    const double t = (x3 - x0) / delta;
    if (std::abs(t) >= 1.0) return 0.0;
    const double w = 1.0 - t * t;
    const double g1 = -2.0 * t / (w * w);
    const double g2 = -2.0 / (w * w) - 8.0 * t * t / (w * w * w);
    return psi(t) * (g1 * g1 + g2) / (delta * delta * std::sqrt(delta));
}

Chi1 make_chi1(double delta, double x0pp, double half_width) {
    if (!(delta > 0.0)) throw std::invalid_argument("make_chi1: delta must be positive");
    require_in_box(x0pp - delta, x0pp + delta, half_width, "make_chi1");
    return Chi1{delta, x0pp, make_psi1()};
}

Chi0 make_chi0(double r_cut, double width, double domain_radius, double half_width) {
    if (!(r_cut > domain_radius)) throw std::invalid_argument("make_chi0: R_cut must exceed the domain radius");
    if (!(width > 0.0)) throw std::invalid_argument("make_chi0: width must be positive");
    if (!(r_cut + width < half_width)) throw std::invalid_argument("make_chi0: R_cut + width must be < L");
    Chi0 chi{r_cut, width, 0.0};
    const auto ring = [&](double r) {
        const double v = chi.radial(r);
        return r * v * v;
    };
    const double tail = gauss_kronrod<double, 61>::integrate(ring, r_cut, r_cut + width, 15, 1e-14);
    chi.c0 = std::sqrt(std::numbers::pi * r_cut * r_cut + 2.0 * std::numbers::pi * tail);
    return chi;
}

double Chi3::operator()(double x3) const {
    const double t = std::abs(x3 - x0) / delta;
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    return 1.0 - smoothstep(t - 1.0);
}

Chi3 make_chi3(double delta, double x0pp, double half_width) {
    if (!(delta > 0.0)) throw std::invalid_argument("make_chi3: delta must be positive");
    require_in_box(x0pp - 2.0 * delta, x0pp + 2.0 * delta, half_width, "make_chi3");
    return Chi3{delta, x0pp};
}

cplx Chi0Holomorphic::operator()(double x1, double x2) const {
    const double c = base(x1, x2);
    if (c == 0.0) return 0.0;
    const cplx z(x1, x2);
    cplx w = 0.0;
    for (auto it = weight.rbegin(); it != weight.rend(); ++it) w = w * z + *it;
    return w * c;
}

Chi0Holomorphic make_chi0_holomorphic(std::vector<cplx> weight, double r_cut, double width, double domain_radius,
                                      double half_width) {
    if (weight.empty()) throw std::invalid_argument("make_chi0_holomorphic: empty weight polynomial");
    return Chi0Holomorphic{make_chi0(r_cut, width, domain_radius, half_width), std::move(weight)};
}

GridField sample_x3(const Grid& g, const std::function<double(double)>& fn) {
    GridField f(g);
    for (int k = 0; k < g.n; ++k) {
        const double v = fn(g.coord(k));
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) f(i, j, k) = v;
    }
    return f;
}

GridField sample_x12(const Grid& g, const std::function<cplx(double, double)>& fn) {
    GridField f(g);
    std::vector<cplx> plane(static_cast<std::size_t>(g.n) * g.n);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) plane[i + static_cast<std::size_t>(g.n) * j] = fn(g.coord(i), g.coord(j));
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) f(i, j, k) = plane[i + static_cast<std::size_t>(g.n) * j];
    return f;
}

}  // namespace cgolab
