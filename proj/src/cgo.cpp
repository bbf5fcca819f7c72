#include "cgolab/cgo.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cgolab/transform.hpp"

namespace cgolab {

double Phantom::operator()(const Vec3& x) const {
    double v = 0.0;
    for (const auto& t : terms) {
        const Vec3 d = x - t.center;
        const double r2 = dot(d, d);
        if (t.kind == PhantomTerm::Kind::gaussian) {
            v += t.amplitude * std::exp(-r2 / (t.width * t.width));
        } else {
            const double u = r2 / (t.width * t.width);
            if (u < 1.0) v += t.amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
        }
    }
    return v;
}

double Phantom::support_radius(const Vec3& c) const {
    double r = 0.0;
    for (const auto& t : terms) {
        if (t.kind == PhantomTerm::Kind::gaussian) return std::numeric_limits<double>::infinity();
        r = std::max(r, norm(t.center - c) + t.width);
    }
    return r;
}

Phantom zero_phantom() { return Phantom{"zero", {}}; }

Phantom gaussian_phantom(Vec3 center, double width, double amplitude, std::string name) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_phantom: width must be positive");
    return Phantom{std::move(name), {{PhantomTerm::Kind::gaussian, center, width, amplitude}}};
}

Phantom bump_phantom(Vec3 center, double radius, double amplitude, std::string name) {
    if (!(radius > 0.0)) throw std::invalid_argument("bump_phantom: radius must be positive");
    return Phantom{std::move(name), {{PhantomTerm::Kind::bump, center, radius, amplitude}}};
}

Phantom sum(const Phantom& a, const Phantom& b, double scale_b) {
    Phantom out{a.name + "+" + b.name, a.terms};
    for (auto t : b.terms) {
        t.amplitude *= scale_b;
        out.terms.push_back(t);
    }
    return out;
}

GridField sample_potential(const Phantom& q, const Grid& g, const Frame& frame, const BallDomain& dom) {
    const double r2 = dom.radius() * dom.radius();
    if (q.is_zero()) return GridField(g);
    return GridField::from_function(g, [&](const Vec3& y) -> cplx {
        if (dot(y, y) > r2) return 0.0;
        return q(frame.to_world(y));
    });
}

GridField resample_potential(const GridField& q_world, const Frame& frame, const BallDomain& dom) {
    const double r2 = dom.radius() * dom.radius();
    return GridField::from_function(q_world.grid(), [&](const Vec3& y) -> cplx {
        if (dot(y, y) > r2) return 0.0;
        return interp_trilinear(q_world, frame.to_world(y));
    });
}

CgoContext make_context(const BallDomain& dom, const RhoParam& rho, const CutoffParams& cut) {
    const Grid grid(dom);
    const Frame frame = rho.frame(dom.center());
    const Plane local_plane = rho.plane().in_frame(frame);
    const double x0 = local_plane.base_point().z;
    const double R = dom.radius();
    const double L = dom.half_width();
    const double delta = rho.delta();
    return CgoContext{dom,
                      dom.centered(),
                      grid,
                      rho,
                      frame,
                      local_plane,
                      x0,
                      make_chi0(cut.r_cut_factor * R, cut.width_factor * R, R, L),
                      make_chi1(delta, x0, L),
                      make_chi3(delta, x0, L),
                      cut.holomorphic_weight};
}

namespace {

std::vector<cplx> fwd(const GridField& f) {
    std::vector<cplx> d = f.values();
    fft_inplace(f.grid(), d, -1);
    return d;
}

GridField inv(const Grid& g, std::vector<cplx> d) {
    fft_inplace(g, d, +1);
    const double s = 1.0 / static_cast<double>(g.size());
    for (auto& v : d) v *= s;
    return GridField(g, std::move(d));
}

GridField planar_factor(const CgoContext& ctx) {
    if (ctx.weight.empty()) return sample_x12(ctx.grid, [&](double a, double b) { return cplx(ctx.chi0(a, b)); });
    const Chi0Holomorphic hol{ctx.chi0, ctx.weight};
    return sample_x12(ctx.grid, [&](double a, double b) { return hol(a, b); });
}

struct RegionNorms {
    double gap, inside, annulus, outside;
};

RegionNorms r0_regions(const CgoContext& ctx, const GridField& r0, const GridField& u0, const GridField& q) {
    const Grid& g = ctx.grid;
    const double rc = ctx.chi0.r_cut;
    const double rw = rc + ctx.chi0.width;
    const GridField planar = planar_factor(ctx);
    double num = 0.0, den = 0.0, in2 = 0.0, an2 = 0.0, out2 = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k) {
        const double c1pp = ctx.chi1.second_derivative(g.coord(k));
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i, ++idx) {
                const double rp = std::hypot(g.coord(i), g.coord(j));
                const double a2 = std::norm(r0[idx]);
                if (rp <= rc) {
                    const cplx expect = planar[idx] * c1pp + q[idx] * u0[idx];
                    num = std::max(num, std::abs(r0[idx] - expect));
                    den = std::max(den, std::abs(expect));
                    in2 += a2;
                } else if (rp < rw) {
                    an2 += a2;
                } else {
                    out2 += a2;
                }
            }
    }
    const double h3 = std::pow(g.spacing(), 3);
    return {den > 0.0 ? num / den : num, std::sqrt(in2 * h3), std::sqrt(an2 * h3), std::sqrt(out2 * h3)};
}

GridField chi3_field(const CgoContext& ctx) {
    return sample_x3(ctx.grid, [&](double x3) { return ctx.chi3(x3); });
}

}  // namespace

GridField build_u0(const CgoContext& ctx) {
    GridField u0 = planar_factor(ctx);
    u0 *= sample_x3(ctx.grid, [&](double x3) { return ctx.chi1(x3); });
    return u0;
}

R0Result residual_r0(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0, const GridField& q) {
    R0Result res;
    res.r0 = ops.Delta_rho(u0) + q * u0;
    const auto reg = r0_regions(ctx, res.r0, u0, q);
    res.slab_gap = reg.gap;
    res.norm_inside = reg.inside;
    res.norm_annulus = reg.annulus;
    res.norm_outside = reg.outside;
    return res;
}

GridField build_u1(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0, const GridField& q) {
    GridField r0 = ops.Delta_rho(u0) + q * u0;
    GridField u1 = ops.Gtilde(r0);
    u1 *= chi3_field(ctx);
    u1 *= cplx(-1.0);
    return u1;
}

NormReport estimate_norms(const CgoContext& ctx, const FaddeevOperators& ops, const GridField& u0,
                          const GridField& q) {
    const GridField r0 = ops.Delta_rho(u0) + q * u0;
    const GridField g = ops.Gtilde(r0);
    NormReport rep;
    rep.p_norm = norm_l2(ops.P(r0), ctx.local_dom);
    rep.g_norm = norm_l2(g, ctx.local_dom);
    rep.dpp_norm = norm_l2(abs_dpp(g), ctx.local_dom);
    return rep;
}

U2Result solve_u2(const FaddeevOperators& ops, const GridField& r, const GridField& q, const U2Options& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_u2: tol must be positive");
    if (opt.restart < 1 || opt.max_iters < 0) throw std::invalid_argument("solve_u2: bad iteration limits");
    const Grid& g = r.grid();
    const double tau = opt.tau < 0.0 ? 1e-3 * ops.s() : opt.tau;
    const std::vector<cplx> greg = ops.greg_table(tau);
    const std::vector<cplx>& sig = ops.sigma();
    const std::size_t n = g.size();

    U2Result res;
    res.u2 = GridField(g);
    const double rnorm = norm_l2(r);
    if (rnorm == 0.0) return res;

    using Vec = std::vector<cplx>;
    auto vnorm = [](const Vec& v) {
        double s = 0.0;
        for (const auto& c : v) s += std::norm(c);
        return std::sqrt(s);
    };
    auto vdot = [](const Vec& a, const Vec& b) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return s;
    };
    const double inv_n = 1.0 / static_cast<double>(n);
    // y -> M y with M = G_reg.
    auto precond = [&](const Vec& y) {
        Vec d = y;
        fft_inplace(g, d, -1);
        for (std::size_t i = 0; i < n; ++i) d[i] *= greg[i] * inv_n;
        fft_inplace(g, d, +1);
        return d;
    };
    // y -> (Delta_rho + q) M y.
    auto apply_am = [&](const Vec& y) {
        Vec d = y;
        fft_inplace(g, d, -1);
        for (std::size_t i = 0; i < n; ++i) d[i] *= greg[i] * inv_n;
        Vec ds = d;
        for (std::size_t i = 0; i < n; ++i) ds[i] *= sig[i];
        fft_inplace(g, d, +1);
        fft_inplace(g, ds, +1);
        for (std::size_t i = 0; i < n; ++i) ds[i] += q[i] * d[i];
        return ds;
    };

    Vec b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -r[i];
    const double bnorm = vnorm(b);
    Vec y(n, 0.0);
    Vec resid = b;
    double beta = bnorm;
    int iters = 0;
    int growth = 0;
    double last = beta / bnorm;
    res.trace.push_back(last);
    while (iters < opt.max_iters && beta > opt.tol * bnorm) {
        const int m = std::min(opt.restart, opt.max_iters - iters);
        std::vector<Vec> V;
        V.reserve(m + 1);
        V.push_back(resid);
        for (auto& c : V[0]) c /= beta;
        std::vector<std::vector<cplx>> H(m + 1, std::vector<cplx>(m, 0.0));
        std::vector<cplx> cs(m), sn(m), e(m + 1, 0.0);
        e[0] = beta;
        int used = 0;
        for (int j = 0; j < m; ++j) {
            Vec w = apply_am(V[j]);
            for (int i = 0; i <= j; ++i) {
                H[i][j] = vdot(V[i], w);
                for (std::size_t t = 0; t < n; ++t) w[t] -= H[i][j] * V[i][t];
            }
            const double hn = vnorm(w);
            H[j + 1][j] = hn;
            for (int i = 0; i < j; ++i) {
                const cplx tmp = std::conj(cs[i]) * H[i][j] + std::conj(sn[i]) * H[i + 1][j];
                H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
                H[i][j] = tmp;
            }
            const double den = std::sqrt(std::norm(H[j][j]) + hn * hn);
            cs[j] = den == 0.0 ? cplx(1.0) : H[j][j] / den;
            sn[j] = den == 0.0 ? cplx(0.0) : cplx(hn / den);
            H[j][j] = den;
            H[j + 1][j] = 0.0;
            e[j + 1] = -sn[j] * e[j];
            e[j] = std::conj(cs[j]) * e[j];
            ++used;
            ++iters;
            const double est = std::abs(e[j + 1]) / bnorm;
            growth = est > last ? growth + 1 : 0;
            last = est;
            res.trace.push_back(est);
            if (growth >= 5) {
                std::ostringstream msg;
                msg << "solve_u2: residual grew over 5 consecutive iterations; trace:";
                for (double t : res.trace) msg << ' ' << t;
                throw std::runtime_error(msg.str());
            }
            if (est <= opt.tol || hn == 0.0) break;
            V.push_back(w);
            for (auto& c : V.back()) c /= hn;
        }
        // Back substitution on the triangular system.
        std::vector<cplx> z(used);
        for (int i = used - 1; i >= 0; --i) {
            cplx acc = e[i];
            for (int k = i + 1; k < used; ++k) acc -= H[i][k] * z[k];
            z[i] = acc / H[i][i];
        }
        for (int i = 0; i < used; ++i)
            for (std::size_t t = 0; t < n; ++t) y[t] += z[i] * V[i][t];
        // True residual at restart.
        const Vec amy = apply_am(y);
        for (std::size_t t = 0; t < n; ++t) resid[t] = b[t] - amy[t];
        beta = vnorm(resid);
        if (used == 0) break;
    }
    res.u2 = GridField(g, precond(y));
    // Measured residual of the returned field with the unregularized operator.
    const GridField a_u2 = ops.Delta_rho(res.u2) + q * res.u2;
    res.achieved_residual = norm_l2(a_u2 + r) / rnorm;
    res.iterations = iters;
    return res;
}

GridField ApproxSolution::total() const {
    GridField t = u0 + u1;
    if (u2) t += *u2;
    return t;
}

ApproxSolution build_approx(const CgoContext& ctx, const GridField& q, const BuildOptions& opt) {
    const Grid& g = ctx.grid;
    std::optional<FaddeevOperators> own;
    if (!opt.ops) own.emplace(g, ctx.rho);
    const FaddeevOperators& ops = opt.ops ? *opt.ops : *own;
    ApproxSolution sol{ctx, q, build_u0(ctx), GridField(g), std::nullopt, {}};
    const std::size_t n = g.size();
    const auto& sig = ops.sigma();
    const auto& tube = ops.in_tube();

    const std::vector<cplx> U0 = fwd(sol.u0);
    const GridField qu0 = q * sol.u0;
    const std::vector<cplx> QU = q.max_abs() == 0.0 ? std::vector<cplx>(n) : fwd(qu0);
    // Gtilde r0 = (I - P) u0 + Gtilde (q u0) since Gtilde Delta_rho = I - P.
    std::vector<cplx> GR(n);
    for (std::size_t i = 0; i < n; ++i) GR[i] = tube[i] ? cplx(0.0) : U0[i] + QU[i] / sig[i];
    const GridField gr0 = inv(g, GR);
    sol.u1 = gr0;
    sol.u1 *= chi3_field(ctx);
    sol.u1 *= cplx(-1.0);

    ResidualReport& rep = sol.report;
    const GridField u_app = sol.u0 + sol.u1;
    GridField residual;
    if (opt.with_norms || opt.with_u2) {
        std::vector<cplx> UA = fwd(u_app);
        for (std::size_t i = 0; i < n; ++i) UA[i] *= sig[i];
        residual = inv(g, std::move(UA)) + q * u_app;
    }
    if (opt.with_norms) {
        std::vector<cplx> R0(n), PR(n), DG(n);
        for (std::size_t i = 0; i < n; ++i) {
            R0[i] = sig[i] * U0[i] + QU[i];
            PR[i] = tube[i] ? R0[i] : cplx(0.0);
            DG[i] = std::abs(g.frequency(i).z) * GR[i];
        }
        const GridField r0 = inv(g, std::move(R0));
        rep.norms.p_norm = norm_l2(inv(g, std::move(PR)), ctx.local_dom);
        rep.norms.g_norm = norm_l2(gr0, ctx.local_dom);
        rep.norms.dpp_norm = norm_l2(inv(g, std::move(DG)), ctx.local_dom);
        rep.slab_gap = r0_regions(ctx, r0, sol.u0, q).gap;
        rep.residual_box = norm_l2(residual);
        rep.residual_omega = norm_l2(residual, ctx.local_dom);
        rep.u0_norm_box = norm_l2(sol.u0);
        rep.u_app_norm_box = norm_l2(u_app);
        rep.u1_norm_omega = norm_l2(sol.u1, ctx.local_dom);
        double outside = 0.0, total = 0.0;
        for (int k = 0; k < g.n; ++k) {
            const bool out = std::abs(g.coord(k) - ctx.x0pp) > 2.0 * ctx.rho.delta();
            for (int j = 0; j < g.n; ++j)
                for (int i = 0; i < g.n; ++i) {
                    const double a = std::norm(u_app(i, j, k));
                    total += a;
                    if (out) outside += a;
                }
        }
        rep.mass_outside_slab = total > 0.0 ? outside / total : 0.0;
    }
    if (opt.with_u2) {
        U2Result u2 = solve_u2(ops, residual, q, opt.u2);
        rep.u2_residual = u2.achieved_residual;
        rep.u2_iters = u2.iterations;
        sol.u2 = std::move(u2.u2);
    }
    rep.u_norm_omega = norm_l2(sol.total(), ctx.local_dom);
    return sol;
}

GridField exact_v(const GridField& u, const RhoParam& rho) {
    const Grid& g = u.grid();
    const double s = rho.s();
    double worst = 0.0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                if (u(i, j, k) != cplx(0.0)) worst = std::max(worst, s * std::abs(g.coord(i)));
    if (worst > 700.0)
        throw std::overflow_error("exact_v: |Re(rho.x)| reaches " + std::to_string(worst) +
                                  " > 700 on supp(u); use a smaller s or a recentered box");
    GridField v(g);
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j) {
            const double y2 = g.coord(j);
            for (int i = 0; i < g.n; ++i) v(i, j, k) = std::exp(cplx(s * g.coord(i), s * y2)) * u(i, j, k);
        }
    return v;
}

GridField half_turn(const GridField& f) {
    const Grid& g = f.grid();
    GridField out(g);
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) out((g.n - i) % g.n, (g.n - j) % g.n, k) = f(i, j, k);
    return out;
}

double weak_limit_gap(const GridField& u0a, const GridField& u0b, const GridField& f, const CgoContext& ctx) {
    const cplx lhs = inner(u0a * u0b, f, ctx.local_dom);
    GridField weighted = f;
    weighted *= sample_x12(ctx.grid, [&](double a, double b) {
        const double c = ctx.chi0(a, b);
        return cplx(c * c);
    });
    const cplx rhs = relative_plane_integral(weighted, ctx.local_plane, ctx.local_dom);
    return std::abs(lhs - rhs);
}

void write_cgo_csv(const std::string& path, const std::vector<CgoCsvRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "plane_id,s,beta,eps0,p_norm,dpp_norm,g_norm,residual_box,residual_omega,u2_residual,u2_iters\n";
    for (const auto& r : rows)
        os << r.plane_id << ',' << r.s << ',' << r.beta << ',' << r.eps0 << ',' << r.p_norm << ',' << r.dpp_norm
           << ',' << r.g_norm << ',' << r.residual_box << ',' << r.residual_omega << ',' << r.u2_residual << ','
           << r.u2_iters << '\n';
}

}  // namespace cgolab
