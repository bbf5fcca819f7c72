#include "cgolab/pipeline.hpp"

#include <fftw3.h>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <openssl/crypto.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/version.hpp>

#include "cgolab/boundary.hpp"
#include "cgolab/cgo.hpp"
#include "cgolab/transform.hpp"
#include "json.hpp"

namespace cgolab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- report

bool RunReport::ok() const {
    if (!errors.empty() || jobs_completed != jobs_scheduled) return false;
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

void RunReport::check(const std::string& name, double value, const std::string& relation, double threshold,
                      const std::string& table) {
    bool pass = false;
    if (relation == "<=") pass = value <= threshold;
    else if (relation == ">=") pass = value >= threshold;
    else if (relation == "==") pass = value == threshold;
    else throw std::invalid_argument("RunReport::check: unknown relation " + relation);
    assertions.push_back({name, value, threshold, relation, pass, table});
}

void RunReport::scalar(const std::string& name, double value, const std::string& table) {
    scalars.push_back({name, value, table});
}

const Assertion* RunReport::find(const std::string& name) const {
    for (const auto& a : assertions)
        if (a.name == name) return &a;
    return nullptr;
}

double RunReport::value(const std::string& name) const {
    for (const auto& s : scalars)
        if (s.name == name) return s.value;
    if (const Assertion* a = find(name)) return a->value;
    return std::numeric_limits<double>::quiet_NaN();
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog: need >= 2 matching points");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) ss += std::pow(ly[i] - f.intercept - f.slope * lx[i], 2);
        f.stderr_slope = std::sqrt(ss / (n - 2) / sxx);
        const boost::math::students_t dist(static_cast<double>(n - 2));
        const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
        f.ci_low = f.slope - t * f.stderr_slope;
        f.ci_high = f.slope + t * f.stderr_slope;
    } else {
        f.stderr_slope = std::numeric_limits<double>::infinity();
        f.ci_low = -f.stderr_slope;
        f.ci_high = f.stderr_slope;
    }
    return f;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return format_double(v); }

using Rows = std::vector<std::vector<std::string>>;

void write_csv(const std::string& path, const std::vector<std::string>& header, const Rows& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

std::string out_path(RunReport& rep, const std::string& name, bool table = true) {
    const std::string p = (fs::path(rep.out_dir) / name).string();
    (table ? rep.tables : rep.dumps).push_back(name);
    return p;
}

RunReport start_report(const std::string& command, ExperimentConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    RunReport rep;
    rep.command = command;
    rep.warnings = cfg.restrict_sweep();
    rep.config_hash = config_hash(cfg);
    rep.out_dir = opt.out_dir;
    fs::create_directories(opt.out_dir);
    if (opt.verbose)
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    return rep;
}

template <class R>
std::vector<std::optional<R>> run_jobs(RunReport& rep, std::size_t n, const RunOptions& opt,
                                       const std::function<R(std::size_t)>& fn) {
    rep.jobs_scheduled += n;
    auto out = parallel_map<R>(n, opt.workers, fn, rep.errors);
    for (const auto& o : out)
        if (o) ++rep.jobs_completed;
    return out;
}

BuildOptions build_options(const ExperimentConfig& cfg, bool norms, bool u2, const FaddeevOperators* ops = nullptr) {
    BuildOptions b;
    b.with_norms = norms;
    b.with_u2 = u2;
    b.u2 = U2Options{cfg.tau, cfg.u2_iters, cfg.u2_tol, cfg.u2_restart};
    b.ops = ops;
    return b;
}

RhoParam make_rho(const ExperimentConfig& cfg, const Plane& plane, double s, int sign) {
    return RhoParam(plane, s, sign, cfg.beta, cfg.eps0);
}

CgoCsvRow csv_row(int plane_id, const RhoParam& rho, const ResidualReport& r) {
    return {plane_id,          rho.s(),          rho.beta(),         rho.eps0(),
            r.norms.p_norm,    r.norms.dpp_norm, r.norms.g_norm,     r.residual_box,
            r.residual_omega,  r.u2_residual,    r.u2_iters};
}

std::function<cplx(const Vec3&)> as_function(const Phantom& q) {
    return [q](const Vec3& x) { return cplx(q(x)); };
}

std::function<cplx(const Vec3&)> difference(const Phantom& q2, const Phantom& q1) {
    return [q2, q1](const Vec3& x) { return cplx(q2(x) - q1(x)); };
}

Vec3 dominant_center(const Phantom& q) {
    if (q.terms.empty()) throw std::invalid_argument("phantom has no terms");
    const PhantomTerm* best = &q.terms.front();
    for (const auto& t : q.terms)
        if (std::abs(t.amplitude) > std::abs(best->amplitude)) best = &t;
    return best->center;
}

double max_trace_outside(const CauchyData& cd, const BoundaryMesh& mesh, const SurfacePatch& patch) {
    double out = 0.0, all = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const double a = std::abs(cd.trace[i]);
        all = std::max(all, a);
        if (!patch.contains(mesh.nodes[i], mesh.center)) out = std::max(out, a);
    }
    return all > 0.0 ? out / all : 0.0;
}

struct FieldStats {
    double rel_error = 0.0;
    double truth_norm = 0.0;
    double recon_norm = 0.0;
    Vec3 peak{};
};

FieldStats compare_to_phantom(const GridField& recon, const Phantom& q, const BallDomain& dom) {
    const Grid& g = recon.grid();
    const GridField truth = GridField::from_function(g, as_function(q));
    FieldStats st;
    st.truth_norm = norm_l2(truth, dom);
    st.recon_norm = norm_l2(recon, dom);
    st.rel_error = st.truth_norm > 0.0 ? norm_l2(recon - truth, dom) / st.truth_norm : st.recon_norm;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 x = g.point(i);
        if (!dom.contains(x)) continue;
        if (recon[i].real() > best) {
            best = recon[i].real();
            st.peak = x;
        }
    }
    return st;
}

// Planes sharing a normal; the plane-adapted frame depends only on the normal.
struct DirectionGroup {
    Vec3 normal;
    std::vector<double> offsets;
};

std::vector<DirectionGroup> sampling_groups(int dirs, int offsets, double radius) {
    std::vector<DirectionGroup> out;
    const auto offs = plane_offsets(offsets, radius);
    for (const Vec3& n : hemisphere_directions(dirs)) out.push_back({n, offs});
    return out;
}

// Boundary-data measurement of R(q2 - q1) on each plane: CGO (q1, +) and (q2, -) at fixed s,
// I_conjugated on the mesh. One job per direction group.
std::vector<std::vector<cplx>> boundary_route_values(RunReport& rep, const ExperimentConfig& cfg,
                                                     const RunOptions& opt, const std::vector<DirectionGroup>& groups,
                                                     const Phantom& q1, const Phantom& q2, double s, bool use_u2,
                                                     const std::string& label) {
    const BallDomain dom = cfg.domain();
    const BoundaryMesh mesh = make_sphere_mesh(dom, cfg.mesh_theta, cfg.mesh_phi);
    const Grid grid(dom);
    const FaddeevOperators ops(grid, make_rho(cfg, Plane::from_normal({0, 0, 1}, 0.0), s, 1));
    const CutoffParams cut = cfg.cutoffs();
    std::mutex log_mu;
    std::size_t done = 0;
    auto job = [&](std::size_t d) {
        const auto& grp = groups[d];
        const Plane p0 = Plane::from_normal(grp.normal, 0.0, dom.center());
        const CgoContext c1 = make_context(dom, make_rho(cfg, p0, s, 1), cut);
        const CgoContext c2 = make_context(dom, make_rho(cfg, p0, s, -1), cut);
        const GridField q1l = sample_potential(q1, grid, c1.frame, dom);
        const GridField q2l = sample_potential(q2, grid, c2.frame, dom);
        std::vector<cplx> vals;
        for (double off : grp.offsets) {
            const Plane plane = Plane::from_normal(grp.normal, off, dom.center());
            const CgoContext ctx1 = make_context(dom, make_rho(cfg, plane, s, 1), cut);
            const CgoContext ctx2 = make_context(dom, make_rho(cfg, plane, s, -1), cut);
            const ApproxSolution a = build_approx(ctx1, q1l, build_options(cfg, false, use_u2, &ops));
            const CauchyData cd1 = extract_cauchy(a.total(), mesh, ctx1.frame, cfg.interp_order);
            const ApproxSolution b = build_approx(ctx2, q2l, build_options(cfg, false, use_u2, &ops));
            const CauchyData cd2 = extract_cauchy(b.total(), mesh, ctx2.frame, cfg.interp_order);
            vals.push_back(I_conjugated(cd1, cd2, ctx1.rho.vector(), mesh));
        }
        if (opt.verbose) {
            std::lock_guard lk(log_mu);
            std::cerr << label << ": direction " << ++done << "/" << groups.size() << '\n';
        }
        return vals;
    };
    auto res = run_jobs<std::vector<cplx>>(rep, groups.size(), opt, job);
    std::vector<std::vector<cplx>> out(groups.size());
    for (std::size_t d = 0; d < groups.size(); ++d)
        out[d] = res[d] ? *res[d] : std::vector<cplx>(groups[d].offsets.size(), cplx(std::nan(""), std::nan("")));
    return out;
}

std::vector<std::vector<cplx>> direct_route_values(RunReport& rep, const ExperimentConfig& cfg, const RunOptions& opt,
                                                   const std::vector<DirectionGroup>& groups,
                                                   const std::function<cplx(const Vec3&)>& f) {
    const BallDomain dom = cfg.domain();
    auto job = [&](std::size_t d) {
        std::vector<cplx> vals;
        for (double off : groups[d].offsets)
            vals.push_back(relative_plane_integral(f, Plane::from_normal(groups[d].normal, off, dom.center()), dom));
        return vals;
    };
    auto res = run_jobs<std::vector<cplx>>(rep, groups.size(), opt, job);
    std::vector<std::vector<cplx>> out(groups.size());
    for (std::size_t d = 0; d < groups.size(); ++d)
        out[d] = res[d] ? *res[d] : std::vector<cplx>(groups[d].offsets.size(), cplx(std::nan(""), std::nan("")));
    return out;
}

std::vector<PlaneSample> to_samples(const std::vector<DirectionGroup>& groups,
                                    const std::vector<std::vector<cplx>>& values, const Vec3& center) {
    std::vector<PlaneSample> out;
    for (std::size_t d = 0; d < groups.size(); ++d)
        for (std::size_t j = 0; j < groups[d].offsets.size(); ++j)
            out.push_back({Plane::from_normal(groups[d].normal, groups[d].offsets[j], center), values[d][j]});
    return out;
}

bool all_finite(const std::vector<PlaneSample>& s) {
    return std::all_of(s.begin(), s.end(),
                       [](const PlaneSample& p) { return std::isfinite(p.value.real()) && std::isfinite(p.value.imag()); });
}

void finish(RunReport& rep, Clock::time_point t0) { rep.wall_seconds = seconds_since(t0); }

}  // namespace

// ---------------------------------------------------------------- E1

RunReport run_estimates(const ExperimentConfig& cfg_in, const RunOptions& opt) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = cfg_in;
    RunReport rep = start_report("estimates", cfg, opt);
    const BallDomain dom = cfg.domain();
    std::vector<Plane> planes;
    for (double off : cfg.est_offsets) planes.push_back(Plane::from_normal(normalized(cfg.est_normal), off, dom.center()));

    struct Job {
        std::size_t phantom, plane;
        double s;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < cfg.est_phantoms.size(); ++p)
        for (std::size_t i = 0; i < planes.size(); ++i)
            for (double s : cfg.s_list) jobs.push_back({p, i, s});

    struct Row {
        CgoCsvRow cgo;
        double delta, c0;
        ResidualReport r;
    };
    auto res = run_jobs<Row>(rep, jobs.size(), opt, [&](std::size_t k) {
        const Job& jb = jobs[k];
        const RhoParam rho = make_rho(cfg, planes[jb.plane], jb.s, 1);
        const CgoContext ctx = make_context(dom, rho, cfg.cutoffs());
        const GridField q = sample_potential(cfg.phantom(cfg.est_phantoms[jb.phantom]), ctx.grid, ctx.frame, dom);
        const ApproxSolution sol = build_approx(ctx, q, build_options(cfg, true, cfg.est_u2));
        if (opt.verbose)
            std::cerr << "estimates: " << cfg.est_phantoms[jb.phantom] << " plane " << jb.plane << " s " << jb.s
                      << " residual " << sol.report.residual_box << '\n';
        return Row{csv_row(static_cast<int>(jb.plane), rho, sol.report), rho.delta(), ctx.chi0.c0, sol.report};
    });

    Rows extra, slopes;
    for (std::size_t p = 0; p < cfg.est_phantoms.size(); ++p) {
        const std::string& name = cfg.est_phantoms[p];
        std::vector<CgoCsvRow> cgo_rows;
        const std::string cgo_table = "estimates_" + name + "_cgo.csv";
        for (std::size_t i = 0; i < planes.size(); ++i) {
            std::vector<double> s_vals, res_box, res_om, pn, dn, gn;
            double uniform = 0.0, leak = 0.0;
            bool complete = true;
            for (std::size_t k = 0; k < jobs.size(); ++k) {
                if (jobs[k].phantom != p || jobs[k].plane != i) continue;
                if (!res[k]) {
                    complete = false;
                    continue;
                }
                const Row& r = *res[k];
                cgo_rows.push_back(r.cgo);
                extra.push_back({name, std::to_string(i), num(jobs[k].s), num(r.delta), num(r.c0),
                                 num(r.r.u0_norm_box), num(r.r.u_app_norm_box), num(r.r.u1_norm_omega),
                                 num(r.r.u_norm_omega), num(r.r.mass_outside_slab), num(r.r.slab_gap)});
                s_vals.push_back(jobs[k].s);
                res_box.push_back(r.r.residual_box);
                res_om.push_back(r.r.residual_omega);
                pn.push_back(r.r.norms.p_norm);
                dn.push_back(r.r.norms.dpp_norm);
                gn.push_back(r.r.norms.g_norm);
                if (jobs[k].s >= cfg.tol.uniform_s_min) uniform = std::max(uniform, r.r.u_app_norm_box / r.c0);
                leak = std::max(leak, r.r.mass_outside_slab);
            }
            const std::string tag = "[" + name + "/plane" + std::to_string(i) + "]";
            if (!complete || s_vals.size() < 2) continue;
            const std::pair<const char*, const std::vector<double>*> series[] = {
                {"residual_box", &res_box}, {"residual_omega", &res_om}, {"p_norm", &pn}, {"dpp_norm", &dn},
                {"g_norm", &gn}};
            for (const auto& [qty, ys] : series) {
                const SlopeFit f = fit_loglog(s_vals, *ys);
                slopes.push_back({name, std::to_string(i), qty, num(f.slope), num(f.stderr_slope), num(f.ci_low),
                                  num(f.ci_high)});
                if (std::string(qty) == "residual_box")
                    rep.check("residual_slope" + tag, f.slope, "<=", cfg.tol.slope_max, "estimates_slopes.csv");
                else
                    rep.scalar(std::string(qty) + "_slope" + tag, f.slope, "estimates_slopes.csv");
            }
            rep.check("uniform_bound" + tag, uniform, "<=", cfg.tol.uniform_factor, "estimates_extra.csv");
            rep.check("support" + tag, leak, "<=", cfg.tol.support_leak, "estimates_extra.csv");
        }
        write_cgo_csv(out_path(rep, cgo_table), cgo_rows);
    }
    write_csv(out_path(rep, "estimates_extra.csv"),
              {"phantom", "plane_id", "s", "delta", "c0", "u0_norm_box", "u_app_norm_box", "u1_norm_omega",
               "u_norm_omega", "mass_outside_slab", "slab_gap"},
              extra);
    write_csv(out_path(rep, "estimates_slopes.csv"),
              {"phantom", "plane_id", "quantity", "slope", "stderr", "ci95_low", "ci95_high"}, slopes);
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------- E2

RunReport run_identity(const ExperimentConfig& cfg_in, const RunOptions& opt) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = cfg_in;
    RunReport rep = start_report("identity", cfg, opt);
    const BallDomain dom = cfg.domain();
    const Phantom& q1 = cfg.phantom(cfg.id_q1);
    const Phantom& q2 = cfg.phantom(cfg.id_q2);
    const BoundaryMesh mesh = make_sphere_mesh(dom, cfg.mesh_theta, cfg.mesh_phi);
    const CutoffParams cut = cfg.cutoffs();

    std::vector<Plane> planes;
    std::vector<cplx> oracle, null_scale;
    for (double off : cfg.id_offsets) {
        planes.push_back(Plane::from_normal(normalized(cfg.id_normal), off, dom.center()));
        oracle.push_back(relative_plane_integral(difference(q2, q1), planes.back(), dom));
        null_scale.push_back(relative_plane_integral(as_function(q2), planes.back(), dom));
    }
    std::size_t center_plane = 0;
    for (std::size_t i = 0; i < planes.size(); ++i)
        if (std::abs(cfg.id_offsets[i]) < std::abs(cfg.id_offsets[center_plane])) center_plane = i;

    struct Job {
        std::size_t plane;
        double s;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < planes.size(); ++i)
        for (double s : cfg.s_list) jobs.push_back({i, s});

    struct Row {
        cplx I_conj, I_null;
        std::optional<cplx> I_bnd, I_vol;
        double leak;
        CgoCsvRow plus, minus;
        std::optional<std::pair<CauchyData, CauchyData>> cauchy;  // kept at the conjugation-check s
    };
    auto res = run_jobs<Row>(rep, jobs.size(), opt, [&](std::size_t k) {
        const Plane& plane = planes[jobs[k].plane];
        const double s = jobs[k].s;
        const CgoContext c1 = make_context(dom, make_rho(cfg, plane, s, 1), cut);
        const CgoContext c2 = make_context(dom, make_rho(cfg, plane, s, -1), cut);
        const FaddeevOperators ops(c1.grid, c1.rho);
        const BuildOptions bo = build_options(cfg, true, cfg.id_u2, &ops);
        const GridField q1l = sample_potential(q1, c1.grid, c1.frame, dom);
        const GridField q2l = sample_potential(q2, c2.grid, c2.frame, dom);
        const ApproxSolution a = build_approx(c1, q1l, bo);
        const ApproxSolution b = build_approx(c2, q2l, bo);
        const GridField ua = a.total(), ub = b.total();
        const CauchyData cda = extract_cauchy(ua, mesh, c1.frame, cfg.interp_order);
        const CauchyData cdb = extract_cauchy(ub, mesh, c2.frame, cfg.interp_order);
        Row row;
        row.I_conj = I_conjugated(cda, cdb, c1.rho.vector(), mesh);
        row.plus = csv_row(static_cast<int>(jobs[k].plane), c1.rho, a.report);
        row.minus = csv_row(static_cast<int>(jobs[k].plane), c2.rho, b.report);
        const SurfacePatch patch = patch_containing_gamma(plane, dom, cfg.margin);
        row.leak = std::max(max_trace_outside(cda, mesh, patch), max_trace_outside(cdb, mesh, patch));
        if (s == cfg.tol.conj_s) row.cauchy.emplace(cda, cdb);
        // Exponential forms only where exp(s R) stays representable.
        if (s * dom.radius() <= 30.0) {
            const GridField va = exact_v(ua, c1.rho);
            const GridField vb = exact_v(ub, c2.rho);
            row.I_bnd = I_boundary(extract_cauchy(va, mesh, c1.frame, cfg.interp_order),
                                   extract_cauchy(vb, mesh, c2.frame, cfg.interp_order), mesh);
            const GridField q2_in1 = sample_potential(q2, c1.grid, c1.frame, dom);
            row.I_vol = I_volume(q1l, q2_in1, va, half_turn(vb), c1.local_dom);
        }
        // q1 = q2 control pair: (q2, +) against the (q2, -) solution above.
        const GridField q2_plus = sample_potential(q2, c1.grid, c1.frame, dom);
        const ApproxSolution n = build_approx(c1, q2_plus, build_options(cfg, false, cfg.id_u2, &ops));
        row.I_null = I_conjugated(extract_cauchy(n.total(), mesh, c1.frame, cfg.interp_order), cdb, c1.rho.vector(),
                                  mesh);
        if (opt.verbose)
            std::cerr << "identity: plane " << jobs[k].plane << " s " << s << " I " << row.I_conj << " oracle "
                      << oracle[jobs[k].plane] << '\n';
        return row;
    });

    Rows table;
    std::vector<CgoCsvRow> plus_rows, minus_rows;
    const double center_mag = std::abs(oracle[center_plane]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double green_worst = 0.0, conj_worst = 0.0, null_worst = 0.0, leak_worst = 0.0;
    bool any_green = false, any_conj = false;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (!res[k]) continue;
        const Row& r = *res[k];
        const std::size_t i = jobs[k].plane;
        plus_rows.push_back(r.plus);
        minus_rows.push_back(r.minus);
        const double rel_err = std::abs(oracle[i]) > 0.0 ? std::abs(r.I_conj - oracle[i]) / std::abs(oracle[i]) : nan;
        double green = nan, conj = nan;
        if (r.I_bnd && r.I_vol) {
            green = std::abs(*r.I_bnd - *r.I_vol) /
                    std::max(std::abs(*r.I_vol), std::numeric_limits<double>::epsilon());
            green_worst = std::max(green_worst, green);
            any_green = true;
            if (jobs[k].s == cfg.tol.conj_s) {
                conj = std::abs(r.I_conj - *r.I_bnd) / std::max(std::abs(*r.I_bnd), std::numeric_limits<double>::epsilon());
                conj_worst = std::max(conj_worst, conj);
                any_conj = true;
            }
        }
        const double null_rel = std::abs(r.I_null) / std::max(std::abs(null_scale[center_plane]), 1e-300);
        null_worst = std::max(null_worst, null_rel);
        leak_worst = std::max(leak_worst, r.leak);
        auto c = [&](const std::optional<cplx>& v, bool re) { return v ? num(re ? v->real() : v->imag()) : "nan"; };
        table.push_back({std::to_string(i), num(cfg.id_offsets[i]), num(jobs[k].s), num(r.I_conj.real()),
                         num(r.I_conj.imag()), c(r.I_bnd, true), c(r.I_bnd, false), c(r.I_vol, true),
                         c(r.I_vol, false), num(oracle[i].real()), num(oracle[i].imag()), num(rel_err), num(green),
                         num(conj), num(r.I_null.real()), num(r.I_null.imag()), num(null_rel), num(r.leak),
                         num(r.plus.u2_residual), num(r.minus.u2_residual)});
    }
    const std::string tab = "identity.csv";
    write_csv(out_path(rep, tab),
              {"plane_id", "offset", "s", "re_I", "im_I", "re_I_boundary", "im_I_boundary", "re_I_volume",
               "im_I_volume", "re_oracle", "im_oracle", "rel_error", "green_gap", "conj_gap", "re_I_null",
               "im_I_null", "null_rel", "patch_leak", "u2_residual_plus", "u2_residual_minus"},
              table);
    write_cgo_csv(out_path(rep, "identity_cgo_plus.csv"), plus_rows);
    write_cgo_csv(out_path(rep, "identity_cgo_minus.csv"), minus_rows);
    // Cauchy data of the conjugated factors u (world mesh).
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (!res[k] || !res[k]->cauchy) continue;
        const std::string stem = "identity_cauchy_plane" + std::to_string(jobs[k].plane) + "_s" + num(jobs[k].s);
        write_cauchy_csv(out_path(rep, stem + "_plus.csv"), mesh, res[k]->cauchy->first);
        write_cauchy_csv(out_path(rep, stem + "_minus.csv"), mesh, res[k]->cauchy->second);
    }

    if (any_green) rep.check("green_gap_max", green_worst, "<=", cfg.tol.green_rel, tab);
    if (any_conj) rep.check("conj_gap_max", conj_worst, "<=", cfg.tol.conj_rel, tab);
    rep.check("null_pair_max", null_worst, "<=", cfg.tol.zero_scale, tab);
    rep.scalar("patch_leak_max", leak_worst, tab);

    for (std::size_t i = 0; i < planes.size(); ++i) {
        std::vector<double> s_vals, errs, mags;
        bool complete = true;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (jobs[k].plane != i) continue;
            if (!res[k]) {
                complete = false;
                continue;
            }
            s_vals.push_back(jobs[k].s);
            errs.push_back(std::abs(res[k]->I_conj - oracle[i]));
            mags.push_back(std::abs(res[k]->I_conj));
        }
        if (!complete || s_vals.empty()) continue;
        const std::string tag = "[plane" + std::to_string(i) + "]";
        const bool on_support = std::abs(oracle[i]) > 0.01 * center_mag;
        if (on_support) {
            const double om = std::abs(oracle[i]);
            rep.check("identity_rel_error_smax" + tag, errs.back() / om, "<=", cfg.tol.identity_rel, tab);
            bool monotone = true;
            for (std::size_t j = 1; j < errs.size(); ++j) monotone = monotone && errs[j] < errs[j - 1];
            rep.check("identity_monotone" + tag, monotone ? 1.0 : 0.0, "==", 1.0, tab);
            if (s_vals.size() >= 2) {
                std::vector<double> rel;
                for (double e : errs) rel.push_back(std::max(e / om, 1e-300));
                const SlopeFit f = fit_loglog(s_vals, rel);
                rep.scalar("identity_error_slope" + tag, f.slope, tab);
                rep.scalar("identity_error_slope_ci_high" + tag, f.ci_high, tab);
            }
        } else {
            rep.check("offsupport_rel_smax" + tag, mags.back() / center_mag, "<=", cfg.tol.offsupport_rel, tab);
        }
    }
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------- E3

RunReport run_reconstruct(const ExperimentConfig& cfg_in, const RunOptions& opt) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = cfg_in;
    RunReport rep = start_report("reconstruct", cfg, opt);
    const BallDomain dom = cfg.domain();
    const Grid grid(dom);
    const double h = grid.spacing();
    const FbpOptions fbp{cfg.apodize, 4};
    const Phantom& ph = cfg.phantom(cfg.rec_phantom);
    const Phantom& shifted = cfg.phantom(cfg.rec_shifted);
    const std::string tab = "reconstruct_summary.csv";
    Rows summary;

    // Direct-transform route.
    const auto groups = sampling_groups(cfg.dirs, cfg.offsets, dom.radius());
    const auto direct = to_samples(groups, direct_route_values(rep, cfg, opt, groups, as_function(ph)), dom.center());
    write_plane_csv(out_path(rep, "planes_direct.csv"), direct, dom.center());
    if (all_finite(direct)) {
        const GridField rec = radon_invert_fbp(direct, dom, grid, fbp);
        write_field_dump(out_path(rep, "reconstruct_direct.bin", false), rec);
        const FieldStats st = compare_to_phantom(rec, ph, dom);
        const double peak = norm(st.peak - dominant_center(ph));
        summary.push_back({"direct", ph.name, num(st.rel_error), num(st.truth_norm), num(st.recon_norm),
                           num(st.peak.x), num(st.peak.y), num(st.peak.z), num(peak / h)});
        rep.check("direct_rel_l2", st.rel_error, "<=", cfg.tol.fbp_rel, tab);
        rep.check("direct_peak_h[" + ph.name + "]", peak / h, "<=", cfg.tol.peak_h, tab);

        const auto sh = to_samples(groups, direct_route_values(rep, cfg, opt, groups, as_function(shifted)),
                                   dom.center());
        const FieldStats ss = compare_to_phantom(radon_invert_fbp(sh, dom, grid, fbp), shifted, dom);
        const double speak = norm(ss.peak - dominant_center(shifted));
        summary.push_back({"direct", shifted.name, num(ss.rel_error), num(ss.truth_norm), num(ss.recon_norm),
                           num(ss.peak.x), num(ss.peak.y), num(ss.peak.z), num(speak / h)});
        rep.check("direct_peak_h[" + shifted.name + "]", speak / h, "<=", cfg.tol.peak_h, tab);

        std::vector<PlaneSample> zero = direct;
        for (auto& z : zero) z.value = 0.0;
        const double zn = norm_l2(radon_invert_fbp(zero, dom, grid, fbp), dom);
        summary.push_back({"direct", "zero", "nan", "0", num(zn), "nan", "nan", "nan", "nan"});
        rep.check("direct_zero_floor", zn / st.truth_norm, "<=", cfg.tol.zero_scale, tab);
    }

    // Boundary-data route: q1 = 0 reference, I values at the largest s.
    if (cfg.rec_e2e) {
        const double s = cfg.s_max();
        const auto eg = sampling_groups(cfg.rec_e2e_dirs, cfg.rec_e2e_offsets, dom.radius());
        const auto ivals = boundary_route_values(rep, cfg, opt, eg, zero_phantom(), ph, s, cfg.rec_e2e_u2, "reconstruct");
        const auto oracle = direct_route_values(rep, cfg, opt, eg, as_function(ph));
        const auto samples = to_samples(eg, ivals, dom.center());
        write_plane_csv(out_path(rep, "planes_e2e.csv"), samples, dom.center());
        Rows per_plane;
        double worst = 0.0, sum_err = 0.0, sum_ref = 0.0;
        for (std::size_t d = 0; d < eg.size(); ++d)
            for (std::size_t j = 0; j < eg[d].offsets.size(); ++j) {
                const cplx I = ivals[d][j], o = oracle[d][j];
                const double e = std::abs(I - o);
                worst = std::max(worst, e);
                sum_err += e * e;
                sum_ref += std::norm(o);
                per_plane.push_back({std::to_string(d), num(eg[d].offsets[j]), num(I.real()), num(I.imag()),
                                     num(o.real()), num(o.imag()), num(e)});
            }
        write_csv(out_path(rep, "planes_e2e_errors.csv"),
                  {"direction", "offset", "re_I", "im_I", "re_oracle", "im_oracle", "abs_error"}, per_plane);
        rep.scalar("e2e_plane_rel_l2", std::sqrt(sum_err / std::max(sum_ref, 1e-300)), "planes_e2e_errors.csv");
        rep.scalar("e2e_plane_max_abs_error", worst, "planes_e2e_errors.csv");
        if (all_finite(samples)) {
            const GridField rec = radon_invert_fbp(samples, dom, grid, fbp);
            write_field_dump(out_path(rep, "reconstruct_e2e.bin", false), rec);
            const FieldStats st = compare_to_phantom(rec, ph, dom);
            const double peak = norm(st.peak - dominant_center(ph));
            summary.push_back({"e2e", ph.name, num(st.rel_error), num(st.truth_norm), num(st.recon_norm),
                               num(st.peak.x), num(st.peak.y), num(st.peak.z), num(peak / h)});
            rep.check("e2e_rel_l2", st.rel_error, "<=", cfg.tol.e2e_rel, tab);
            rep.check("e2e_peak_h", peak / h, "<=", cfg.tol.peak_h, tab);
        }
    }
    write_csv(out_path(rep, tab),
              {"route", "phantom", "rel_l2_error", "truth_norm", "recon_norm", "peak_x", "peak_y", "peak_z",
               "peak_error_h"},
              summary);
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------- E4

RunReport run_localize(const ExperimentConfig& cfg_in, const RunOptions& opt) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = cfg_in;
    RunReport rep = start_report("localize", cfg, opt);
    const BallDomain dom = cfg.domain();
    const Grid grid(dom);
    const double h = grid.spacing();
    const double R = dom.radius();
    const double s = cfg.s_max();
    const Phantom& inside = cfg.phantom(cfg.loc_phantom);
    const Phantom& touching = cfg.phantom(cfg.loc_touching);

    const auto full = sampling_groups(cfg.loc_dirs, cfg.loc_offsets, R);
    const double thm3_p = std::sqrt(std::max(0.0, R * R - cfg.loc_r * cfg.loc_r));
    auto keep_planes = [&](auto keep) {
        std::vector<DirectionGroup> out;
        for (const auto& g : full) {
            DirectionGroup r{g.normal, {}};
            for (double p : g.offsets)
                if (keep(std::abs(p))) r.offsets.push_back(p);
            out.push_back(r);
        }
        return out;
    };
    const auto thm2 = keep_planes([&](double p) { return p > cfg.loc_c_radius; });
    const auto thm3 = keep_planes([&](double p) { return p >= thm3_p - 1e-12 && p < R; });
    // Scale plane: through the center along the first direction.
    const std::vector<DirectionGroup> scale_group{{full.front().normal, {0.0}}};

    const std::string tab = "localize_summary.csv";
    Rows summary;
    auto pick = [](const std::vector<DirectionGroup>& from, const std::vector<std::vector<cplx>>& vals,
                   const std::vector<DirectionGroup>& want) {
        std::vector<std::vector<cplx>> out(want.size());
        for (std::size_t d = 0; d < want.size(); ++d)
            for (double p : want[d].offsets) {
                const auto& offs = from[d].offsets;
                const auto it = std::find(offs.begin(), offs.end(), p);
                out[d].push_back(vals[d][static_cast<std::size_t>(it - offs.begin())]);
            }
        return out;
    };
    // Union of the two restricted families, per direction.
    const auto both = keep_planes([&](double p) { return p > cfg.loc_c_radius || (p >= thm3_p - 1e-12 && p < R); });

    std::vector<std::string> routes;
    if (cfg.loc_route != "boundary") routes.push_back("direct");
    if (cfg.loc_route != "direct") routes.push_back("boundary");

    for (const auto& route : routes) {
        auto values = [&](const std::vector<DirectionGroup>& groups, const Phantom& q) {
            if (route == "direct") return direct_route_values(rep, cfg, opt, groups, as_function(q));
            return boundary_route_values(rep, cfg, opt, groups, zero_phantom(), q, s, false, "localize/" + q.name);
        };
        const auto v_inside = values(both, inside);
        const auto v_touch = values(thm3, touching);
        const double scale_in = std::abs(values(scale_group, inside)[0][0]);
        const double scale_touch = std::abs(values(scale_group, touching)[0][0]);

        struct Case {
            std::string mode;
            const Phantom* q;
            std::vector<DirectionGroup> groups;
            std::vector<std::vector<cplx>> vals;
            double scale;
        };
        const Case cases[] = {{"thm2", &inside, thm2, pick(both, v_inside, thm2), scale_in},
                              {"thm3", &inside, thm3, pick(both, v_inside, thm3), scale_in},
                              {"thm3", &touching, thm3, v_touch, scale_touch}};
        for (const auto& c : cases) {
            const auto samples = to_samples(c.groups, c.vals, dom.center());
            const std::string stem = "localize_" + c.mode + "_" + c.q->name + "_" + route;
            write_plane_csv(out_path(rep, stem + "_planes.csv"), samples, dom.center());
            if (!all_finite(samples)) continue;
            const double tol = cfg.loc_vanish_rel * c.scale;
            const SupportRegion reg = support_localize(samples, dom, grid, tol);
            GridField sdf(grid);
            for (std::size_t i = 0; i < grid.size(); ++i) sdf[i] = reg.sdf[i];
            write_field_dump(out_path(rep, stem + "_sdf.bin", false), sdf);
            // Superset check: points of Omega where the phantom is nonzero must lie in the region.
            std::size_t missed = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Vec3 x = grid.point(i);
                if (dom.contains(x) && (*c.q)(x) > 0.0 && !reg.contains(i)) ++missed;
            }
            const double cap = cap_depth(cfg.loc_r, R);
            summary.push_back({c.mode, c.q->name, route, std::to_string(samples.size()), num(tol),
                               std::to_string(reg.count()), reg.empty ? "1" : "0", num(reg.max_radius),
                               num(reg.certified_depth), num(cap), std::to_string(missed)});
            const std::string tag = "[" + c.mode + "/" + c.q->name + "/" + route + "]";
            if (c.mode == "thm2") {
                const double over = reg.empty ? 0.0 : reg.max_radius - cfg.loc_c_radius;
                rep.check("containment_excess_h" + tag, over / h, "<=", cfg.tol.dilate_h, tab);
                rep.check("support_missed" + tag, static_cast<double>(missed), "==", 0.0, tab);
            } else if (c.q == &inside) {
                rep.check("depth_gap_h" + tag, std::abs(reg.certified_depth - cap) / h, "<=", cfg.tol.depth_h, tab);
            } else {
                rep.check("touching_depth" + tag, reg.certified_depth, "==", 0.0, tab);
            }
        }
    }
    write_csv(out_path(rep, tab),
              {"mode", "phantom", "route", "planes", "vanish_tol", "region_points", "empty", "max_radius",
               "certified_depth", "cap_depth", "support_missed"},
              summary);
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------- transform utilities

RunReport run_transform(const ExperimentConfig& cfg_in, const RunOptions& opt) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = cfg_in;
    RunReport rep = start_report("transform", cfg, opt);
    const BallDomain dom = cfg.domain();
    const Grid grid(dom);
    const Phantom& ph = cfg.phantom(cfg.tr_phantom);
    const auto groups = sampling_groups(cfg.dirs, cfg.offsets, dom.radius());
    const auto samples = to_samples(groups, direct_route_values(rep, cfg, opt, groups, as_function(ph)), dom.center());
    write_plane_csv(out_path(rep, "planes.csv"), samples, dom.center());
    const std::string tab = "transform_summary.csv";
    Rows summary;
    if (all_finite(samples)) {
        const FbpOptions fbp{cfg.apodize, 4};
        const GridField rec = radon_invert_fbp(samples, dom, grid, fbp);
        write_field_dump(out_path(rep, "fbp.bin", false), rec);
        const FieldStats st = compare_to_phantom(rec, ph, dom);
        summary.push_back({"fbp_rel_l2", num(st.rel_error)});
        rep.scalar("fbp_rel_l2", st.rel_error, tab);

        // Linearity of the inversion on a seeded random sample set.
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> nd;
        std::vector<PlaneSample> noise = samples, combo = samples;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            noise[i].value = cplx(nd(rng), nd(rng));
            combo[i].value = samples[i].value + 2.0 * noise[i].value;
        }
        const GridField lhs = radon_invert_fbp(combo, dom, grid, fbp);
        const GridField rhs = rec + 2.0 * radon_invert_fbp(noise, dom, grid, fbp);
        const double lin = norm_l2(lhs - rhs) / std::max(norm_l2(rhs), 1e-300);
        summary.push_back({"fbp_linearity", num(lin)});
        rep.check("fbp_linearity", lin, "<=", 1e-10, tab);
    }

    // Slab cross-check and holomorphic moments on the central plane.
    const Plane center_plane = Plane::from_normal(groups.front().normal, 0.0, dom.center());
    const GridField f = GridField::from_function(grid, as_function(ph));
    const cplx exact = relative_plane_integral(as_function(ph), center_plane, dom);
    const double h = grid.spacing();
    const SlabResult slab = slab_estimate(f, center_plane, dom, {4 * h, 3.5 * h, 3 * h, 2.5 * h, 2 * h});
    const double slab_gap = std::abs(slab.limit - exact) / std::max(std::abs(exact), 1e-300);
    summary.push_back({"slab_gap", num(slab_gap)});
    rep.check("slab_gap", slab_gap, "<=", 0.005, tab);
    Rows moments;
    for (int k = 0; k <= 3; ++k) {
        const cplx m = holomorphic_moment(as_function(ph), center_plane, k, dom);
        moments.push_back({std::to_string(k), num(m.real()), num(m.imag())});
    }
    write_csv(out_path(rep, "moments.csv"), {"k", "re", "im"}, moments);
    write_csv(out_path(rep, tab), {"quantity", "value"}, summary);
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------- manifest

void retain_large_allocations() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, -1);
#endif
}

void write_manifest(const RunReport& rep, const ExperimentConfig& cfg, const RunOptions& opt) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["command"] = rep.command;
    j["config_hash"] = rep.config_hash;
    j["config"] = to_ini(cfg);
    j["seed"] = cfg.seed;
    j["workers"] = opt.workers;
    j["versions"] = {{"cgolab", "0.1.0"},
                     {"fftw", std::string(fftw_version)},
                     {"boost", std::string(BOOST_LIB_VERSION)},
                     {"openssl", std::string(OpenSSL_version(OPENSSL_VERSION))},
                     {"compiler", std::string(__VERSION__)}};
    j["wall_seconds"] = rep.wall_seconds;
    j["jobs"] = {{"scheduled", rep.jobs_scheduled},
                 {"completed", rep.jobs_completed},
                 {"failed", rep.jobs_scheduled - rep.jobs_completed}};
    j["tables"] = rep.tables;
    j["dumps"] = rep.dumps;
    j["warnings"] = rep.warnings;
    j["errors"] = rep.errors;
    ordered_json sc = ordered_json::array();
    for (const auto& s : rep.scalars) sc.push_back({{"name", s.name}, {"value", s.value}, {"table", s.table}});
    j["scalars"] = sc;
    ordered_json as = ordered_json::array();
    for (const auto& a : rep.assertions)
        as.push_back({{"name", a.name},
                      {"value", a.value},
                      {"relation", a.relation},
                      {"threshold", a.threshold},
                      {"passed", a.passed},
                      {"table", a.table}});
    j["assertions"] = as;
    j["ok"] = rep.ok();
    std::ofstream os((fs::path(rep.out_dir) / "manifest.json").string());
    if (!os) throw std::runtime_error("cannot write manifest in " + rep.out_dir);
    os << j.dump(2) << '\n';
}

}  // namespace cgolab
