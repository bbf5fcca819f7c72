#include "cgolab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "cgolab/quadrature.hpp"

namespace cgolab {

std::vector<PlaneSample> PlaneSampleSet::to_list() const {
    std::vector<PlaneSample> out;
    out.reserve(values.size());
    for (std::size_t d = 0; d < normals.size(); ++d)
        for (std::size_t j = 0; j < offsets.size(); ++j)
            out.push_back({Plane::from_normal(normals[d], offsets[j], center), at(d, j)});
    return out;
}

namespace {

struct Group {
    Vec3 normal;
    std::vector<std::pair<double, cplx>> entries;
};

// Groups samples by normal (antipodal normals are folded with a sign flip of the offset).
std::vector<Group> group_by_normal(const std::vector<PlaneSample>& samples, const Vec3& center) {
    std::vector<Group> groups;
    for (const auto& s : samples) {
        Vec3 n = s.plane.normal();
        double p = s.plane.signed_offset(center);
        bool placed = false;
        for (auto& g : groups) {
            if (norm(g.normal - n) < 1e-9) {
                g.entries.push_back({p, s.value});
                placed = true;
                break;
            }
            if (norm(g.normal + n) < 1e-9) {
                g.entries.push_back({-p, s.value});
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({n, {{p, s.value}}});
    }
    for (auto& g : groups)
        std::sort(g.entries.begin(), g.entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    return groups;
}

template <class Fn>
cplx disc_quadrature(const Plane& plane, const BallDomain& dom, double h, Fn&& integrand) {
    const auto circle = gamma_curve(plane, dom);
    if (!circle) return 0.0;
    const double rad = circle->radius;
    const int nr = std::max(8, static_cast<int>(std::ceil(rad / h)) + 4);
    const int nphi = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * rad / h)) + 1);
    const GaussRule rule = gauss_legendre(nr);
    const double dphi = 2.0 * std::numbers::pi / nphi;
    cplx total = 0.0;
    for (int a = 0; a < nr; ++a) {
        const double r = 0.5 * rad * (rule.nodes[a] + 1.0);
        const double wr = 0.5 * rad * rule.weights[a] * r * dphi;
        cplx ring = 0.0;
        for (int b = 0; b < nphi; ++b) {
            const double phi = b * dphi;
            const double ca = std::cos(phi) * r;
            const double sb = std::sin(phi) * r;
            const Vec3 x = circle->center + ca * plane.omega_R() + sb * plane.omega_I();
            ring += integrand(x, cplx(ca, sb));
        }
        total += wr * ring;
    }
    return total;
}

double default_step(const BallDomain& dom) { return dom.spacing(); }

}  // namespace

PlaneSampleSet organize_samples(const std::vector<PlaneSample>& samples, const Vec3& center) {
    const auto groups = group_by_normal(samples, center);
    if (groups.empty()) throw std::invalid_argument("organize_samples: no samples");
    PlaneSampleSet set;
    set.center = center;
    for (const auto& e : groups.front().entries) set.offsets.push_back(e.first);
    for (const auto& g : groups) {
        if (g.entries.size() != set.offsets.size())
            throw std::invalid_argument("organize_samples: ragged sampling (offset counts differ between directions)");
        for (std::size_t j = 0; j < g.entries.size(); ++j)
            if (std::abs(g.entries[j].first - set.offsets[j]) > 1e-9)
                throw std::invalid_argument("organize_samples: ragged sampling (offsets differ between directions)");
        set.normals.push_back(g.normal);
        for (const auto& e : g.entries) set.values.push_back(e.second);
    }
    return set;
}

cplx plane_integral(const GridField& f, const Plane& plane) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    const double L = g.half_width;
    const double span = std::sqrt(3.0) * L + h;
    const int na = static_cast<int>(std::ceil(span / h));
    const Vec3& o = plane.base_point();
    const Vec3& u = plane.omega_R();
    const Vec3& v = plane.omega_I();
    cplx total = 0.0;
    for (int ia = -na; ia <= na; ++ia) {
        const double a = ia * h;
        // Interval of b with o + a u + b v inside [-L, L)^3.
        double lo = -span;
        double hi = span;
        bool empty = false;
        for (int d = 0; d < 3; ++d) {
            const double c = o[d] + a * u[d];
            if (std::abs(v[d]) < 1e-14) {
                if (c < -L || c >= L) empty = true;
                continue;
            }
            double b1 = (-L - c) / v[d];
            double b2 = (L - c) / v[d];
            if (b1 > b2) std::swap(b1, b2);
            lo = std::max(lo, b1);
            hi = std::min(hi, b2);
        }
        if (empty || lo > hi) continue;
        const int ib0 = static_cast<int>(std::ceil(lo / h));
        const int ib1 = static_cast<int>(std::floor(hi / h));
        for (int ib = ib0; ib <= ib1; ++ib) {
            const Vec3 x = o + a * u + (ib * h) * v;
            bool inside = true;
            for (int d = 0; d < 3; ++d)
                if (x[d] < -L || x[d] >= L) inside = false;
            if (inside) total += interp_trilinear(f, x);
        }
    }
    return total * h * h;
}

cplx relative_plane_integral(const GridField& f, const Plane& plane, const BallDomain& dom, int order) {
    return disc_quadrature(plane, dom, f.grid().spacing(), [&](const Vec3& x, cplx) {
        return order == 2 ? interp_trilinear(f, x) : interp_lagrange(f, x, order);
    });
}

cplx relative_plane_integral(const std::function<cplx(const Vec3&)>& f, const Plane& plane, const BallDomain& dom) {
    return disc_quadrature(plane, dom, default_step(dom), [&](const Vec3& x, cplx) { return f(x); });
}

cplx holomorphic_moment(const GridField& q, const Plane& plane, int k, const BallDomain& dom, int order) {
    if (k < 0) throw std::invalid_argument("holomorphic_moment: k must be >= 0");
    return disc_quadrature(plane, dom, q.grid().spacing(), [&](const Vec3& x, cplx z) {
        const cplx val = order == 2 ? interp_trilinear(q, x) : interp_lagrange(q, x, order);
        return val * std::pow(z, k);
    });
}

cplx holomorphic_moment(const std::function<cplx(const Vec3&)>& q, const Plane& plane, int k,
                        const BallDomain& dom) {
    if (k < 0) throw std::invalid_argument("holomorphic_moment: k must be >= 0");
    return disc_quadrature(plane, dom, default_step(dom),
                           [&](const Vec3& x, cplx z) { return q(x) * std::pow(z, k); });
}

SlabResult slab_estimate(const GridField& f, const Plane& plane, const BallDomain& dom,
                         const std::vector<double>& eps_list) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    if (eps_list.empty()) throw std::invalid_argument("slab_estimate: empty eps list");
    for (double e : eps_list)
        if (e < 2.0 * h) throw std::invalid_argument("slab_estimate: eps below 2h is under-resolved");
    const double emax = *std::max_element(eps_list.begin(), eps_list.end());
    SlabResult res;
    res.eps = eps_list;
    res.values.assign(eps_list.size(), 0.0);
    const double r2 = dom.radius() * dom.radius();
    const Vec3 n = plane.normal();
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const Vec3 x = g.point(i, j, k);
                const Vec3 d = x - dom.center();
                if (dot(d, d) > r2) continue;
                const double dist = std::abs(dot(n, x - plane.base_point()));
                if (dist > emax + h) continue;
                const cplx val = f(i, j, k);
                for (std::size_t e = 0; e < eps_list.size(); ++e) {
                    const double w = std::clamp((eps_list[e] - dist) / h + 0.5, 0.0, 1.0);
                    res.values[e] += w * val;
                }
            }
    for (std::size_t e = 0; e < eps_list.size(); ++e) res.values[e] *= h * h * h / (2.0 * eps_list[e]);
    if (eps_list.size() == 1) {
        res.limit = res.values[0];
        return res;
    }
    // Least squares polynomial in eps^2 (degree <= 2), evaluated at eps = 0.
    const std::size_t m = eps_list.size();
    const std::size_t deg = std::min<std::size_t>(2, m - 1);
    const std::size_t p = deg + 1;
    std::vector<double> A(p * p, 0.0);
    std::vector<cplx> b(p, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
        const double x = eps_list[e] * eps_list[e];
        std::vector<double> pw(p, 1.0);
        for (std::size_t r = 1; r < p; ++r) pw[r] = pw[r - 1] * x;
        for (std::size_t r = 0; r < p; ++r) {
            b[r] += pw[r] * res.values[e];
            for (std::size_t c = 0; c < p; ++c) A[r * p + c] += pw[r] * pw[c];
        }
    }
    // Gaussian elimination with partial pivoting on the normal equations.
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(A[r * p + c]) > std::abs(A[piv * p + c])) piv = r;
        if (A[piv * p + c] == 0.0) throw std::invalid_argument("slab_estimate: eps values must be distinct");
        for (std::size_t k = 0; k < p; ++k) std::swap(A[c * p + k], A[piv * p + k]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < p; ++r) {
            const double f = A[r * p + c] / A[c * p + c];
            for (std::size_t k = c; k < p; ++k) A[r * p + k] -= f * A[c * p + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<cplx> coef(p);
    for (std::size_t r = p; r-- > 0;) {
        cplx acc = b[r];
        for (std::size_t k = r + 1; k < p; ++k) acc -= A[r * p + k] * coef[k];
        coef[r] = acc / A[r * p + r];
    }
    res.limit = coef[0];
    return res;
}

GridField radon_invert_fbp(const PlaneSampleSet& set, const BallDomain& dom, const Grid& grid, const FbpOptions& opt) {
    const std::size_t m = set.offsets.size();
    const std::size_t dirs = set.normals.size();
    if (m < 3) throw std::invalid_argument("radon_invert_fbp: need at least 3 offsets per direction");
    if (set.values.size() != m * dirs) throw std::invalid_argument("radon_invert_fbp: ragged sampling");
    const double dp = set.offsets[1] - set.offsets[0];
    for (std::size_t j = 1; j < m; ++j)
        if (std::abs(set.offsets[j] - set.offsets[j - 1] - dp) > 1e-9)
            throw std::invalid_argument("radon_invert_fbp: offsets must be equispaced");
    std::size_t M = 1;
    while (M < static_cast<std::size_t>(std::max(opt.pad_factor, 1)) * m) M <<= 1;
    const double k_nyq = std::numbers::pi / dp;

    std::vector<cplx> filt(M);
    for (std::size_t i = 0; i < M; ++i) {
        const long sidx = i < M / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(M);
        const double k = 2.0 * std::numbers::pi * sidx / (M * dp);
        double a = 1.0;
        if (opt.apodize) a = std::cos(0.5 * std::numbers::pi * std::abs(k) / k_nyq);
        filt[i] = -k * k * a / static_cast<double>(M);
    }

    std::vector<std::vector<cplx>> filtered(dirs, std::vector<cplx>(M));
    for (std::size_t d = 0; d < dirs; ++d) {
        auto& buf = filtered[d];
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        for (std::size_t j = 0; j < m; ++j) buf[j] = set.at(d, j);
        fft1d_inplace(buf, -1);
        for (std::size_t i = 0; i < M; ++i) buf[i] *= filt[i];
        fft1d_inplace(buf, +1);
    }

    GridField out(grid);
    const double weight = -1.0 / (4.0 * std::numbers::pi * std::numbers::pi) * (2.0 * std::numbers::pi / dirs);
    const double r2 = dom.radius() * dom.radius();
    const double p0 = set.offsets[0];
    for (int k = 0; k < grid.n; ++k)
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i) {
                const Vec3 x = grid.point(i, j, k) - set.center;
                if (dot(x, x) > r2) continue;
                cplx acc = 0.0;
                // Fixed direction order keeps the reduction deterministic.
                for (std::size_t d = 0; d < dirs; ++d) {
                    const double t = (dot(set.normals[d], x) - p0) / dp;
                    const double fl = std::floor(t);
                    const double w = t - fl;
                    long i0 = static_cast<long>(fl) % static_cast<long>(M);
                    if (i0 < 0) i0 += static_cast<long>(M);
                    const long i1 = (i0 + 1) % static_cast<long>(M);
                    acc += (1.0 - w) * filtered[d][i0] + w * filtered[d][i1];
                }
                out(i, j, k) = weight * acc;
            }
    return out;
}

GridField radon_invert_fbp(const std::vector<PlaneSample>& samples, const BallDomain& dom, const Grid& grid,
                           const FbpOptions& opt) {
    return radon_invert_fbp(organize_samples(samples, dom.center()), dom, grid, opt);
}

std::size_t SupportRegion::count() const {
    std::size_t c = 0;
    for (double v : sdf)
        if (v <= 0.0) ++c;
    return c;
}

SupportRegion support_localize(const std::vector<PlaneSample>& samples, const BallDomain& dom, const Grid& grid,
                               double vanish_tol) {
    const double R = dom.radius();
    const auto groups = group_by_normal(samples, dom.center());
    SupportRegion reg;
    reg.grid = grid;
    for (const auto& g : groups) {
        const auto& e = g.entries;
        double spacing = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < e.size(); ++j) spacing = std::min(spacing, e[j].first - e[j - 1].first);
        const double gap_limit = 1.5 * spacing;
        auto vanishes = [&](std::size_t j) { return std::abs(e[j].second) < vanish_tol; };
        // Outer run from the top.
        double upper = std::numeric_limits<double>::infinity();
        for (std::size_t j = e.size(); j-- > 0;) {
            if (!vanishes(j)) break;
            upper = e[j].first;
            if (j > 0 && e[j].first - e[j - 1].first > gap_limit) break;
        }
        double lower = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < e.size(); ++j) {
            if (!vanishes(j)) break;
            lower = e[j].first;
            if (j + 1 < e.size() && e[j + 1].first - e[j].first > gap_limit) break;
        }
        reg.normals.push_back(g.normal);
        reg.lower.push_back(lower);
        reg.upper.push_back(upper);
    }
    reg.sdf.assign(grid.size(), 0.0);
    std::size_t idx = 0;
    double max_r = 0.0;
    std::size_t inside = 0;
    for (int k = 0; k < grid.n; ++k)
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i, ++idx) {
                const Vec3 x = grid.point(i, j, k) - dom.center();
                double phi = norm(x) - R;
                for (std::size_t d = 0; d < reg.normals.size(); ++d) {
                    const double p = dot(reg.normals[d], x);
                    phi = std::max(phi, std::max(p - reg.upper[d], reg.lower[d] - p));
                }
                reg.sdf[idx] = phi;
                if (phi <= 0.0) {
                    ++inside;
                    max_r = std::max(max_r, norm(x));
                }
            }
    reg.empty = inside == 0;
    reg.max_radius = reg.empty ? 0.0 : max_r;
    // A margin below one grid step is not resolved, so no tube is certified.
    reg.certified_depth = R - reg.max_radius;
    if (!reg.empty && reg.certified_depth < grid.spacing()) reg.certified_depth = 0.0;
    return reg;
}

void write_plane_csv(const std::string& path, const std::vector<PlaneSample>& samples, const Vec3& center) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "nx,ny,nz,offset,re,im\n";
    for (const auto& s : samples) {
        const Vec3 n = s.plane.normal();
        os << n.x << ',' << n.y << ',' << n.z << ',' << s.plane.signed_offset(center) << ',' << s.value.real() << ','
           << s.value.imag() << '\n';
    }
}

}  // namespace cgolab
