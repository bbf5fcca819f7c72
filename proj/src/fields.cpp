#include "cgolab/fields.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cgolab {

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Plans are created once per N under a lock; fftw_execute_dft is thread safe.
class PlanRegistry {
public:
    static PlanRegistry& instance() {
        static PlanRegistry reg;
        return reg;
    }

    PlanPair get(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        const std::size_t total = static_cast<std::size_t>(n) * n * n;
        auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        PlanPair p;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        // FFTW uses row-major (k, j, i) so the last dimension is x, matching the flat index.
        p.forward = fftw_plan_dft_3d(n, n, n, scratch, scratch, FFTW_FORWARD, flags);
        p.backward = fftw_plan_dft_3d(n, n, n, scratch, scratch, FFTW_BACKWARD, flags);
        fftw_free(scratch);
        if (!p.forward || !p.backward) throw std::runtime_error("fftw planning failed");
        plans_.emplace(n, p);
        return p;
    }

    PlanPair get_1d(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_1d_.find(n);
        if (it != plans_1d_.end()) return it->second;
        auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        PlanPair p;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.forward = fftw_plan_dft_1d(n, scratch, scratch, FFTW_FORWARD, flags);
        p.backward = fftw_plan_dft_1d(n, scratch, scratch, FFTW_BACKWARD, flags);
        fftw_free(scratch);
        if (!p.forward || !p.backward) throw std::runtime_error("fftw planning failed");
        plans_1d_.emplace(n, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<int, PlanPair> plans_;
    std::map<int, PlanPair> plans_1d_;
};

double parity(int m) { return (m & 1) ? -1.0 : 1.0; }

void require_same(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

Grid::Grid(int n_, double half_width_) : n(n_), half_width(half_width_) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("Grid: N must be even");
    if (!(half_width > 0.0)) throw std::invalid_argument("Grid: L must be positive");
}

Vec3 Grid::point(std::size_t flat) const {
    const auto nn = static_cast<std::size_t>(n);
    return point(static_cast<int>(flat % nn), static_cast<int>((flat / nn) % nn), static_cast<int>(flat / (nn * nn)));
}

Vec3 Grid::frequency(std::size_t flat) const {
    const auto nn = static_cast<std::size_t>(n);
    return frequency(static_cast<int>(flat % nn), static_cast<int>((flat / nn) % nn),
                     static_cast<int>(flat / (nn * nn)));
}

GridField::GridField(const Grid& g, cplx fill) : grid_(g), values_(g.size(), fill) {}

GridField::GridField(const Grid& g, std::vector<cplx> values) : grid_(g), values_(std::move(values)) {
    if (values_.size() != g.size()) throw std::invalid_argument("GridField: value count does not match grid");
}

GridField GridField::from_function(const Grid& g, const std::function<cplx(const Vec3&)>& fn) {
    GridField f(g);
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) f.values_[idx++] = fn(g.point(i, j, k));
    return f;
}

bool GridField::all_finite() const {
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void GridField::check_finite(const char* what) const {
    if (!all_finite()) throw std::runtime_error(std::string(what) + ": field contains NaN or Inf");
}

GridField& GridField::operator+=(const GridField& o) {
    require_same(grid_, o.grid_, "GridField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

GridField& GridField::operator-=(const GridField& o) {
    require_same(grid_, o.grid_, "GridField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

GridField& GridField::operator*=(cplx a) {
    for (auto& v : values_) v *= a;
    return *this;
}

GridField& GridField::operator*=(const GridField& o) {
    require_same(grid_, o.grid_, "GridField *=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
    return *this;
}

double GridField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(cplx a, GridField f) { return f *= a; }
GridField operator*(GridField a, const GridField& b) { return a *= b; }

GridField conj(GridField f) {
    for (auto& v : f.values()) v = std::conj(v);
    return f;
}

Spectrum::Spectrum(const Grid& g, cplx fill) : grid_(g), coeffs_(g.size(), fill) {}

Spectrum::Spectrum(const Grid& g, std::vector<cplx> coeffs) : grid_(g), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != g.size()) throw std::invalid_argument("Spectrum: coefficient count does not match grid");
}

double Spectrum::energy() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s * std::pow(grid_.dual_spacing(), 3);
}

void fft_inplace(const Grid& g, std::vector<cplx>& data, int sign) {
    if (data.size() != g.size()) throw std::invalid_argument("fft_inplace: size mismatch");
    const PlanPair p = PlanRegistry::instance().get(g.n);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(sign < 0 ? p.forward : p.backward, ptr, ptr);
}

void fft1d_inplace(std::vector<cplx>& data, int sign) {
    if (data.empty()) return;
    const PlanPair p = PlanRegistry::instance().get_1d(static_cast<int>(data.size()));
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(sign < 0 ? p.forward : p.backward, ptr, ptr);
}

Spectrum to_spectrum(const GridField& f) {
    const Grid& g = f.grid();
    std::vector<cplx> data = f.values();
    fft_inplace(g, data, -1);
    const double c = std::pow(2.0 * std::numbers::pi, -1.5) * std::pow(g.spacing(), 3);
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                data[idx++] *= c * parity(g.freq_index(i) + g.freq_index(j) + g.freq_index(k));
    return Spectrum(g, std::move(data));
}

GridField to_field(const Spectrum& F) {
    const Grid& g = F.grid();
    std::vector<cplx> data = F.coeffs();
    const double c = std::pow(2.0 * std::numbers::pi, -1.5) * std::pow(g.dual_spacing(), 3);
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                data[idx++] *= c * parity(g.freq_index(i) + g.freq_index(j) + g.freq_index(k));
    fft_inplace(g, data, +1);
    return GridField(g, std::move(data));
}

std::vector<cplx> multiplier_table(const Grid& g, const std::function<cplx(const Vec3&)>& m) {
    std::vector<cplx> table(g.size());
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) table[idx++] = m(g.frequency(i, j, k));
    return table;
}

GridField apply_multiplier_table(const GridField& f, const std::vector<cplx>& table) {
    const Grid& g = f.grid();
    if (table.size() != g.size()) throw std::invalid_argument("apply_multiplier_table: size mismatch");
    // The (-1)^m phases and normalizations cancel between the two transforms.
    std::vector<cplx> data = f.values();
    fft_inplace(g, data, -1);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= table[i] * inv;
    fft_inplace(g, data, +1);
    return GridField(g, std::move(data));
}

GridField apply_multiplier(const GridField& f, const std::function<cplx(const Vec3&)>& m) {
    return apply_multiplier_table(f, multiplier_table(f.grid(), m));
}

namespace {

template <class Fn>
void for_masked(const Grid& g, const std::optional<BallDomain>& mask, Fn&& fn) {
    if (!mask) {
        for (std::size_t i = 0; i < g.size(); ++i) fn(i);
        return;
    }
    const double r2 = mask->radius() * mask->radius();
    const Vec3 c = mask->center();
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k) {
        const double dz = g.coord(k) - c.z;
        for (int j = 0; j < g.n; ++j) {
            const double dy = g.coord(j) - c.y;
            for (int i = 0; i < g.n; ++i, ++idx) {
                const double dx = g.coord(i) - c.x;
                if (dx * dx + dy * dy + dz * dz <= r2) fn(idx);
            }
        }
    }
}

}  // namespace

double norm_l2(const GridField& f, const std::optional<BallDomain>& mask) {
    double s = 0.0;
    for_masked(f.grid(), mask, [&](std::size_t i) { s += std::norm(f[i]); });
    return std::sqrt(s * std::pow(f.grid().spacing(), 3));
}

cplx inner(const GridField& f, const GridField& g, const std::optional<BallDomain>& mask) {
    require_same(f.grid(), g.grid(), "inner");
    cplx s = 0.0;
    for_masked(f.grid(), mask, [&](std::size_t i) { s += f[i] * std::conj(g[i]); });
    return s * std::pow(f.grid().spacing(), 3);
}

GridField spectral_derivative(const GridField& f, std::array<int, 3> a) {
    if (a[0] < 0 || a[1] < 0 || a[2] < 0 || a[0] + a[1] + a[2] > 2)
        throw std::invalid_argument("spectral_derivative: need |multi_index| <= 2");
    const Grid& g = f.grid();
    const double nyq = -g.n / 2 * g.dual_spacing();
    return apply_multiplier(f, [&](const Vec3& xi) {
        cplx m = 1.0;
        for (int d = 0; d < 3; ++d) {
            if (a[d] == 0) continue;
            // Odd derivatives of the unpaired Nyquist mode are dropped.
            if (a[d] % 2 == 1 && xi[d] == nyq) return cplx(0.0);
            for (int p = 0; p < a[d]; ++p) m *= cplx(0.0, xi[d]);
        }
        return m;
    });
}

GridField spectral_laplacian(const GridField& f) {
    return apply_multiplier(f, [](const Vec3& xi) { return cplx(-dot(xi, xi)); });
}

GridField abs_dpp(const GridField& f) {
    return apply_multiplier(f, [](const Vec3& xi) { return cplx(std::abs(xi.z)); });
}

namespace {

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

cplx interp_trilinear(const GridField& f, const Vec3& x) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    int base[3];
    double frac[3];
    for (int d = 0; d < 3; ++d) {
        const double t = (x[d] + g.half_width) / h;
        const double fl = std::floor(t);
        base[d] = static_cast<int>(fl);
        frac[d] = t - fl;
    }
    cplx out = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]) *
                                 (dk ? frac[2] : 1 - frac[2]);
                out += w * f(wrap(base[0] + di, g.n), wrap(base[1] + dj, g.n), wrap(base[2] + dk, g.n));
            }
    return out;
}

cplx interp_lagrange(const GridField& f, const Vec3& x, int order) {
    if (order < 2 || order > 8 || order % 2 != 0) throw std::invalid_argument("interp_lagrange: order must be 2,4,6,8");
    const Grid& g = f.grid();
    const double h = g.spacing();
    int first[3];
    double w[3][8];
    for (int d = 0; d < 3; ++d) {
        const double t = (x[d] + g.half_width) / h;
        const int fl = static_cast<int>(std::floor(t));
        first[d] = fl - order / 2 + 1;
        for (int a = 0; a < order; ++a) {
            double num = 1.0;
            double den = 1.0;
            for (int b = 0; b < order; ++b) {
                if (b == a) continue;
                num *= t - (first[d] + b);
                den *= static_cast<double>(a - b);
            }
            w[d][a] = num / den;
        }
    }
    cplx out = 0.0;
    for (int c = 0; c < order; ++c) {
        const int kk = wrap(first[2] + c, g.n);
        for (int b = 0; b < order; ++b) {
            const int jj = wrap(first[1] + b, g.n);
            cplx row = 0.0;
            for (int a = 0; a < order; ++a) row += w[0][a] * f(wrap(first[0] + a, g.n), jj, kk);
            out += w[2][c] * w[1][b] * row;
        }
    }
    return out;
}

void write_dump(std::ostream& os, const Grid& g, const std::vector<cplx>& values, const std::string& kind) {
    nlohmann::json header = {{"n", 3}, {"N", g.n}, {"L", g.half_width}, {"kind", kind}};
    os << header.dump() << '\n';
    std::vector<unsigned char> buf(values.size() * 16);
    unsigned char* p = buf.data();
    for (const auto& v : values) {
        for (double part : {v.real(), v.imag()}) {
            auto bits = std::bit_cast<std::uint64_t>(part);
            for (int b = 0; b < 8; ++b) *p++ = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void write_field_dump(const std::string& path, const GridField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_dump(os, f.grid(), f.values(), "grid");
}

void write_spectrum_dump(const std::string& path, const Spectrum& F) {
    // Spectra are written in ascending signed frequency order.
    const Grid& g = F.grid();
    std::vector<cplx> ordered(g.size());
    std::size_t idx = 0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) ordered[idx++] = F.at(i - g.n / 2, j - g.n / 2, k - g.n / 2);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_dump(os, g, ordered, "spectrum");
}

GridField read_field_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(is, line);
    const auto header = nlohmann::json::parse(line);
    if (header.at("kind") != "grid") throw std::runtime_error("read_field_dump: not a grid dump");
    const Grid g(header.at("N").get<int>(), header.at("L").get<double>());
    std::vector<unsigned char> buf(g.size() * 16);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() != static_cast<std::streamsize>(buf.size())) throw std::runtime_error("read_field_dump: truncated");
    std::vector<cplx> values(g.size());
    const unsigned char* p = buf.data();
    for (auto& v : values) {
        double parts[2];
        for (double& part : parts) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(*p++) << (8 * b);
            part = std::bit_cast<double>(bits);
        }
        v = {parts[0], parts[1]};
    }
    return GridField(g, std::move(values));
}

}  // namespace cgolab
