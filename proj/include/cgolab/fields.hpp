#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cgolab/geometry.hpp"
#include "cgolab/vec3.hpp"

namespace cgolab {

/// Periodic N^3 lattice over [-L, L)^3, x_i = -L + i h, h = 2L/N, flat index i + N (j + N k).
struct Grid {
    int n = 0;
    double half_width = 0.0;

    Grid() = default;
    Grid(int n_, double half_width_);
    explicit Grid(const BallDomain& dom) : Grid(dom.n(), dom.half_width()) {}

    double spacing() const { return 2.0 * half_width / n; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
    }
    double coord(int i) const { return -half_width + i * spacing(); }
    Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
    Vec3 point(std::size_t flat) const;

    /// Signed frequency index m in [-N/2, N/2) stored at FFT slot i.
    int freq_index(int i) const { return i < n / 2 ? i : i - n; }
    double freq(int i) const { return freq_index(i) * dual_spacing(); }
    double dual_spacing() const { return std::numbers::pi / half_width; }
    Vec3 frequency(int i, int j, int k) const { return {freq(i), freq(j), freq(k)}; }
    Vec3 frequency(std::size_t flat) const;
    /// Slot holding signed frequency index m.
    int slot(int m) const { return m >= 0 ? m : m + n; }

    bool operator==(const Grid& o) const { return n == o.n && half_width == o.half_width; }
};

/// Complex samples on a Grid.
class GridField {
public:
    GridField() = default;
    explicit GridField(const Grid& g, cplx fill = 0.0);
    GridField(const Grid& g, std::vector<cplx> values);

    /// Samples fn at every lattice point.
    static GridField from_function(const Grid& g, const std::function<cplx(const Vec3&)>& fn);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    cplx& operator()(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
    const cplx& operator()(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    bool all_finite() const;
    /// Throws when any sample is NaN or Inf.
    void check_finite(const char* what) const;

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(cplx a);
    /// Pointwise product.
    GridField& operator*=(const GridField& o);

    double max_abs() const;

private:
    Grid grid_;
    std::vector<cplx> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(cplx a, GridField f);
GridField operator*(GridField a, const GridField& b);
GridField conj(GridField f);

/// Discrete Fourier coefficients on the frequency lattice (pi/L) m, stored in FFT slot order.
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(const Grid& g, cplx fill = 0.0);
    Spectrum(const Grid& g, std::vector<cplx> coeffs);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return coeffs_.size(); }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    const cplx& operator[](std::size_t i) const { return coeffs_[i]; }
    /// Coefficient at signed frequency indices (m1, m2, m3).
    cplx& at(int m1, int m2, int m3) { return coeffs_[grid_.index(grid_.slot(m1), grid_.slot(m2), grid_.slot(m3))]; }
    const cplx& at(int m1, int m2, int m3) const {
        return coeffs_[grid_.index(grid_.slot(m1), grid_.slot(m2), grid_.slot(m3))];
    }
    std::vector<cplx>& coeffs() { return coeffs_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }

    /// Sum |c|^2 (pi/L)^3, equal to the squared L2 norm of the field.
    double energy() const;

private:
    Grid grid_;
    std::vector<cplx> coeffs_;
};

/// f^(xi) = (2 pi)^{-3/2} h^3 sum_x f(x) exp(-i xi.x).
Spectrum to_spectrum(const GridField& f);
/// f(x) = (2 pi)^{-3/2} (pi/L)^3 sum_xi f^(xi) exp(i xi.x).
GridField to_field(const Spectrum& F);

/// Raw unnormalized FFT in slot order (sign -1 forward, +1 backward), in place.
void fft_inplace(const Grid& g, std::vector<cplx>& data, int sign);
/// Raw unnormalized 1-D FFT, in place.
void fft1d_inplace(std::vector<cplx>& data, int sign);

/// Applies a Fourier multiplier m(xi): to_field(m * to_spectrum(f)).
GridField apply_multiplier(const GridField& f, const std::function<cplx(const Vec3&)>& m);

/// Multiplier evaluated once into a table (slot order) and applied.
GridField apply_multiplier_table(const GridField& f, const std::vector<cplx>& table);
std::vector<cplx> multiplier_table(const Grid& g, const std::function<cplx(const Vec3&)>& m);

double norm_l2(const GridField& f, const std::optional<BallDomain>& mask = std::nullopt);
cplx inner(const GridField& f, const GridField& g, const std::optional<BallDomain>& mask = std::nullopt);

/// Spectral partial derivative with multi-index (a1, a2, a3), |a| <= 2.
GridField spectral_derivative(const GridField& f, std::array<int, 3> multi_index);
GridField spectral_laplacian(const GridField& f);
/// Multiplier |xi''| = |xi_3|.
GridField abs_dpp(const GridField& f);

/// Trilinear periodic interpolation at an arbitrary point.
cplx interp_trilinear(const GridField& f, const Vec3& x);
/// Tensor Lagrange interpolation with `order` points per axis (even, 2..8).
cplx interp_lagrange(const GridField& f, const Vec3& x, int order = 8);

/// Dump: JSON header line {"n":3,"N":..,"L":..,"kind":..} + '\n', then LE f64 (re, im) pairs, x fastest.
void write_dump(std::ostream& os, const Grid& g, const std::vector<cplx>& values, const std::string& kind);
void write_field_dump(const std::string& path, const GridField& f);
void write_spectrum_dump(const std::string& path, const Spectrum& F);
GridField read_field_dump(const std::string& path);

}  // namespace cgolab
