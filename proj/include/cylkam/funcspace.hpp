#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "cylkam/detail/fft.hpp"
#include "cylkam/errors.hpp"

namespace cylkam {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// (sqrt(5) - 1) / 2, the canonical constant-type rotation number.
inline double golden_mean() { return (std::sqrt(5.0) - 1.0) / 2.0; }

/// Distance from t to the nearest integer (metric on the circle R/Z).
inline double circle_distance(double t) { return std::abs(std::remainder(t, 1.0)); }

/// Closed action-variable interval [lo, hi].
struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo < hi)) throw ContractError("interval requires lo < hi");
    }

    double mid() const { return 0.5 * (lo + hi); }
    double halfwidth() const { return 0.5 * (hi - lo); }
    double width() const { return hi - lo; }
    double scale() const { return std::max({1.0, std::abs(lo), std::abs(hi)}); }

    /// [lo - d, hi + d]; a negative d shrinks and must leave lo < hi.
    Interval widened(double d) const { return Interval(lo - d, hi + d); }

    bool contains(double y, double tol = 0.0) const { return y >= lo - tol && y <= hi + tol; }
    bool contains(const Interval& o, double tol = 0.0) const {
        return o.lo >= lo - tol && o.hi <= hi + tol;
    }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

/// Spectral resolution: nx Fourier modes in x (power of two), ny Chebyshev coefficients in y.
struct GridSpec {
    int nx;
    int ny;
    Interval interval;

    GridSpec(int nx_, int ny_, Interval iv) : nx(nx_), ny(ny_), interval(iv) {
        if (nx < 8 || !detail::is_power_of_two(static_cast<std::size_t>(nx)))
            throw ContractError("nx must be a power of two >= 8");
        if (ny < 4) throw ContractError("ny must be >= 4");
    }

    double x_node(int n) const { return static_cast<double>(n) / nx; }
    /// Chebyshev-Gauss-Lobatto node k = 0..ny-1 (descending from hi to lo).
    double y_node(int k) const {
        return interval.mid() + interval.halfwidth() * std::cos(pi * k / (ny - 1));
    }

    bool operator==(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && interval == o.interval;
    }
};

/// Chebyshev-Gauss-Lobatto nodes of the given count on an interval.
inline std::vector<double> cgl_nodes(const Interval& iv, int count) {
    std::vector<double> ys(count);
    for (int k = 0; k < count; ++k)
        ys[k] = iv.mid() + iv.halfwidth() * std::cos(pi * k / (count - 1));
    return ys;
}

namespace detail {

/// Chebyshev transform: values at CGL nodes t_k = cos(pi k/(n-1)) -> series coefficients.
/// cos arguments are reduced in exact integer arithmetic (j*k mod 2(n-1)) before the
/// trig call; the raw argument grows like n^2 and would cost ~1e-13 per coefficient.
inline void cheb_transform_row(const std::complex<double>* vals, std::complex<double>* out, int n) {
    const int period = 2 * (n - 1);
    std::vector<double> cos_table(period);
    for (int r = 0; r < period; ++r) cos_table[r] = std::cos(pi * r / (n - 1));
    const double scale = 2.0 / (n - 1);
    for (int j = 0; j < n; ++j) {
        std::complex<double> acc = 0.5 * vals[0];
        for (int k = 1; k < n - 1; ++k) acc += vals[k] * cos_table[(j * k) % period];
        acc += 0.5 * vals[n - 1] * ((j % 2 == 0) ? 1.0 : -1.0);
        const double gamma = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        out[j] = scale * gamma * acc;
    }
}

/// Clenshaw recurrence for sum a_j T_j(t), complex coefficients.
inline std::complex<double> clenshaw(const std::complex<double>* a, int n, double t) {
    std::complex<double> b1 = 0.0, b2 = 0.0;
    for (int j = n - 1; j >= 1; --j) {
        const std::complex<double> b0 = a[j] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return a[0] + t * b1 - b2;
}

/// Chebyshev coefficient differentiation; dt/dy scaling applied by the caller.
inline void cheb_derivative_row(const std::complex<double>* a, std::complex<double>* out, int n) {
    out[n - 1] = 0.0;
    if (n >= 2) out[n - 2] = 2.0 * (n - 1.0) * a[n - 1];
    for (int j = n - 3; j >= 0; --j) out[j] = out[j + 2] + 2.0 * (j + 1.0) * a[j + 1];
    out[0] *= 0.5;
}

} // namespace detail

using Sampler = std::function<double(double, double)>;

/// Real-valued smooth function on T x I as a Fourier(x) (x) Chebyshev(y) coefficient tensor.
///
/// Storage is row-major over (m, j) with rows a = 0..nx-1 holding mode m = a - nx/2 and
/// columns j = 0..ny-1 the Chebyshev degree. Real-valuedness is kept as Hermitian symmetry
/// coeffs[-m][j] = conj(coeffs[m][j]), enforced after every constructing operation.
/// Instances are immutable; all operations return new values.
class CylinderFunction {
  public:
    static CylinderFunction zero(const GridSpec& grid) {
        return CylinderFunction(grid, std::vector<std::complex<double>>(
                                          static_cast<std::size_t>(grid.nx) * grid.ny));
    }

    /// Spectral fit: DFT in x at nx equispaced nodes, Chebyshev transform in y at CGL nodes.
    static CylinderFunction fit(const Sampler& sampler, const GridSpec& grid) {
        const int nx = grid.nx, ny = grid.ny;
        std::vector<std::complex<double>> samples(static_cast<std::size_t>(nx) * ny);
        for (int k = 0; k < ny; ++k) {
            const double y = grid.y_node(k);
            for (int n = 0; n < nx; ++n) {
                const double x = grid.x_node(n);
                const double v = sampler(x, y);
                if (!std::isfinite(v)) throw SamplingError(x, y, v);
                samples[static_cast<std::size_t>(k) * nx + n] = v;
            }
        }
        return from_samples(grid, samples);
    }

    static CylinderFunction from_coeffs(const GridSpec& grid,
                                        std::vector<std::complex<double>> coeffs) {
        if (coeffs.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
            throw ContractError("coefficient tensor size does not match grid");
        CylinderFunction f(grid, std::move(coeffs));
        f.enforce_hermitian();
        return f;
    }

    /// Fit from real samples already on the grid lattice; values[k * nx + n] = f(x_n, y_k).
    static CylinderFunction from_values(const GridSpec& grid, const std::vector<double>& values) {
        if (values.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
            throw ContractError("sample array size does not match grid");
        std::vector<std::complex<double>> samples(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]))
                throw SamplingError(grid.x_node(static_cast<int>(i) % grid.nx),
                                    grid.y_node(static_cast<int>(i) / grid.nx), values[i]);
            samples[i] = values[i];
        }
        return from_samples(grid, samples);
    }

    const GridSpec& grid() const { return grid_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

    /// Coefficient of Fourier mode m (in [-nx/2, nx/2)) and Chebyshev degree j.
    std::complex<double> coeff(int m, int j) const {
        return coeffs_[static_cast<std::size_t>(m + grid_.nx / 2) * grid_.ny + j];
    }

    /// Fourier sum in x (any real x; 1-periodic) times Clenshaw recurrence in y.
    double evaluate(double x, double y) const {
        const int nx = grid_.nx, ny = grid_.ny;
        const Interval& iv = grid_.interval;
        const double tol = 1e-12 * iv.scale();
        if (!iv.contains(y, tol)) throw DomainError(y, iv.lo, iv.hi, "evaluate");
        double t = (y - iv.mid()) / iv.halfwidth();
        t = std::clamp(t, -1.0, 1.0);

        const double xr = x - std::floor(x); // exact periodicity in x
        std::complex<double> acc = 0.0;
        // phase for m = -nx/2, stepped by e^{2 pi i x} per row
        std::complex<double> phase = std::polar(1.0, -pi * nx * xr);
        const std::complex<double> step = std::polar(1.0, two_pi * xr);
        const std::complex<double>* row = coeffs_.data();
        for (int a = 0; a < nx; ++a, row += ny) {
            acc += detail::clenshaw(row, ny, t) * phase;
            phase *= step;
        }
        return acc.real();
    }

    /// Fourier multiplier (2 pi i m)^ox in x; Chebyshev differentiation recurrence in y.
    /// Odd ox zeroes the self-conjugate Nyquist row (its odd derivative has no real
    /// coefficient representation in this basis).
    CylinderFunction derivative(int ox, int oy) const {
        if (ox < 0 || oy < 0) throw ContractError("derivative orders must be non-negative");
        if (ox + oy > grid_.ny / 2)
            throw ContractError("derivative order exceeds resolution guard ny/2");
        const int nx = grid_.nx, ny = grid_.ny;
        std::vector<std::complex<double>> out = coeffs_;
        if (ox > 0) {
            for (int a = 0; a < nx; ++a) {
                const int m = a - nx / 2;
                std::complex<double> factor = 1.0;
                const std::complex<double> base(0.0, two_pi * m);
                for (int o = 0; o < ox; ++o) factor *= base;
                if (m == -nx / 2 && ox % 2 == 1) factor = 0.0;
                for (int j = 0; j < ny; ++j) out[static_cast<std::size_t>(a) * ny + j] *= factor;
            }
        }
        if (oy > 0) {
            const double inv_half = 1.0 / grid_.interval.halfwidth();
            std::vector<std::complex<double>> tmp(ny);
            for (int a = 0; a < nx; ++a) {
                std::complex<double>* row = out.data() + static_cast<std::size_t>(a) * ny;
                for (int o = 0; o < oy; ++o) {
                    detail::cheb_derivative_row(row, tmp.data(), ny);
                    for (int j = 0; j < ny; ++j) row[j] = tmp[j] * inv_half;
                }
            }
        }
        CylinderFunction g(grid_, std::move(out));
        g.enforce_hermitian();
        return g;
    }

    /// The x-independent function [f](y): all m != 0 modes zeroed; exact in coefficients.
    CylinderFunction average_over_x() const {
        const int nx = grid_.nx, ny = grid_.ny;
        std::vector<std::complex<double>> out(coeffs_.size());
        const std::size_t zero_row = static_cast<std::size_t>(nx / 2) * ny;
        std::copy_n(coeffs_.begin() + zero_row, ny, out.begin() + zero_row);
        return CylinderFunction(grid_, std::move(out));
    }

    /// Resample on the target interval's Chebyshev nodes and refit.
    CylinderFunction refit_on_interval(const Interval& target) const {
        const double tol = 1e-12 * grid_.interval.scale();
        if (!grid_.interval.contains(target, tol))
            throw DomainError(target.lo, grid_.interval.lo, grid_.interval.hi,
                              "refit target not contained in source interval");
        const GridSpec out_grid(grid_.nx, grid_.ny, target);
        std::vector<double> ys(grid_.ny);
        for (int k = 0; k < grid_.ny; ++k) ys[k] = out_grid.y_node(k);
        return from_values(out_grid, values_on_lattice(grid_.nx, ys));
    }

    /// Resample onto an arbitrary grid (resolution change allowed); the target interval
    /// must be contained in this function's interval.
    CylinderFunction resample(const GridSpec& target) const {
        if (target == grid_) return *this;
        const double tol = 1e-12 * grid_.interval.scale();
        if (!grid_.interval.contains(target.interval, tol))
            throw DomainError(target.interval.lo, grid_.interval.lo, grid_.interval.hi,
                              "resample target not contained in source interval");
        std::vector<double> vals(static_cast<std::size_t>(target.nx) * target.ny);
        for (int k = 0; k < target.ny; ++k)
            for (int n = 0; n < target.nx; ++n)
                vals[static_cast<std::size_t>(k) * target.nx + n] =
                    evaluate(target.x_node(n), target.y_node(k));
        return from_values(target, vals);
    }

    /// Values on a tensor lattice: px equispaced x columns (power of two, >= nx) and the
    /// given y rows. Layout out[iy * px + ix]. Exact Fourier summation via padded FFT.
    std::vector<double> values_on_lattice(int px, const std::vector<double>& ys) const {
        const int nx = grid_.nx, ny = grid_.ny;
        if (px < nx || !detail::is_power_of_two(static_cast<std::size_t>(px)))
            throw ContractError("lattice width must be a power of two >= nx");
        const Interval& iv = grid_.interval;
        const double tol = 1e-12 * iv.scale();
        const std::size_t py = ys.size();
        std::vector<double> out(py * static_cast<std::size_t>(px));
        std::vector<std::complex<double>> spectrum(px);
        for (std::size_t iy = 0; iy < py; ++iy) {
            if (!iv.contains(ys[iy], tol)) throw DomainError(ys[iy], iv.lo, iv.hi, "lattice");
            const double t = std::clamp((ys[iy] - iv.mid()) / iv.halfwidth(), -1.0, 1.0);
            std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0));
            for (int a = 0; a < nx; ++a) {
                const int m = a - nx / 2;
                const int bin = (m + px) % px;
                spectrum[bin] = detail::clenshaw(coeffs_.data() + static_cast<std::size_t>(a) * ny,
                                                 ny, t);
            }
            detail::fft_pow2(spectrum, +1);
            double* row = out.data() + iy * px;
            for (int i = 0; i < px; ++i) row[i] = spectrum[i].real();
        }
        return out;
    }

    /// Sup of |f| over an oversampled lattice (oversample * nx equispaced x, CGL y).
    double sup_on_lattice(int oversample = 4) const {
        const std::vector<double> ys = cgl_nodes(grid_.interval, oversample * grid_.ny);
        const std::vector<double> vals = values_on_lattice(oversample * grid_.nx, ys);
        double best = 0.0;
        for (double v : vals) best = std::max(best, std::abs(v));
        return best;
    }

    double coeff_abs_max() const {
        double best = 0.0;
        for (const auto& c : coeffs_) best = std::max(best, std::abs(c));
        return best;
    }

    bool is_hermitian(double tol) const {
        const int nx = grid_.nx, ny = grid_.ny;
        const double scale = std::max(coeff_abs_max(), 1.0);
        for (int m = 0; m <= nx / 2 - 1; ++m) {
            for (int j = 0; j < ny; ++j) {
                const std::complex<double> cp = coeff(m, j);
                const std::complex<double> cn = (m == 0) ? cp : coeff(-m, j);
                if (std::abs(cn - std::conj(cp)) > tol * scale) return false;
            }
        }
        for (int j = 0; j < ny; ++j)
            if (std::abs(coeff(-nx / 2, j).imag()) > tol * scale) return false;
        return true;
    }

  private:
    CylinderFunction(const GridSpec& grid, std::vector<std::complex<double>> coeffs)
        : grid_(grid), coeffs_(std::move(coeffs)) {}

    static CylinderFunction from_samples(const GridSpec& grid,
                                         const std::vector<std::complex<double>>& samples) {
        const int nx = grid.nx, ny = grid.ny;
        // DFT over x per y-node, then Chebyshev transform per mode row.
        std::vector<std::complex<double>> modes(static_cast<std::size_t>(nx) * ny);
        std::vector<std::complex<double>> buf(nx);
        for (int k = 0; k < ny; ++k) {
            for (int n = 0; n < nx; ++n) buf[n] = samples[static_cast<std::size_t>(k) * nx + n];
            detail::fft_pow2(buf, -1);
            for (int a = 0; a < nx; ++a) {
                const int m = a - nx / 2;
                const int bin = (m + nx) % nx;
                modes[static_cast<std::size_t>(a) * ny + k] = buf[bin] / static_cast<double>(nx);
            }
        }
        std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(nx) * ny);
        for (int a = 0; a < nx; ++a)
            detail::cheb_transform_row(modes.data() + static_cast<std::size_t>(a) * ny,
                                       coeffs.data() + static_cast<std::size_t>(a) * ny, ny);
        CylinderFunction f(grid, std::move(coeffs));
        f.enforce_hermitian();
        return f;
    }

    void enforce_hermitian() {
        const int nx = grid_.nx, ny = grid_.ny;
        auto row = [&](int m) { return coeffs_.data() + static_cast<std::size_t>(m + nx / 2) * ny; };
        for (int j = 0; j < ny; ++j) {
            row(0)[j] = std::complex<double>(row(0)[j].real(), 0.0);
            row(-nx / 2)[j] = std::complex<double>(row(-nx / 2)[j].real(), 0.0);
        }
        for (int m = 1; m <= nx / 2 - 1; ++m) {
            std::complex<double>* pos = row(m);
            std::complex<double>* neg = row(-m);
            for (int j = 0; j < ny; ++j) {
                const std::complex<double> c = 0.5 * (pos[j] + std::conj(neg[j]));
                pos[j] = c;
                neg[j] = std::conj(c);
            }
        }
    }

    GridSpec grid_;
    std::vector<std::complex<double>> coeffs_;
};

inline void require_same_grid(const CylinderFunction& f, const CylinderFunction& g) {
    if (!(f.grid() == g.grid())) throw GridMismatchError("operands live on different grids");
}

inline CylinderFunction add(const CylinderFunction& f, const CylinderFunction& g) {
    require_same_grid(f, g);
    std::vector<std::complex<double>> out = f.coeffs();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g.coeffs()[i];
    return CylinderFunction::from_coeffs(f.grid(), std::move(out));
}

inline CylinderFunction sub(const CylinderFunction& f, const CylinderFunction& g) {
    require_same_grid(f, g);
    std::vector<std::complex<double>> out = f.coeffs();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= g.coeffs()[i];
    return CylinderFunction::from_coeffs(f.grid(), std::move(out));
}

inline CylinderFunction scale(const CylinderFunction& f, double c) {
    std::vector<std::complex<double>> out = f.coeffs();
    for (auto& v : out) v *= c;
    return CylinderFunction::from_coeffs(f.grid(), std::move(out));
}

/// The two components of a perturbation or conjugacy generator; one shared GridSpec.
struct VectorFunction {
    CylinderFunction c1;
    CylinderFunction c2;

    VectorFunction(CylinderFunction a, CylinderFunction b) : c1(std::move(a)), c2(std::move(b)) {
        require_same_grid(c1, c2);
    }

    static VectorFunction zero(const GridSpec& grid) {
        return VectorFunction(CylinderFunction::zero(grid), CylinderFunction::zero(grid));
    }

    const GridSpec& grid() const { return c1.grid(); }
};

inline VectorFunction add(const VectorFunction& f, const VectorFunction& g) {
    return VectorFunction(add(f.c1, g.c1), add(f.c2, g.c2));
}

inline VectorFunction sub(const VectorFunction& f, const VectorFunction& g) {
    return VectorFunction(sub(f.c1, g.c1), sub(f.c2, g.c2));
}

inline VectorFunction scale(const VectorFunction& f, double c) {
    return VectorFunction(scale(f.c1, c), scale(f.c2, c));
}

} // namespace cylkam
