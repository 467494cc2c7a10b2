#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cylkam/diophantine.hpp"
#include "cylkam/funcspace.hpp"
#include "cylkam/norms.hpp"
#include "cylkam/smoothing.hpp"

namespace cylkam {

/// u o T_alpha: exact Fourier multiplier e^{2 pi i m alpha} per mode.
inline CylinderFunction translate_x(const CylinderFunction& f, double alpha) {
    const GridSpec& grid = f.grid();
    std::vector<std::complex<double>> out = f.coeffs();
    for (int a = 0; a < grid.nx; ++a) {
        const int m = a - grid.nx / 2;
        const double t = std::remainder(m * alpha, 1.0);
        const std::complex<double> phase = std::polar(1.0, two_pi * t);
        for (int j = 0; j < grid.ny; ++j)
            out[static_cast<std::size_t>(a) * grid.ny + j] *= phase;
    }
    return CylinderFunction::from_coeffs(grid, std::move(out));
}

/// u o U_0 with U_0(x,y) = (x+y, y): per y-node the x-samples are equispaced with offset
/// y, so each mode row picks up the phase e^{2 pi i m y}; evaluated row-wise and refit.
/// The y-interval is invariant, no domain shrink.
inline CylinderFunction compose_with_twist(const CylinderFunction& f) {
    const GridSpec& grid = f.grid();
    const int nx = grid.nx, ny = grid.ny;
    std::vector<std::complex<double>> rows(static_cast<std::size_t>(nx) * ny); // [m][k] values
    for (int k = 0; k < ny; ++k) {
        const double y = grid.y_node(k);
        const double t = std::clamp((y - grid.interval.mid()) / grid.interval.halfwidth(), -1.0, 1.0);
        for (int a = 0; a < nx; ++a) {
            const int m = a - nx / 2;
            const std::complex<double> val =
                detail::clenshaw(f.coeffs().data() + static_cast<std::size_t>(a) * ny, ny, t);
            rows[static_cast<std::size_t>(a) * ny + k] =
                val * std::polar(1.0, two_pi * std::remainder(m * y, 1.0));
        }
    }
    // refit: mode rows already separated; Chebyshev transform per row
    std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(nx) * ny);
    for (int a = 0; a < nx; ++a)
        detail::cheb_transform_row(rows.data() + static_cast<std::size_t>(a) * ny,
                                   coeffs.data() + static_cast<std::size_t>(a) * ny, ny);
    return CylinderFunction::from_coeffs(grid, std::move(coeffs));
}

/// Delta_alpha u = u o T_alpha - u, component-wise via the exact multiplier
/// e^{2 pi i m alpha} - 1 on each m-mode.
inline CylinderFunction apply_delta_alpha(const CylinderFunction& f, double alpha) {
    const GridSpec& grid = f.grid();
    std::vector<std::complex<double>> out = f.coeffs();
    for (int a = 0; a < grid.nx; ++a) {
        const int m = a - grid.nx / 2;
        const double t = std::remainder(m * alpha, 1.0);
        // e^{i theta} - 1 = 2 i sin(theta/2) e^{i theta/2}, exact near resonances
        const std::complex<double> mult =
            std::complex<double>(0.0, 2.0 * std::sin(pi * t)) * std::polar(1.0, pi * t);
        for (int j = 0; j < grid.ny; ++j)
            out[static_cast<std::size_t>(a) * grid.ny + j] *= mult;
    }
    return CylinderFunction::from_coeffs(grid, std::move(out));
}

inline VectorFunction apply_delta_alpha(const VectorFunction& u, double alpha) {
    return VectorFunction(apply_delta_alpha(u.c1, alpha), apply_delta_alpha(u.c2, alpha));
}

/// Delta_U0 u = (u1 o U0 - u1 - u2, u2 o U0 - u2).
inline VectorFunction apply_delta_U0(const VectorFunction& u) {
    return VectorFunction(sub(sub(compose_with_twist(u.c1), u.c1), u.c2),
                          sub(compose_with_twist(u.c2), u.c2));
}

struct CohomologySolution {
    CylinderFunction u; // zero x-average
    double residual_c0; // ||Delta_alpha u - (phi - [phi])||_0
    double bound_ratio; // ||u||_r / ||phi||_{r+rho} at the requested r
};

/// Unique zero-average solution of Delta_alpha u = phi - [phi]:
/// u_m = phi_m / (e^{2 pi i m alpha} - 1) for m != 0, u_0 = 0.
inline CohomologySolution solve_delta_alpha(const CylinderFunction& phi,
                                            const DiophantineParams& dio, double r = 0.0,
                                            const NormOptions& opts = {}) {
    const GridSpec& grid = phi.grid();
    if (dio.m_check < grid.nx / 2)
        throw ContractError("Diophantine check bound below nx/2; verify alpha first");
    std::vector<std::complex<double>> out(phi.coeffs().size(), std::complex<double>(0.0));
    for (int a = 0; a < grid.nx; ++a) {
        const int m = a - grid.nx / 2;
        if (m == 0) continue;
        const double t = std::remainder(m * dio.alpha, 1.0);
        const double mag = 2.0 * std::abs(std::sin(pi * t));
        if (mag < 1e-14) throw ResonanceError(m, mag);
        const std::complex<double> divisor =
            std::complex<double>(0.0, 2.0 * std::sin(pi * t)) * std::polar(1.0, pi * t);
        for (int j = 0; j < grid.ny; ++j)
            out[static_cast<std::size_t>(a) * grid.ny + j] =
                phi.coeffs()[static_cast<std::size_t>(a) * grid.ny + j] / divisor;
    }
    CylinderFunction u = CylinderFunction::from_coeffs(grid, std::move(out));
    const CylinderFunction rhs = sub(phi, phi.average_over_x());
    const double residual = c0_norm(sub(apply_delta_alpha(u, dio.alpha), rhs), opts);
    const double denom = holder_norm(phi, r + dio.rho, opts);
    const double ratio = denom > 0.0 ? holder_norm(u, r, opts) / denom : 0.0;
    return CohomologySolution{std::move(u), residual, ratio};
}

inline std::pair<VectorFunction, double> solve_delta_alpha(const VectorFunction& phi,
                                                           const DiophantineParams& dio,
                                                           const NormOptions& opts = {}) {
    auto s1 = solve_delta_alpha(phi.c1, dio, 0.0, opts);
    auto s2 = solve_delta_alpha(phi.c2, dio, 0.0, opts);
    return {VectorFunction(std::move(s1.u), std::move(s2.u)),
            std::max(s1.residual_c0, s2.residual_c0)};
}

/// The defect N = Delta_U0 xi_N - (S_N f - [S_N f]); xi_N must solve
/// Delta_alpha xi = S_N k - [S_N k] to solver tolerance.
inline VectorFunction defect_N(const VectorFunction& xi, const VectorFunction& f, double N,
                               const CutoffProfile& profile = CutoffProfile::quintic()) {
    const VectorFunction sf = smooth(f, N, profile);
    const VectorFunction sf_avg(sf.c1.average_over_x(), sf.c2.average_over_x());
    return sub(apply_delta_U0(xi), sub(sf, sf_avg));
}

} // namespace cylkam
