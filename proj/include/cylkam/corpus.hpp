#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cylkam/funcspace.hpp"
#include "cylkam/norms.hpp"

namespace cylkam {

/// Bundled 10-member trig-Chebyshev corpus.
///
/// Members 0-4 are pure Fourier modes at m = 1, 4, 8, 16 and the top resolvable mode
/// (32 when the grid allows), 5-6 are Chebyshev and mixed polynomials, 7-9 are seeded
/// random tensors with exponential coefficient decay, normalized to unit C0 size.
/// Deterministic for a fixed grid and seed.
inline std::vector<CylinderFunction> make_test_corpus(const GridSpec& grid,
                                                      std::uint64_t seed = 20260809ULL) {
    std::vector<CylinderFunction> out;
    out.reserve(10);
    auto add_fit = [&](const Sampler& s) { out.push_back(CylinderFunction::fit(s, grid)); };

    const double mid = grid.interval.mid();
    const double half = grid.interval.halfwidth();
    auto t_of = [mid, half](double y) { return (y - mid) / half; };

    add_fit([](double x, double) { return std::sin(two_pi * x); });
    add_fit([](double x, double) { return std::cos(two_pi * 4.0 * x); });
    add_fit([](double x, double) { return std::sin(two_pi * 8.0 * x); });
    const int m3 = std::min(16, grid.nx / 4);
    add_fit([m3](double x, double) { return std::cos(two_pi * m3 * x); });
    const int m4 = std::min(32, grid.nx / 2 - 1);
    add_fit([m4](double x, double) { return std::sin(two_pi * m4 * x); });
    add_fit([t_of](double, double y) { return t_of(y) * t_of(y); });
    add_fit([t_of](double x, double y) { return std::sin(two_pi * x) * t_of(y); });

    // random members, built directly in coefficient space with decay exp(-lambda(|m|+j))
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double lambda = 0.7;
    const int m_max = std::min(grid.nx / 2 - 1, 48);
    const int j_max = std::min(grid.ny - 1, 24);
    for (int member = 0; member < 3; ++member) {
        std::vector<std::complex<double>> coeffs(
            static_cast<std::size_t>(grid.nx) * grid.ny, std::complex<double>(0.0));
        auto at = [&](int m, int j) -> std::complex<double>& {
            return coeffs[static_cast<std::size_t>(m + grid.nx / 2) * grid.ny + j];
        };
        for (int j = 0; j <= j_max; ++j) {
            at(0, j) = (2.0 * u01(rng) - 1.0) * std::exp(-lambda * j);
            for (int m = 1; m <= m_max; ++m) {
                const double amp = std::exp(-lambda * (m + j));
                const std::complex<double> c = std::polar(amp, two_pi * u01(rng));
                at(m, j) = c;
                at(-m, j) = std::conj(c);
            }
        }
        CylinderFunction f = CylinderFunction::from_coeffs(grid, std::move(coeffs));
        out.push_back(scale(f, 1.0 / c0_norm(f)));
    }
    return out;
}

} // namespace cylkam
