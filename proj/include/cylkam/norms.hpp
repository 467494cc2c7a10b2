#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cylkam/funcspace.hpp"

namespace cylkam {

/// Knobs for the randomized parts of the Hoelder-norm estimator.
struct NormOptions {
    int oversample = 4;           // sup-norm lattice density relative to the grid
    int pair_count = 4096;        // randomized point pairs per seminorm
    std::uint64_t seed = 0x5eed5eedULL;
};

namespace detail {

/// lambda-Hoelder seminorm of g, estimated over lattice neighbor pairs plus randomized
/// pairs with 0 < |z - z'| <= 1. A lower bound of the true sup.
inline double holder_seminorm(const CylinderFunction& g, double lambda, const NormOptions& opts) {
    const GridSpec& grid = g.grid();
    const Interval& iv = grid.interval;
    const int px = opts.oversample * grid.nx;
    const std::vector<double> ys = cgl_nodes(iv, opts.oversample * grid.ny);
    const std::vector<double> vals = g.values_on_lattice(px, ys);
    const std::size_t py = ys.size();

    double best = 0.0;
    auto consider = [&](double dv, double dist) {
        if (dist > 0.0 && dist <= 1.0)
            best = std::max(best, std::abs(dv) / std::pow(dist, lambda));
    };

    // lattice neighbors in x (wrapping) and in y
    const double dx = 1.0 / px;
    for (std::size_t iy = 0; iy < py; ++iy) {
        const double* row = vals.data() + iy * px;
        for (int ix = 0; ix < px; ++ix)
            consider(row[(ix + 1) % px] - row[ix], dx);
    }
    for (std::size_t iy = 0; iy + 1 < py; ++iy) {
        const double dy = std::abs(ys[iy + 1] - ys[iy]);
        const double* row = vals.data() + iy * px;
        const double* next = vals.data() + (iy + 1) * px;
        for (int ix = 0; ix < px; ++ix) consider(next[ix] - row[ix], dy);
    }

    // randomized pairs, log-uniform separation scale
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < opts.pair_count; ++i) {
        const double x1 = u01(rng);
        const double y1 = iv.lo + u01(rng) * iv.width();
        const double angle = two_pi * u01(rng);
        const double radius = std::pow(10.0, -6.0 + 6.0 * u01(rng));
        const double x2 = x1 + radius * std::cos(angle);
        const double y2 = std::clamp(y1 + radius * std::sin(angle), iv.lo, iv.hi);
        const double dist = std::hypot(x2 - x1, y2 - y1);
        if (dist <= 0.0 || dist > 1.0) continue;
        consider(g.evaluate(x2, y2) - g.evaluate(x1, y1), dist);
    }
    return best;
}

} // namespace detail

/// Hoelder norm ||f||_r on the function's own grid interval.
///
/// Integer r: max over |J| <= r of the sup of d^J f on an oversampled lattice.
/// r = p + lambda: additionally the lambda-seminorms of the order-p derivatives over
/// randomized + lattice-neighbor point pairs with |z - z'| <= 1.
/// This is a lower-bound estimator of the true norm.
inline double holder_norm(const CylinderFunction& f, double r, const NormOptions& opts = {}) {
    if (r < 0.0) throw ContractError("holder_norm order must be non-negative");
    if (r > f.grid().ny / 4.0 + 1e-9)
        throw ContractError("holder_norm order exceeds resolution guard ny/4");
    const int p = static_cast<int>(std::floor(r + 1e-12));
    const double lambda = r - p;

    double best = 0.0;
    for (int t = 0; t <= p; ++t)
        for (int jx = 0; jx <= t; ++jx) {
            const int jy = t - jx;
            const CylinderFunction g = (t == 0) ? f : f.derivative(jx, jy);
            best = std::max(best, g.sup_on_lattice(opts.oversample));
        }
    if (lambda > 1e-12) {
        for (int jx = 0; jx <= p; ++jx) {
            const int jy = p - jx;
            const CylinderFunction g = (p == 0) ? f : f.derivative(jx, jy);
            best = std::max(best, detail::holder_seminorm(g, lambda, opts));
        }
    }
    return best;
}

inline double holder_norm(const VectorFunction& f, double r, const NormOptions& opts = {}) {
    return std::max(holder_norm(f.c1, r, opts), holder_norm(f.c2, r, opts));
}

/// ||f||_0 shorthand (oversampled lattice sup).
inline double c0_norm(const CylinderFunction& f, const NormOptions& opts = {}) {
    return f.sup_on_lattice(opts.oversample);
}

inline double c0_norm(const VectorFunction& f, const NormOptions& opts = {}) {
    return std::max(c0_norm(f.c1, opts), c0_norm(f.c2, opts));
}

} // namespace cylkam
