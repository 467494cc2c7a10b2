#pragma once

#include <cmath>
#include <vector>

#include "cylkam/cohomology.hpp"
#include "cylkam/maps.hpp"
#include "cylkam/norms.hpp"

namespace cylkam {

struct CommutatorResidual {
    double direct;        // ||F o K - K o F||_0 by sampling
    double operator_norm; // ||L(f, k)||_0 = ||Delta_U0 k - Delta_alpha f||_0
};

/// Both views of the commutation defect. The operator view needs F over the twist base
/// and K over a translation base; the direct view samples the compositions.
inline CommutatorResidual commutator_residual(const CylinderMap& F, const CylinderMap& K,
                                              const GridSpec& grid, const NormOptions& opts = {}) {
    double direct = 0.0;
    const auto ys = cgl_nodes(grid.interval, grid.ny);
    for (double y : ys)
        for (int n = 0; n < grid.nx; ++n) {
            const double x = static_cast<double>(n) / grid.nx;
            const Point kz = K.apply(x, y);
            const Point fk = F.apply(kz.x, kz.y);
            const Point fz = F.apply(x, y);
            const Point kf = K.apply(fz.x, fz.y);
            direct = std::max(direct,
                              std::max(circle_distance(fk.x - kf.x), std::abs(fk.y - kf.y)));
        }

    if (!std::holds_alternative<TwistBase>(F.base))
        throw ContractError("operator residual needs F over the twist base");
    if (!std::holds_alternative<TranslationBase>(K.base))
        throw ContractError("operator residual needs K over a translation base");
    const double alpha = std::get<TranslationBase>(K.base).alpha;
    const VectorFunction f = F.pert ? *F.pert : VectorFunction::zero(grid);
    const VectorFunction k = K.pert ? *K.pert : VectorFunction::zero(grid);
    const VectorFunction l = sub(apply_delta_U0(k), apply_delta_alpha(f, alpha));
    return CommutatorResidual{direct, c0_norm(l, opts)};
}

struct AverageProbe {
    double value; // ||[k_2]||_0
    double bound; // ||f||_1 ||k||_0 + ||k||_1 ||f||_0
    double ratio; // value / bound (0 when both vanish)
};

/// ||[k_2]||_0 against the commutativity bound; reports raw values without asserting.
inline AverageProbe k2_average_probe(const CylinderMap& F, const CylinderMap& K,
                                     const GridSpec& grid, const NormOptions& opts = {}) {
    const VectorFunction f = F.pert ? *F.pert : VectorFunction::zero(grid);
    const VectorFunction k = K.pert ? *K.pert : VectorFunction::zero(grid);
    const double value = c0_norm(k.c2.average_over_x(), opts);
    const double bound = holder_norm(f, 1.0, opts) * c0_norm(k, opts) +
                         holder_norm(k, 1.0, opts) * c0_norm(f, opts);
    const double ratio = bound > 0.0 ? value / bound : (value > 0.0 ? INFINITY : 0.0);
    return AverageProbe{value, bound, ratio};
}

struct IntersectionReport {
    bool pass;
    double margin; // min over y of max(-min_x f2, max_x f2)
};

/// Horizontal-circle intersection scan: for each sampled y the map x -> f2(x,y) must
/// change sign or vanish identically (f2 == 0 passes by convention).
inline IntersectionReport intersection_check(const CylinderMap& F, const GridSpec& grid,
                                             int y_samples = 17) {
    if (!F.pert) return {true, 0.0};
    const CylinderFunction& f2 = F.pert->c2;
    const Interval iv = f2.grid().interval;
    const double tol = 1e-12;
    bool pass = true;
    double margin = std::numeric_limits<double>::infinity();
    std::vector<double> ys(y_samples);
    for (int i = 0; i < y_samples; ++i)
        ys[i] = iv.lo + iv.width() * i / (y_samples - 1);
    const std::vector<double> vals = f2.values_on_lattice(4 * grid.nx, ys);
    for (int i = 0; i < y_samples; ++i) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int n = 0; n < 4 * grid.nx; ++n) {
            const double v = vals[static_cast<std::size_t>(i) * 4 * grid.nx + n];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(lo <= tol && hi >= -tol)) pass = false;
        margin = std::min(margin, std::max(-lo, hi));
    }
    return {pass, margin};
}

struct SemiConjugacyReport {
    double residual;        // sup circle-distance of W(K(z)) - W(z) - alpha
    double lipschitz_slope; // measured max slope of v over sampled pairs
};

inline SemiConjugacyReport semiconjugacy_residual(const SemiConjugacy& W, const CylinderMap& K,
                                                  double alpha, const GridSpec& grid,
                                                  const NormOptions& opts = {}) {
    double worst = 0.0;
    const auto ys = cgl_nodes(grid.interval, grid.ny);
    for (double y : ys)
        for (int n = 0; n < grid.nx; ++n) {
            const double x = static_cast<double>(n) / grid.nx;
            const Point kz = K.apply(x, y);
            const double lhs = kz.x + W.v.evaluate(kz.x, kz.y);
            const double rhs = x + W.v.evaluate(x, y) + alpha;
            worst = std::max(worst, circle_distance(lhs - rhs));
        }
    return SemiConjugacyReport{worst, detail::holder_seminorm(W.v, 1.0, opts)};
}

struct PortraitPoint {
    int seed_id;
    int n;
    double x; // mod 1
    double y;
};

struct Portrait {
    std::vector<PortraitPoint> points;
    std::vector<int> escaped_seeds; // orbits truncated by leaving the map's domain
};

/// Deterministic orbit table: each seed iterated n_iter times, rows (seed_id, n, x mod 1, y).
inline Portrait phase_portrait(const CylinderMap& F, const std::vector<Point>& seeds, int n_iter) {
    Portrait out;
    out.points.reserve(seeds.size() * static_cast<std::size_t>(n_iter));
    for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
        double x = seeds[s].x, y = seeds[s].y;
        for (int n = 1; n <= n_iter; ++n) {
            try {
                const Point w = F.apply(x, y);
                x = w.x - std::floor(w.x);
                y = w.y;
            } catch (const DomainError&) {
                out.escaped_seeds.push_back(s);
                break;
            }
            out.points.push_back(PortraitPoint{s, n, x, y});
        }
    }
    return out;
}

struct CounterexampleReport {
    double min_gap; // min over the scan of max(|g|, |h|)
    double argmin;
    double h_at_zero;
    double h_at_half;
};

/// Non-intersection probe for the planar twist on the 2-torus: the graph torus
/// y = (1/2 + delta sin 2pi x1, delta cos 2pi x1) misses its image; g and h measure the
/// two matching conditions and never vanish together.
inline CounterexampleReport counterexample_2d(double delta, long n_scan) {
    if (!(delta > 0.0 && delta < 1.0 / two_pi))
        throw ContractError("counterexample_2d requires 0 < delta < 1/(2 pi)");
    if (n_scan < 2) throw ContractError("counterexample_2d requires n_scan >= 2");
    auto g = [delta](double x) {
        return std::sin(two_pi * (x + 0.5 + delta * std::sin(two_pi * x))) - std::sin(two_pi * x);
    };
    auto h = [delta](double x) {
        return std::cos(two_pi * (x + 0.5 + delta * std::sin(two_pi * x))) - std::cos(two_pi * x);
    };
    double min_gap = std::numeric_limits<double>::infinity();
    double argmin = 0.0;
    for (long i = 0; i < n_scan; ++i) {
        const double x = static_cast<double>(i) / n_scan;
        const double gap = std::max(std::abs(g(x)), std::abs(h(x)));
        if (gap < min_gap) {
            min_gap = gap;
            argmin = x;
        }
    }
    if (!(min_gap > 0.0))
        throw NumericalError("counterexample scan found a common zero of g and h");
    return CounterexampleReport{min_gap, argmin, h(0.0), h(0.5)};
}

} // namespace cylkam
