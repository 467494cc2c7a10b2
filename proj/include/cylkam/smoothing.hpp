#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cylkam/funcspace.hpp"
#include "cylkam/norms.hpp"

namespace cylkam {

/// Spectral cutoff profile: chi = 1 on [0,1], 0 on [2,inf), monotone on [1,2].
/// y_scale multiplies the Chebyshev-index cutoff (degree ~ frequency x length).
struct CutoffProfile {
    std::function<double(double)> chi;
    double y_scale = 1.0;

    /// Default: quintic-smoothstep transition on [1,2].
    static CutoffProfile quintic(double y_scale = 1.0) {
        return CutoffProfile{[](double t) {
                                 if (t <= 1.0) return 1.0;
                                 if (t >= 2.0) return 0.0;
                                 const double u = t - 1.0;
                                 return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
                             },
                             y_scale};
    }

    /// C-infinity exp-bump transition.
    static CutoffProfile exp_bump(double y_scale = 1.0) {
        return CutoffProfile{[](double t) {
                                 if (t <= 1.0) return 1.0;
                                 if (t >= 2.0) return 0.0;
                                 const auto g = [](double s) { return std::exp(-1.0 / s); };
                                 return g(2.0 - t) / (g(2.0 - t) + g(t - 1.0));
                             },
                             y_scale};
    }
};

/// S_N: coefficient multiplier chi(|m|/N) in the Fourier index and
/// chi(j / (y_scale * N * halfwidth)) in the Chebyshev index. Linear; commutes with
/// average_over_x exactly (the m = 0 row sees chi(0) = 1 in the Fourier factor).
inline CylinderFunction smooth(const CylinderFunction& f, double N,
                               const CutoffProfile& profile = CutoffProfile::quintic()) {
    if (!(N > 1.0)) throw ContractError("smoothing requires N > 1");
    const GridSpec& grid = f.grid();
    const int nx = grid.nx, ny = grid.ny;
    const double y_cut = profile.y_scale * N * grid.interval.halfwidth();
    std::vector<std::complex<double>> out = f.coeffs();
    for (int a = 0; a < nx; ++a) {
        const double cm = profile.chi(std::abs(a - nx / 2) / N);
        for (int j = 0; j < ny; ++j)
            out[static_cast<std::size_t>(a) * ny + j] *= cm * profile.chi(j / y_cut);
    }
    return CylinderFunction::from_coeffs(grid, std::move(out));
}

/// R_N = id - S_N, the exact complement in coefficients.
inline CylinderFunction remainder(const CylinderFunction& f, double N,
                                  const CutoffProfile& profile = CutoffProfile::quintic()) {
    return sub(f, smooth(f, N, profile));
}

inline VectorFunction smooth(const VectorFunction& f, double N,
                             const CutoffProfile& profile = CutoffProfile::quintic()) {
    return VectorFunction(smooth(f.c1, N, profile), smooth(f.c2, N, profile));
}

struct SmoothingRow {
    int f_id;
    double N;
    double ratio_smooth;    // ||S_N f||_l / (N^{l-s} ||f||_s)
    double ratio_remainder; // ||R_N f||_s N^{l-s} / ||f||_l
};

struct SmoothingTable {
    double s;
    double l;
    std::vector<SmoothingRow> rows;

    double empirical_smooth_constant(double N) const { return max_over_N(N, true); }
    double empirical_remainder_constant(double N) const { return max_over_N(N, false); }

  private:
    double max_over_N(double N, bool smooth_side) const {
        double best = 0.0;
        for (const auto& r : rows)
            if (r.N == N) best = std::max(best, smooth_side ? r.ratio_smooth : r.ratio_remainder);
        return best;
    }
};

/// Measured constants for the smoothing inequalities over a corpus; max over the corpus
/// at each N is the empirical C_{s,l}.
inline SmoothingTable verify_smoothing_bounds(const std::vector<CylinderFunction>& corpus,
                                              const std::vector<double>& n_list, double s, double l,
                                              const CutoffProfile& profile = CutoffProfile::quintic(),
                                              const NormOptions& opts = {}) {
    if (!(l >= s && s >= 0.0)) throw ContractError("verify_smoothing_bounds requires l >= s >= 0");
    SmoothingTable table{s, l, {}};
    for (int id = 0; id < static_cast<int>(corpus.size()); ++id) {
        const CylinderFunction& f = corpus[id];
        const double norm_s = holder_norm(f, s, opts);
        const double norm_l = holder_norm(f, l, opts);
        for (double N : n_list) {
            const double gain = std::pow(N, l - s);
            const double ns = norm_s > 0.0 ? holder_norm(smooth(f, N, profile), l, opts) /
                                                 (gain * norm_s)
                                           : 0.0;
            const double nr = norm_l > 0.0 ? holder_norm(remainder(f, N, profile), s, opts) *
                                                 gain / norm_l
                                           : 0.0;
            table.rows.push_back(SmoothingRow{id, N, ns, nr});
        }
    }
    return table;
}

/// ||f||_m / (||f||_s^{1-lambda} ||f||_l^lambda) with m = (1-lambda) s + lambda l;
/// 0 for the zero function.
inline double interpolation_check(const CylinderFunction& f, double s, double m, double l,
                                  const NormOptions& opts = {}) {
    if (!(s <= m && m <= l)) throw ContractError("interpolation_check requires s <= m <= l");
    if (l == s) return 1.0;
    const double lambda = (m - s) / (l - s);
    const double ns = holder_norm(f, s, opts);
    const double nl = holder_norm(f, l, opts);
    const double denom = std::pow(ns, 1.0 - lambda) * std::pow(nl, lambda);
    if (denom == 0.0) return 0.0;
    return holder_norm(f, m, opts) / denom;
}

} // namespace cylkam
