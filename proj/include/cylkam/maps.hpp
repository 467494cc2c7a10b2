#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cylkam/funcspace.hpp"
#include "cylkam/norms.hpp"

namespace cylkam {

struct IdentityBase {};
struct TranslationBase {
    double alpha;
};
struct TwistBase {}; // U_0(x,y) = (x+y, y)
struct FrequencyTwistBase {
    std::function<double(double)> omega;
    std::function<double(double)> omega_inv;
    std::string omega_src;     // expression source when built from the DSL (for serialization)
    std::string omega_inv_src;
};

using MapBase = std::variant<IdentityBase, TranslationBase, TwistBase, FrequencyTwistBase>;

struct Point {
    double x;
    double y;
};

/// Base action in the lift (x not reduced mod 1).
inline Point apply_base(const MapBase& base, double x, double y) {
    return std::visit(
        [&](const auto& b) -> Point {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, IdentityBase>) return {x, y};
            if constexpr (std::is_same_v<T, TranslationBase>) return {x + b.alpha, y};
            if constexpr (std::is_same_v<T, TwistBase>) return {x + y, y};
            if constexpr (std::is_same_v<T, FrequencyTwistBase>) return {x + b.omega(y), y};
        },
        base);
}

inline std::string base_tag(const MapBase& base) {
    return std::visit(
        [](const auto& b) -> std::string {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, IdentityBase>) return "identity";
            if constexpr (std::is_same_v<T, TranslationBase>) return "translation";
            if constexpr (std::is_same_v<T, TwistBase>) return "twist";
            if constexpr (std::is_same_v<T, FrequencyTwistBase>) return "frequency_twist";
        },
        base);
}

/// Base map plus a two-component perturbation; (x,y) -> base(x,y) + pert(x,y), x mod 1.
struct CylinderMap {
    MapBase base;
    std::optional<VectorFunction> pert;

    /// Image in the lift; pert evaluation restricts y to the pert's interval.
    Point apply(double x, double y) const {
        Point p = apply_base(base, x, y);
        if (pert) {
            p.x += pert->c1.evaluate(x, y);
            p.y += pert->c2.evaluate(x, y);
        }
        return p;
    }

    std::optional<Interval> domain() const {
        if (pert) return pert->grid().interval;
        return std::nullopt;
    }
};

inline CylinderMap make_identity() { return {IdentityBase{}, std::nullopt}; }
inline CylinderMap make_translation(double alpha) { return {TranslationBase{alpha}, std::nullopt}; }
inline CylinderMap make_twist() { return {TwistBase{}, std::nullopt}; }

/// Near-identity conjugacy H = id + h. The C1 bound is the inversion contract.
struct Conjugacy {
    VectorFunction gen;
    Interval domain;
    double c1_norm;

    Conjugacy(VectorFunction g, double c1) : gen(std::move(g)), domain(gen.grid().interval), c1_norm(c1) {
        if (!(c1_norm < 0.25))
            throw ContractError("conjugacy generator C1 norm must stay below 1/4");
    }

    Point apply(double x, double y) const {
        return {x + gen.c1.evaluate(x, y), y + gen.c2.evaluate(x, y)};
    }
};

inline Conjugacy make_conjugacy(VectorFunction gen, const NormOptions& opts = {}) {
    const double c1 = holder_norm(gen, 1.0, opts);
    return Conjugacy(std::move(gen), c1);
}

/// Lipschitz semi-conjugacy W(x,y) = x + v(x,y) with tracked bound L > 1.
struct SemiConjugacy {
    CylinderFunction v;
    double lipschitz;

    SemiConjugacy(CylinderFunction v_, double lip) : v(std::move(v_)), lipschitz(lip) {
        if (!(lipschitz > 1.0)) throw ContractError("semi-conjugacy Lipschitz bound must exceed 1");
    }

    double apply(double x, double y) const { return x + v.evaluate(x, y); }
};

/// The generalized standard family S_eps(x,y) = (x + y + P(x), y + P(x)) with
/// P(x) = eps sin(2 pi q x) / (2 pi q)^r; exact symplectic, commutes with T_{p/q}.
inline CylinderMap standard_family(double epsilon, int q, int r, const GridSpec& grid) {
    if (q < 1) throw ContractError("standard_family requires q >= 1");
    if (r < 0) throw ContractError("standard_family requires r >= 0");
    const double scale = epsilon / std::pow(two_pi * q, r);
    const Sampler p = [q, scale](double x, double) { return scale * std::sin(two_pi * q * x); };
    CylinderFunction pert = CylinderFunction::fit(p, grid);
    return {TwistBase{}, VectorFunction(pert, pert)};
}

namespace detail {

/// Fixed-point inversion of w = z + h(z): z <- w - h(z); contraction factor <= ||h||_1.
inline Point invert_point(const VectorFunction& h, double wx, double wy, double tol = 1e-13,
                          int max_iter = 200) {
    double zx = wx, zy = wy;
    for (int it = 0; it < max_iter; ++it) {
        const double nx = wx - h.c1.evaluate(zx, zy);
        const double ny = wy - h.c2.evaluate(zx, zy);
        const double step = std::max(std::abs(nx - zx), std::abs(ny - zy));
        zx = nx;
        zy = ny;
        if (step < tol) return {zx, zy};
    }
    throw NumericalError("near-identity inversion did not converge in 200 iterations");
}

/// Fit a map's perturbation from per-node images minus the declared base.
inline VectorFunction fit_pert(const GridSpec& grid, const MapBase& declared,
                               const std::function<Point(double, double)>& image) {
    const int nx = grid.nx, ny = grid.ny;
    std::vector<double> p1(static_cast<std::size_t>(nx) * ny), p2(p1.size());
    for (int k = 0; k < ny; ++k) {
        const double y = grid.y_node(k);
        for (int n = 0; n < nx; ++n) {
            const double x = grid.x_node(n);
            const Point w = image(x, y);
            const Point b = apply_base(declared, x, y);
            p1[static_cast<std::size_t>(k) * nx + n] = w.x - b.x;
            p2[static_cast<std::size_t>(k) * nx + n] = w.y - b.y;
        }
    }
    return VectorFunction(CylinderFunction::from_values(grid, p1),
                          CylinderFunction::from_values(grid, p2));
}

} // namespace detail

struct ComposeInfo {
    double image_margin = std::numeric_limits<double>::infinity();
    bool margin_warning = false;
};

/// Infer the composed base when unambiguous; otherwise the caller must declare it.
inline std::optional<MapBase> infer_composed_base(const MapBase& g, const MapBase& f) {
    if (std::holds_alternative<IdentityBase>(g)) return f;
    if (std::holds_alternative<IdentityBase>(f)) return g;
    if (std::holds_alternative<TranslationBase>(g) && std::holds_alternative<TranslationBase>(f))
        return MapBase(TranslationBase{std::get<TranslationBase>(g).alpha +
                                       std::get<TranslationBase>(f).alpha});
    return std::nullopt;
}

/// g o f sampled on the target lattice; the declared base is subtracted to extract the
/// new perturbation. Warns (via info) when the image margin against g's domain is thin.
inline CylinderMap compose(const CylinderMap& g, const CylinderMap& f, const GridSpec& grid,
                           const Interval& target, std::optional<MapBase> declared_base = {},
                           ComposeInfo* info = nullptr) {
    MapBase base = declared_base ? *declared_base : [&] {
        auto inferred = infer_composed_base(g.base, f.base);
        if (!inferred)
            throw ContractError("composition base is ambiguous; declare it explicitly");
        return *inferred;
    }();
    ComposeInfo local;
    const GridSpec out_grid(grid.nx, grid.ny, target);
    const std::optional<Interval> gdom = g.domain();
    VectorFunction pert = detail::fit_pert(out_grid, base, [&](double x, double y) {
        const Point w = f.apply(x, y);
        if (gdom) {
            const double margin = std::min(w.y - gdom->lo, gdom->hi - w.y);
            local.image_margin = std::min(local.image_margin, margin);
            if (margin < 0.0)
                throw DomainError(w.y, gdom->lo, gdom->hi, "composition image escaped g's domain");
        }
        return g.apply(w.x, w.y);
    });
    local.margin_warning = local.image_margin < 1e-6;
    if (info) *info = local;
    return {std::move(base), std::move(pert)};
}

/// Inverse of H = id + h on the target interval by per-node fixed-point iteration.
/// Contract (near-identity inversion): ||h||_1 < margin of H.domain over target, <= 1/2.
inline Conjugacy invert_near_identity(const Conjugacy& H, const GridSpec& grid,
                                      const Interval& target, const NormOptions& opts = {}) {
    const double margin = std::min(target.lo - H.domain.lo, H.domain.hi - target.hi);
    const double delta = std::min(margin, 0.5);
    if (!(H.c1_norm < delta))
        throw ContractError("inversion contract theta_1 < delta <= 1/2 violated");
    const GridSpec out_grid(grid.nx, grid.ny, target);
    VectorFunction gen = detail::fit_pert(out_grid, IdentityBase{}, [&](double wx, double wy) {
        return detail::invert_point(H.gen, wx, wy);
    });
    const double c1 = holder_norm(gen, 1.0, opts);
    Conjugacy inverse(std::move(gen), c1);

    // composite residual ||H o H^{-1} - id||_0 on an oversampled target lattice
    double residual = 0.0;
    const auto ys = cgl_nodes(target, 2 * grid.ny);
    for (double y : ys)
        for (int n = 0; n < 2 * grid.nx; ++n) {
            const double x = static_cast<double>(n) / (2 * grid.nx);
            const Point z = inverse.apply(x, y);
            const Point w = H.apply(z.x, z.y);
            residual = std::max(residual, std::max(circle_distance(w.x - x), std::abs(w.y - y)));
        }
    if (residual > 1e-10)
        throw NumericalError("inverse residual ||H o H^{-1} - id||_0 above 1e-10");
    return inverse;
}

/// H^{-1} o F o H sampled and refit on the target; the base is preserved and the new
/// perturbation extracted. Domain-chain failures name the failing link.
inline CylinderMap conjugate(const CylinderMap& F, const Conjugacy& H, const GridSpec& grid,
                             const Interval& target) {
    const GridSpec out_grid(grid.nx, grid.ny, target);
    VectorFunction pert = detail::fit_pert(out_grid, F.base, [&](double x, double y) {
        Point w1{0, 0};
        try {
            w1 = H.apply(x, y);
        } catch (const DomainError& e) {
            throw ContractError(std::string("conjugation chain: H(target) escaped H's domain: ") +
                                e.what());
        }
        Point w2{0, 0};
        try {
            w2 = F.apply(w1.x, w1.y);
        } catch (const DomainError& e) {
            throw ContractError(std::string("conjugation chain: H(target) escaped F's domain: ") +
                                e.what());
        }
        try {
            return detail::invert_point(H.gen, w2.x, w2.y);
        } catch (const DomainError& e) {
            throw ContractError(
                std::string("conjugation chain: F(H(target)) escaped H^{-1}'s domain: ") +
                e.what());
        }
    });
    return {F.base, std::move(pert)};
}

/// Reduction of (F over FrequencyTwist(omega), K over Translation) to perturbations of
/// (U_0, T_alpha): f1 o Q and omega(omega^{-1}(y) + f2 o Q) - y with Q(x,y) = (x, omega^{-1}(y)).
/// The y-interval is transported through omega.
inline std::pair<CylinderMap, CylinderMap> reduce_by_frequency(const CylinderMap& F,
                                                               const CylinderMap& K,
                                                               const GridSpec& grid) {
    if (!std::holds_alternative<FrequencyTwistBase>(F.base))
        throw ContractError("reduce_by_frequency requires a FrequencyTwist base for F");
    const auto& ft = std::get<FrequencyTwistBase>(F.base);
    if (!std::holds_alternative<TranslationBase>(K.base))
        throw ContractError("reduce_by_frequency requires a Translation base for K");

    const Interval source = grid.interval;
    // monotonicity and round-trip audit on the working interval
    const int probes = 64;
    double prev = ft.omega(source.lo);
    const double w0 = prev, w1 = ft.omega(source.hi);
    const bool increasing = w1 > w0;
    for (int i = 1; i <= probes; ++i) {
        const double y = source.lo + source.width() * i / probes;
        const double w = ft.omega(y);
        if (increasing ? (w <= prev) : (w >= prev))
            throw ContractError("omega is not strictly monotone on the working interval");
        prev = w;
        if (std::abs(ft.omega_inv(w) - y) > 1e-10 * source.scale())
            throw ContractError("omega inverse round-trip error above 1e-10");
    }
    const Interval image(std::min(w0, w1), std::max(w0, w1));
    const GridSpec out_grid(grid.nx, grid.ny, image);

    // fit_pert subtracts the identity base, so the lambda returns (x + new_p1, ytil + new_p2)
    auto reduce_pert = [&](const CylinderMap& M) -> VectorFunction {
        return detail::fit_pert(out_grid, IdentityBase{}, [&](double x, double ytil) {
            const double y = ft.omega_inv(ytil);
            double p1 = 0.0, p2 = 0.0;
            if (M.pert) {
                p1 = M.pert->c1.evaluate(x, y);
                p2 = M.pert->c2.evaluate(x, y);
            }
            return Point{x + p1, ft.omega(y + p2)};
        });
    };
    VectorFunction f_new = reduce_pert(F);
    VectorFunction k_new = reduce_pert(K);
    return {CylinderMap{TwistBase{}, std::move(f_new)},
            CylinderMap{std::get<TranslationBase>(K.base), std::move(k_new)}};
}

/// Ground-truth fixture: F = H o U_0 o H^{-1}, K = H o T_alpha o H^{-1} with H = id + h.
/// By construction F and K commute, F inherits the intersection property, and K is
/// Lipschitz semi-conjugate to R_alpha via W = pi_1 o H^{-1}.
struct ManufacturedPair {
    CylinderMap F;
    CylinderMap K;
    Conjugacy H_true;
    SemiConjugacy W_true;
};

inline ManufacturedPair manufacture_commuting_pair(const VectorFunction& h_gen, double alpha,
                                                   const GridSpec& grid, const Interval& interval,
                                                   const NormOptions& opts = {}) {
    const double h1 = holder_norm(h_gen, 1.0, opts);
    if (!(h1 < 0.125)) throw ContractError("manufacture requires ||h_gen||_1 < 1/8");
    const double h0 = c0_norm(h_gen, opts);
    const Interval hdom = h_gen.grid().interval;
    if (!hdom.contains(interval.widened(2.0 * h0 + 1e-9)))
        throw ContractError("h_gen interval too small for the requested working interval");

    const GridSpec out_grid(grid.nx, grid.ny, interval);
    auto conjugated = [&](const MapBase& mid) {
        return detail::fit_pert(out_grid, mid, [&](double x, double y) {
            const Point z = detail::invert_point(h_gen, x, y); // H^{-1}
            const Point u = apply_base(mid, z.x, z.y);
            return Point{u.x + h_gen.c1.evaluate(u.x, u.y), u.y + h_gen.c2.evaluate(u.x, u.y)};
        });
    };
    CylinderMap F{TwistBase{}, conjugated(TwistBase{})};
    CylinderMap K{TranslationBase{alpha}, conjugated(TranslationBase{alpha})};

    // W_true = pi_1 o H^{-1}: v is the first component of the inverse generator
    CylinderFunction v = CylinderFunction::fit(
        [&](double x, double y) {
            const Point z = detail::invert_point(h_gen, x, y);
            return z.x - x;
        },
        out_grid);
    const double slope = detail::holder_seminorm(v, 1.0, opts);
    SemiConjugacy w_true(std::move(v), std::max(1.01, 1.25 * (1.0 + slope)));

    return ManufacturedPair{std::move(F), std::move(K), Conjugacy(h_gen, h1), std::move(w_true)};
}

} // namespace cylkam
