#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cylkam/cohomology.hpp"
#include "cylkam/diagnostics.hpp"
#include "cylkam/diophantine.hpp"
#include "cylkam/maps.hpp"
#include "cylkam/smoothing.hpp"

namespace cylkam {

/// Engine cutoff calibration: Fourier mode N has spatial frequency 2 pi N, and Chebyshev
/// degree j resolves frequency ~ j / halfwidth, so matching the two bases needs a
/// y-cutoff degree ~ 2 pi N halfwidth; doubled for margin. The scheduler's N stays small
/// at practical tolerances, and an uncalibrated y-cutoff would discard smooth content.
inline constexpr double kam_y_scale = 4.0 * std::numbers::pi;

/// The domain budget was spent: delta_i would drop to zero or below.
class DomainExhaustedError : public Error {
  public:
    explicit DomainExhaustedError(double delta)
        : Error("domain exhausted: next delta = " + std::to_string(delta)) {}
};

struct KamConfig {
    DiophantineParams dio;
    Interval interval;              // the base interval I; iterates live on its widenings
    double delta0 = 0.25;           // in (0, 1/2]
    int nx = 64;
    int ny = 32;
    double tol_e0 = 1e-9;
    int max_iter = 12;
    double lipschitz0 = 1.25;       // > 1
    double commutator_tol = 1e-8;
    double semiconj_tol = 1e-8;
    NormOptions norms{};
    CutoffProfile profile = CutoffProfile::quintic(kam_y_scale);

    void validate() const {
        std::vector<std::string> bad;
        if (!(delta0 > 0.0 && delta0 <= 0.5)) bad.push_back("delta0 must lie in (0, 1/2]");
        if (!(tol_e0 > 0.0)) bad.push_back("tol_e0 must be positive");
        if (!(lipschitz0 > 1.0)) bad.push_back("lipschitz0 must exceed 1");
        if (max_iter < 0) bad.push_back("max_iter must be non-negative");
        if (!bad.empty()) throw ConfigError(bad);
    }

    /// Tracked high-norm index: mu capped by the grid's resolution guard ny/4.
    int mu_eff() const { return std::min(dio.mu, ny / 4); }
};

struct StepRecord {
    int i;
    double n_smoothing;  // N_i (0 marks a trivial zero-perturbation step)
    double delta;        // delta^{(i)}
    double e0;           // E_{i,0}
    double e_mu;         // E_{i,mu_eff}
    double u1;           // U_{i,1} = ||h^{(i)}||_1
    double lipschitz;    // Lipschitz ledger bound
    double c_emp;        // U_{i,1} / (N^{1+rho} E_{i-1,0})
    bool decay_ok;       // E_{i,0} <= E_{i-1,0}^{5/4} (reported, not enforced)
    double wall_ms;
};

struct KamState {
    int i;
    double delta;
    VectorFunction f;
    VectorFunction k;
    std::vector<Conjugacy> h_stack;
    double lipschitz;
    std::vector<StepRecord> history;
};

enum class RunStatus { Converged, HypothesisViolated, DomainExhausted, MaxIterations, StepFailure };

inline std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "Converged";
        case RunStatus::HypothesisViolated: return "HypothesisViolated";
        case RunStatus::DomainExhausted: return "DomainExhausted";
        case RunStatus::MaxIterations: return "MaxIterations";
        case RunStatus::StepFailure: return "StepFailure";
    }
    return "Unknown";
}

struct KamResult {
    RunStatus status = RunStatus::StepFailure;
    std::string hypothesis; // which hypothesis failed, when HypothesisViolated
    std::string detail;
    std::optional<Conjugacy> h_total;
    std::optional<KamState> final_state; // absent for pre-flight rejections
    double residual_f = std::numeric_limits<double>::quiet_NaN();
    double residual_k = std::numeric_limits<double>::quiet_NaN();
    int mu_eff = 0;
};

/// N = E^{-1/(4(rho+1))}; the previous C0 error must be in (0, 1).
inline double schedule_N(double e_prev0, int rho) {
    if (!(e_prev0 > 0.0 && e_prev0 < 1.0))
        throw ContractError("schedule_N requires 0 < E < 1 (perturbation too large)");
    return std::pow(e_prev0, -1.0 / (4.0 * (rho + 1)));
}

/// h = (xi_1, -[S_N f_1] + xi_2) where xi solves Delta_alpha xi = S_N k - [S_N k];
/// adding the x-independent part keeps Delta_alpha h = S_N k - [S_N k].
inline VectorFunction build_h(const VectorFunction& f, const VectorFunction& k,
                              const DiophantineParams& dio, double N,
                              const CutoffProfile& profile = CutoffProfile::quintic(kam_y_scale),
                              const NormOptions& opts = {}) {
    if (!(N > 1.0)) throw ContractError("build_h requires N > 1");
    const VectorFunction sk = smooth(k, N, profile);
    const VectorFunction rhs(sub(sk.c1, sk.c1.average_over_x()),
                             sub(sk.c2, sk.c2.average_over_x()));
    auto [xi, solve_residual] = solve_delta_alpha(rhs, dio, opts);
    (void)solve_residual; // the definitional residual of h itself is verified below
    const CylinderFunction sf1_avg = smooth(f.c1, N, profile).average_over_x();
    VectorFunction h(xi.c1, sub(xi.c2, sf1_avg));
    const double residual =
        std::max(c0_norm(sub(apply_delta_alpha(h.c1, dio.alpha), rhs.c1), opts),
                 c0_norm(sub(apply_delta_alpha(h.c2, dio.alpha), rhs.c2), opts));
    if (residual > 1e-10)
        throw NumericalError("build_h residual ||Delta_alpha h - (S_N k - [S_N k])||_0 > 1e-10");
    return h;
}

/// One inductive step: schedule N, build h, invert H = id + h, conjugate both maps onto
/// the shrunk strip, and append the norm ledger row.
inline KamState kam_step(const KamState& state, const KamConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };
    const double e_prev = std::max(c0_norm(state.f, config.norms), c0_norm(state.k, config.norms));
    KamState next = state;
    next.i = state.i + 1;

    if (e_prev == 0.0) { // already linear; nothing to do but advance the counter
        next.history.push_back(StepRecord{next.i, 0.0, state.delta, 0.0, 0.0, 0.0,
                                          state.lipschitz, 0.0, true, elapsed_ms()});
        return next;
    }

    const double N = schedule_N(e_prev, config.dio.rho);
    const VectorFunction h = build_h(state.f, state.k, config.dio, N, config.profile, config.norms);
    const double theta = holder_norm(h, 1.0, config.norms);
    const double delta_new = state.delta - 2.0 * theta - e_prev; // the delta ledger
    if (!(delta_new > 0.0)) throw DomainExhaustedError(delta_new);

    const Conjugacy H(h, theta); // enforces theta < 1/4
    const Interval target = config.interval.widened(delta_new);
    const GridSpec grid(config.nx, config.ny, target);
    const CylinderMap F{TwistBase{}, state.f};
    const CylinderMap K{TranslationBase{config.dio.alpha}, state.k};
    const CylinderMap f_new = conjugate(F, H, grid, target);
    const CylinderMap k_new = conjugate(K, H, grid, target);

    next.delta = delta_new;
    next.f = *f_new.pert;
    next.k = *k_new.pert;
    next.h_stack.push_back(H);
    next.lipschitz = state.lipschitz * (1.0 + 2.0 * theta);

    const double e0 = std::max(c0_norm(next.f, config.norms), c0_norm(next.k, config.norms));
    const double e_mu =
        std::max(holder_norm(next.f, static_cast<double>(config.mu_eff()), config.norms),
                 holder_norm(next.k, static_cast<double>(config.mu_eff()), config.norms));
    const double c_emp = theta / (std::pow(N, 1.0 + config.dio.rho) * e_prev);
    const bool decay_ok = e0 <= std::pow(e_prev, 1.25);
    next.history.push_back(StepRecord{next.i, N, delta_new, e0, e_mu, theta, next.lipschitz,
                                      c_emp, decay_ok, elapsed_ms()});
    return next;
}

/// Left-to-right composition H^{(1)} o ... o H^{(l)} refit on the target interval.
inline Conjugacy compose_conjugacy(const std::vector<Conjugacy>& h_stack, const GridSpec& grid,
                                   const Interval& target, const NormOptions& opts = {}) {
    const GridSpec out_grid(grid.nx, grid.ny, target);
    if (h_stack.empty()) return Conjugacy(VectorFunction::zero(out_grid), 0.0);
    VectorFunction gen = h_stack.back().gen;
    if (!(gen.grid() == out_grid)) {
        gen = VectorFunction(gen.c1.refit_on_interval(target), gen.c2.refit_on_interval(target));
    }
    for (int j = static_cast<int>(h_stack.size()) - 2; j >= 0; --j) {
        const VectorFunction& outer = h_stack[j].gen;
        const VectorFunction inner = gen;
        try {
            gen = detail::fit_pert(out_grid, IdentityBase{}, [&](double x, double y) {
                const double bx = inner.c1.evaluate(x, y);
                const double by = inner.c2.evaluate(x, y);
                return Point{x + bx + outer.c1.evaluate(x + bx, y + by),
                             y + by + outer.c2.evaluate(x + bx, y + by)};
            });
        } catch (const DomainError& e) {
            throw ContractError("conjugacy composition chain violated at layer " +
                                std::to_string(j + 1) + ": " + e.what());
        }
    }
    return Conjugacy(gen, holder_norm(gen, 1.0, opts));
}

namespace detail {

inline VectorFunction pert_on(const std::optional<VectorFunction>& pert, const GridSpec& grid) {
    if (!pert) return VectorFunction::zero(grid);
    if (pert->grid() == grid) return *pert;
    if (!pert->grid().interval.contains(grid.interval, 1e-12 * grid.interval.scale()))
        throw ContractError("perturbation not defined on the full working strip");
    return VectorFunction(pert->c1.resample(grid), pert->c2.resample(grid));
}

} // namespace detail

/// Full iteration with hypothesis pre-flight (commutator, intersection, semi-conjugacy,
/// Diophantine; pure, never mutates inputs) and final conjugation residual verification.
inline KamResult run(const CylinderMap& F, const CylinderMap& K, const SemiConjugacy& W0,
                     const KamConfig& config) {
    config.validate();
    if (!std::holds_alternative<TwistBase>(F.base))
        throw ContractError("run requires F over the twist base (reduce by frequency first)");
    if (!std::holds_alternative<TranslationBase>(K.base))
        throw ContractError("run requires K over a translation base");
    if (std::abs(std::get<TranslationBase>(K.base).alpha - config.dio.alpha) > 1e-12)
        throw ContractError("K's rotation number differs from the Diophantine alpha");

    KamResult result;
    result.mu_eff = config.mu_eff();
    const Interval strip = config.interval.widened(config.delta0);
    const GridSpec grid(config.nx, config.ny, strip);
    const VectorFunction f0 = detail::pert_on(F.pert, grid);
    const VectorFunction k0 = detail::pert_on(K.pert, grid);

    // --- hypothesis pre-flight -------------------------------------------------------
    const double move =
        std::max(c0_norm(f0.c2, config.norms), c0_norm(k0.c2, config.norms)) + 1e-9;
    if (2.0 * move >= config.delta0)
        throw ContractError("perturbation too large for the domain budget delta0");
    const GridSpec probe(config.nx, config.ny, strip.widened(-2.0 * move));
    const CylinderMap F_work{TwistBase{}, f0};
    const CylinderMap K_work{TranslationBase{config.dio.alpha}, k0};

    const auto comm = commutator_residual(F_work, K_work, probe, config.norms);
    if (comm.direct > config.commutator_tol) {
        result.status = RunStatus::HypothesisViolated;
        result.hypothesis = "commutation";
        result.detail = "direct commutator residual " + std::to_string(comm.direct);
        return result;
    }
    const auto isec = intersection_check(F_work, grid);
    if (!isec.pass) {
        result.status = RunStatus::HypothesisViolated;
        result.hypothesis = "intersection";
        result.detail = "f2 fails the sign-change scan on a horizontal circle";
        return result;
    }
    const auto semi = semiconjugacy_residual(W0, K_work, config.dio.alpha, probe, config.norms);
    if (semi.residual > config.semiconj_tol || semi.lipschitz_slope > W0.lipschitz) {
        result.status = RunStatus::HypothesisViolated;
        result.hypothesis = "semi-conjugacy";
        result.detail = "residual " + std::to_string(semi.residual) + ", measured slope " +
                        std::to_string(semi.lipschitz_slope);
        return result;
    }
    const auto dio_check = check_diophantine(config.dio.alpha, config.dio.sigma, config.dio.tau,
                                             config.dio.m_check);
    if (!dio_check.pass) {
        result.status = RunStatus::HypothesisViolated;
        result.hypothesis = "diophantine";
        result.detail = "first violation at m = " + std::to_string(dio_check.first_violation);
        return result;
    }

    // --- iteration --------------------------------------------------------------------
    KamState state{0, config.delta0, f0, k0, {},
                   std::max(config.lipschitz0, W0.lipschitz), {}};
    while (true) {
        const double e0 =
            std::max(c0_norm(state.f, config.norms), c0_norm(state.k, config.norms));
        if (e0 < config.tol_e0) break;
        if (state.i >= config.max_iter) {
            result.status = RunStatus::MaxIterations;
            result.detail = "E_0 = " + std::to_string(e0) + " after " +
                            std::to_string(state.i) + " steps";
            result.final_state = std::move(state);
            return result;
        }
        try {
            state = kam_step(state, config);
        } catch (const DomainExhaustedError& e) {
            result.status = RunStatus::DomainExhausted;
            result.detail = e.what();
            result.final_state = std::move(state);
            return result;
        } catch (const Error& e) {
            result.status = RunStatus::StepFailure;
            result.detail = e.what();
            result.final_state = std::move(state);
            return result;
        }
    }

    // --- conjugacy composition and final residuals -------------------------------------
    // Compose H_total on a strip slightly wider than I_{delta0/2} so that conjugating the
    // original pair can be verified on I_{delta0/2} itself (the inversion fixed point
    // needs the stack's own displacement as domain margin).
    const Interval half = config.interval.widened(config.delta0 / 2.0);
    double theta_sum = 0.0;
    for (const auto& h : state.h_stack) theta_sum += h.c1_norm;
    const double margin =
        std::min(2.0 * (theta_sum + move) + 1e-6, 0.5 * (state.delta - config.delta0 / 2.0));
    try {
        const Interval wide = margin > 0.0 ? half.widened(margin) : half;
        const GridSpec wide_grid(config.nx, config.ny, wide);
        Conjugacy h_total = compose_conjugacy(state.h_stack, wide_grid, wide, config.norms);
        const GridSpec out_grid(config.nx, config.ny, half);
        const CylinderMap f_conj = conjugate(F_work, h_total, out_grid, half);
        const CylinderMap k_conj = conjugate(K_work, h_total, out_grid, half);
        result.residual_f = c0_norm(*f_conj.pert, config.norms);
        result.residual_k = c0_norm(*k_conj.pert, config.norms);
        result.h_total = std::move(h_total);
    } catch (const Error& e) {
        result.status = RunStatus::StepFailure;
        result.detail = std::string("conjugacy composition failed: ") + e.what();
        result.final_state = std::move(state);
        return result;
    }
    if (!(result.residual_f <= 10.0 * config.tol_e0 && result.residual_k <= 10.0 * config.tol_e0)) {
        result.status = RunStatus::StepFailure;
        result.detail = "final conjugation residuals exceed 10 * tol_e0";
        result.final_state = std::move(state);
        return result;
    }
    result.status = RunStatus::Converged;
    result.final_state = std::move(state);
    return result;
}

} // namespace cylkam
