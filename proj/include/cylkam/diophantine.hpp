#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cylkam/errors.hpp"
#include "cylkam/funcspace.hpp"

namespace cylkam {

/// |e^{2 pi i m alpha} - 1| computed as 2|sin(pi m alpha)|; exact near resonances where the
/// complex difference would cancel.
inline double small_divisor(double alpha, long m) {
    if (m == 0) throw ContractError("small_divisor requires m != 0");
    const double t = std::remainder(static_cast<double>(m) * alpha, 1.0);
    return 2.0 * std::abs(std::sin(pi * t));
}

struct DiophantineCheck {
    bool pass;
    long first_violation; // 0 when pass
    double worst_margin;  // min over m of small_divisor * m^tau / sigma
};

/// Scan 0 < |m| <= M for |e^{2 pi i m alpha} - 1| >= sigma / |m|^tau.
inline DiophantineCheck check_diophantine(double alpha, double sigma, double tau, long M) {
    if (M < 1) throw ContractError("check_diophantine requires M >= 1");
    DiophantineCheck result{true, 0, std::numeric_limits<double>::infinity()};
    for (long m = 1; m <= M; ++m) { // divisor is even in m
        const double d = small_divisor(alpha, m);
        const double scaled = d * std::pow(static_cast<double>(m), tau);
        if (scaled / sigma < result.worst_margin) result.worst_margin = scaled / sigma;
        if (scaled < sigma) {
            result.pass = false;
            result.first_violation = m;
            return result;
        }
    }
    return result;
}

/// Empirical (sigma, tau) for alpha from the record minima of the divisor sequence.
///
/// tau is the least-squares slope of log(divisor) against log|m| over record minima
/// (continued-fraction denominators dominate; fitting all m would bias the slope), then
/// sigma = min over |m| <= M of divisor * |m|^tau, so the returned pair passes
/// check_diophantine at M by construction.
inline std::pair<double, double> estimate_constants(double alpha, long M) {
    if (M < 100) throw ContractError("estimate_constants requires M >= 100");
    std::vector<double> all_m, all_d, log_m, log_d;
    double record = std::numeric_limits<double>::infinity();
    for (long m = 1; m <= M; ++m) {
        const double d = small_divisor(alpha, m);
        if (d < two_pi * static_cast<double>(m) * 1e-12) throw DegenerateAlphaError(alpha, m);
        if (d < record) {
            record = d;
            all_m.push_back(std::log(static_cast<double>(m)));
            all_d.push_back(std::log(d));
            // the first partial quotients distort the asymptotic slope; skip tiny m
            if (m >= 5) {
                log_m.push_back(std::log(static_cast<double>(m)));
                log_d.push_back(std::log(d));
            }
        }
    }
    if (log_m.size() < 2) {
        log_m = all_m;
        log_d = all_d;
    }
    double tau = 1.0;
    if (log_m.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(log_m.size());
        for (std::size_t i = 0; i < log_m.size(); ++i) {
            sx += log_m[i];
            sy += log_d[i];
            sxx += log_m[i] * log_m[i];
            sxy += log_m[i] * log_d[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        tau = std::max(-slope, 1e-3);
    }
    double sigma = std::numeric_limits<double>::infinity();
    for (long m = 1; m <= M; ++m)
        sigma = std::min(sigma, small_divisor(alpha, m) * std::pow(static_cast<double>(m), tau));
    return {sigma, tau};
}

/// (alpha, sigma, tau) with the derived exponents rho = [tau]+2, mu = 15(rho+1) and the
/// small-divisor series constant C(tau, sigma).
///
/// The Diophantine inequality itself is verified by run pre-flights (check_diophantine at
/// m_check), not at construction, so that violations surface as hypothesis reports.
struct DiophantineParams {
    double alpha;
    double sigma;
    double tau;
    int rho;
    int mu;
    double lemma_constant;
    long m_check;
};

namespace detail {

/// (1/sigma) * sum_{m != 0} |m|^{-(2+[tau]-tau)}: partial sum to m_tail plus an
/// Euler-Maclaurin-sharpened integral tail, an upper bound of the series within 1e-6.
inline double lemma_constant_series(double sigma, double tau, long m_tail = 1000000) {
    const double e = 2.0 + std::floor(tau) - tau; // in (1, 2], so the series converges
    double partial = 0.0;
    for (long m = m_tail; m >= 1; --m) partial += std::pow(static_cast<double>(m), -e);
    const double mp1 = static_cast<double>(m_tail + 1);
    const double tail = std::pow(mp1, 1.0 - e) / (e - 1.0) + 0.5 * std::pow(mp1, -e) +
                        e / 12.0 * std::pow(mp1, -e - 1.0);
    return (2.0 / sigma) * (partial + tail);
}

} // namespace detail

inline DiophantineParams derived_params(double alpha, double sigma, double tau,
                                        long m_check = 10000) {
    if (sigma <= 0.0 || tau <= 0.0) throw ContractError("derived_params requires sigma, tau > 0");
    const int rho = static_cast<int>(std::floor(tau)) + 2;
    const int mu = 15 * (rho + 1);
    return DiophantineParams{alpha,       sigma, tau, rho, mu,
                             detail::lemma_constant_series(sigma, tau), m_check};
}

} // namespace cylkam
