#pragma once

// Fluctuating Beckmann (FB) fading: parameters of one link, the derived
// constants of its SNR law, and embeddings of the classical special cases.
//
// The SNR law is described entirely by its Laplace transform
//
//     L(s) = Omega * prod_k (s + theta_k / snr)^(-a_k),   sum_k a_k = mu,
//
// with four rate/exponent pairs (two shadowing roots c1, c2 with exponent m,
// two scattering rates with exponent mu/2 - m). Everything downstream (closed
// forms, Talbot inversion, Chernoff tail bounds) is driven by that list.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "fbsec/errors.hpp"

namespace fbsec {

using complex = std::complex<double>;

// Shadowing parameter standing in for m -> infinity (no LoS fluctuation).
inline constexpr double kUnshadowedM = 1e6;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct FBParams {
    double mu = 1.0;      // real number of multipath clusters
    double m = 1.0;       // shadowing severity (Gamma shape of the LoS power)
    double kappa = 0.0;   // dominant-to-scattered power ratio
    double eta = 1.0;     // in-phase / quadrature scattered power ratio
    double rho2 = 1.0;    // in-phase / quadrature dominant power ratio
    double avg_snr = 1.0; // linear average SNR

    void validate() const {
        detail::require_finite(mu, "mu");
        detail::require_finite(m, "m");
        detail::require_finite(kappa, "kappa");
        detail::require_finite(eta, "eta");
        detail::require_finite(rho2, "rho2");
        detail::require_finite(avg_snr, "avg_snr");
        if (mu <= 0.0) throw parameter_error("mu", "must be > 0");
        if (m <= 0.0) throw parameter_error("m", "must be > 0");
        if (kappa < 0.0) throw parameter_error("kappa", "must be >= 0");
        if (eta <= 0.0) throw parameter_error("eta", "must be > 0");
        if (rho2 < 0.0) throw parameter_error("rho2", "must be >= 0");
        if (avg_snr <= 0.0) throw parameter_error("avg_snr", "must be > 0");
    }

    // mu even and m integer: the SNR law has a finite partial-fraction form.
    bool is_case2() const {
        auto near_positive_int = [](double v) {
            const double r = std::round(v);
            return r >= 1.0 && std::abs(v - r) <= 1e-12 * std::max(1.0, std::abs(v));
        };
        return near_positive_int(mu / 2.0) && near_positive_int(m);
    }

    friend bool operator==(const FBParams&, const FBParams&) = default;
};

struct DerivedParams {
    double omega_norm = 0.0; // may under/overflow for huge m; prefer log_omega
    double log_omega = 0.0;
    double alpha2 = 0.0;
    double alpha1 = 0.0;
    double beta = 0.0;
    complex c1{};
    complex c2{};
    std::array<complex, 4> theta_rates{}; // un-normalised by avg_snr
    std::array<double, 4> exponents{};
    int n_groups = 0;
};

inline DerivedParams derive(const FBParams& p) {
    p.validate();
    const double mu = p.mu, m = p.m, k = p.kappa, eta = p.eta, rho2 = p.rho2;

    DerivedParams d;
    const double g = mu * (1.0 + eta) * (1.0 + k);
    d.alpha2 = 4.0 * eta / (g * g);
    d.alpha1 = d.alpha2 + 2.0 * k * (rho2 + eta) /
                              (m * (1.0 + rho2) * mu * (1.0 + eta) * (1.0 + k) * (1.0 + k));
    d.beta = -(2.0 / mu + k / m) / (1.0 + k);

    // Roots of alpha1 s^2 + beta s + 1. beta < 0, so q below never cancels.
    double disc = d.beta * d.beta - 4.0 * d.alpha1;
    if (disc < 0.0 && -disc <= 64.0 * std::numeric_limits<double>::epsilon() * d.beta * d.beta) {
        disc = 0.0; // double root perturbed by rounding
    }
    const complex sq = std::sqrt(complex(disc, 0.0));
    const complex q = 0.5 * (-d.beta + sq);
    d.c1 = q / d.alpha1;
    d.c2 = disc < 0.0 ? std::conj(d.c1) : 1.0 / q;

    d.theta_rates = {d.c1, d.c2, complex(g / (2.0 * eta), 0.0), complex(g / 2.0, 0.0)};
    d.exponents = {m, m, mu / 2.0 - m, mu / 2.0 - m};
    d.n_groups = static_cast<int>(
        std::count_if(d.exponents.begin(), d.exponents.end(), [](double a) { return a != 0.0; }));

    d.log_omega = (m - mu / 2.0) * std::log(d.alpha2) - mu * std::log(p.avg_snr) -
                  m * std::log(d.alpha1);
    d.omega_norm = std::exp(d.log_omega);
    return d;
}

// One distinct singularity of the Laplace transform after merging.
struct PoleGroup {
    complex rate;    // already divided by avg_snr
    double exponent; // > 0: pole of that order; < 0: zero (numerator factor)
};

// Merges rates closer than `merge_rel_tol` (summing exponents) and drops
// groups whose net exponent vanishes. Rates are scaled by 1/avg_snr.
inline std::vector<PoleGroup> pole_groups(const DerivedParams& d, double avg_snr,
                                          double merge_rel_tol = 1e-9) {
    std::vector<PoleGroup> groups;
    std::vector<double> weight; // sum of |exponent| merged into each group
    for (std::size_t k = 0; k < 4; ++k) {
        if (d.exponents[k] == 0.0) continue;
        const complex r = d.theta_rates[k] / avg_snr;
        bool merged = false;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double scale = std::max(std::abs(r), std::abs(groups[g].rate));
            if (std::abs(r - groups[g].rate) <= merge_rel_tol * scale) {
                groups[g].exponent += d.exponents[k];
                weight[g] += std::abs(d.exponents[k]);
                merged = true;
                break;
            }
        }
        if (!merged) {
            groups.push_back({r, d.exponents[k]});
            weight.push_back(std::abs(d.exponents[k]));
        }
    }
    std::vector<PoleGroup> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (std::abs(groups[g].exponent) > 1e-12 * std::max(1.0, weight[g])) out.push_back(groups[g]);
    }
    return out;
}

// --- special-case embeddings -------------------------------------------------

// eta = 1 removes the in-phase/quadrature imbalance; rho2 is then inert.
inline FBParams from_kappa_mu_shadowed(double kappa, double mu, double m, double avg_snr) {
    FBParams p{mu, m, kappa, 1.0, 1.0, avg_snr};
    p.validate();
    return p;
}

inline FBParams from_rician_shadowed(double K, double m, double avg_snr) {
    return from_kappa_mu_shadowed(K, 1.0, m, avg_snr);
}

// kappa = 0 leaves no dominant component, so m and rho2 are inert.
inline FBParams from_nakagami(double m_nak, double avg_snr) {
    FBParams p{m_nak, kUnshadowedM, 0.0, 1.0, 1.0, avg_snr};
    p.validate();
    return p;
}

inline FBParams from_rayleigh(double avg_snr) { return from_nakagami(1.0, avg_snr); }

// Experimental: eta-mu via kappa = 0. The literature reduction lets m and
// rho go to zero, which is not a valid Gamma shape; with kappa = 0 both are
// inert anyway, so they are pinned to the unshadowed surrogate and 0.
inline FBParams from_eta_mu(double eta, double mu, double avg_snr) {
    FBParams p{mu, kUnshadowedM, 0.0, eta, 0.0, avg_snr};
    p.validate();
    return p;
}

// Beckmann: one cluster, no LoS fluctuation (m_large approximates m -> inf),
// eta = q and rho = r.
inline FBParams from_beckmann(double K, double q, double r, double avg_snr,
                              double m_large = kUnshadowedM) {
    detail::require_finite(m_large, "m_large");
    if (m_large < 1e4) throw parameter_error("m_large", "must be >= 1e4 to approximate m -> infinity");
    FBParams p{1.0, m_large, K, q, r * r, avg_snr};
    p.validate();
    return p;
}

} // namespace fbsec
