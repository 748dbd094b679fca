#pragma once

// Exact evaluation when mu is even and m is an integer. The SNR transform is
// then a proper rational function with real poles, so the law is a signed
// mixture of Gamma(q, c) densities and every secrecy metric reduces to finite
// sums of negative-binomial, incomplete-beta and E_n terms.
//
// Poles that sit close together (small kappa pushes the shadowed pair onto the
// scattering rates) make a plain partial-fraction expansion cancel
// catastrophically. Such poles are grouped and their joint principal part is
// expanded about the group midpoint as one convergent series, which keeps
// every mixture weight of moderate size.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fbsec/channel_model.hpp"
#include "fbsec/errors.hpp"
#include "fbsec/secrecy_config.hpp"
#include "fbsec/special_functions.hpp"

namespace fbsec {

// Multiplicities above this are treated as "not case 2" (e.g. the m -> infinity
// surrogate with kappa > 0); the numeric path handles those.
inline constexpr int kMaxCase2Multiplicity = 64;

// Poles closer than this (relative) are expanded together.
inline constexpr double kPoleClusterGap = 0.2;

struct PartialFractionExpansion {
    // Expansion centres: a single pole rate, or the midpoint of a group of
    // nearby poles (and zeros) expanded together.
    std::vector<double> centers;
    std::vector<int> mults; // net exponent of the group at each centre
    // weights[i][q-1]: weight of the Gamma(q, rate centers[i]) density.
    std::vector<std::vector<double>> weights;
    // Coefficients of (s + c_i)^-j in L(s)/Omega and (L(s) - 1)/(s Omega).
    std::vector<std::vector<double>> A;
    std::vector<std::vector<double>> B;
    double omega_norm = 0.0;
    double log_omega = 0.0;
};

namespace detail {

inline int as_integer_exponent(double e) {
    const double r = std::round(e);
    if (std::abs(e - r) > 1e-9 * std::max(1.0, std::abs(e))) {
        throw case_mismatch_error("partial_fractions: non-integer exponent; use the numeric path");
    }
    return static_cast<int>(r);
}

inline double real_pole(complex p) {
    if (std::abs(p.imag()) > 1e-12 * std::abs(p)) {
        throw case_mismatch_error("closed form: complex pole pair; use the numeric path");
    }
    return p.real();
}

struct RateGroup {
    std::vector<double> rates;
    std::vector<int> exps;
    double lo = 0.0, hi = 0.0;
    double center() const { return 0.5 * (lo + hi); }
    double radius() const { return 0.5 * (hi - lo); }
};

// Single-linkage grouping on sorted rates: neighbours whose relative gap is
// below kPoleClusterGap share a group.
inline std::vector<RateGroup> group_rates(std::vector<double> rates, std::vector<int> exps) {
    std::vector<std::size_t> idx(rates.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rates[a] < rates[b]; });
    std::vector<RateGroup> g;
    for (auto i : idx) g.push_back({{rates[i]}, {exps[i]}, rates[i], rates[i]});
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            auto& a = g[i];
            auto& b = g[i + 1];
            if (b.lo - a.hi <= kPoleClusterGap * b.lo) {
                a.rates.insert(a.rates.end(), b.rates.begin(), b.rates.end());
                a.exps.insert(a.exps.end(), b.exps.begin(), b.exps.end());
                a.hi = std::max(a.hi, b.hi);
                g.erase(g.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                merged = true;
                break;
            }
        }
    }
    return g;
}

// Taylor coefficients of prod_k (1 + d_k u)^(-e_k) in u, via the log-derivative.
inline std::vector<double> inner_series(const std::vector<double>& d, const std::vector<int>& e, int n) {
    std::vector<double> l(static_cast<std::size_t>(n), 0.0), g(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        double p = -d[k];
        for (int r = 0; r < n; ++r, p *= -d[k]) l[r] += e[k] * p;
    }
    g[0] = 1.0;
    for (int k = 0; k + 1 < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) acc += l[j] * g[k - j];
        g[k + 1] = acc / (k + 1);
    }
    return g;
}

// Taylor coefficients of prod_k (d_k + e)^(-e_k) / prod_k d_k^(-e_k) in e.
inline std::vector<double> outer_series(const std::vector<double>& d, const std::vector<int>& e, int n) {
    std::vector<double> l(static_cast<std::size_t>(n), 0.0), h(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double inv = 1.0 / d[k];
        double p = inv;
        for (int r = 0; r < n; ++r, p *= -inv) l[r] -= e[k] * p;
    }
    h[0] = 1.0;
    for (int r = 0; r + 1 < n; ++r) {
        double acc = 0.0;
        for (int j = 0; j <= r; ++j) acc += l[j] * h[r - j];
        h[r + 1] = acc / (r + 1);
    }
    return h;
}

// log Gamma(q) for q = 1..n (index q).
inline const std::vector<double>& log_gamma_table(int n) {
    thread_local std::vector<double> t{0.0};
    while (static_cast<int>(t.size()) <= n) t.push_back(std::lgamma(static_cast<double>(t.size())));
    return t;
}

// Gamma(q, rate c) density at x >= 0.
inline double gamma_density(int q, double c, double x) {
    if (x == 0.0) return q == 1 ? c : 0.0;
    return std::exp(q * std::log(c) + (q - 1) * std::log(x) - c * x - log_gamma_table(q)[q]);
}

} // namespace detail

inline PartialFractionExpansion partial_fractions(const DerivedParams& dp, double avg_snr) {
    const auto groups = pole_groups(dp, avg_snr);

    PartialFractionExpansion pfe;
    std::vector<double> rates;
    std::vector<int> exps;
    double log_om = 0.0;
    for (const auto& g : groups) {
        const int e = detail::as_integer_exponent(g.exponent);
        if (e > kMaxCase2Multiplicity) {
            throw case_mismatch_error("partial_fractions: pole multiplicity too large; use the numeric path");
        }
        rates.push_back(detail::real_pole(g.rate));
        exps.push_back(e);
        // Omega from L(0) = 1 over the merged groups; avoids the m*log
        // cancellation of the raw formula when huge exponents merge away.
        log_om += e * std::log(rates.back());
    }
    pfe.log_omega = log_om;
    pfe.omega_norm = std::exp(log_om);

    const auto clusters = detail::group_rates(rates, exps);
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        const auto& cl = clusters[ci];
        if (std::none_of(cl.exps.begin(), cl.exps.end(), [](int e) { return e > 0; })) continue;
        const double c = cl.center();
        int n_net = 0, n_abs = 0;
        std::vector<double> inner_d;
        for (std::size_t k = 0; k < cl.rates.size(); ++k) {
            inner_d.push_back(cl.rates[k] / c - 1.0);
            n_net += cl.exps[k];
            n_abs += std::abs(cl.exps[k]);
        }
        std::vector<double> outer_d;
        std::vector<int> outer_e;
        double log_scale = 0.0, sign = 1.0, dmin = std::numeric_limits<double>::infinity();
        for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
            if (cj == ci) continue;
            for (std::size_t k = 0; k < clusters[cj].rates.size(); ++k) {
                const double d = clusters[cj].rates[k] / c - 1.0;
                const int e = clusters[cj].exps[k];
                outer_d.push_back(d);
                outer_e.push_back(e);
                log_scale -= e * std::log(std::abs(d));
                if (d < 0.0 && e % 2 != 0) sign = -sign;
                dmin = std::min(dmin, std::abs(d));
            }
        }
        for (std::size_t k = 0; k < rates.size(); ++k) log_scale += exps[k] * std::log(rates[k] / c);

        // Series length: the inner terms shrink like rho^k and couple to the
        // outer terms through (rho / dmin)^k.
        const double rho = cl.radius() / c;
        const double ratio = std::max(rho, std::isfinite(dmin) ? rho / dmin : 0.0);
        int n_series = 0;
        if (ratio > 0.0) {
            if (ratio >= 0.9) throw convergence_error("partial_fractions: pole group too wide", ratio);
            n_series = static_cast<int>(std::ceil(std::log(1e-18) / std::log(ratio))) + 2 * n_abs + 8;
        }
        const int q_max = n_net + n_series;
        if (q_max < 1) continue;
        const auto g = detail::inner_series(inner_d, cl.exps, n_series + 1);
        const auto h = detail::outer_series(outer_d, outer_e, q_max);

        std::vector<double> w(static_cast<std::size_t>(q_max), 0.0);
        const double scale = sign * std::exp(log_scale);
        for (int q = 1; q <= q_max; ++q) {
            double acc = 0.0;
            for (int k = std::max(0, q - n_net); k <= n_series; ++k) {
                const int j = n_net + k - q;
                if (j >= q_max) break;
                acc += g[k] * h[j];
            }
            w[q - 1] = scale * acc;
        }
        double wmax = 0.0;
        for (double v : w) wmax = std::max(wmax, std::abs(v));
        while (w.size() > 1 && std::abs(w.back()) < 1e-19 * wmax) w.pop_back();

        std::vector<double> a(w.size()), b(w.size());
        double tail = 0.0;
        for (std::size_t j = w.size(); j-- > 0;) {
            tail += w[j];
            a[j] = w[j] * std::exp((j + 1.0) * std::log(c) - log_om);
            b[j] = -tail * std::exp(static_cast<double>(j) * std::log(c) - log_om);
        }
        pfe.centers.push_back(c);
        pfe.mults.push_back(n_net);
        pfe.weights.push_back(std::move(w));
        pfe.A.push_back(std::move(a));
        pfe.B.push_back(std::move(b));
    }
    return pfe;
}

inline PartialFractionExpansion partial_fractions(const FBParams& p) { return partial_fractions(derive(p), p.avg_snr); }

// L(s) rebuilt from the mixture weights, for reconstruction checks.
inline complex pfe_transform(const PartialFractionExpansion& pfe, complex s) {
    complex acc = 0.0;
    for (std::size_t i = 0; i < pfe.centers.size(); ++i) {
        const complex r = pfe.centers[i] / (s + pfe.centers[i]);
        complex p = r;
        for (double w : pfe.weights[i]) {
            acc += w * p;
            p *= r;
        }
    }
    return acc;
}

inline double pdf_case2(const PartialFractionExpansion& pfe, double g) {
    if (!(g >= 0.0)) throw domain_error("pdf_case2: gamma must be >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < pfe.centers.size(); ++i) {
        const auto& w = pfe.weights[i];
        for (std::size_t q = 1; q <= w.size(); ++q) {
            if (w[q - 1] != 0.0) acc += w[q - 1] * detail::gamma_density(static_cast<int>(q), pfe.centers[i], g);
        }
    }
    return std::max(0.0, acc);
}

inline double cdf_case2(const PartialFractionExpansion& pfe, double g) {
    if (!(g >= 0.0)) throw domain_error("cdf_case2: gamma must be >= 0");
    if (g == 0.0) return 0.0;
    // Lower tail summed directly while it is small, upper tail otherwise, so
    // neither end loses relative accuracy to the constant 1.
    double lower = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < pfe.centers.size(); ++i) {
        const auto& w = pfe.weights[i];
        for (std::size_t q = 1; q <= w.size(); ++q) {
            const double t = w[q - 1] * boost::math::gamma_p(static_cast<double>(q), pfe.centers[i] * g);
            lower += t;
            scale += std::abs(t);
        }
    }
    double raw = lower;
    if (lower > 0.5) {
        double upper = 0.0;
        for (std::size_t i = 0; i < pfe.centers.size(); ++i) {
            const auto& w = pfe.weights[i];
            for (std::size_t q = 1; q <= w.size(); ++q) {
                upper += w[q - 1] * boost::math::gamma_q(static_cast<double>(q), pfe.centers[i] * g);
            }
        }
        raw = 1.0 - upper;
    }
    const double slack = 1e-7 + 64 * std::numeric_limits<double>::epsilon() * scale;
    if (raw < -slack || raw > 1.0 + slack) {
        throw convergence_error("cdf_case2: value outside [0, 1] beyond rounding", raw);
    }
    return std::clamp(raw, 0.0, 1.0);
}

namespace detail {

inline int max_order(const PartialFractionExpansion& x) {
    std::size_t n = 1;
    for (const auto& w : x.weights) n = std::max(n, w.size());
    return static_cast<int>(n);
}

// E[ln(1 + X)]
inline double case2_log_moment(const PartialFractionExpansion& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.centers.size(); ++i) {
        const auto u = exp_integral_en_scaled_table(static_cast<int>(x.weights[i].size()), x.centers[i]);
        double m = 0.0;
        for (std::size_t q = 0; q < u.size(); ++q) {
            m += u[q];
            acc += x.weights[i][q] * m;
        }
    }
    return acc;
}

// int_0^inf ln(1+x) f_X(x) (1 - F_Y(x)) dx. With 1 - F_Y a mixture of Poisson
// tails, each piece is a negative-binomial average of Gamma log-moments.
inline double case2_log_tail_cross(const PartialFractionExpansion& x, const PartialFractionExpansion& y) {
    const auto& lg = log_gamma_table(max_order(x) + max_order(y) + 2);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.centers.size(); ++i) {
        const double c = x.centers[i];
        const auto& wx = x.weights[i];
        for (std::size_t k = 0; k < y.centers.size(); ++k) {
            const double d = y.centers[k];
            const auto& wy = y.weights[k];
            // tail[r] = sum_{l > r} wy[l-1]
            std::vector<double> tail(wy.size() + 1, 0.0);
            for (std::size_t l = wy.size(); l-- > 0;) tail[l] = tail[l + 1] + wy[l];
            const auto u = exp_integral_en_scaled_table(static_cast<int>(wx.size() + wy.size()), c + d);
            std::vector<double> m(u.size() + 1, 0.0); // m[n] = E ln(1 + Gamma(n, c + d))
            for (std::size_t n = 1; n <= u.size(); ++n) m[n] = m[n - 1] + u[n - 1];
            const double lp = std::log(c / (c + d)), lq = std::log(d / (c + d));
            for (std::size_t q = 1; q <= wx.size(); ++q) {
                if (wx[q - 1] == 0.0) continue;
                double inner = 0.0;
                for (std::size_t r = 0; r < wy.size(); ++r) {
                    const double pmf = std::exp(lg[q + r] - lg[q] - lg[r + 1] + q * lp + r * lq);
                    inner += pmf * m[q + r] * tail[r];
                }
                acc += wx[q - 1] * inner;
            }
        }
    }
    return acc;
}

// I_p(l, n) for n = 1..n_max: P(NegBin(l, p) <= n - 1).
inline std::vector<double> negbin_cdf_row(int l, int n_max, double p) {
    std::vector<double> row(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) row[n - 1] = boost::math::ibeta(static_cast<double>(l), static_cast<double>(n), p);
    return row;
}

// P(X >= theta Y + shift) for independent mixtures X (bob) and Y (eve).
inline double case2_exceedance(const PartialFractionExpansion& bob, const PartialFractionExpansion& eve, double th,
                               double shift) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bob.centers.size(); ++i) {
        const double c = bob.centers[i];
        const auto& wx = bob.weights[i];
        const int qn = static_cast<int>(wx.size());
        // Poisson(c * shift) probabilities split the shifted tail.
        std::vector<double> pois(static_cast<std::size_t>(qn), 0.0);
        const double lam = c * shift;
        if (lam == 0.0) {
            pois[0] = 1.0;
        } else {
            for (int n = 0; n < qn; ++n) pois[n] = std::exp(n * std::log(lam) - lam - std::lgamma(n + 1.0));
        }
        for (std::size_t k = 0; k < eve.centers.size(); ++k) {
            const double d = eve.centers[k];
            const double p = d / (d + th * c);
            const auto& wy = eve.weights[k];
            for (std::size_t l = 1; l <= wy.size(); ++l) {
                if (wy[l - 1] == 0.0) continue;
                const auto row = negbin_cdf_row(static_cast<int>(l), qn, p);
                double inner = 0.0;
                for (int q = 1; q <= qn; ++q) {
                    double t = 0.0;
                    for (int n = 0; n < q; ++n) t += pois[n] * row[q - n - 1];
                    inner += wx[q - 1] * t;
                }
                acc += wy[l - 1] * inner;
            }
        }
    }
    return acc;
}

} // namespace detail

// Average secrecy capacity in nats:
// E ln(1+X_D) - E[ln(1+X_D) ; X_E > X_D] - E[ln(1+X_E) ; X_D > X_E].
inline double asc_case2(const PartialFractionExpansion& bob, const PartialFractionExpansion& eve) {
    return detail::case2_log_moment(bob) - detail::case2_log_tail_cross(bob, eve) -
           detail::case2_log_tail_cross(eve, bob);
}

// P(gamma_D < theta gamma_E + theta - 1).
inline double sop_case2(const PartialFractionExpansion& bob, const PartialFractionExpansion& eve,
                        const SecrecyConfig& cfg) {
    cfg.validate();
    return std::clamp(1.0 - detail::case2_exceedance(bob, eve, cfg.theta, cfg.theta - 1.0), 0.0, 1.0);
}

// P(gamma_D < theta gamma_E).
inline double sopl_case2(const PartialFractionExpansion& bob, const PartialFractionExpansion& eve,
                         const SecrecyConfig& cfg) {
    cfg.validate();
    return std::clamp(1.0 - detail::case2_exceedance(bob, eve, cfg.theta, 0.0), 0.0, 1.0);
}

inline double spsc_case2(const PartialFractionExpansion& bob, const PartialFractionExpansion& eve) {
    return 1.0 - sopl_case2(bob, eve, SecrecyConfig{});
}

inline double asc_case2(const FBParams& bob, const FBParams& eve) {
    return asc_case2(partial_fractions(bob), partial_fractions(eve));
}
inline double sop_case2(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg) {
    return sop_case2(partial_fractions(bob), partial_fractions(eve), cfg);
}
inline double sopl_case2(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg) {
    return sopl_case2(partial_fractions(bob), partial_fractions(eve), cfg);
}
inline double spsc_case2(const FBParams& bob, const FBParams& eve) {
    return spsc_case2(partial_fractions(bob), partial_fractions(eve));
}

// True when both links admit the finite expansion.
inline bool case2_applicable(const FBParams& p) {
    if (!p.is_case2()) return false;
    try {
        partial_fractions(p);
    } catch (const case_mismatch_error&) {
        return false;
    } catch (const convergence_error&) {
        return false;
    }
    return true;
}

} // namespace fbsec
