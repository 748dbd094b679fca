#pragma once

// Scalar special functions used by the closed forms: upper incomplete gamma
// at any real order (including the non-positive integers that show up in the
// log-moment sums), E1, the log-moment integral, Pochhammer/binomial, and a
// plain power-series evaluator for the 4-variable confluent Lauricella
// function used as a small-argument oracle.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fbsec/errors.hpp"

namespace fbsec {

struct EvalControl {
    double rel_tol = 1e-12;
    long max_terms = 1'000'000;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) throw parameter_error("rel_tol", "must lie in (0, 1e-3]");
        if (max_terms < 100) throw parameter_error("max_terms", "must be >= 100");
    }
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 100'000;

// Lentz continued fraction for Gamma(a, x), returned as e^x Gamma(a, x).
// Valid for every real a and x > 0; fast once x exceeds a + 1.
inline double upper_gamma_cf_scaled(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = std::abs(b) < kTiny ? 1.0 / kTiny : 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return std::exp(a * std::log(x)) * h;
    }
    throw convergence_error("upper_gamma: continued fraction did not converge", std::abs(h));
}

// Lower incomplete gamma gamma(a, x) by its power series, a > 0.
inline double lower_gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 1; n <= kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) <= std::abs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x));
        }
    }
    throw convergence_error("upper_gamma: lower series did not converge", std::abs(del));
}

// Gamma(a, x) for a < 1 and 0 < x < 1 as Gamma(a, 1) + int_x^1 t^(a-1) e^-t dt,
// the second part by termwise integration of the exponential series.
inline double upper_gamma_small_x(double a, double x) {
    const double at_one = std::exp(-1.0) * upper_gamma_cf_scaled(a, 1.0);
    const double lx = std::log(x);
    double sum = 0.0;
    double inv_fact = 1.0;
    for (int n = 0; n <= kMaxIter; ++n) {
        if (n > 0) inv_fact /= n;
        const double s = a + n;
        const double piece = s == 0.0 ? -lx : -std::expm1(s * lx) / s;
        const double term = (n % 2 == 0 ? 1.0 : -1.0) * inv_fact * piece;
        sum += term;
        if (n > 2 && std::abs(term) <= kEps * std::abs(sum)) return at_one + sum;
    }
    throw convergence_error("upper_gamma: small-x series did not converge", std::abs(sum));
}

inline bool is_nonpositive_integer(double a) { return a <= 0.0 && a == std::floor(a); }

} // namespace detail

// E1(x) * e^x for x > 0.
inline double exp_integral_e1_scaled(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw domain_error("exp_integral_e1: x must be > 0");
    if (x <= 1.0) {
        // -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0;
        double fact_term = 1.0;
        for (int k = 1; k <= detail::kMaxIter; ++k) {
            fact_term *= -x / k;
            const double term = -fact_term / k;
            sum += term;
            if (std::abs(term) <= detail::kEps * std::abs(sum)) break;
        }
        return std::exp(x) * (-std::numbers::egamma - std::log(x) + sum);
    }
    return detail::upper_gamma_cf_scaled(0.0, x);
}

inline double exp_integral_e1(double x) { return exp_integral_e1_scaled(x) * std::exp(-x); }

// e^x Gamma(a, x), x > 0. Scaling keeps the log-moment sums finite when the
// exponential rates are large.
inline double upper_gamma_scaled(double a, double x) {
    if (!std::isfinite(a)) throw domain_error("upper_gamma: order must be finite");
    if (!(x > 0.0) || !std::isfinite(x)) throw domain_error("upper_gamma: x must be > 0");

    if (a == 0.0) return exp_integral_e1_scaled(x);

    if (detail::is_nonpositive_integer(a)) {
        // Downward recurrence Gamma(b, x) = (Gamma(b+1, x) - x^b e^-x) / b from E1,
        // with a running absolute error bound; fall back to the continued
        // fraction once cancellation costs more than 1e-9 relative.
        double v = exp_integral_e1_scaled(x);
        double err = 4.0 * detail::kEps * std::abs(v);
        const double lx = std::log(x);
        for (double b = -1.0; b >= a; b -= 1.0) {
            const double xb = std::exp(b * lx);
            const double next = (v - xb) / b;
            err = (err + detail::kEps * (std::abs(v) + xb)) / std::abs(b);
            v = next;
        }
        if (err <= 1e-9 * std::abs(v)) return v;
        return detail::upper_gamma_cf_scaled(a, x);
    }

    if (x < 1.0 && a < 1.0) return std::exp(x) * detail::upper_gamma_small_x(a, x);
    if (a >= 1.0 && x < a + 1.0) {
        return std::exp(x) * (std::tgamma(a) - detail::lower_gamma_series(a, x));
    }
    return detail::upper_gamma_cf_scaled(a, x);
}

// Gamma(a, x) = int_x^inf t^(a-1) e^-t dt for real a and x > 0.
inline double upper_gamma(double a, double x) { return upper_gamma_scaled(a, x) * std::exp(-x); }

// int_0^inf x^(a-1) ln(1+x) e^(-b x) dx = Gamma(a) e^b sum_{k=1}^a Gamma(k-a, b) / b^k
inline double log_gamma_integral(int a, double b) {
    if (a < 1) throw domain_error("log_gamma_integral: a must be a positive integer");
    if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("log_gamma_integral: b must be > 0");
    double sum = 0.0;
    double inv_bk = 1.0;
    for (int k = 1; k <= a; ++k) {
        inv_bk /= b;
        sum += upper_gamma_scaled(static_cast<double>(k - a), b) * inv_bk;
    }
    return std::tgamma(static_cast<double>(a)) * sum;
}

// e^x E_n(x) for n = 1..n_max, x > 0. The forward recurrence
// E_{n+1} = (e^-x - x E_n) / n is used once n >= x, where it is stable;
// below that each order gets its own continued fraction.
inline std::vector<double> exp_integral_en_scaled_table(int n_max, double x) {
    if (n_max < 1) throw domain_error("exp_integral_en: n_max must be >= 1");
    if (!(x > 0.0) || !std::isfinite(x)) throw domain_error("exp_integral_en: x must be > 0");
    std::vector<double> u(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        if (n == 1 && x <= 1.0) {
            u[0] = exp_integral_e1_scaled(x);
        } else if (n > 1 && n - 1 >= x) {
            u[n - 1] = (1.0 - x * u[n - 2]) / (n - 1);
        } else {
            double b = x + n;
            double c = 1.0 / detail::kTiny;
            double d = 1.0 / b;
            double h = d;
            for (int i = 1;; ++i) {
                if (i > detail::kMaxIter) throw convergence_error("exp_integral_en: continued fraction", h);
                const double an = -static_cast<double>(i) * (n - 1 + i);
                b += 2.0;
                d = 1.0 / (an * d + b);
                c = b + an / c;
                const double del = c * d;
                h *= del;
                if (std::abs(del - 1.0) <= detail::kEps) break;
            }
            u[n - 1] = h;
        }
    }
    return u;
}

// E[ln(1 + X)] for X ~ Gamma(shape a, rate b) = sum_{n=1}^a e^b E_n(b).
inline double gamma_log_moment(int a, double b) {
    if (a < 1) throw domain_error("gamma_log_moment: a must be a positive integer");
    if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("gamma_log_moment: b must be > 0");
    double s = 0.0;
    for (double v : exp_integral_en_scaled_table(a, b)) s += v;
    return s;
}

inline double pochhammer(double a, int n) {
    if (n < 0) throw domain_error("pochhammer: n must be >= 0");
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= a + i;
    return p;
}

// Standard n! / (k! (n-k)!).
inline double binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw domain_error("binomial: need 0 <= k <= n");
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c < 9007199254740992.0 ? std::round(c) : c;
}

// Phi_2^(4)(a; b; x) = sum over n1..n4 of prod (a_k)_{n_k} x_k^{n_k} / n_k! / (b)_{n1+..+n4}.
//
// The quadruple sum is accumulated by total degree n: the degree-n slice is
// the u^n coefficient of prod_k (1 - x_k u)^(-a_k), generated by the
// logarithmic-derivative recurrence. Only meant for small |x|; large negative
// arguments cancel catastrophically and are reported as non-convergence.
inline double phi2_4_series(const std::array<double, 4>& a, double b, const std::array<double, 4>& x,
                            const EvalControl& ctrl = {}) {
    ctrl.validate();
    if (!(b > 0.0)) throw domain_error("phi2_4_series: b must be > 0");
    double scale = 0.0;
    for (double xi : x) scale = std::max(scale, std::abs(xi));
    if (scale == 0.0) return 1.0;

    std::array<double, 4> xs{};
    for (int k = 0; k < 4; ++k) xs[k] = x[k] / scale;

    std::vector<double> coeff{1.0}; // u^n coefficients with x scaled to |x| <= 1
    std::vector<double> power_sums;  // sum_k a_k xs_k^(r+1)
    std::array<double, 4> xpow = xs;

    double sum = 1.0;
    double weight = 1.0; // scale^n / (b)_n
    double max_abs = 1.0;
    int small_run = 0;
    for (long n = 0; n + 1 < ctrl.max_terms; ++n) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) {
            s += a[k] * xpow[k];
            xpow[k] *= xs[k];
        }
        power_sums.push_back(s);
        double next = 0.0;
        for (long r = 0; r <= n; ++r) next += coeff[n - r] * power_sums[r];
        next /= static_cast<double>(n + 1);
        coeff.push_back(next);

        weight *= scale / (b + static_cast<double>(n));
        const double term = next * weight;
        sum += term;
        max_abs = std::max(max_abs, std::abs(term));

        if (static_cast<double>(n) > 2.0 * scale && std::abs(term) <= ctrl.rel_tol * std::abs(sum)) {
            if (++small_run >= 3) {
                if (max_abs * detail::kEps * 16.0 > ctrl.rel_tol * std::abs(sum)) {
                    throw convergence_error("phi2_4_series: cancellation exceeds tolerance",
                                            max_abs * detail::kEps / std::abs(sum));
                }
                return sum;
            }
        } else {
            small_run = 0;
        }
    }
    throw convergence_error("phi2_4_series: no convergence within max_terms", std::abs(sum));
}

} // namespace fbsec
