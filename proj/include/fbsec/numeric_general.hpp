#pragma once

// General-parameter path. Densities and CDFs come from Talbot inversion of
// the Laplace form Omega * prod (s + rate_k)^(-a_k); the secrecy metrics are
// then semi-infinite integrals done by tanh-sinh over a few scale-aware
// pieces, truncated where a Chernoff bound puts the tail below
// tail_cutoff_prob.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fbsec/channel_model.hpp"
#include "fbsec/errors.hpp"
#include "fbsec/secrecy_config.hpp"

namespace fbsec {

struct InversionControl {
    int talbot_nodes = 48;
    double quad_rel_tol = 1e-8;
    int quad_max_subdiv = 2000;
    double tail_cutoff_prob = 1e-10;

    void validate() const {
        if (talbot_nodes < 16 || talbot_nodes % 2 != 0) {
            throw parameter_error("talbot_nodes", "must be even and >= 16");
        }
        if (talbot_nodes > 4096) throw parameter_error("talbot_nodes", "must be <= 4096");
        detail::require_finite(quad_rel_tol, "quad_rel_tol");
        detail::require_finite(tail_cutoff_prob, "tail_cutoff_prob");
        if (!(quad_rel_tol > 0.0 && quad_rel_tol <= 1e-3)) throw parameter_error("quad_rel_tol", "must lie in (0, 1e-3]");
        if (!(tail_cutoff_prob > 0.0 && tail_cutoff_prob <= 1e-3)) {
            throw parameter_error("tail_cutoff_prob", "must lie in (0, 1e-3]");
        }
        if (quad_max_subdiv < 16) throw parameter_error("quad_max_subdiv", "must be >= 16");
    }
};

struct MetricValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Talbot inversion on the Weideman-Trefethen cotangent contour,
//   z(th) = (G/t) (-0.6122 + 0.5017 th cot(0.6407 th) + 0.2645 i th),
// midpoint rule with N nodes on (-pi, pi). G is capped at 32: beyond that the
// contour apex grows like e^(0.17 G) and roundoff wins over truncation.
// F must satisfy F(conj z) = conj F(z).
template <class F>
double talbot_invert(const F& transform, double t, int nodes) {
    constexpr double a0 = -0.6122, a1 = 0.5017, a2 = 0.6407, a3 = 0.2645;
    const double g = std::min(nodes, 32) / t;
    const double h = 2.0 * std::numbers::pi / nodes;
    double acc = 0.0;
    for (int k = 0; k < nodes / 2; ++k) {
        const double th = (k + 0.5) * h;
        const double cot = 1.0 / std::tan(a2 * th);
        const double s = std::sin(a2 * th);
        const complex z = g * complex(a0 + a1 * th * cot, a3 * th);
        const complex dz = g * complex(a1 * cot - a1 * a2 * th / (s * s), a3);
        acc += (std::exp(z * t) * transform(z) * dz).imag();
    }
    return acc * 2.0 / nodes;
}

namespace detail {

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule(int max_subdiv) {
    const int levels = std::clamp(static_cast<int>(std::ceil(std::log2(max_subdiv))), 4, 20);
    thread_local std::vector<std::optional<boost::math::quadrature::tanh_sinh<double>>> rules(21);
    auto& r = rules[static_cast<std::size_t>(levels)];
    if (!r) r.emplace(static_cast<std::size_t>(levels));
    return *r;
}

// Piecewise tanh-sinh over consecutive breakpoints.
template <class F>
MetricValue integrate_pieces(const F& f, std::vector<double> pts, const InversionControl& ctrl, const char* what) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto& rule = tanh_sinh_rule(ctrl.quad_max_subdiv);
    MetricValue out;
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0, piece_l1 = 0.0;
        double v = 0.0;
        try {
            // Map onto [-1, 1] with the complement form so no node lands on an
            // endpoint (the bounded-interval wrapper in Boost 1.74 can).
            const double a = pts[i], b = pts[i + 1], half = 0.5 * (b - a);
            auto g = [&](double z, double zc) { return f(z < 0.0 ? a - half * zc : b - half * zc); };
            v = half * rule.integrate(g, ctrl.quad_rel_tol, &err, &piece_l1);
            err *= half;
            piece_l1 *= half;
        } catch (const std::domain_error&) {
            throw;
        } catch (const std::exception& e) {
            throw convergence_error(std::string(what) + ": quadrature failed: " + e.what(), err);
        }
        out.value += v;
        out.error_estimate += err;
        l1 += piece_l1;
    }
    const double allowed = 100.0 * ctrl.quad_rel_tol * std::max(l1, 1e-300) + 1e-15;
    if (!(out.error_estimate <= allowed) || !std::isfinite(out.value)) {
        throw convergence_error(std::string(what) + ": quadrature did not reach tolerance", out.error_estimate);
    }
    return out;
}

} // namespace detail

// SNR law of one link, ready for inversion. Rates are merged pole groups
// divided by the average SNR.
class SnrLaw {
public:
    SnrLaw(const DerivedParams& dp, double avg_snr) : avg_snr_(avg_snr) {
        for (const auto& g : pole_groups(dp, avg_snr)) {
            rates_.push_back(g.rate);
            exps_.push_back(g.exponent);
        }
        complex lo = 0.0;
        mu_ = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            lo += exps_[k] * std::log(rates_[k]);
            mu_ += exps_[k];
        }
        log_omega_ = lo.real();
        min_pole_ = std::numeric_limits<double>::infinity();
        max_rate_ = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            max_rate_ = std::max(max_rate_, std::abs(rates_[k]));
            min_pole_ = std::min(min_pole_, rates_[k].real());
        }
        build_series();
    }
    explicit SnrLaw(const FBParams& p) : SnrLaw(derive(p), p.avg_snr) {}

    double mu() const { return mu_; }
    double avg_snr() const { return avg_snr_; }
    double log_omega() const { return log_omega_; }
    // Nearest singularity of the transform (pole or non-integer branch point).
    double min_pole_rate() const { return min_pole_; }

    complex transform(complex s) const {
        complex acc = log_omega_;
        for (std::size_t k = 0; k < rates_.size(); ++k) acc -= exps_[k] * std::log(s + rates_[k]);
        return std::exp(acc);
    }

    double pdf(double g, const InversionControl& ctrl = {}) const {
        if (!(g >= 0.0)) throw domain_error("pdf_numeric: gamma must be >= 0");
        if (g == 0.0) {
            if (mu_ < 1.0) return std::numeric_limits<double>::infinity();
            return mu_ == 1.0 ? std::exp(log_omega_) : 0.0;
        }
        if (auto v = series(g, false)) return std::max(*v, 0.0);
        const double v = stable_invert([this](complex s) { return transform(s); }, g, ctrl,
                                       1e-11 / avg_snr_, "pdf_numeric");
        if (v < -1e-9 / avg_snr_) throw convergence_error("pdf_numeric: negative density", v);
        return std::max(v, 0.0);
    }

    double cdf(double g, const InversionControl& ctrl = {}) const {
        if (!(g >= 0.0)) throw domain_error("cdf_numeric: gamma must be >= 0");
        if (g == 0.0) return 0.0;
        double v;
        if (auto s = series(g, true)) {
            v = *s;
        } else {
            v = stable_invert([this](complex s) { return transform(s) / s; }, g, ctrl, 1e-11, "cdf_numeric");
        }
        if (v < -1e-7 || v > 1.0 + 1e-7) throw convergence_error("cdf_numeric: value outside [0, 1]", v);
        return std::clamp(v, 0.0, 1.0);
    }

    // Chernoff bound: P(gamma > x) <= L(-t) e^(-t x), solved for the level eps.
    double upper_limit(double eps) const {
        if (!std::isfinite(min_pole_)) return 1e3 * avg_snr_;
        const double t = 0.5 * min_pole_;
        double log_mgf = log_omega_;
        for (std::size_t k = 0; k < rates_.size(); ++k) log_mgf -= exps_[k] * std::log(std::abs(rates_[k] - t));
        log_mgf = std::max(log_mgf, 0.0);
        return std::max((log_mgf - std::log(eps)) / t, avg_snr_);
    }

private:
    template <class F>
    double stable_invert(const F& f, double t, const InversionControl& ctrl, double abs_floor,
                         const char* what) const {
        const double v1 = talbot_invert(f, t, ctrl.talbot_nodes);
        const double v2 = talbot_invert(f, t, 2 * ctrl.talbot_nodes);
        const double diff = std::abs(v1 - v2);
        if (!std::isfinite(v2) || diff > 1e-6 * std::abs(v2) + abs_floor) {
            throw inversion_instability_error(std::string(what) + ": N and 2N node results disagree", diff);
        }
        return v2;
    }

    // Near the origin: L(s)/Omega = s^-mu prod (1 + r_k/s)^(-a_k) = s^-mu sum c_n s^-n,
    // which inverts termwise into an entire series in g.
    void build_series() {
        constexpr int n_terms = 80;
        std::vector<complex> l(n_terms);
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            complex p = -rates_[k];
            for (int r = 0; r < n_terms; ++r) {
                l[r] += exps_[k] * p;
                p *= -rates_[k];
            }
        }
        coef_.assign(n_terms, 0.0);
        coef_[0] = 1.0;
        for (int n = 0; n + 1 < n_terms; ++n) {
            complex acc = 0.0;
            for (int q = 0; q <= n; ++q) acc += coef_[q] * l[n - q];
            coef_[n + 1] = acc / static_cast<double>(n + 1);
        }
    }

    std::optional<double> series(double g, bool cdf) const {
        if (g * max_rate_ > 0.5) return std::nullopt;
        const double lg = std::log(g);
        double sum = 0.0, abs_sum = 0.0;
        for (std::size_t n = 0; n < coef_.size(); ++n) {
            const double order = mu_ + static_cast<double>(n) + (cdf ? 1.0 : 0.0);
            const double term = coef_[n].real() * std::exp(log_omega_ + (order - 1.0) * lg - std::lgamma(order));
            sum += term;
            abs_sum += std::abs(term);
            if (n > 2 && std::abs(term) <= 1e-17 * std::abs(sum)) {
                if (abs_sum > 1e3 * std::abs(sum)) return std::nullopt;
                return sum;
            }
        }
        return std::nullopt;
    }

    double avg_snr_;
    double mu_ = 0.0;
    double log_omega_ = 0.0;
    double min_pole_ = 0.0;
    double max_rate_ = 0.0;
    std::vector<complex> rates_;
    std::vector<double> exps_;
    std::vector<complex> coef_;
};

inline complex mgf(const DerivedParams& dp, double avg_snr, complex s) {
    complex acc = dp.log_omega;
    for (std::size_t k = 0; k < 4; ++k) {
        if (dp.exponents[k] == 0.0) continue;
        acc -= dp.exponents[k] * std::log(s + dp.theta_rates[k] / avg_snr);
    }
    return std::exp(acc);
}

inline double pdf_numeric(const DerivedParams& dp, double avg_snr, double g, const InversionControl& ctrl = {}) {
    ctrl.validate();
    return SnrLaw(dp, avg_snr).pdf(g, ctrl);
}

inline double cdf_numeric(const DerivedParams& dp, double avg_snr, double g, const InversionControl& ctrl = {}) {
    ctrl.validate();
    return SnrLaw(dp, avg_snr).cdf(g, ctrl);
}

// --- metric integrals ---------------------------------------------------------
//
// These take any pair of laws exposing pdf(x), cdf(x), avg_snr() and
// upper_limit(eps), so the same integrals serve the inversion path and
// quadrature checks of the closed forms.

namespace detail {

inline std::vector<double> breakpoints(double upper, std::initializer_list<double> scales) {
    std::vector<double> pts{0.0, upper};
    for (double s : scales) {
        for (double f : {0.25, 1.0, 4.0, 16.0, 64.0}) {
            if (f * s < upper) pts.push_back(f * s);
        }
    }
    return pts;
}

} // namespace detail

// I1 + I2 - I3 regrouped as
//   int ln(1+x) f_D F_E dx - int ln(1+x) f_E (1 - F_D) dx,
// both integrands non-negative.
template <class LawD, class LawE>
MetricValue asc_integral(const LawD& bob, const LawE& eve, const InversionControl& ctrl) {
    const double eps = ctrl.tail_cutoff_prob;
    const double ud = bob.upper_limit(eps);
    const double ue = eve.upper_limit(eps);
    const auto pts_d = detail::breakpoints(ud, {bob.avg_snr(), eve.avg_snr()});
    const auto pts_e = detail::breakpoints(ue, {bob.avg_snr(), eve.avg_snr()});
    const auto a = detail::integrate_pieces(
        [&](double x) { return std::log1p(x) * bob.pdf(x) * eve.cdf(x); }, pts_d, ctrl, "asc");
    const auto b = detail::integrate_pieces(
        [&](double x) { return std::log1p(x) * eve.pdf(x) * (1.0 - bob.cdf(x)); }, pts_e, ctrl, "asc");
    return {a.value - b.value, a.error_estimate + b.error_estimate};
}

// P(gamma_D < theta gamma_E + shift), shift = theta - 1 for SOP and 0 for the
// lower bound. The truncated Eve tail is added back with F_D at the cut.
template <class LawD, class LawE>
MetricValue outage_integral(const LawD& bob, const LawE& eve, double theta, double shift,
                            const InversionControl& ctrl) {
    const double ue = eve.upper_limit(ctrl.tail_cutoff_prob);
    const auto pts = detail::breakpoints(ue, {eve.avg_snr(), bob.avg_snr() / theta});
    auto r = detail::integrate_pieces([&](double y) { return bob.cdf(theta * y + shift) * eve.pdf(y); }, pts, ctrl,
                                      "sop");
    const double tail = 1.0 - eve.cdf(ue);
    r.value += tail * bob.cdf(theta * ue + shift);
    r.error_estimate += tail;
    r.value = std::clamp(r.value, 0.0, 1.0);
    return r;
}

namespace detail {

struct LawView {
    const SnrLaw& law;
    const InversionControl& c;
    double pdf(double x) const { return law.pdf(x, c); }
    double cdf(double x) const { return law.cdf(x, c); }
    double avg_snr() const { return law.avg_snr(); }
    double upper_limit(double eps) const { return law.upper_limit(eps); }
};

} // namespace detail

inline MetricValue asc_numeric_detailed(const FBParams& bob, const FBParams& eve, const InversionControl& ctrl = {}) {
    ctrl.validate();
    const SnrLaw d(bob), e(eve);
    return asc_integral(detail::LawView{d, ctrl}, detail::LawView{e, ctrl}, ctrl);
}

inline MetricValue sop_numeric_detailed(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg,
                                        const InversionControl& ctrl = {}) {
    ctrl.validate();
    cfg.validate();
    const SnrLaw d(bob), e(eve);
    return outage_integral(detail::LawView{d, ctrl}, detail::LawView{e, ctrl}, cfg.theta, cfg.theta - 1.0, ctrl);
}

inline MetricValue sopl_numeric_detailed(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg,
                                         const InversionControl& ctrl = {}) {
    ctrl.validate();
    cfg.validate();
    const SnrLaw d(bob), e(eve);
    return outage_integral(detail::LawView{d, ctrl}, detail::LawView{e, ctrl}, cfg.theta, 0.0, ctrl);
}

inline MetricValue spsc_numeric_detailed(const FBParams& bob, const FBParams& eve, const InversionControl& ctrl = {}) {
    auto r = sopl_numeric_detailed(bob, eve, SecrecyConfig{}, ctrl);
    r.value = 1.0 - r.value;
    return r;
}

inline double asc_numeric(const FBParams& bob, const FBParams& eve, const InversionControl& ctrl = {}) {
    return asc_numeric_detailed(bob, eve, ctrl).value;
}
inline double sop_numeric(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg,
                          const InversionControl& ctrl = {}) {
    return sop_numeric_detailed(bob, eve, cfg, ctrl).value;
}
inline double sopl_numeric(const FBParams& bob, const FBParams& eve, const SecrecyConfig& cfg,
                           const InversionControl& ctrl = {}) {
    return sopl_numeric_detailed(bob, eve, cfg, ctrl).value;
}
inline double spsc_numeric(const FBParams& bob, const FBParams& eve, const InversionControl& ctrl = {}) {
    return spsc_numeric_detailed(bob, eve, ctrl).value;
}

// Monotone cubic (Fritsch-Carlson) table of one CDF, for sweeps that evaluate
// F_D at many shifted arguments. Knots are quadratically spaced on
// [0, upper]; build() checks interval midpoints against direct inversion.
class CdfCache {
public:
    static constexpr int kKnots = 2048;

    CdfCache(const SnrLaw& law, const InversionControl& ctrl = {}, double check_tol = 1e-7)
        : law_(&law), ctrl_(ctrl) {
        ctrl.validate();
        upper_ = law.upper_limit(ctrl.tail_cutoff_prob);
        x_.resize(kKnots);
        y_.resize(kKnots);
        for (int i = 0; i < kKnots; ++i) {
            const double u = static_cast<double>(i) / (kKnots - 1);
            x_[i] = upper_ * u * u;
            y_[i] = law.cdf(x_[i], ctrl);
        }
        for (int i = 1; i < kKnots; ++i) y_[i] = std::max(y_[i], y_[i - 1]);
        slopes();
        for (int i = 0; i + 1 < kKnots; i += 7) {
            const double xm = 0.5 * (x_[i] + x_[i + 1]);
            const double err = std::abs((*this)(xm) - law.cdf(xm, ctrl));
            max_err_ = std::max(max_err_, err);
        }
        if (max_err_ > check_tol) throw convergence_error("CdfCache: interpolation error above tolerance", max_err_);
    }

    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= upper_) return law_->cdf(x, ctrl_);
        const double u = std::sqrt(x / upper_) * (kKnots - 1);
        std::size_t i = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(kKnots - 2));
        if (x < x_[i]) --i;
        if (x > x_[i + 1]) ++i;
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
               (t3 - t2) * h * d_[i + 1];
    }

    double max_check_error() const { return max_err_; }
    double upper() const { return upper_; }

private:
    void slopes() {
        const std::size_t n = x_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        d_.assign(n, 0.0);
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) d_[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                d_[i] = d_[i + 1] = 0.0;
                continue;
            }
            const double a = d_[i] / delta[i], b = d_[i + 1] / delta[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double tau = 3.0 / std::sqrt(s);
                d_[i] = tau * a * delta[i];
                d_[i + 1] = tau * b * delta[i];
            }
        }
    }

    const SnrLaw* law_;
    InversionControl ctrl_;
    double upper_ = 0.0;
    double max_err_ = 0.0;
    std::vector<double> x_, y_, d_;
};

} // namespace fbsec
