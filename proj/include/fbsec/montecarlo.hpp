#pragma once

// Monte Carlo oracle. SNR draws come from the physical construction (Gamma
// shadowing of the dominant powers, noncentral chi-square in-phase and
// quadrature powers), never from the transform, so agreement with the
// analytic paths is a real check.
//
// Reproducibility: every (seed, stream, link) triple owns a Philox4x32-10
// counter stream; streams are reduced with a fixed pairwise tree, so the
// result does not depend on the thread count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "fbsec/channel_model.hpp"
#include "fbsec/errors.hpp"
#include "fbsec/secrecy_config.hpp"

namespace fbsec {

// Philox4x32-10 (Salmon et al., SC'11), usable as a UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    Philox4x32(key_type key, counter_type ctr) : key_(key), ctr_(ctr) {}

    Philox4x32(std::uint64_t seed, std::uint32_t stream, std::uint32_t domain)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, 0u, stream, domain} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) {
            buf_ = block(ctr_, key_);
            pos_ = 0;
            if (++ctr_[0] == 0) ++ctr_[1];
        }
        return buf_[pos_++];
    }

    static counter_type block(counter_type c, key_type k) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }

private:
    key_type key_;
    counter_type ctr_;
    counter_type buf_{};
    int pos_ = 4;
};

inline constexpr std::uint32_t kBobDomain = 0;
inline constexpr std::uint32_t kEveDomain = 1;

struct MCConfig {
    std::uint64_t n_samples = 10'000'000;
    std::uint64_t seed = 1;
    std::uint32_t n_streams = 64;
    unsigned n_threads = 0; // 0: hardware concurrency

    void validate() const {
        if (n_samples < 10'000) throw parameter_error("n_samples", "must be >= 10000");
        if (n_streams < 1) throw parameter_error("n_streams", "must be >= 1");
        if (n_streams > n_samples) throw parameter_error("n_streams", "must not exceed n_samples");
    }
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

struct MCResults {
    MCEstimate asc, sop, sopl, spsc;
};

// Powers of the Gaussian components for sigma_y^2 = 1.
struct PhysicalModel {
    double sigma_x2 = 1.0;
    double sigma_y2 = 1.0;
    double p2 = 0.0;
    double q2 = 0.0;
    double mean_power = 1.0;
};

inline PhysicalModel physical_model(const FBParams& p) {
    p.validate();
    PhysicalModel m;
    m.sigma_x2 = p.eta;
    m.sigma_y2 = 1.0;
    m.q2 = p.kappa * p.mu * (1.0 + p.eta) / (1.0 + p.rho2);
    m.p2 = p.rho2 * m.q2;
    m.mean_power = p.mu * (1.0 + p.eta) * (1.0 + p.kappa);
    return m;
}

namespace detail {

// sigma2 * chi'^2(nu, lambda) via the Poisson mixture of central chi-squares.
template <class Rng>
double scaled_noncentral_chi2(double nu, double lambda, double sigma2, Rng& rng) {
    double j = 0.0;
    if (lambda > 0.0) j = static_cast<double>(std::poisson_distribution<std::uint64_t>(0.5 * lambda)(rng));
    return sigma2 * std::gamma_distribution<double>(0.5 * nu + j, 2.0)(rng);
}

} // namespace detail

template <class Rng>
double sample_snr(const FBParams& p, const PhysicalModel& model, Rng& rng) {
    const double xi2 = std::gamma_distribution<double>(p.m, 1.0 / p.m)(rng);
    const double x = detail::scaled_noncentral_chi2(p.mu, xi2 * model.p2 / model.sigma_x2, model.sigma_x2, rng);
    const double y = detail::scaled_noncentral_chi2(p.mu, xi2 * model.q2 / model.sigma_y2, model.sigma_y2, rng);
    return p.avg_snr * (x + y) / model.mean_power;
}

// Integer mu only: explicit per-cluster Gaussians with the aggregate dominant
// powers split by the given weights (each set sums to 1).
template <class Rng>
double sample_snr_clusters(const FBParams& p, const PhysicalModel& model, const std::vector<double>& weights_p,
                           const std::vector<double>& weights_q, Rng& rng) {
    const auto n = static_cast<std::size_t>(std::llround(p.mu));
    if (std::abs(p.mu - static_cast<double>(n)) > 1e-12 || n == 0) {
        throw parameter_error("mu", "cluster sampler needs an integer mu");
    }
    if (weights_p.size() != n || weights_q.size() != n) {
        throw parameter_error("weights", "need one weight per cluster");
    }
    const double xi = std::sqrt(std::gamma_distribution<double>(p.m, 1.0 / p.m)(rng));
    std::normal_distribution<double> nd(0.0, 1.0);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xm = xi * std::sqrt(weights_p[i] * model.p2);
        const double ym = xi * std::sqrt(weights_q[i] * model.q2);
        const double x = xm + std::sqrt(model.sigma_x2) * nd(rng);
        const double y = ym + std::sqrt(model.sigma_y2) * nd(rng);
        r2 += x * x + y * y;
    }
    return p.avg_snr * r2 / model.mean_power;
}

inline std::vector<double> sample_snr_batch(const FBParams& p, std::uint64_t n, std::uint64_t seed,
                                            std::uint32_t stream = 0) {
    const auto model = physical_model(p);
    Philox4x32 rng(seed, stream, kBobDomain);
    std::vector<double> out(n);
    for (auto& v : out) v = sample_snr(p, model, rng);
    return out;
}

namespace detail {

struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    static Welford merge(const Welford& a, const Welford& b) {
        if (a.n == 0) return b;
        if (b.n == 0) return a;
        Welford r;
        r.n = a.n + b.n;
        const double d = b.mean - a.mean;
        const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n), nn = static_cast<double>(r.n);
        r.mean = a.mean + d * nb / nn;
        r.m2 = a.m2 + b.m2 + d * d * na * nb / nn;
        return r;
    }

    MCEstimate estimate(std::uint64_t seed) const {
        MCEstimate e;
        e.mean = mean;
        e.n = n;
        e.seed = seed;
        e.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        return e;
    }
};

using StreamStats = std::array<Welford, 4>;

inline StreamStats merge_tree(const std::vector<StreamStats>& s, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return s[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto a = merge_tree(s, lo, mid);
    const auto b = merge_tree(s, mid, hi);
    StreamStats r;
    for (int k = 0; k < 4; ++k) r[k] = Welford::merge(a[k], b[k]);
    return r;
}

} // namespace detail

inline MCResults estimate_all(const FBParams& bob, const FBParams& eve, const SecrecyConfig& sc,
                              const MCConfig& cfg) {
    cfg.validate();
    sc.validate();
    const auto mb = physical_model(bob);
    const auto me = physical_model(eve);
    const double th = sc.theta;

    const std::uint32_t ns = cfg.n_streams;
    std::vector<detail::StreamStats> stats(ns);
    std::atomic<std::uint32_t> next{0};

    auto worker = [&] {
        for (std::uint32_t s = next++; s < ns; s = next++) {
            const std::uint64_t count = cfg.n_samples / ns + (s < cfg.n_samples % ns ? 1 : 0);
            Philox4x32 rb(cfg.seed, s, kBobDomain);
            Philox4x32 re(cfg.seed, s, kEveDomain);
            auto& st = stats[s];
            for (std::uint64_t i = 0; i < count; ++i) {
                const double gd = sample_snr(bob, mb, rb);
                const double ge = sample_snr(eve, me, re);
                st[0].add(std::max(0.0, std::log1p(gd) - std::log1p(ge)));
                st[1].add(gd < th * ge + th - 1.0 ? 1.0 : 0.0);
                st[2].add(gd < th * ge ? 1.0 : 0.0);
                st[3].add(gd < ge ? 0.0 : 1.0);
            }
        }
    };

    unsigned nt = cfg.n_threads ? cfg.n_threads : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<unsigned>(nt, ns);
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const auto total = detail::merge_tree(stats, 0, ns);
    return {total[0].estimate(cfg.seed), total[1].estimate(cfg.seed), total[2].estimate(cfg.seed),
            total[3].estimate(cfg.seed)};
}

inline MCEstimate estimate_asc(const FBParams& bob, const FBParams& eve, const MCConfig& cfg) {
    return estimate_all(bob, eve, SecrecyConfig{}, cfg).asc;
}
inline MCEstimate estimate_sop(const FBParams& bob, const FBParams& eve, const SecrecyConfig& sc,
                               const MCConfig& cfg) {
    return estimate_all(bob, eve, sc, cfg).sop;
}
inline MCEstimate estimate_sopl(const FBParams& bob, const FBParams& eve, const SecrecyConfig& sc,
                                const MCConfig& cfg) {
    return estimate_all(bob, eve, sc, cfg).sopl;
}
inline MCEstimate estimate_spsc(const FBParams& bob, const FBParams& eve, const MCConfig& cfg) {
    return estimate_all(bob, eve, SecrecyConfig{}, cfg).spsc;
}

} // namespace fbsec
