#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fbsec/closed_form_case2.hpp"
#include "fbsec/montecarlo.hpp"
#include "oracles.hpp"

using namespace fbsec;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Direct product form of the transform, straight from the defining constants.
complex direct_transform(const FBParams& p, complex s) {
    const double mu = p.mu, m = p.m, k = p.kappa, eta = p.eta, r2 = p.rho2, g = p.avg_snr;
    const double a2 = 4 * eta / (mu * mu * (1 + eta) * (1 + eta) * (1 + k) * (1 + k));
    const double a1 = a2 + 2 * k * (r2 + eta) / (m * (1 + r2) * mu * (1 + eta) * (1 + k) * (1 + k));
    const double b = -(2 / mu + k / m) / (1 + k);
    const complex sq = std::sqrt(complex(b * b - 4 * a1, 0));
    const complex c1 = (-b + sq) / (2 * a1), c2 = (-b - sq) / (2 * a1);
    const double omega = std::pow(a2, m - mu / 2) / (std::pow(g, mu) * std::pow(a1, m));
    const double t3 = mu * (1 + eta) * (1 + k) / (2 * eta), t4 = mu * (1 + eta) * (1 + k) / 2;
    return omega * std::pow(s + c1 / g, -m) * std::pow(s + c2 / g, -m) * std::pow(s + t3 / g, m - mu / 2) *
           std::pow(s + t4 / g, m - mu / 2);
}

double asc_by_quadrature(const PartialFractionExpansion& d, const PartialFractionExpansion& e, double scale) {
    return oracle::asc_by_quadrature([&](double x) { return pdf_case2(d, x); }, [&](double x) { return cdf_case2(d, x); },
                                     [&](double x) { return pdf_case2(e, x); }, [&](double x) { return cdf_case2(e, x); },
                                     scale);
}

double sop_by_quadrature(const PartialFractionExpansion& d, const PartialFractionExpansion& e, double th,
                         double scale) {
    return oracle::outage_by_quadrature([&](double x) { return cdf_case2(d, x); },
                                        [&](double y) { return pdf_case2(e, y); }, th, th - 1, scale);
}

const FBParams kGamma{2, 1, 0, 1, 1, 1};

} // namespace

TEST(PartialFractions, GammaReduction) {
    const auto pfe = partial_fractions(kGamma);
    ASSERT_EQ(pfe.centers.size(), 1u);
    EXPECT_NEAR(pfe.centers[0], 2.0, 1e-12);
    ASSERT_EQ(pfe.mults[0], 2);
    ASSERT_EQ(pfe.weights[0].size(), 2u);
    EXPECT_NEAR(pfe.weights[0][0], 0.0, 1e-12);
    EXPECT_NEAR(pfe.weights[0][1], 1.0, 1e-12);
    EXPECT_NEAR(pfe.A[0][0], 0.0, 1e-12);
    EXPECT_NEAR(pfe.A[0][1], 1.0, 1e-12);
    EXPECT_NEAR(pfe.B[0][0], -0.25, 1e-12);
    EXPECT_NEAR(pfe.B[0][1], -0.5, 1e-12);
    EXPECT_NEAR(pfe.omega_norm, 4.0, 1e-12);
}

TEST(PartialFractions, ReconstructionOnRandomDraws) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        const auto p = oracle::random_case2(rng);
        const auto pfe = partial_fractions(p);
        EXPECT_LT(std::abs(pfe.omega_norm / derive(p).omega_norm - 1.0), 1e-10);
        double wsum = 0.0, wabs = 0.0;
        for (const auto& w : pfe.weights) {
            for (double v : w) {
                wsum += v;
                wabs += std::abs(v);
            }
        }
        EXPECT_NEAR(wsum, 1.0, 1e-10) << i;
        const double cmax = *std::max_element(pfe.centers.begin(), pfe.centers.end());
        // Far out the transform falls below the rounding level of the pole
        // terms, hence the absolute floor scaled by sum |w|.
        const double floor = 16 * std::numeric_limits<double>::epsilon() * wabs;
        std::vector<double> grid;
        for (double s = 0.5; s <= 10.0; s += 0.5) grid.push_back(s);
        for (double f : {0.01, 0.1, 1.0, 10.0}) grid.push_back(f * cmax);
        for (double s : grid) {
            const complex ref = direct_transform(p, s);
            EXPECT_LT(std::abs(pfe_transform(pfe, s) - ref), 1e-9 * std::abs(ref) + floor) << i << " s=" << s;
        }
    }
}

TEST(PartialFractions, NegativeExponentsAndMergedPoles) {
    // mu/2 < m: scattering groups become numerator factors.
    const FBParams p{2, 3, 1.5, 0.4, 0.7, 2};
    const auto pfe = partial_fractions(p);
    EXPECT_LE(pfe.centers.size(), 2u);
    for (double s : {0.5, 2.0, 7.0}) {
        EXPECT_LT(std::abs(pfe_transform(pfe, s) - direct_transform(p, s)), 1e-9 * std::abs(direct_transform(p, s)));
    }
    // eta = 1 merges the two scattering rates.
    const FBParams q{4, 1, 1.5, 1.0, 0.7, 2};
    const auto pq = partial_fractions(q);
    EXPECT_EQ(pole_groups(derive(q), q.avg_snr).size(), 2u);
    for (double s : {0.5, 2.0, 7.0}) {
        EXPECT_LT(std::abs(pfe_transform(pq, s) - direct_transform(q, s)), 1e-9 * std::abs(direct_transform(q, s)));
    }
}

TEST(PartialFractions, RejectsNonIntegerExponents) {
    EXPECT_THROW(partial_fractions(FBParams{3, 1, 1, 0.5, 0.5, 1}), case_mismatch_error);
    EXPECT_THROW(partial_fractions(FBParams{2, 1.5, 1, 0.5, 0.5, 1}), case_mismatch_error);
    EXPECT_FALSE(case2_applicable(FBParams{2, 1.5, 1, 0.5, 0.5, 1}));
    // m -> infinity surrogate with kappa > 0 has an enormous multiplicity.
    EXPECT_FALSE(case2_applicable(FBParams{2, 1e6, 1, 0.5, 0.5, 1}));
}

TEST(PdfCdf, GammaReductionValues) {
    const auto pfe = partial_fractions(kGamma);
    EXPECT_NEAR(pdf_case2(pfe, 1), 4 * std::exp(-2.0), 1e-14);
    EXPECT_NEAR(cdf_case2(pfe, 1), 1 - 3 * std::exp(-2.0), 1e-14);
    EXPECT_EQ(cdf_case2(pfe, 0), 0.0);
    EXPECT_THROW(pdf_case2(pfe, -1), domain_error);
    EXPECT_THROW(cdf_case2(pfe, -1), domain_error);
    EXPECT_NEAR(cdf_case2(pfe, 60), 1.0, 1e-15);
}

TEST(PdfCdf, DensityIntegratesToOne) {
    const FBParams p{4, 1, 1, 0.5, 0.5, 1};
    const auto pfe = partial_fractions(p);
    EXPECT_NEAR(oracle::quad([&](double x) { return pdf_case2(pfe, x); }, 1.0), 1.0, 1e-8);
}

TEST(PdfCdf, RandomDrawsNormalizedAndMonotone) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto p = oracle::random_case2(rng);
        const auto pfe = partial_fractions(p);
        EXPECT_NEAR(oracle::quad([&](double x) { return pdf_case2(pfe, x); }, p.avg_snr), 1.0, 1e-8) << i;
        double prev = 0.0;
        for (double x = 0.0; x < 20 * p.avg_snr; x += 0.05 * p.avg_snr) {
            const double c = cdf_case2(pfe, x);
            EXPECT_GE(c, prev - 1e-14);
            EXPECT_GE(pdf_case2(pfe, x), 0.0);
            prev = c;
        }
    }
}

TEST(PdfCdf, DecilesMatchMonteCarlo) {
    const FBParams p{4, 2, 2, 0.3, 0.1, 1};
    const auto pfe = partial_fractions(p);
    auto s = sample_snr_batch(p, 10'000'000, 99);
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    for (int q = 1; q <= 9; ++q) {
        const double level = q / 10.0;
        const double x = s[static_cast<std::size_t>(level * n)];
        EXPECT_NEAR(cdf_case2(pfe, x), level, 3 * std::sqrt(level * (1 - level) / n)) << q;
    }
}

TEST(Asc, IdenticalLinksMatchQuadrature) {
    const FBParams p{4, 2, 1.3, 0.6, 0.4, 3};
    const auto pfe = partial_fractions(p);
    const double v = asc_case2(pfe, pfe);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(rel(v, asc_by_quadrature(pfe, pfe, p.avg_snr)), 1e-7);
}

TEST(Asc, NakagamiPairMatchesMonteCarlo) {
    const auto p = from_nakagami(2, 1);
    MCConfig mc;
    mc.n_samples = 10'000'000;
    mc.seed = 17;
    const auto e = estimate_asc(p, p, mc);
    EXPECT_NEAR(asc_case2(p, p), e.mean, 3 * e.std_error);
}

TEST(Asc, CapacityScaling) {
    const FBParams bob{6, 3, 1, 1, 1, 1e6};
    const FBParams eve{2, 1, 1, 0.5, 0.5, 0.01};
    EXPECT_NEAR(asc_case2(bob, eve) / std::log(1e6), 1.0, 0.05);
}

TEST(Asc, RandomDrawsMatchDefiningIntegrals) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        const auto d = oracle::random_case2(rng), e = oracle::random_case2(rng);
        const auto pd = partial_fractions(d), pe = partial_fractions(e);
        const double scale = std::max(d.avg_snr, e.avg_snr);
        EXPECT_LT(rel(asc_case2(pd, pe), asc_by_quadrature(pd, pe, scale)), 1e-7) << i;
        for (double rs : {0.0, 1.0}) {
            const double th = std::exp(rs);
            const double ref = sop_by_quadrature(pd, pe, th, scale);
            EXPECT_LT(std::abs(sop_case2(pd, pe, SecrecyConfig::from_rate(rs)) - ref), 1e-7 * ref + 1e-13) << i;
        }
    }
}

TEST(Sop, IdenticalLinksZeroRate) {
    const FBParams p{4, 2, 1.3, 0.6, 0.4, 3};
    EXPECT_NEAR(sop_case2(p, p, SecrecyConfig::from_rate(0)), 0.5, 1e-12);
    EXPECT_NEAR(sopl_case2(p, p, SecrecyConfig::from_rate(0)), 0.5, 1e-12);
    EXPECT_NEAR(spsc_case2(p, p), 0.5, 1e-12);
}

TEST(Sop, LargeRateGivesOutage) {
    const FBParams bob{4, 2, 1.3, 0.6, 0.4, 100}, eve{2, 1, 1, 1, 1, 1};
    EXPECT_NEAR(sop_case2(bob, eve, SecrecyConfig::from_rate(20)), 1.0, 1e-6);
}

TEST(Sop, MonotoneInRate) {
    const FBParams bob{4, 2, 1.3, 0.6, 0.4, 30}, eve{2, 1, 1, 0.4, 1, 2};
    double prev = 0.0;
    for (double rs = 0.0; rs <= 4.0; rs += 0.25) {
        const double v = sop_case2(bob, eve, SecrecyConfig::from_rate(rs));
        EXPECT_GE(v, prev - 1e-12);
        prev = v;
    }
}

TEST(Sop, MatchesMonteCarloAtUnitRate) {
    const FBParams bob{4, 2, 2, 0.3, 0.1, 10}, eve{2, 1, 1, 0.5, 0.5, 2};
    const auto sc = SecrecyConfig::from_rate(1);
    MCConfig mc;
    mc.n_samples = 10'000'000;
    mc.seed = 5;
    const auto r = estimate_all(bob, eve, sc, mc);
    const double sop = sop_case2(bob, eve, sc), sopl = sopl_case2(bob, eve, sc);
    EXPECT_NEAR(sop, r.sop.mean, 3 * r.sop.std_error);
    EXPECT_NEAR(sopl, r.sopl.mean, 3 * r.sopl.std_error);
    EXPECT_LT(sopl, sop);
}

TEST(Sop, InvariantsOnRandomDraws) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 30; ++i) {
        const auto d = oracle::random_case2(rng), e = oracle::random_case2(rng);
        const auto pd = partial_fractions(d), pe = partial_fractions(e);
        EXPECT_NEAR(sop_case2(pd, pe, SecrecyConfig::from_rate(0)), 1.0 - spsc_case2(pd, pe), 1e-10);
        EXPECT_NEAR(sopl_case2(pd, pe, SecrecyConfig{}), 1.0 - sopl_case2(pe, pd, SecrecyConfig{}), 1e-7);
        const auto sc = SecrecyConfig::from_rate(1);
        EXPECT_LE(sopl_case2(pd, pe, sc), sop_case2(pd, pe, sc) + 1e-12);
    }
}

TEST(SecrecyConfigTest, FromRate) {
    const auto sc = SecrecyConfig::from_rate(1.3);
    EXPECT_NEAR(sc.theta, std::exp(1.3), 1e-15);
    EXPECT_THROW(SecrecyConfig::from_rate(-1), parameter_error);
    EXPECT_THROW((SecrecyConfig{1.0, 2.0}.validate()), parameter_error);
}
