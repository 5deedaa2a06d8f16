#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnmot/errors.hpp"
#include "cnmot/numeraire.hpp"
#include "cnmot/shadow.hpp"
#include "oracles.hpp"

using namespace cnmot;

namespace {

Measure1D pos_mu() { return Measure1D({0.8, 1.25}, {5.0 / 9.0, 4.0 / 9.0}); }
Measure1D pos_nu() { return Measure1D({0.5, 1.0, 2.0}, {0.4, 0.4, 0.2}); }

void expect_lifted_invariants(const ShadowCoupling& s, const Source& src, const Measure1D& nu)
{
    // (x0, u) marginal
    for (const auto& c : src.cells) {
        double m = 0.0, bary = 0.0;
        for (const auto& l : s.lifted.cells())
            if (l.x0 == c.x && l.u == c.u) {
                m += l.w;
                bary += l.w * l.x1;
            }
        EXPECT_NEAR(m, c.mass, 1e-10);
        if (m > 1e-12) EXPECT_NEAR(bary / m, c.x, 1e-8);
    }
    Measure1D t = s.projection.target_marginal();
    for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(t.cdf(nu.atoms()[j]), nu.cdf(nu.atoms()[j]), 1e-10);
}

// potential-function domination at every atom of either measure
void expect_dominates(const Measure1D& rho, const Measure1D& theta)
{
    std::vector<double> z = rho.atoms();
    z.insert(z.end(), theta.atoms().begin(), theta.atoms().end());
    for (double x : z) EXPECT_GE(rho.potential(x), theta.potential(x) - 1e-10);
}

}  // namespace

TEST(ShadowMeasure, WorkedExamples)
{
    Measure1D a = shadow_measure(Measure1D::sub_probability({2.0}, {0.5}), Measure1D({1.0, 3.0}, {0.5, 0.5}));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR(a.weights()[0], 0.25, 1e-12);
    EXPECT_NEAR(a.weights()[1], 0.25, 1e-12);

    Measure1D b = shadow_measure(Measure1D::sub_probability({3.0}, {0.25}), Measure1D({1.0, 3.0, 5.0}, {0.3, 0.4, 0.3}));
    ASSERT_EQ(b.size(), 1u);
    EXPECT_DOUBLE_EQ(b.atoms()[0], 3.0);
    EXPECT_NEAR(b.weights()[0], 0.25, 1e-12);

    Measure1D c = shadow_measure(pos_mu(), pos_nu());
    EXPECT_NEAR(wasserstein1(c, pos_nu()), 0.0, 1e-12);
}

TEST(ShadowMeasure, DominatedAndMinimal)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.05, 0.6);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 4.0);
        // theta: a random fraction of one atom of mu
        std::size_t i = static_cast<std::size_t>(trial) % p.mu.size();
        Measure1D theta = Measure1D::sub_probability({p.mu.atoms()[i]}, {p.mu.weights()[i] * U(rng)});
        Measure1D rho = shadow_measure(theta, p.nu);
        EXPECT_NEAR(rho.mass(), theta.mass(), 1e-10);
        EXPECT_NEAR(rho.first_moment(), theta.first_moment(), 1e-10);
        for (std::size_t j = 0; j < rho.size(); ++j) {
            double x = rho.atoms()[j];
            EXPECT_LE(rho.weights()[j], p.nu.cdf(x) - p.nu.cdf_left(x) + 1e-12);
        }
        expect_dominates(rho, theta);
        // minimality: the shadow support is an interval of nu atoms around theta
        std::size_t lo = 0, hi = 0;
        for (std::size_t j = 0; j < p.nu.size(); ++j) {
            if (p.nu.atoms()[j] == rho.atoms().front()) lo = j;
            if (p.nu.atoms()[j] == rho.atoms().back()) hi = j;
        }
        EXPECT_EQ(hi - lo + 1, rho.size());
        for (std::size_t j = 1; j + 1 < rho.size(); ++j)
            EXPECT_NEAR(rho.weights()[j], p.nu.weights()[lo + j], 1e-10);
    }
}

TEST(ShadowMeasure, HeavierThanTarget)
{
    EXPECT_THROW(shadow_measure(Measure1D::sub_probability({3.0}, {0.5}), Measure1D::sub_probability({1.0, 5.0}, {0.2, 0.2})),
                 Infeasible);
}

TEST(MotLinear, DiracSourceAndIdentity)
{
    Measure1D nu = pos_nu();
    std::vector<double> cost(nu.size());
    for (std::size_t j = 0; j < nu.size(); ++j) cost[j] = std::cos(3.0 * nu.atoms()[j]);
    MotSolution s = mot_solve_linear(Measure1D::dirac(nu.mean()), nu, cost);
    for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(s.pi.at(0, j), nu.weights()[j], 1e-12);

    Measure1D mu = pos_mu();
    std::vector<double> c2;
    for (double x : mu.atoms())
        for (double y : mu.atoms()) c2.push_back(std::pow(std::abs(y - x), 1.5));
    MotSolution id = mot_solve_linear(mu, mu, c2);
    EXPECT_NEAR(id.pi.at(0, 0), mu.weights()[0], 1e-12);
    EXPECT_NEAR(id.pi.at(1, 1), mu.weights()[1], 1e-12);
    EXPECT_NEAR(id.value, 0.0, 1e-12);
}

TEST(MotLinear, NotInConvexOrderIsInfeasible)
{
    std::vector<double> cost(2, 0.0);
    EXPECT_FALSE(convex_order_leq(Measure1D({1.0, 3.0}, {0.5, 0.5}), Measure1D::dirac(2.0)));
    EXPECT_THROW(mot_solve_linear(Measure1D({1.0, 3.0}, {0.5, 0.5}), Measure1D::dirac(2.0), cost), Infeasible);
}

TEST(MotLinear, OptimizerTransportsWithValueRatio)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 3.0);
        double a = U(rng), b = U(rng);
        PairCost c = [a, b](double x, double y) { return std::pow(std::abs(y - x), 1.0 + 0.5 * (a + 1.0)) + b * x * y * y; };
        PairCost sc = cn_cost_pair(c);
        std::vector<double> t1, t2;
        for (double x : p.mu.atoms())
            for (double y : p.nu.atoms()) t1.push_back(sc(x, y));
        Measure1D smu = cn_measure(p.mu), snu = cn_measure(p.nu);
        for (double x : smu.atoms())
            for (double y : snu.atoms()) t2.push_back(c(x, y));
        MotSolution s1 = mot_solve_linear(p.mu, p.nu, t1);
        MotSolution s2 = mot_solve_linear(smu, snu, t2);
        EXPECT_NEAR(s1.value, p.mu.mean() * s2.value, 1e-9 * (1.0 + std::abs(s1.value))) << "trial " << trial;
        // the transformed optimizer is feasible and optimal for the transformed problem
        MartingaleCoupling moved = cn_coupling(s1.pi);
        EXPECT_NEAR(moved.expectation(c), s2.value, 1e-9 * (1.0 + std::abs(s2.value)));
        EXPECT_LT(moved.martingale_residual(), 1e-9);
    }
}

TEST(Sources, PresetMarginals)
{
    Measure1D mu = pos_mu();
    for (const Source& s : {source_monotone(mu, 8), source_antitone(mu, 8), source_product(mu, 8)}) {
        s.validate();
        Measure1D m = s.mu();
        EXPECT_NEAR(wasserstein1(m, mu), 0.0, 1e-14) << s.preset;
        // u-marginal: each grid cell [k/K, (k+1)/K) carries 1/K
        for (std::size_t k = 0; k < 8; ++k) {
            double mass = 0.0;
            for (const auto& c : s.cells)
                if (c.u >= k / 8.0 && c.u < (k + 1) / 8.0) mass += c.mass;
            EXPECT_NEAR(mass, 1.0 / 8.0, 1e-14) << s.preset;
        }
    }
    // atom 0.8 has mass 5/9: split at 5/9 inside the fifth cell
    Source mono = source_monotone(mu, 8);
    EXPECT_EQ(mono.cells.size(), 9u);
    EXPECT_DOUBLE_EQ(mono.cells.front().x, 0.8);
    EXPECT_DOUBLE_EQ(mono.cells.back().x, 1.25);
    EXPECT_DOUBLE_EQ(source_antitone(mu, 8).cells.front().x, 1.25);
    EXPECT_THROW(source_monotone(mu, 0), InvalidInput);
}

TEST(Sources, CnSourceIsInvolution)
{
    Source s = source_product(pos_mu(), 4);
    Source t = cn_source(cn_source(s));
    ASSERT_EQ(t.cells.size(), s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        EXPECT_NEAR(t.cells[i].x, s.cells[i].x, 1e-14);
        EXPECT_EQ(t.cells[i].u, s.cells[i].u);
        EXPECT_NEAR(t.cells[i].mass, s.cells[i].mass, 1e-14);
    }
    EXPECT_NEAR(wasserstein1(cn_source(s).mu(), cn_measure(pos_mu())), 0.0, 1e-14);
}

TEST(ShadowCoupling, DiracSource)
{
    Measure1D nu = pos_nu();
    Source s = source_product(Measure1D::dirac(nu.mean()), 16);
    ShadowCoupling sc = shadow_coupling(s, nu);
    for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(sc.projection.at(0, j), nu.weights()[j], 1e-12);
    expect_lifted_invariants(sc, s, nu);
}

TEST(ShadowCoupling, MonotoneIsLeftMonotoneAndMatchesIncremental)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 3.0);
        for (const Source& src : {source_monotone(p.mu, 16), source_antitone(p.mu, 16), source_product(p.mu, 16)}) {
            ShadowCoupling lp = shadow_coupling(src, p.nu);
            ShadowCoupling inc = shadow_coupling_incremental(src, p.nu);
            expect_lifted_invariants(lp, src, p.nu);
            expect_lifted_invariants(inc, src, p.nu);
            EXPECT_LT(lp.projection.max_abs_diff(inc.projection), 1e-8) << src.preset << " trial " << trial;
            EXPECT_NEAR(lp.value, inc.value, 1e-9);
            if (src.preset == "monotone") EXPECT_TRUE(is_left_monotone(lp.projection, 1e-10));
            if (src.preset == "antitone") EXPECT_TRUE(is_right_monotone(lp.projection, 1e-10));
        }
    }
}

TEST(ShadowCoupling, LeftMonotoneRuleDetectsCrossing)
{
    // x = 1 spreads to {0, 2}; x' = 1.5 keeps mass at 1 which sits strictly inside
    MartingaleCoupling bad({1.0, 1.5}, {0.0, 1.0, 2.0, 3.0}, {0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25});
    EXPECT_FALSE(is_left_monotone(bad));
    MartingaleCoupling ok({1.0, 2.0}, {0.0, 1.0, 2.0, 3.0}, {0.0, 0.5, 0.0, 0.0, 0.25, 0.0, 0.0, 0.25});
    EXPECT_TRUE(is_left_monotone(ok));
}

TEST(ShadowCoupling, UniquenessProbe)
{
    std::mt19937_64 rng(17);
    ShadowObjective alt;
    alt.phi = [](double u) { return std::exp(-u); };
    alt.psi = [](double y) { return std::cosh(y); };
    for (int trial = 0; trial < 6; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 3.0);
        for (const Source& src : {source_monotone(p.mu, 16), source_product(p.mu, 16)}) {
            ShadowCoupling a = shadow_coupling(src, p.nu);
            ShadowCoupling b = shadow_coupling(src, p.nu, alt);
            EXPECT_LT(a.projection.max_abs_diff(b.projection), 1e-6) << src.preset;
        }
    }
}

TEST(ShadowCoupling, NotInConvexOrder)
{
    EXPECT_THROW(shadow_coupling(source_monotone(pos_nu(), 8), pos_mu()), NotInConvexOrder);
}

TEST(WeakShadowCost, DiracTarget)
{
    Source src = source_product(pos_mu(), 8);
    Source slice = src.slice(0.8);
    double expect = 0.0;
    for (const auto& c : slice.cells) expect += (1.0 - c.u) * c.mass;
    expect *= std::sqrt(1.0 + 0.8 * 0.8);
    EXPECT_NEAR(weak_shadow_cost(Measure1D::dirac(0.8), slice, 0.8), expect, 1e-12);
    EXPECT_THROW(weak_shadow_cost(Measure1D::dirac(0.9), slice, 0.8), InvalidInput);
}

TEST(WeakShadowCost, TwoCellOracle)
{
    // cells u = 1/4, 3/4 with mass 1/2 each; eta = 1/2 delta_0 + 1/2 delta_2, m = 1.
    // Each cell must keep barycenter 1 so carries 1/4 on each atom: value fixed.
    Source slice;
    slice.cells = {{1.0, 0.25, 0.5}, {1.0, 0.75, 0.5}};
    Measure1D eta({0.0, 2.0}, {0.5, 0.5});
    double expect = 0.25 * (0.75 + 0.25) * (1.0 + std::sqrt(5.0));
    EXPECT_NEAR(weak_shadow_cost(eta, slice, 1.0), expect, 1e-12);
    // three-point eta: the low-u cell (larger weight) takes the inner atom
    Measure1D eta3({0.0, 1.0, 2.0}, {0.25, 0.5, 0.25});
    double inner = 0.75 * 0.5 * std::sqrt(2.0) + 0.25 * (0.25 * 1.0 + 0.25 * std::sqrt(5.0));
    EXPECT_NEAR(weak_shadow_cost(eta3, slice, 1.0), inner, 1e-12);
}

TEST(WeakShadowCost, FunctionalEquation)
{
    // C(eta) = b(eta) * C'(S(eta)) with C' built from the transformed slice
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(0.2, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 2, 0.0, 3.0);
        Source src = source_product(p.mu, 8);
        double x0 = p.mu.atoms()[0];
        Source slice = src.slice(x0);
        Source sslice = cn_source(src).slice(1.0 / x0);
        // eta: a random mean-x0 law on three atoms
        double l = x0 * U(rng), r = x0 * (1.0 + 2.0 * U(rng));
        double q = U(rng) * 0.5;
        double pl = (1.0 - q) * (r - x0) / (r - l);
        Measure1D eta({l, x0, r}, {pl, q, 1.0 - q - pl});
        double lhs = weak_shadow_cost(eta, slice, x0);
        double rhs = x0 * weak_shadow_cost(cn_measure(eta), sslice, 1.0 / x0);
        EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + lhs)) << "trial " << trial;
    }
}

TEST(WeakShadowCost, NestedMatchesLifted)
{
    std::mt19937_64 rng(29);
    oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 3.0);
    Source src = source_product(p.mu, 8);
    ShadowCoupling sc = shadow_coupling(src, p.nu);
    double nested = 0.0;
    for (std::size_t i = 0; i < p.mu.size(); ++i) {
        double x = p.mu.atoms()[i];
        std::vector<double> w;
        for (std::size_t j = 0; j < p.nu.size(); ++j) w.push_back(sc.projection.at(i, j));
        Measure1D eta = Measure1D::sub_probability(p.nu.atoms(), w).normalized();
        nested += p.mu.weights()[i] * weak_shadow_cost(eta, src.slice(x), x);
    }
    EXPECT_NEAR(nested, sc.value, 1e-9);
}

TEST(VerifyCnShadow, PresetsAndDirac)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        oracle::Pair p = oracle::random_pair(rng, 3, 0.0, 3.0);
        for (const Source& src : {source_monotone(p.mu, 16), source_antitone(p.mu, 16), source_product(p.mu, 16)}) {
            CheckReport r = verify_cn_shadow(src, p.nu);
            EXPECT_TRUE(r.pass) << src.preset << " diff " << r.diff;
        }
    }
    Measure1D nu = pos_nu();
    CheckReport d = verify_cn_shadow(source_monotone(Measure1D::dirac(nu.mean()), 16), nu);
    EXPECT_TRUE(d.pass);
    EXPECT_LT(d.diff, 1e-12);
}
