#include "test_util.hpp"

#include "haw/reps.hpp"

#include <gtest/gtest.h>

using namespace haw;
using namespace haw::reps;
using C = Cx<double>;
using M = Mat<double>;

TEST(SpinRep, HalfSpinDiagonal) {
    auto rep = spin_rep<double>(1, C(2, 0));
    EXPECT_LT(std::abs(rep.qs3(0, 0) - std::sqrt(C(2, 0))), 1e-14);
    EXPECT_LT(std::abs(rep.qs3(1, 1) - C(1, 0) / std::sqrt(C(2, 0))), 1e-14);
    auto cas = casimir(rep, C(2, 0));
    EXPECT_LT((cas - C(4.25, 0) * M::Identity(2, 2)).norm(), 1e-13);
}

TEST(SpinRep, CasimirScalarAnySpin) {
    for (int two_s : {1, 2, 3, 4}) {
        C q(1.7, 0);
        auto rep = spin_rep<double>(two_s, q);
        auto cas = casimir(rep, q);
        C expect = qcore::qpow(q, two_s + 1) + qcore::qpow(q, -two_s - 1);
        EXPECT_LT((cas - expect * M::Identity(rep.dim, rep.dim)).norm(),
                  1e-12 * std::abs(expect));
    }
}

TEST(SpinRep, SpinOneLadderSymmetric) {
    C q(2, 0);
    auto rep = spin_rep<double>(2, q);
    C expect = std::sqrt(qcore::qnum(1, q) * qcore::qnum(2, q));
    EXPECT_LT(std::abs(rep.sp(0, 1) - expect), 1e-14);
    EXPECT_LT(std::abs(rep.sp(1, 2) - expect), 1e-14);
}

TEST(EulerTopPair, AWRelationsAndTrace) {
    auto m = hawtest::top_params(1);
    auto pair = euler_top_pair(m);
    EXPECT_LT(aw_residual(pair.A, pair.A_star, pair.sc, pair.q), 1e-10);
    C tr = pair.A.trace();
    C expect = m.theta(0) + m.theta(1);
    EXPECT_LT(std::abs(tr - expect), 1e-10 * std::abs(expect));
}

// Table 2 diagonal row: spectrum of A + 0.25 A* at s = 1/2
TEST(EulerTopPair, Table2DiagonalSpectrum) {
    auto pair = euler_top_pair(hawtest::top_params(1));
    M h = pair.A + C(0.25, 0) * pair.A_star;
    Eigen::ComplexEigenSolver<M> es(h);
    std::vector<C> vals = {es.eigenvalues()(0), es.eigenvalues()(1)};
    std::sort(vals.begin(), vals.end(),
              [](C a, C b) { return a.imag() < b.imag(); });
    EXPECT_LT(std::abs(vals[1] - C(6.40701, 3.99187)), 1e-4);
    EXPECT_LT(std::abs(vals[0] - C(6.40701, -3.99187)), 1e-4);
}

TEST(TriplePair, HalfSpinStructure) {
    C q(2, 0);
    auto t = triple_tensor_pair<double>(1, 1, 1, q);
    EXPECT_EQ(t.dim, 8);
    C dq2 = q * q - C(1, 0) / (q * q);
    EXPECT_LT(std::abs(t.rho + dq2 * dq2), 1e-12);
    C cval = qcore::qpow(q, 2) + qcore::qpow(q, -2);
    for (const M *c : {&t.c1, &t.c2, &t.c3})
        EXPECT_LT((*c - cval * M::Identity(8, 8)).norm(), 1e-12);
    EXPECT_LT(aw_residual(t), 1e-10);
}

TEST(TriplePair, SpinOneAWRelations) {
    auto t = triple_tensor_pair<double>(2, 2, 2, C(2, 0));
    EXPECT_EQ(t.dim, 27);
    EXPECT_LT(aw_residual(t), 1e-10);
}

TEST(SectorDecompose, HalfSpinCounts) {
    C q(2, 0);
    auto t = triple_tensor_pair<double>(1, 1, 1, q);
    auto sectors = sector_decompose(t);
    // ell = 0: k = 0..3 (dim 1); ell = 1: k = 0..1 (dim 2)
    EXPECT_EQ(sectors.size(), 6u);
    int total = 0;
    for (const auto &s : sectors) {
        total += s.dim;
        EXPECT_EQ(s.dim, s.ell == 0 ? 1 : 2);
    }
    EXPECT_EQ(total, 8);
}

TEST(SectorDecompose, SpinOneCountsAndLeonard) {
    C q(2, 0);
    auto t = triple_tensor_pair<double>(2, 2, 2, q);
    auto sectors = sector_decompose(t);
    int total = 0;
    for (const auto &s : sectors)
        total += s.dim;
    EXPECT_EQ(total, 27);
    // each sector carries a Leonard pair matching the effective parameters
    for (const auto &s : sectors) {
        if (s.dim < 2)
            continue;
        auto eff = chain_effective_params<double>(2, s.ell, q);
        auto pair = sector_pair(t, s, eff);
        EXPECT_LT(aw_residual(pair.A, pair.A_star, pair.sc, q), 1e-9)
            << "sector (" << s.ell << "," << s.k << ")";
        auto sp = leonard_spectra(pair);
        for (int m = 0; m < pair.dim; ++m) {
            EXPECT_LT(qcore::rel_err(sp.theta[m], eff.theta(m)), 1e-9);
            EXPECT_LT(qcore::rel_err(sp.theta_star[m], eff.theta_star(m)),
                      1e-9);
        }
    }
}

// theta*_M hand-evaluated from the spectral form at the Table-1 parameters
TEST(LeonardSpectra, Table1ThetaStar) {
    auto m = hawtest::table1_params(1);
    auto pair = euler_top_pair(m);
    auto sp = leonard_spectra(pair);
    // b* = (1/2)*2*(1/5)*(1/2) = 0.1, c* = (1/2)*2*5*2 = 10
    EXPECT_LT(std::abs(sp.theta_star[0] - C(10.1, 0)), 1e-10);
    EXPECT_LT(std::abs(sp.theta_star[1] - C(2.9, 0)), 1e-10);
}

TEST(LeonardSpectra, CharacteristicPolynomialAndTridiagonal) {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 3; ++trial) {
        auto m = hawtest::random_params(gen, 2 + trial);
        auto pair = euler_top_pair(m);
        auto sp = leonard_spectra(pair);
        M prod = M::Identity(pair.dim, pair.dim);
        for (int k = 0; k < pair.dim; ++k)
            prod = prod * (pair.A - sp.theta[k] * M::Identity(pair.dim,
                                                              pair.dim));
        double scale = std::pow(pair.A.norm(), pair.dim);
        EXPECT_LT(prod.norm() / scale, 1e-9);
        EXPECT_LT(tridiagonality_residual(pair, sp), 1e-9);
    }
}

TEST(LeonardSpectra, RejectsDegenerate) {
    // theta_0 = theta_1 at s = 1/2 requires e^{-2mu} = q^{4s-2} = 1
    auto m = hawtest::table1_params(1);
    m.mu = C(0, 0);
    auto pair = euler_top_pair(m);
    EXPECT_THROW(leonard_spectra(pair), std::runtime_error);
}

TEST(ADiamond, SpectrumAndCommutation) {
    std::mt19937_64 gen(29);
    auto m = hawtest::random_params(gen, 2);
    auto pair = euler_top_pair(m);
    auto ad = adiamond(pair);
    auto sp = leonard_spectra(pair);
    ASSERT_TRUE(sp.diamond_ok);
    // b_d c_d = b c and the printed b_d value
    EXPECT_LT(qcore::rel_err(sp.b_diamond * sp.c_diamond, sp.b * sp.c), 1e-8);
    EXPECT_LT(qcore::rel_err(sp.b_diamond, m.b_diamond()), 1e-8);
    auto gam = casimir_gamma(pair);
    EXPECT_LT(qcore::comm(ad, gam).norm() / (ad.norm() * gam.norm()), 1e-11);
}

TEST(CasimirGamma, CentralAndScalar) {
    auto m = hawtest::table1_params(2);
    auto pair = euler_top_pair(m);
    auto gam = casimir_gamma(pair);
    EXPECT_LT(qcore::comm(gam, pair.A).norm() / (gam.norm() * pair.A.norm()),
              1e-10);
    EXPECT_LT(qcore::comm(gam, pair.A_star).norm() /
                  (gam.norm() * pair.A_star.norm()),
              1e-10);
    C g0 = gamma0_closed(m);
    EXPECT_LT((gam - g0 * M::Identity(pair.dim, pair.dim)).norm(),
              1e-9 * std::max(1.0, std::abs(g0)));
}

TEST(ModelParams, JsonRoundTrip) {
    auto m = hawtest::top_params(3);
    auto j = to_json(m);
    auto m2 = model_from_json<double>(j);
    EXPECT_EQ(m2.two_s, m.two_s);
    EXPECT_LT(std::abs(m2.q - m.q), 1e-15);
    EXPECT_LT(std::abs(m2.mu_p - m.mu_p), 1e-15);
    EXPECT_LT(std::abs(m2.v - m.v), 1e-15);
}
