#include "test_util.hpp"

#include "haw/reflection.hpp"

#include <gtest/gtest.h>

using namespace haw;
using namespace haw::reflection;
using C = Cx<double>;
using M = Mat<double>;

TEST(RMatrix, EntriesAndPermutationPoint) {
    C q(2, 0), u(1.7, 0.3);
    auto r = rmatrix(u, q);
    EXPECT_LT(std::abs(r(0, 0) - (u * q - C(1, 0) / (u * q))), 1e-14);
    auto p = M(rmatrix(C(1, 0), q) / (q - C(1, 0) / q));
    EXPECT_LT((M(p * p) - M::Identity(4, 4)).norm(), 1e-13);
}

TEST(RMatrix, YangBaxter) {
    EXPECT_LT(yang_baxter_residual(C(1.3, 0), C(0.7, 0.2), C(2, 0)), 1e-12);
    qcore::SpectralSampler<double> smp(41);
    for (int t = 0; t < 20; ++t) {
        C u = smp.draw(), v = smp.draw(), q(smp.uniform(1.2, 2.6), 0);
        EXPECT_LT(yang_baxter_residual(u, v, q), 1e-12);
    }
}

TEST(KMatrix, OffDiagonalStructure) {
    auto m = hawtest::top_params(2);
    auto pair = reps::euler_top_pair(m);
    const C chi = m.chi(), q = m.q, rho = pair.sc.rho;
    qcore::SpectralSampler<double> smp(5);
    const C u = smp.draw();
    auto k = kmatrix(pair, chi, u);
    // chi^2 C + rho B = rho chi (u^2-u^-2) [((q-q^-1)(AA*+A*A) + 2w/(q-q^-1))/rho
    //                    + 2(qu^2+q^-1 u^-2)/(q^2-q^-2)]
    const C ui = C(1, 0) / u;
    const C uu = u * u - ui * ui, dq = q - C(1, 0) / q;
    const C dq2 = q * q - C(1, 0) / (q * q);
    const M id = M::Identity(pair.dim, pair.dim);
    const M sym = dq * (pair.A * pair.A_star + pair.A_star * pair.A);
    const M expect = rho * chi * uu *
                     ((sym + C(2, 0) * pair.sc.omega / dq * id) / rho +
                      C(2, 0) * (q * u * u + ui * ui / q) / dq2 * id);
    EXPECT_LT(qcore::rel_err(M(chi * chi * k.C + rho * k.B), expect), 1e-11);
    // B vanishes at the removable points
    for (C u0 : {C(1, 0), C(-1, 0), C(0, 1), C(0, -1)}) {
        auto k0 = kmatrix(pair, chi, u0);
        EXPECT_LT(k0.B.norm(), 1e-12);
    }
}

TEST(KMatrix, ReflectionEquation) {
    qcore::SpectralSampler<double> smp(7);
    std::mt19937_64 gen(11);
    for (int two_s : {1, 2, 3}) {
        auto m = hawtest::random_params(gen, two_s);
        auto pair = reps::euler_top_pair(m);
        const C chi = m.chi();
        auto kf = [&](const C &w) { return kmatrix(pair, chi, w); };
        for (int t = 0; t < 5; ++t) {
            C u = smp.draw(), v = smp.draw();
            EXPECT_LT(reflection_residual<double>(kf, m.q, u, v), 1e-10);
        }
    }
    // matrix-valued structure constants on the full triple space
    auto t3 = reps::triple_tensor_pair<double>(1, 1, 1, C(2, 0));
    const C chi3(1, 0);
    auto kf3 = [&](const C &w) { return kmatrix(t3, chi3, w); };
    for (int t = 0; t < 3; ++t) {
        C u = smp.draw(), v = smp.draw();
        EXPECT_LT(reflection_residual<double>(kf3, t3.q, u, v), 1e-10);
    }
}

TEST(KPlus, ClosedFormProperties) {
    Couplings<double> c{C(0.7, 0.1), C(1.2, -0.4), C(0, 0), C(0, 0), C(1, 0)};
    const C q(2, 0), rho(-3.5, 0.2);
    qcore::SpectralSampler<double> smp(13);
    C u = smp.draw();
    auto kp = kplus(c, rho, q, u);
    EXPECT_EQ(kp(0, 1), C(0, 0));
    EXPECT_EQ(kp(1, 0), C(0, 0));
    EXPECT_LT(std::abs(kp(0, 0) - (q * u * c.kappa + c.kappa_star / (q * u))),
              1e-14);
    // off-diagonals vanish at u^4 = q^-4 and have the stated ratio otherwise
    Couplings<double> cg{C(0.7, 0.1), C(1.2, -0.4), C(0.3, 0.2), C(-0.9, 0.4),
                         C(1, 0)};
    auto kp0 = kplus(cg, rho, q, C(1, 0) / q);
    EXPECT_LT(std::abs(kp0(0, 1)), 1e-14);
    EXPECT_LT(std::abs(kp0(1, 0)), 1e-14);
    auto kpg = kplus(cg, rho, q, u);
    EXPECT_LT(std::abs(kpg(1, 0) / kpg(0, 1) -
                       cg.kappa_minus * rho / cg.kappa_plus),
              1e-12);
}

TEST(Transfer, CommutingFamilyAndScalarRemainder) {
    auto m = hawtest::top_params(2);
    auto pair = reps::euler_top_pair(m);
    Couplings<double> c{C(1, 0), C(0.25, 0), C(0.1, 0.05), C(-0.2, 0.1),
                        m.chi()};
    qcore::SpectralSampler<double> smp(17);
    const M ih = heun_aw_operator(pair, c);
    for (int t = 0; t < 5; ++t) {
        C u = smp.draw(), v = smp.draw();
        M tu = transfer(pair, c, u), tv = transfer(pair, c, v);
        EXPECT_LT(qcore::comm(tu, tv).norm() /
                      std::max(1.0, tu.norm() * tv.norm()),
                  1e-9);
        EXPECT_LT(qcore::comm(tu, ih).norm() /
                      std::max(1.0, tu.norm() * ih.norm()),
                  1e-9);
        // t(u) - pref(u) I_HAW is a multiple of the identity
        const C ui = C(1, 0) / u, q = m.q;
        const C pref = (q * q * u * u - ui * ui / (q * q)) * (u * u - ui * ui);
        M rem = tu - pref * ih;
        M dev = rem - rem(0, 0) * M::Identity(pair.dim, pair.dim);
        EXPECT_LT(dev.norm() / std::max(1.0, tu.norm()), 1e-9);
    }
    // prefactor vanishes at u = 1: t(1) is scalar
    M t1 = transfer(pair, c, C(1, 0));
    M dev1 = t1 - t1(0, 0) * M::Identity(pair.dim, pair.dim);
    EXPECT_LT(dev1.norm() / std::max(1.0, t1.norm()), 1e-11);
}

// extract I_HAW from t(u) through the traceless part at several u
TEST(Transfer, PolynomialExtractionOracle) {
    auto m = hawtest::top_params(1);
    auto pair = reps::euler_top_pair(m);
    Couplings<double> c{C(0.4, 0.2), C(1.1, 0), C(0.15, 0), C(0.05, -0.1),
                        m.chi()};
    const M ih = heun_aw_operator(pair, c);
    const M ih_traceless =
        ih - ih.trace() / C(pair.dim, 0) * M::Identity(pair.dim, pair.dim);
    qcore::SpectralSampler<double> smp(19);
    for (int t = 0; t < 3; ++t) {
        C u = smp.draw();
        const C ui = C(1, 0) / u, q = m.q;
        const C pref = (q * q * u * u - ui * ui / (q * q)) * (u * u - ui * ui);
        M tu = transfer(pair, c, u);
        M g =
            tu - tu.trace() / C(pair.dim, 0) * M::Identity(pair.dim, pair.dim);
        EXPECT_LT(qcore::rel_err(M(g / pref), ih_traceless), 1e-9);
    }
}

TEST(Heun, Specialization) {
    auto m = hawtest::top_params(2);
    auto pair = reps::euler_top_pair(m);
    Couplings<double> c{C(1, 0), C(0, 0), C(0, 0), C(0, 0), m.chi()};
    EXPECT_LT((heun_aw_operator(pair, c) - pair.A).norm(), 1e-13);
}

// Table 5 diagonal row: j = 1/2 chain spectrum with degeneracies
TEST(Heun, Table5DiagonalSpectrum) {
    const C q(2, 0);
    auto t3 = reps::triple_tensor_pair<double>(1, 1, 1, q);
    const C chi = -C(0.5, 0) * q * (q * q - C(1, 0) / (q * q));
    Couplings<double> c{C(3, 0), C(1, 0), C(0, 0), C(0, 0), chi};
    M h = heun_aw_operator(t3, c);
    Eigen::ComplexEigenSolver<M> es(h);
    std::vector<double> vals;
    for (int i = 0; i < 8; ++i) {
        EXPECT_LT(std::abs(es.eigenvalues()(i).imag()), 1e-9);
        vals.push_back(es.eigenvalues()(i).real());
    }
    std::sort(vals.begin(), vals.end());
    // {14.4069 x2, 28.0931 x2, 32.5 x4}
    EXPECT_NEAR(vals[0], 14.4069, 1e-3);
    EXPECT_NEAR(vals[1], 14.4069, 1e-3);
    EXPECT_NEAR(vals[2], 28.0931, 1e-3);
    EXPECT_NEAR(vals[3], 28.0931, 1e-3);
    for (int i = 4; i < 8; ++i)
        EXPECT_NEAR(vals[i], 32.5, 1e-3);
}

TEST(QuantumDeterminant, CentralAndMatchesGamma) {
    auto m = hawtest::top_params(1);
    auto pair = reps::euler_top_pair(m);
    const C chi = m.chi(), q = m.q;
    auto kf = [&](const C &w) { return kmatrix(pair, chi, w); };
    const M gam = reps::casimir_gamma(pair);
    qcore::SpectralSampler<double> smp(23);
    for (int t = 0; t < 5; ++t) {
        C u = smp.draw();
        M g = quantum_determinant<double>(kf, q, u);
        auto k = kf(u);
        for (const M *e : {&k.A, &k.B, &k.C, &k.D})
            EXPECT_LT(qcore::comm(g, *e).norm() /
                          std::max(1.0, g.norm() * e->norm()),
                      1e-9);
        // Gamma(u) + (q^2u^2-q^-2u^-2)^2 (u^2-u^-2)/rho * Gamma = scalar
        const C ui = C(1, 0) / u;
        const C w2 = q * q * u * u - ui * ui / (q * q);
        const C pref = w2 * w2 * (u * u - ui * ui) / pair.sc.rho;
        M rem = g + pref * gam;
        M dev = rem - rem(0, 0) * M::Identity(pair.dim, pair.dim);
        EXPECT_LT(dev.norm() / std::max(1.0, g.norm()), 1e-9);
    }
}
