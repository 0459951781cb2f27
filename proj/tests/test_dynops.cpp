#include "test_util.hpp"

#include "haw/dynops.hpp"

#include <gtest/gtest.h>

using namespace haw;
using namespace haw::dynops;
using C = Cx<double>;
using M = Mat<double>;
using V = Vec<double>;

namespace {

GaugeConfig<double> random_gauge(std::mt19937_64 &gen, int eps) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    GaugeConfig<double> g;
    g.epsilon = eps;
    g.alpha = C(d(gen) + 1.5, d(gen));
    g.beta = C(d(gen) - 1.5, d(gen));
    g.m0 = 0;
    return g;
}

Couplings<double> table3_generic(const C &chi) {
    const double s3 = std::sqrt(3.0);
    return Couplings<double>{C(0, 10.0 * (1.0 + std::sqrt(5.0)) / s3),
                             C(0, 20.0 / s3), C(s3 / 2.0, 0), C(-1.5, 0), chi};
}

} // namespace

TEST(GaugeGamma, ClosedFormCases) {
    C q(2, 0);
    std::mt19937_64 gen(3);
    for (int eps : {+1, -1}) {
        GaugeConfig<double> g = random_gauge(gen, eps);
        g.beta = g.alpha;
        // gamma(1, m) = alpha (q^-m - q^m)
        for (int m : {-2, 0, 3})
            EXPECT_LT(std::abs(gauge_gamma(C(1, 0), m, g, q) -
                               g.alpha * (qcore::qpow(q, -m) -
                                          qcore::qpow(q, m))),
                      1e-13);
        // antisymmetry under u -> 1/u, m -> -m when alpha = beta
        C u(1.4, 0.3);
        EXPECT_LT(std::abs(gauge_gamma(C(1, 0) / u, -2, g, q) +
                           gauge_gamma(u, 2, g, q)),
                  1e-13);
    }
    GaugeConfig<double> g0;
    g0.epsilon = +1;
    g0.alpha = C(0.8, 0.1);
    g0.beta = C(0, 0);
    C u(1.3, -0.2);
    EXPECT_LT(std::abs(gauge_gamma(u, 5, g0, C(2, 0)) +
                       g0.alpha * qcore::qpow(C(2, 0), 5) / u),
              1e-13);
}

// closed forms in A, A* against the gauge-transformed K-matrix sandwich
TEST(DynOps, DualRouteEquality) {
    std::mt19937_64 gen(17);
    qcore::SpectralSampler<double> smp(19);
    for (int two_s : {1, 2}) {
        auto mp = hawtest::random_params(gen, two_s);
        auto pair = reps::euler_top_pair(mp);
        const C chi = mp.chi();
        for (int eps : {+1, -1}) {
            auto cfg = random_gauge(gen, eps);
            DynOps<double> ops(pair, cfg, chi);
            for (int t = 0; t < 10; ++t) {
                const C u = smp.draw();
                const int m = int(smp.uniform(-3, 4));
                EXPECT_LT(qcore::rel_err(ops.A_op(u, m), ops.sandwich('A', u, m)),
                          1e-10)
                    << "A eps=" << eps;
                EXPECT_LT(qcore::rel_err(ops.B_op(u, m), ops.sandwich('B', u, m)),
                          1e-10)
                    << "B eps=" << eps;
                EXPECT_LT(qcore::rel_err(ops.C_op(u, m), ops.sandwich('C', u, m)),
                          1e-10)
                    << "C eps=" << eps;
                EXPECT_LT(qcore::rel_err(ops.D_op(u, m), ops.sandwich('D', u, m)),
                          1e-10)
                    << "D eps=" << eps;
            }
        }
    }
}

// B and C are proportional to b(u^2) and vanish at u = 1, i; A and D keep a
// scalar part there, finite and identical between the two routes.
TEST(DynOps, RemovablePointsAtUnitU) {
    std::mt19937_64 gen(29);
    auto mp = hawtest::random_params(gen, 1);
    auto pair = reps::euler_top_pair(mp);
    auto cfg = random_gauge(gen, +1);
    DynOps<double> ops(pair, cfg, mp.chi());
    for (C u0 : {C(1, 0), C(0, 1)}) {
        EXPECT_LT(ops.B_op(u0, 2).norm(), 1e-11);
        EXPECT_LT(ops.C_op(u0, 2).norm(), 1e-11);
        EXPECT_LT(ops.sandwich('B', u0, 2).norm(), 1e-11);
        EXPECT_LT(ops.sandwich('C', u0, 2).norm(), 1e-11);
    }
    const M a1 = ops.A_op(C(1, 0), 2);
    EXPECT_TRUE(a1.allFinite());
    EXPECT_LT(qcore::rel_err(a1, ops.sandwich('A', C(1, 0), 2)), 1e-10);
    const M d1 = ops.D_op(C(1, 0), 2);
    EXPECT_TRUE(d1.allFinite());
    EXPECT_LT(qcore::rel_err(d1, ops.sandwich('D', C(1, 0), 2)), 1e-10);
}

TEST(ReferenceState, AnnihilationBothSigns) {
    auto mp = hawtest::table1_params(1);
    auto pair = reps::euler_top_pair(mp);
    auto sp = reps::leonard_spectra(pair);
    const C chi = mp.chi();
    qcore::SpectralSampler<double> smp(31);
    for (int eps : {+1, -1}) {
        auto cfg = gauge_case_sp(mp, eps, 2);
        cfg.beta = C(0.4, -0.3); // beta free for the C-annihilation
        DynOps<double> ops(pair, cfg, chi);
        V omega = reference_state(sp, eps);
        EXPECT_LT(reference_state_residual(ops, omega, smp), 1e-10);
        // check the reference state eigenvalue
        const C th0 = eps > 0 ? mp.theta_star(0) : mp.theta(0);
        const M op = eps > 0 ? pair.A_star : pair.A;
        EXPECT_LT((op * omega - th0 * omega).norm(), 1e-10 * op.norm());
    }
    // dual choice: B+ annihilates the reference state instead
    GaugeConfig<double> dual;
    dual.epsilon = +1;
    dual.m0 = 2;
    dual.alpha = C(0.9, 0.2);
    dual.beta = beta_plus_dual(mp, 2);
    DynOps<double> ops(pair, dual, chi);
    V omega = reference_state(sp, +1);
    const C u = smp.draw();
    const M b = ops.B_op(u, 2);
    EXPECT_LT((b * omega).norm() / std::max(1.0, b.norm()), 1e-10);
}

TEST(VacuumEigenvalues, MatrixActionMatchesClosedForm) {
    qcore::SpectralSampler<double> smp(37);
    for (int two_s : {1, 2}) {
        auto mp = hawtest::table1_params(two_s);
        auto pair = reps::euler_top_pair(mp);
        auto sp = reps::leonard_spectra(pair);
        for (int eps : {+1, -1}) {
            auto cfg = gauge_case_sp(mp, eps, 0);
            DynOps<double> ops(pair, cfg, mp.chi());
            V omega = reference_state(sp, eps);
            for (int t = 0; t < 5; ++t) {
                const C u = smp.draw();
                const C l1 = vacuum_lambda1(mp, eps, u);
                const C l2 = vacuum_lambda2(mp, eps, u);
                EXPECT_LT((ops.A_op(u, 0) * omega - l1 * omega).norm() /
                              std::max(1.0, std::abs(l1)),
                          1e-10)
                    << "eps=" << eps << " 2s=" << two_s;
                EXPECT_LT((ops.D_op(u, 0) * omega - l2 * omega).norm() /
                              std::max(1.0, std::abs(l2)),
                          1e-10)
                    << "eps=" << eps << " 2s=" << two_s;
            }
        }
    }
}

TEST(VacuumEigenvalues, FactorizedZeros) {
    auto mp = hawtest::top_params(2);
    // Lambda_2 vanishes at u = q^{s-1/2} / v
    const C u0 = mp.qp(C(mp.s() - 0.5, 0)) / mp.v;
    for (int eps : {+1, -1})
        EXPECT_LT(std::abs(vacuum_lambda2(mp, eps, u0)), 1e-11);
    // Lambda_1^+ vanishes at u^2 = -e^{mu + mu'}
    const C u1 = std::sqrt(-std::exp(mp.mu + mp.mu_p));
    EXPECT_LT(std::abs(vacuum_lambda1(mp, +1, u1)), 1e-11);
}

TEST(CommCoeffs, FactorZeroAndPoles) {
    std::mt19937_64 gen(41);
    auto cfg = random_gauge(gen, +1);
    const C q(2, 0), v(1.3, 0.4);
    // f(qv, v) = 0 through b(q v / u)|_{u = qv} = b(1) = 0
    auto c = comm_coeffs(q * v, v, 1, cfg, q);
    EXPECT_LT(std::abs(c.f), 1e-13);
}

TEST(CommCoeffs, CommutationRelationsAsMatrixIdentities) {
    std::mt19937_64 gen(43);
    qcore::SpectralSampler<double> smp(47);
    auto mp = hawtest::random_params(gen, 2);
    auto pair = reps::euler_top_pair(mp);
    const C chi = mp.chi();
    for (int eps : {+1, -1}) {
        auto cfg = random_gauge(gen, eps);
        DynOps<double> ops(pair, cfg, chi);
        for (int t = 0; t < 3; ++t) {
            const C u = smp.draw();
            const C v = smp.draw_avoiding({u}, mp.q);
            const int m = int(smp.uniform(-2, 3));
            auto cc = comm_coeffs(u, v, m, cfg, mp.q);
            // B(u,m+2) B(v,m) = B(v,m+2) B(u,m)
            EXPECT_LT(qcore::rel_err(M(ops.B_op(u, m + 2) * ops.B_op(v, m)),
                                     M(ops.B_op(v, m + 2) * ops.B_op(u, m))),
                      1e-9);
            // A(u,m+2) B(v,m)
            EXPECT_LT(
                qcore::sum_residual<double>(
                    {M(ops.A_op(u, m + 2) * ops.B_op(v, m)),
                     M(-cc.f * (ops.B_op(v, m) * ops.A_op(u, m))),
                     M(-cc.g * (ops.B_op(u, m) * ops.A_op(v, m))),
                     M(-cc.w * (ops.B_op(u, m) * ops.D_op(v, m)))}),
                1e-9)
                << "comAdBd eps=" << eps;
            // D(u,m+2) B(v,m)
            EXPECT_LT(
                qcore::sum_residual<double>(
                    {M(ops.D_op(u, m + 2) * ops.B_op(v, m)),
                     M(-cc.h * (ops.B_op(v, m) * ops.D_op(u, m))),
                     M(-cc.k * (ops.B_op(u, m) * ops.D_op(v, m))),
                     M(-cc.n * (ops.B_op(u, m) * ops.A_op(v, m)))}),
                1e-9)
                << "comDdBd eps=" << eps;
            // C(u,m+2) B(v,m)
            EXPECT_LT(
                qcore::sum_residual<double>(
                    {M(ops.C_op(u, m + 2) * ops.B_op(v, m)),
                     M(-(ops.B_op(v, m - 2) * ops.C_op(u, m))),
                     M(-cc.qc * (ops.A_op(v, m) * ops.D_op(u, m))),
                     M(-cc.r * (ops.A_op(u, m) * ops.D_op(v, m))),
                     M(-cc.sc_ * (ops.A_op(u, m) * ops.A_op(v, m))),
                     M(-cc.x * (ops.A_op(v, m) * ops.A_op(u, m))),
                     M(-cc.y * (ops.D_op(u, m) * ops.A_op(v, m))),
                     M(-cc.z * (ops.D_op(u, m) * ops.D_op(v, m)))}),
                1e-9)
                << "comcdBd eps=" << eps;
        }
    }
}

TEST(BString, EmptyAndExchange) {
    std::mt19937_64 gen(53);
    qcore::SpectralSampler<double> smp(59);
    auto mp = hawtest::random_params(gen, 2);
    auto pair = reps::euler_top_pair(mp);
    auto cfg = random_gauge(gen, +1);
    DynOps<double> ops(pair, cfg, mp.chi());
    EXPECT_LT((bstring(ops, {}, 0) - M::Identity(pair.dim, pair.dim)).norm(),
              1e-15);
    const C u1 = smp.draw(), u2 = smp.draw_avoiding({u1}, mp.q);
    M s12 = bstring(ops, {u1, u2}, 0);
    M s21 = bstring(ops, {u2, u1}, 0);
    EXPECT_LT(qcore::rel_err(s12, s21), 1e-10);
}

// multiple actions of A and D on B-strings applied to the reference state
TEST(BString, MultipleActions) {
    std::mt19937_64 gen(61);
    qcore::SpectralSampler<double> smp(67);
    auto mp = hawtest::table1_params(3);
    auto pair = reps::euler_top_pair(mp);
    auto sp = reps::leonard_spectra(pair);
    for (int eps : {+1, -1}) {
        auto cfg = gauge_case_sp(mp, eps, 0);
        DynOps<double> ops(pair, cfg, mp.chi());
        V omega = reference_state(sp, eps);
        for (int Mlen = 1; Mlen <= 3; ++Mlen) {
            std::vector<C> us;
            for (int i = 0; i < Mlen; ++i)
                us.push_back(smp.draw_avoiding(us, mp.q));
            const C u = smp.draw_avoiding(us, mp.q);
            const int m0 = 0;
            const int mtop = m0 + 2 * (Mlen - 1);

            std::vector<V> aterms;
            aterms.push_back(
                V(ops.A_op(u, m0 + 2 * Mlen) * (bstring(ops, us, m0) * omega)));
            C pf(1, 0);
            for (const auto &ui : us)
                pf *= comm_coeffs(u, ui, 0, cfg, mp.q).f;
            aterms.push_back(
                V(-pf * (bstring(ops, us, m0) * (ops.A_op(u, m0) * omega))));
            for (int i = 0; i < Mlen; ++i) {
                const C ui = us[size_t(i)];
                C ci = comm_coeffs(u, ui, mtop, cfg, mp.q).g;
                C di = comm_coeffs(u, ui, mtop, cfg, mp.q).w;
                for (int j = 0; j < Mlen; ++j) {
                    if (j == i)
                        continue;
                    ci *= comm_coeffs(ui, us[size_t(j)], 0, cfg, mp.q).f;
                    di *= comm_coeffs(ui, us[size_t(j)], 0, cfg, mp.q).h;
                }
                aterms.push_back(V(-ci * (bstring_sub(ops, us, m0, i, u) *
                                          (ops.A_op(ui, m0) * omega))));
                aterms.push_back(V(-di * (bstring_sub(ops, us, m0, i, u) *
                                          (ops.D_op(ui, m0) * omega))));
            }
            EXPECT_LT(qcore::sum_residual_vec<double>(aterms), 1e-9)
                << "AonSB eps=" << eps << " M=" << Mlen;

            std::vector<V> dterms;
            dterms.push_back(
                V(ops.D_op(u, m0 + 2 * Mlen) * (bstring(ops, us, m0) * omega)));
            C ph(1, 0);
            for (const auto &ui : us)
                ph *= comm_coeffs(u, ui, 0, cfg, mp.q).h;
            dterms.push_back(
                V(-ph * (bstring(ops, us, m0) * (ops.D_op(u, m0) * omega))));
            for (int i = 0; i < Mlen; ++i) {
                const C ui = us[size_t(i)];
                C ki = comm_coeffs(u, ui, mtop, cfg, mp.q).k;
                C ni = comm_coeffs(u, ui, mtop, cfg, mp.q).n;
                for (int j = 0; j < Mlen; ++j) {
                    if (j == i)
                        continue;
                    ki *= comm_coeffs(ui, us[size_t(j)], 0, cfg, mp.q).h;
                    ni *= comm_coeffs(ui, us[size_t(j)], 0, cfg, mp.q).f;
                }
                dterms.push_back(V(-ki * (bstring_sub(ops, us, m0, i, u) *
                                          (ops.D_op(ui, m0) * omega))));
                dterms.push_back(V(-ni * (bstring_sub(ops, us, m0, i, u) *
                                          (ops.A_op(ui, m0) * omega))));
            }
            EXPECT_LT(qcore::sum_residual_vec<double>(dterms), 1e-9)
                << "DonSB eps=" << eps << " M=" << Mlen;
        }
    }
}

TEST(Truncation, TopStateAnnihilated) {
    qcore::SpectralSampler<double> smp(71);
    auto mp = hawtest::table1_params(1);
    auto pair = reps::euler_top_pair(mp);
    const C u = smp.draw();
    EXPECT_LT(check_truncation(pair, mp.chi(), +1, 0, u), 1e-10);
    EXPECT_LT(check_truncation(pair, mp.chi(), -1, 0, u), 1e-10);
    // negative control: generic beta does not truncate
    auto sp = reps::leonard_spectra(pair);
    GaugeConfig<double> cfg;
    cfg.epsilon = +1;
    cfg.m0 = 0;
    cfg.alpha = alpha_plus(mp, 0);
    cfg.beta = C(0.37, 0.21);
    DynOps<double> ops(pair, cfg, mp.chi());
    const M b = ops.B_op(u, 2 * mp.two_s);
    V top = V(sp.eigvecs_star.col(mp.two_s));
    EXPECT_GT((b * top).norm() / std::max(1.0, b.norm()), 1e-3);
}

TEST(CasimirOnBetheStates, GammaEigenvalue) {
    std::mt19937_64 gen(73);
    qcore::SpectralSampler<double> smp(79);
    auto mp = hawtest::random_params(gen, 2);
    auto pair = reps::euler_top_pair(mp);
    auto sp = reps::leonard_spectra(pair);
    auto cfg = gauge_case_sp(mp, +1, 0);
    DynOps<double> ops(pair, cfg, mp.chi());
    V omega = reference_state(sp, +1);
    std::vector<C> us = {smp.draw(), smp.draw()};
    V psi = V(bstring(ops, us, 0) * omega);
    const M gam = reps::casimir_gamma(pair);
    const C g0 = reps::gamma0_closed(mp);
    EXPECT_LT((gam * psi - g0 * psi).norm() / (std::abs(g0) * psi.norm()),
              1e-9);
}

// Off-shell action of B on length-2s Bethe states, diagonal gauge
TEST(OffShell, DiagonalCase) {
    qcore::SpectralSampler<double> smp(83);
    for (int two_s : {1, 2}) {
        auto mp = hawtest::top_params(two_s);
        auto pair = reps::euler_top_pair(mp);
        auto sp = reps::leonard_spectra(pair);
        for (int eps : {+1, -1}) {
            auto cfg = gauge_case_d(mp, eps, 0);
            DynOps<double> ops(pair, cfg, mp.chi());
            V omega = reference_state(sp, eps);
            const C dd = delta_d(mp, eps);
            for (int t = 0; t < 3; ++t) {
                std::vector<C> us;
                for (int i = 0; i < two_s; ++i)
                    us.push_back(smp.draw_avoiding(us, mp.q));
                const C u = smp.draw_avoiding(us, mp.q);
                EXPECT_LT(offshell_residual(ops, us, u, omega, dd, C(1, 0)),
                          1e-9)
                    << "2s=" << two_s << " eps=" << eps;
            }
        }
    }
}

// Generic gauge (gaugedl): modified vacuum action with the B-correction term
TEST(ModifiedVacuumAction, ClosedFormCoefficient) {
    qcore::SpectralSampler<double> smp(89);
    auto mp = hawtest::top_params(1);
    auto pair = reps::euler_top_pair(mp);
    auto sp = reps::leonard_spectra(pair);
    const C chi = mp.chi();
    auto cpl = table3_generic(chi);
    auto ang = generic_angles(cpl, pair.sc.rho, mp.q);
    // round trip of the parametrization
    auto cpl2 = couplings_from_angles(ang, mp.q, chi);
    EXPECT_LT(std::abs(cpl2.kappa - cpl.kappa), 1e-10 * std::abs(cpl.kappa));
    EXPECT_LT(std::abs(cpl2.kappa_minus - cpl.kappa_minus), 1e-12);

    const int Mlen = mp.two_s, m0 = 0;
    for (int eps : {+1, -1}) {
        auto cfg = gauge_case_g(ang, mp.q, eps, m0, Mlen);
        DynOps<double> ops(pair, cfg, chi);
        V omega = reference_state(sp, eps);
        const C cM = c_eps_M(mp, ang, eps, Mlen);
        for (int t = 0; t < 3; ++t) {
            const C u = smp.draw();
            const C l1 = vacuum_lambda1(mp, eps, u);
            const C l2 = vacuum_lambda2(mp, eps, u);
            V bvec = V(ops.B_op(u, m0 - 2) * omega);
            EXPECT_LT(qcore::sum_residual_vec<double>(
                          {V(ops.A_op(u, m0) * omega), V(-l1 * omega),
                           V(-cM * bvec)}),
                      1e-9)
                << "actA eps=" << eps;
            const C q = mp.q, ui = C(1, 0) / u;
            const C ratio = (q * q * u * u - ui * ui / (q * q)) /
                            (q * u * u - ui * ui / q);
            EXPECT_LT(qcore::sum_residual_vec<double>(
                          {V(ops.D_op(u, m0) * omega), V(-l2 * omega),
                           V(ratio * cM * bvec)}),
                      1e-9)
                << "actD eps=" << eps;
            // least-squares fit of the B-coefficient as an oracle for (ceM)
            V lhs = V(ops.A_op(u, m0) * omega - l1 * omega);
            const C cfit = bvec.dot(lhs) / bvec.dot(bvec);
            EXPECT_LT(std::abs(cfit - cM), 1e-8 * std::max(1.0, std::abs(cM)));
        }
    }
}

// Generic off-shell relation (checked numerically, matching the paper's
// small-s verification)
TEST(OffShell, GenericCase) {
    qcore::SpectralSampler<double> smp(97);
    for (int two_s : {1, 2}) {
        auto mp = hawtest::top_params(two_s);
        auto pair = reps::euler_top_pair(mp);
        auto sp = reps::leonard_spectra(pair);
        const C chi = mp.chi();
        auto cpl = table3_generic(chi);
        auto ang = generic_angles(cpl, pair.sc.rho, mp.q);
        for (int eps : {+1, -1}) {
            auto cfg = gauge_case_g(ang, mp.q, eps, 0, two_s);
            DynOps<double> ops(pair, cfg, chi);
            V omega = reference_state(sp, eps);
            const C dg = delta_g(mp, ang, eps);
            const C dgt = delta_g_tilde(mp, ang, eps);
            for (int t = 0; t < 2; ++t) {
                std::vector<C> us;
                for (int i = 0; i < two_s; ++i)
                    us.push_back(smp.draw_avoiding(us, mp.q));
                const C u = smp.draw_avoiding(us, mp.q);
                EXPECT_LT(offshell_residual(ops, us, u, omega, dg, dgt, true),
                          1e-9)
                    << "2s=" << two_s << " eps=" << eps;
            }
        }
    }
}
