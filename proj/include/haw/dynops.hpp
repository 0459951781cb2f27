#pragma once

// Gauge-transformed ("dynamical") operators: the sandwich construction from
// the K-matrix, their closed forms in A and A*, vacuum eigenvalues,
// commutation-relation coefficients, B-operator strings, truncation and the
// off-shell B-action identities.

#include "haw/reflection.hpp"

#include <array>

namespace haw {
namespace dynops {

using qcore::bfun;
using qcore::eye;
using qcore::qcomm;
using qcore::qpow;
using reflection::Couplings;
using reps::AWPair;
using reps::LeonardSpectra;
using reps::ModelParams;

template <class R = double> struct GaugeConfig {
    int epsilon = +1; // +1 or -1
    Cx<R> alpha{0, 0}, beta{0, 0};
    int m0 = 0;
};

// gamma^eps(u, m) of the gauge transformation
template <class R>
Cx<R> gauge_gamma(const Cx<R> &u, int m, const GaugeConfig<R> &cfg,
                  const Cx<R> &q) {
    const Cx<R> qm = qpow(q, m);
    if (cfg.epsilon > 0)
        return cfg.beta / qm * u - cfg.alpha * qm / u;
    return cfg.alpha / qm * u - cfg.beta * qm / u;
}

// --- gauge fixings -------------------------------------------------------

// (q^2 - q^-2) chi^-1 alpha c* q^{m0} = 1  ->  C^+ annihilates |theta*_0>
template <class R>
Cx<R> alpha_plus(const ModelParams<R> &m, int m0) {
    const Cx<R> dq2 = m.q * m.q - Cx<R>(1) / (m.q * m.q);
    return m.chi() * m.qp(-m0) / (dq2 * m.c_star());
}

// resp. beta: B^+ annihilates |theta*_0>
template <class R>
Cx<R> beta_plus_dual(const ModelParams<R> &m, int m0) {
    const Cx<R> dq2 = m.q * m.q - Cx<R>(1) / (m.q * m.q);
    return m.chi() * m.qp(m0) / (dq2 * m.c_star());
}

// (q^2 - q^-2) chi^-1 alpha b q^{-m0} = -1  ->  C^- annihilates |theta_0>
template <class R>
Cx<R> alpha_minus(const ModelParams<R> &m, int m0) {
    const Cx<R> dq2 = m.q * m.q - Cx<R>(1) / (m.q * m.q);
    return -m.chi() * m.qp(m0) / (dq2 * m.b());
}

template <class R>
Cx<R> beta_minus_dual(const ModelParams<R> &m, int m0) {
    const Cx<R> dq2 = m.q * m.q - Cx<R>(1) / (m.q * m.q);
    return -m.chi() * m.qp(-m0) / (dq2 * m.b());
}

// truncation fixings: B^eps(u, m0 + 4s) annihilates the top eigenvector
template <class R>
Cx<R> beta_truncation(const ModelParams<R> &m, int m0, int epsilon) {
    const Cx<R> dq2 = m.q * m.q - Cx<R>(1) / (m.q * m.q);
    if (epsilon > 0)
        return m.chi() * m.qp(m0) / (dq2 * m.b_star());
    return -m.chi() * m.qp(-m0) / (dq2 * m.c());
}

template <class R>
GaugeConfig<R> gauge_case_sp(const ModelParams<R> &m, int epsilon, int m0) {
    GaugeConfig<R> g;
    g.epsilon = epsilon;
    g.m0 = m0;
    g.alpha = epsilon > 0 ? alpha_plus(m, m0) : alpha_minus(m, m0);
    g.beta = Cx<R>(0, 0);
    return g;
}

// diagonal case uses the same gauge (alpha fixed, beta = 0)
template <class R>
GaugeConfig<R> gauge_case_d(const ModelParams<R> &m, int epsilon, int m0) {
    return gauge_case_sp(m, epsilon, m0);
}

// --- generic-case parametrization ---------------------------------------

// kappa_+ = q^phi / 2, kappa_- = -q^phi' / 2,
// kappa = rho^{1/2} q^{(phi+phi')/2} cosh(xi), kappa* likewise with xi'.
template <class R = double> struct GenericAngles {
    Cx<R> xi, xi_p, phi, phi_p, sqrt_rho;
};

template <class R>
GenericAngles<R> generic_angles(const Couplings<R> &c, const Cx<R> &rho,
                                const Cx<R> &q) {
    GenericAngles<R> a;
    const Cx<R> lq = std::log(q);
    a.sqrt_rho = qcore::sqrt_det(rho);
    a.phi = std::log(Cx<R>(2) * c.kappa_plus) / lq;
    a.phi_p = std::log(-Cx<R>(2) * c.kappa_minus) / lq;
    const Cx<R> scale = a.sqrt_rho * qpow(q, (a.phi + a.phi_p) / Cx<R>(2));
    a.xi = std::acosh(c.kappa / scale);
    a.xi_p = std::acosh(c.kappa_star / scale);
    return a;
}

template <class R>
Couplings<R> couplings_from_angles(const GenericAngles<R> &a, const Cx<R> &q,
                                   const Cx<R> &chi) {
    Couplings<R> c;
    c.kappa_plus = qpow(q, a.phi) / Cx<R>(2);
    c.kappa_minus = -qpow(q, a.phi_p) / Cx<R>(2);
    const Cx<R> scale = a.sqrt_rho * qpow(q, (a.phi + a.phi_p) / Cx<R>(2));
    c.kappa = scale * std::cosh(a.xi);
    c.kappa_star = scale * std::cosh(a.xi_p);
    c.chi = chi;
    return c;
}

// gauge (alpha, beta) that removes the B and C terms from the transfer
// matrix at m = m0 + 2M
template <class R>
GaugeConfig<R> gauge_case_g(const GenericAngles<R> &a, const Cx<R> &q,
                            int epsilon, int m0, int M) {
    GaugeConfig<R> g;
    g.epsilon = epsilon;
    g.m0 = m0;
    const Cx<R> e(R(epsilon), 0);
    const Cx<R> half = Cx<R>(0.5);
    g.alpha = -e / a.sqrt_rho *
              qpow(q, (a.phi - a.phi_p) / Cx<R>(2) -
                          e * Cx<R>(R(1 + m0 + 2 * M), 0)) *
              std::exp(-a.xi * (Cx<R>(1) + e) * half +
                       a.xi_p * (Cx<R>(1) - e) * half);
    g.beta = -e / a.sqrt_rho *
             qpow(q, (a.phi - a.phi_p) / Cx<R>(2) -
                         e * Cx<R>(R(1 - m0 - 2 * M), 0)) *
             std::exp(a.xi * (Cx<R>(1) + e) * half -
                      a.xi_p * (Cx<R>(1) - e) * half);
    return g;
}

// --- dynamical operators -------------------------------------------------

template <class R>
std::array<Cx<R>, 5> a_coeffs_free(const reps::StructureConstants<R> &sc,
                                   const Cx<R> &q, const GaugeConfig<R> &cfg,
                                   const Cx<R> &chi, const Cx<R> &u, int m);
template <class R>
std::array<Cx<R>, 5> b_coeffs_free(const reps::StructureConstants<R> &sc,
                                   const Cx<R> &q, const GaugeConfig<R> &cfg,
                                   const Cx<R> &chi, const Cx<R> &u, int m);
template <class R>
std::array<Cx<R>, 5> c_coeffs_free(const reps::StructureConstants<R> &sc,
                                   const Cx<R> &q, const GaugeConfig<R> &cfg,
                                   const Cx<R> &chi, const Cx<R> &u, int m);
template <class R>
std::array<Cx<R>, 5> d_coeffs_free(const reps::StructureConstants<R> &sc,
                                   const Cx<R> &q, const GaugeConfig<R> &cfg,
                                   const Cx<R> &chi, const Cx<R> &u, int m);

// coefficients of {[A*,A]_q, [A,A*]_q, A, A*, I} in the closed form of the
// dynamical operator `which`
template <class R>
std::array<Cx<R>, 5> op_coeffs_free(char which,
                                    const reps::StructureConstants<R> &sc,
                                    const Cx<R> &q, const GaugeConfig<R> &cfg,
                                    const Cx<R> &chi, const Cx<R> &u, int m) {
    switch (which) {
    case 'A':
        return a_coeffs_free(sc, q, cfg, chi, u, m);
    case 'B':
        return b_coeffs_free(sc, q, cfg, chi, u, m);
    case 'C':
        return c_coeffs_free(sc, q, cfg, chi, u, m);
    default:
        return d_coeffs_free(sc, q, cfg, chi, u, m);
    }
}

template <class R>
std::array<Cx<R>, 5> a_coeffs_free(const reps::StructureConstants<R> &sc,
                                 const Cx<R> &q, const GaugeConfig<R> &cfg,
                                 const Cx<R> &chi, const Cx<R> &u, int m) {
        const Cx<R> al = cfg.alpha, be = cfg.beta;
        const auto &k = sc;
        const Cx<R> qm = qpow(q, m), q2 = q * q;
        const Cx<R> ui = Cx<R>(1) / u, u2 = u * u, u4 = u2 * u2;
        const Cx<R> bu2 = bfun(u2), bq2 = bfun(q2);
        const Cx<R> abr = al * be * q2 * k.rho - chi * chi;
        if (cfg.epsilon > 0) {
            // b(u^2) of the scalar bracket cancels against the prefactor
            const Cx<R> f0_bu2 =
                -(k.rho * qm * q2 * abr * (u4 * u2 * q2 - ui * ui) +
                  (q2 + Cx<R>(1)) * qm *
                      (al * k.eta_star * chi * qm * (q2 * q2 - Cx<R>(1)) -
                       q2 * k.omega * abr) -
                  (q2 + Cx<R>(1)) * q2 * u4 *
                      (be * k.eta_star * chi * (q2 * q2 - Cx<R>(1)) -
                       qm * k.omega * abr) +
                  (q2 - Cx<R>(1)) * u2 *
                      (k.eta * chi * (al * qm * qm - be * q2) *
                           (Cx<R>(1) + q2) * (Cx<R>(1) + q2) -
                       k.rho * qm * q2 * abr)) /
                (k.rho * q * q2 * u2 * chi * bq2);
            const Cx<R> pref = Cx<R>(1) / (u * (al * qm * qm - q2 * be));
            return {pref * bu2 * (chi * qm / k.rho),
                    pref * bu2 * (-al * be * qm * q2 / chi),
                    pref * bu2 * (be + al * qm * qm) * q,
                    pref * bu2 *
                        (-(al * qm * qm + be * q2 * q2 * u4) / (q * u2)),
                    pref * f0_bu2};
        }
        const Cx<R> f0_bu2 =
            (k.rho * qm * q2 * (q2 * u4 * u2 * u - ui) *
                 (q2 * chi * chi - al * be * k.rho) -
             (q2 - Cx<R>(1)) * u2 * u *
                 ((q2 + Cx<R>(1)) * (q2 + Cx<R>(1)) * k.eta_star * chi *
                      (al * q2 - be * qm * qm) +
                  k.rho * qm * q2 * (q2 * chi * chi - al * be * k.rho)) -
             (q2 + Cx<R>(1)) * q2 * u4 * u *
                 (k.omega * qm * (al * be * k.rho - q2 * chi * chi) +
                  al * (q2 * q2 - Cx<R>(1)) * k.eta * chi) +
             (q2 + Cx<R>(1)) * u * qm *
                 (be * (q2 * q2 - Cx<R>(1)) * k.eta * chi * qm +
                  k.omega * (al * be * q2 * k.rho - q2 * q2 * chi * chi))) /
            (k.rho * q * q2 * u2 * chi * bq2);
        const Cx<R> pref = Cx<R>(1) / (al * q2 - be * qm * qm);
        return {pref * bu2 * (u * chi * qm * q2 / k.rho),
                pref * bu2 * (-al * be * u * qm / chi),
                pref * bu2 * ((be * qm * qm + al * q2 * q2 * u4) / (q * u)),
                pref * bu2 * (-q * u * (al + be * qm * qm)),
                pref * f0_bu2};
}

template <class R>
std::array<Cx<R>, 5> b_coeffs_free(const reps::StructureConstants<R> &sc,
                                 const Cx<R> &q, const GaugeConfig<R> &cfg,
                                 const Cx<R> &chi, const Cx<R> &u, int m) {
        const Cx<R> al = cfg.alpha, be = cfg.beta;
        const auto &k = sc;
        const Cx<R> qm = qpow(q, m), q2 = q * q;
        const Cx<R> ui = Cx<R>(1) / u, u2 = u * u, u4 = u2 * u2;
        const Cx<R> bu2 = bfun(u2), bq2 = bfun(q2);
        if (cfg.epsilon > 0) {
            const Cx<R> bg =
                qpow(q, -m - 3) / (k.rho * chi * bq2) *
                ((q2 + Cx<R>(1)) * ui *
                     (k.omega * (chi * chi * qm * qm * q2 -
                                 be * be * q2 * k.rho) +
                      be * (q2 * q2 - Cx<R>(1)) * k.eta_star * chi * qm) -
                 q2 * k.rho * (q2 * u + ui * ui * ui) *
                     (be * be * k.rho - chi * chi * qm * qm));
            const Cx<R> pref = bu2 / (al * qm * qm * q2 - be);
            return {pref * (chi * qm / (k.rho * u)),
                    pref * (-be * be / (qm * u * chi)),
                    pref * be * (q2 + Cx<R>(1)) / (q * u),
                    pref * (-be * (Cx<R>(1) / (q * u2 * u) + q * u)),
                    pref * bg};
        }
        const Cx<R> bg =
            -qpow(q, -m - 4) / (k.rho * chi * bq2) *
            (k.rho * q2 * (q2 * u2 * u + ui) *
                 (be * be * k.rho * qm * qm - chi * chi) +
             (q2 + Cx<R>(1)) * u *
                 (k.omega * (be * be * k.rho * qm * qm * q2 -
                             q2 * chi * chi) +
                  be * (q2 * q2 - Cx<R>(1)) * k.eta * chi * qm));
        const Cx<R> pref = bu2 * qm * qm * q / (al / q2 - be * qm * qm);
        return {pref * (u * chi / (k.rho * q * qm)),
                pref * (-be * be * u * qm / (q * chi)),
                pref * be * (q2 * u4 + Cx<R>(1)) / (q2 * u),
                pref * (-be * (q2 + Cx<R>(1)) * u / q2), pref * bg};
}

template <class R>
std::array<Cx<R>, 5> c_coeffs_free(const reps::StructureConstants<R> &sc,
                                 const Cx<R> &q, const GaugeConfig<R> &cfg,
                                 const Cx<R> &chi, const Cx<R> &u, int m) {
        const Cx<R> al = cfg.alpha, be = cfg.beta;
        const auto &k = sc;
        const Cx<R> qm = qpow(q, m), q2 = q * q;
        const Cx<R> ui = Cx<R>(1) / u, u2 = u * u, u4 = u2 * u2;
        const Cx<R> bu2 = bfun(u2), bq2 = bfun(q2);
        if (cfg.epsilon > 0) {
            const Cx<R> ah =
                qpow(q, -m - 3) / (k.rho * chi * bq2) *
                (k.rho * q2 * (q2 * u + ui * ui * ui) *
                     (al * al * k.rho * qm * qm - chi * chi) +
                 (q2 + Cx<R>(1)) * ui *
                     (k.omega *
                          (al * al * k.rho * qm * qm * q2 - q2 * chi * chi) -
                      al * (q2 * q2 - Cx<R>(1)) * k.eta_star * chi * qm));
            const Cx<R> pref = bu2 / (al - be * q2 / (qm * qm));
            return {pref * (-chi / (qm * k.rho * u)),
                    pref * (al * al * qm / (u * chi)),
                    pref * (-al * (q2 + Cx<R>(1)) / (q * u)),
                    pref * al * (Cx<R>(1) / (q * u2 * u) + q * u), pref * ah};
        }
        const Cx<R> ah =
            qpow(q, -m) / (k.rho * chi * (q2 * q2 - Cx<R>(1))) *
            (k.rho * q2 * (q2 * u2 * u + ui) *
                 (al * al * k.rho - chi * chi * qm * qm) +
             (q2 + Cx<R>(1)) * u *
                 (k.omega * (al * al * q2 * k.rho - chi * chi * qm * qm * q2) +
                  al * (q2 * q2 - Cx<R>(1)) * k.eta * chi * qm));
        const Cx<R> pref = bu2 * q / (al * q2 - be * qm * qm);
        return {pref * (-u * chi * qm * q / k.rho),
                pref * (al * al * u * q / qm / chi),
                pref * (-al * (q2 * u4 + Cx<R>(1)) / u),
                pref * al * u * (q2 + Cx<R>(1)), pref * ah};
}

template <class R>
std::array<Cx<R>, 5> d_coeffs_free(const reps::StructureConstants<R> &sc,
                                 const Cx<R> &q, const GaugeConfig<R> &cfg,
                                 const Cx<R> &chi, const Cx<R> &u, int m) {
        const Cx<R> al = cfg.alpha, be = cfg.beta;
        const auto &k = sc;
        const Cx<R> qm = qpow(q, m), q2 = q * q;
        const Cx<R> ui = Cx<R>(1) / u, u2 = u * u, u4 = u2 * u2;
        const Cx<R> bu2 = bfun(u2), bq2 = bfun(q2), bq2u2 = bfun(q2 * u2);
        const Cx<R> bqu2 = bfun(q * u2);
        const Cx<R> abr = al * be * q2 * k.rho - chi * chi;
        if (cfg.epsilon > 0) {
            // b(q^2 u^2) of the scalar bracket cancels against the prefactor
            const Cx<R> f2_b =
                ((q2 - Cx<R>(1)) * u2 / chi *
                     (k.rho * qm * q2 * abr +
                      k.eta * chi *
                          (be * (q2 * q + q) * (q2 * q + q) -
                           al * (q2 + Cx<R>(1)) * (q2 + Cx<R>(1)) * qm * qm)) +
                 k.rho / chi * qm * (q2 * q2 * q2 * u4 * u2 - ui * ui) * abr +
                 (q2 + Cx<R>(1)) / chi *
                     (k.omega * qm * (-abr) +
                      be * (q2 * q2 - Cx<R>(1)) * k.eta_star * chi) -
                 (q2 + Cx<R>(1)) * u4 * qm * q2 / chi *
                     (al * (q2 * q2 - Cx<R>(1)) * k.eta_star * chi * qm +
                      q2 * k.omega * (-abr))) /
                (k.rho * q * q2 * u2 * bq2);
            const Cx<R> pref =
                bu2 / (u * bqu2 * (al * qm * qm - be * q2));
            return {pref * bq2u2 * (-chi * qm / k.rho),
                    pref * bq2u2 * (al * be * qm * q2 / chi),
                    pref * bq2u2 * (-q * (be + al * qm * qm)),
                    pref * bq2u2 * (q * (be + al * u4 * qm * qm) / u2),
                    pref * f2_b};
        }
        const Cx<R> f3_b =
            -((q2 - Cx<R>(1)) * u2 * u *
                  (k.rho * qm * q2 * (q2 * chi * chi - al * be * k.rho) +
                   k.eta_star * chi *
                       (al * (q2 * q + q) * (q2 * q + q) -
                        be * (q2 + Cx<R>(1)) * (q2 + Cx<R>(1)) * qm * qm)) +
              k.rho * qm * (q2 * q2 * q2 * u4 * u2 * u - ui) *
                  (q2 * chi * chi - al * be * k.rho) +
              (q2 + Cx<R>(1)) * u *
                  (k.omega * qm * (al * be * k.rho - q2 * chi * chi) +
                   al * (q2 * q2 - Cx<R>(1)) * k.eta * chi) -
              (q2 + Cx<R>(1)) * u4 * u * qm * q2 *
                  (be * (q2 * q2 - Cx<R>(1)) * k.eta * chi * qm +
                   k.omega * (al * be * q2 * k.rho - q2 * q2 * chi * chi))) /
            (k.rho * q * q2 * u2 * chi * bq2);
        const Cx<R> pref = bu2 / (bqu2 * (al * q2 - be * qm * qm));
        return {pref * bq2u2 * (-u * chi * qm * q2 / k.rho),
                pref * bq2u2 * (al * be * u * qm / chi),
                pref * bq2u2 * (-q * (al + be * u4 * qm * qm) / u),
                pref * bq2u2 * (q * u * (al + be * qm * qm)), pref * f3_b};
}


template <class R = double> class DynOps {
  public:
    DynOps(const AWPair<R> &pair, const GaugeConfig<R> &cfg, const Cx<R> &chi)
        : pair_(pair), cfg_(cfg), chi_(chi), q_(pair.q),
          cA_(qcomm(pair.A_star, pair.A, pair.q)),
          cB_(qcomm(pair.A, pair.A_star, pair.q)),
          id_(eye<R>(pair.dim)) {}

    const GaugeConfig<R> &cfg() const { return cfg_; }
    const AWPair<R> &pair() const { return pair_; }
    const Cx<R> &chi() const { return chi_; }

    Cx<R> gamma(const Cx<R> &u, int m) const {
        return gauge_gamma(u, m, cfg_, q_);
    }

    // coefficients of {[A*,A]_q, [A,A*]_q, A, A*, I} in the closed form of
    // the operator `which`; shared by the matrix route and the q-difference
    // realization
    std::array<Cx<R>, 5> op_coeffs(char which, const Cx<R> &u, int m) const {
        switch (which) {
        case 'A':
            return a_coeffs(u, m);
        case 'B':
            return b_coeffs(u, m);
        case 'C':
            return c_coeffs(u, m);
        default:
            return d_coeffs(u, m);
        }
    }

    Mat<R> assemble(const std::array<Cx<R>, 5> &c) const {
        return c[0] * cA_ + c[1] * cB_ + c[2] * pair_.A +
               c[3] * pair_.A_star + c[4] * id_;
    }

    // closed forms in A, A* (production route)
    Mat<R> A_op(const Cx<R> &u, int m) const { return assemble(a_coeffs(u, m)); }
    Mat<R> B_op(const Cx<R> &u, int m) const { return assemble(b_coeffs(u, m)); }
    Mat<R> C_op(const Cx<R> &u, int m) const { return assemble(c_coeffs(u, m)); }
    Mat<R> D_op(const Cx<R> &u, int m) const { return assemble(d_coeffs(u, m)); }

    std::array<Cx<R>, 5> a_coeffs(const Cx<R> &u, int m) const {
        return a_coeffs_free(pair_.sc, q_, cfg_, chi_, u, m);
    }

    // B with the overall beta multiplied through (regular at beta = 0)
    std::array<Cx<R>, 5> b_coeffs(const Cx<R> &u, int m) const {
        return b_coeffs_free(pair_.sc, q_, cfg_, chi_, u, m);
    }

    // C with the overall alpha multiplied through
    std::array<Cx<R>, 5> c_coeffs(const Cx<R> &u, int m) const {
        return c_coeffs_free(pair_.sc, q_, cfg_, chi_, u, m);
    }

    std::array<Cx<R>, 5> d_coeffs(const Cx<R> &u, int m) const {
        return d_coeffs_free(pair_.sc, q_, cfg_, chi_, u, m);
    }

    // sandwich (gauge-transformed K-matrix) route, the test oracle
    Mat<R> sandwich(char which, const Cx<R> &u, int m) const {
        const Cx<R> q = q_;
        const int e = cfg_.epsilon;
        const auto K = reflection::kmatrix(pair_, chi_, u);
        auto covX = [&](const Cx<R> &w, int mm) {
            return std::pair<Cx<R>, Cx<R>>(
                cfg_.alpha * qpow(q, e * mm) * qpow(w, e), Cx<R>(1));
        };
        auto covY = [&](const Cx<R> &w, int mm) {
            return std::pair<Cx<R>, Cx<R>>(
                cfg_.beta * qpow(q, -e * mm) * qpow(w, e), Cx<R>(1));
        };
        auto conX = [&](const Cx<R> &w, int mm) {
            const Cx<R> pref = -Cx<R>(R(e), 0) * qpow(q, -e) * qpow(w, -e) /
                               gamma(Cx<R>(1), mm - 1);
            return std::pair<Cx<R>, Cx<R>>(
                -pref, pref * cfg_.alpha * qpow(q, e * mm) * qpow(w, e));
        };
        auto conY = [&](const Cx<R> &w, int mm) {
            const Cx<R> pref = -Cx<R>(R(e), 0) * qpow(q, -e) * qpow(w, -e) /
                               gamma(Cx<R>(1), mm + 1);
            return std::pair<Cx<R>, Cx<R>>(
                pref, -pref * cfg_.beta * qpow(q, -e * mm) * qpow(w, e));
        };
        auto sand = [&](const std::pair<Cx<R>, Cx<R>> &l,
                        const std::pair<Cx<R>, Cx<R>> &r) {
            return Mat<R>(l.first * (K.A * r.first + K.B * r.second) +
                          l.second * (K.C * r.first + K.D * r.second));
        };
        const Cx<R> ui = Cx<R>(1) / u;
        switch (which) {
        case 'A':
            return sand(conY(u, m - 2), covX(ui, m));
        case 'B':
            return sand(conY(u, m), covY(ui, m));
        case 'C':
            return sand(conX(u, m), covX(ui, m));
        default: {
            const Mat<R> first = sand(conX(u, m + 2), covY(ui, m));
            const Cx<R> corr = (q - Cx<R>(1) / q) * gamma(ui * ui, m + 1) /
                               ((q * u * u - Cx<R>(1) / (q * u * u)) *
                                gamma(Cx<R>(1), m));
            return Mat<R>(gamma(Cx<R>(1), m + 1) / gamma(Cx<R>(1), m) * first -
                          corr * sandwich('A', u, m));
        }
        }
    }

  private:
    AWPair<R> pair_;
    GaugeConfig<R> cfg_;
    Cx<R> chi_, q_;
    Mat<R> cA_, cB_, id_;
};

// --- vacuum eigenvalues (factorized closed forms) ------------------------

template <class R>
Cx<R> vacuum_lambda1(const ModelParams<R> &m, int eps, const Cx<R> &u) {
    const Cx<R> e(R(eps), 0), one(1, 0), half(0.5, 0);
    const Cx<R> ui = one / u;
    const Cx<R> pref = half * qpow(u, -e) *
                       std::exp(e * (m.mu - m.mu_p) * half -
                                (m.mu + m.mu_p) * half) *
                       m.qp((m.nu + m.nu_p) / Cx<R>(2) -
                            Cx<R>(R(m.two_s + 1), 0));
    return pref * (m.qp(m.two_s + 1) * u / m.v - ui * m.v) *
           (m.qp(m.two_s + 1) * u * m.v - ui / m.v) *
           (u * std::exp((one - e) * (m.mu - m.mu_p) * half) +
            ui * std::exp((e + one) * (m.mu_p + m.mu) * half)) *
           (u * std::exp((one - e) * (m.mu_p + m.mu) * half) +
            ui * std::exp((e + one) * (m.mu_p - m.mu) * half));
}

template <class R>
Cx<R> vacuum_lambda2(const ModelParams<R> &m, int eps, const Cx<R> &u) {
    const Cx<R> e(R(eps), 0), one(1, 0), half(0.5, 0);
    const Cx<R> q = m.q, ui = one / u;
    const Cx<R> pref = (u * u - ui * ui) /
                       (Cx<R>(2) * qpow(u, e) *
                        (q * u * u - one / (q * u * u))) *
                       std::exp(e * (m.mu - m.mu_p) * half -
                                (m.mu + m.mu_p) * half) *
                       m.qp((m.nu + m.nu_p) / Cx<R>(2) -
                            Cx<R>(R(m.two_s + 1), 0));
    return pref * (m.qp(m.two_s - 1) * ui * m.v - u / m.v) *
           (m.qp(m.two_s - 1) * ui / m.v - u * m.v) *
           (q * q * u * std::exp((e + one) * (m.mu_p - m.mu) * half) +
            ui * std::exp((one - e) * (m.mu_p + m.mu) * half)) *
           (q * q * u * std::exp((e + one) * (m.mu_p + m.mu) * half) +
            ui * std::exp((one - e) * (m.mu - m.mu_p) * half));
}

// --- commutation coefficients (all twelve) -------------------------------

template <class R = double> struct CommCoeffs {
    Cx<R> f, g, h, k, n, w, qc, r, sc_, x, y, z;
};

template <class R>
CommCoeffs<R> comm_coeffs(const Cx<R> &u, const Cx<R> &v, int m,
                          const GaugeConfig<R> &cfg, const Cx<R> &q) {
    auto gam = [&](const Cx<R> &w, int mm) {
        return gauge_gamma(w, mm, cfg, q);
    };
    const Cx<R> one(1, 0);
    const Cx<R> bq = bfun(q);
    CommCoeffs<R> c;
    c.f = bfun(q * v / u) * bfun(u * v) / (bfun(v / u) * bfun(q * u * v));
    c.h = bfun(q * q * u * v) * bfun(q * u / v) /
          (bfun(q * u * v) * bfun(u / v));
    c.g = gam(u / v, m + 1) / gam(one, m + 1) * bq * bfun(v * v) /
          (bfun(q * v * v) * bfun(u / v));
    c.w = -gam(u * v, m) / gam(one, m + 1) * bq / bfun(q * u * v);
    c.k = gam(v / u, m + 1) / gam(one, m + 1) * bq * bfun(q * q * u * u) /
          (bfun(q * u * u) * bfun(v / u));
    c.n = gam(one / (u * v), m + 2) / gam(one, m + 1) * bq * bfun(v * v) *
          bfun(q * q * u * u) /
          (bfun(q * u * u) * bfun(q * v * v) * bfun(q * u * v));
    c.qc = gam(u / v, m) * bq * bfun(u * v) /
           (gam(one, m + 1) * bfun(u / v) * bfun(q * u * v));
    c.r = bq * bfun(u * u) * gam(one, m) * gam(v / u, m + 1) /
          (gam(one, m + 1) * gam(one, m + 1) * bfun(q * u * u) * bfun(v / u));
    c.sc_ = bq * bq * bfun(u * u) * gam(one / (v * v), m + 1) *
            gam(v / u, m + 1) /
            (gam(one, m + 1) * gam(one, m + 1) * bfun(q * u * u) *
             bfun(q * v * v) * bfun(v / u));
    c.x = bq * bfun(u * u) * bfun(q * u / v) * gam(one / (u * v), m + 1) /
          (gam(one, m + 1) * bfun(q * u * u) * bfun(u / v) * bfun(q * u * v));
    c.y = -bq * bq * gam(one / (v * v), m + 1) * gam(u * v, m) /
          (gam(one, m + 1) * gam(one, m + 1) * bfun(q * v * v) *
           bfun(q * u * v));
    c.z = -bq * gam(one, m) * gam(u * v, m) /
          (gam(one, m + 1) * gam(one, m + 1) * bfun(q * u * v));
    return c;
}

// --- B strings ------------------------------------------------------------

// B^eps(u_1, m0 + 2(M-1)) ... B^eps(u_M, m0)
template <class R>
Mat<R> bstring(const DynOps<R> &ops, const std::vector<Cx<R>> &us, int m0) {
    const int M = static_cast<int>(us.size());
    Mat<R> out = eye<R>(ops.pair().dim);
    for (int i = 0; i < M; ++i)
        out = out * ops.B_op(us[static_cast<size_t>(i)], m0 + 2 * (M - 1 - i));
    return out;
}

// string with u substituted in slot i (paper's B({u, bar u_i}))
template <class R>
Mat<R> bstring_sub(const DynOps<R> &ops, const std::vector<Cx<R>> &us, int m0,
                   int slot, const Cx<R> &u) {
    std::vector<Cx<R>> mod = us;
    mod[static_cast<size_t>(slot)] = u;
    return bstring(ops, mod, m0);
}

// --- reference states -----------------------------------------------------

// |Omega^+> = |theta*_0> (eps = +1), |Omega^-> = |theta_0> (eps = -1)
template <class R>
Vec<R> reference_state(const LeonardSpectra<R> &sp, int epsilon) {
    return epsilon > 0 ? Vec<R>(sp.eigvecs_star.col(0))
                       : Vec<R>(sp.eigvecs.col(0));
}

// residual of C^eps(u, m0) |Omega^eps> = 0 over a few spectral points
template <class R>
R reference_state_residual(const DynOps<R> &ops, const Vec<R> &omega,
                           qcore::SpectralSampler<R> &smp, int npts = 5) {
    R worst = 0;
    for (int t = 0; t < npts; ++t) {
        const Cx<R> u = smp.draw();
        const Mat<R> c = ops.C_op(u, ops.cfg().m0);
        worst = std::max(worst, (c * omega).norm() /
                                    std::max<R>(R(1), c.norm()));
    }
    return worst;
}

// --- truncation and off-shell identities ----------------------------------

// || B^eps(u, m0+4s) |top> || with beta fixed by the truncation condition
template <class R>
R check_truncation(const AWPair<R> &pair, const Cx<R> &chi, int epsilon,
                   int m0, const Cx<R> &u) {
    if (!pair.params)
        throw std::invalid_argument("check_truncation: model params required");
    const auto &m = *pair.params;
    GaugeConfig<R> cfg;
    cfg.epsilon = epsilon;
    cfg.m0 = m0;
    cfg.alpha = epsilon > 0 ? alpha_plus(m, m0) : alpha_minus(m, m0);
    cfg.beta = beta_truncation(m, m0, epsilon);
    DynOps<R> ops(pair, cfg, chi);
    const auto sp = reps::leonard_spectra(pair);
    const Vec<R> top = epsilon > 0 ? Vec<R>(sp.eigvecs_star.col(m.two_s))
                                   : Vec<R>(sp.eigvecs.col(m.two_s));
    const Mat<R> b = ops.B_op(u, m0 + 2 * m.two_s); // m0 + 4s
    return (b * top).norm() / std::max<R>(R(1), b.norm());
}

// delta_d of the diagonal off-shell relation
template <class R>
Cx<R> delta_d(const ModelParams<R> &m, int eps) {
    const Cx<R> e(R(eps), 0), half(0.5, 0), one(1, 0);
    const R sign = (m.two_s + 1) % 2 == 0 ? R(1) : R(-1);
    return -e * Cx<R>(sign, 0) * half *
           std::exp(-m.mu * (one - e) * half - m.mu_p * (one + e) * half) *
           m.qp((m.nu + m.nu_p) / Cx<R>(2) - e * Cx<R>(R(m.two_s + 2), 0));
}

// delta_g / tilde-delta_g of the generic off-shell relation
template <class R>
Cx<R> delta_g(const ModelParams<R> &m, const GenericAngles<R> &a, int eps) {
    const Cx<R> e(R(eps), 0), half(0.5, 0), one(1, 0);
    const R sign = m.two_s % 2 == 0 ? R(1) : R(-1);
    const Cx<R> qhp = m.qp(a.phi / Cx<R>(2));
    const Cx<R> base = (a.phi_p + m.nu - m.nu_p) / Cx<R>(2);
    const Cx<R> f1 =
        qhp - std::exp((m.mu - a.xi_p) * (one - e) * half -
                       (m.mu_p + a.xi) * (one + e) * half) *
                  m.qp(base - Cx<R>(R(m.two_s + 1), 0)) * a.sqrt_rho;
    const Cx<R> f2 =
        qhp - std::exp(-(m.mu - a.xi_p) * (one - e) * half +
                       (m.mu_p + a.xi) * (one + e) * half) *
                  m.qp(base + Cx<R>(R(m.two_s + 1), 0)) * a.sqrt_rho;
    return Cx<R>(sign, 0) * m.qp(m.nu_p) / Cx<R>(4) * f1 * f2;
}

template <class R>
Cx<R> delta_g_tilde(const ModelParams<R> &m, const GenericAngles<R> &a,
                    int eps) {
    const Cx<R> e(R(eps), 0), half(0.5, 0), one(1, 0);
    const Cx<R> qhp = m.qp(a.phi / Cx<R>(2));
    const Cx<R> base = (a.phi_p + m.nu - m.nu_p) / Cx<R>(2);
    const int fourS1 = 2 * m.two_s + 1; // 4s + 1
    const Cx<R> lead =
        std::exp(-Cx<R>(3) * a.xi * (one + e) * half +
                 a.xi_p * (one - e) * half) *
        m.qp((a.phi + a.phi_p) / Cx<R>(2) -
             (one + Cx<R>(2) * e) * Cx<R>(R(fourS1), 0)) *
        (one - std::exp(a.xi_p * (one - e) + a.xi * (one + e)) *
                   m.qp(2 * fourS1));
    const Cx<R> num =
        qhp - std::exp((m.mu - a.xi_p) * (one - e) * half +
                       (m.mu_p + a.xi) * (one + e) * half) *
                  m.qp(base + e * Cx<R>(R(m.two_s + 1), 0)) * a.sqrt_rho;
    const Cx<R> den =
        qhp - std::exp((m.mu + a.xi_p) * (one - e) * half +
                       (m.mu_p - a.xi) * (one + e) * half) *
                  m.qp(base - e * Cx<R>(R(3 * m.two_s + 1), 0)) * a.sqrt_rho;
    return lead * num * a.sqrt_rho / (Cx<R>(2) * den);
}

// product over k of b(q^{1/2+k-s} v u) b(q^{1/2+k-s} u / v)
template <class R>
Cx<R> boundary_product(const ModelParams<R> &m, const Cx<R> &u) {
    Cx<R> p(1, 0);
    const R s = m.s();
    for (int k = 0; k <= m.two_s; ++k) {
        const Cx<R> qk = m.qp(Cx<R>(R(0.5) + R(k) - s, 0));
        p *= bfun(qk * m.v * u) * bfun(qk * u / m.v);
    }
    return p;
}

// Off-shell action of an extra B factor on a length-2s Bethe state: returns
// the relative deviation from the stated right-hand side. `tilde` scales the
// left side; pass 1 for the diagonal case. In the diagonal gauge (beta = 0)
// the extra factor attaches at the top label m0 + 4s; in the generic gauge
// the identity closes with the factor attached at the bottom label m0 - 2
// (the form produced by the modified vacuum action), so `append_bottom`
// selects that variant.
template <class R>
R offshell_residual(const DynOps<R> &ops, const std::vector<Cx<R>> &us,
                    const Cx<R> &u, const Vec<R> &omega, const Cx<R> &delta,
                    const Cx<R> &tilde, bool append_bottom = false) {
    const auto &m = *ops.pair().params;
    const int eps = ops.cfg().epsilon, m0 = ops.cfg().m0;
    const int M = static_cast<int>(us.size());
    const Cx<R> q = m.q;

    const Vec<R> psi = Vec<R>(bstring(ops, us, m0) * omega);
    const Vec<R> lhs =
        append_bottom
            ? tilde * Vec<R>(bstring(ops, us, m0) *
                             (ops.B_op(u, m0 - 2) * omega))
            : tilde * Vec<R>(ops.B_op(u, m0 + 2 * m.two_s) * psi); // m0 + 4s

    auto coeff = [&](const Cx<R> &w) {
        return qpow(w, -eps) * bfun(w * w) * boundary_product(m, w);
    };
    Cx<R> diag = coeff(u);
    for (const auto &ui : us)
        diag /= bfun(u / ui) * bfun(Cx<R>(1) / (q * u * ui));
    Vec<R> rhs = delta * diag * psi;
    for (int i = 0; i < M; ++i) {
        Cx<R> ci = coeff(us[static_cast<size_t>(i)]);
        ci /= bfun(u / us[static_cast<size_t>(i)]) *
              bfun(Cx<R>(1) / (q * u * us[static_cast<size_t>(i)]));
        for (int j = 0; j < M; ++j) {
            if (j == i)
                continue;
            ci /= bfun(us[static_cast<size_t>(i)] / us[static_cast<size_t>(j)]) *
                  bfun(Cx<R>(1) / (q * us[static_cast<size_t>(i)] *
                                   us[static_cast<size_t>(j)]));
        }
        rhs -= delta * ci *
               Vec<R>(bstring_sub(ops, us, m0, i, u) * omega);
    }
    return qcore::sum_residual_vec<R>({lhs, Vec<R>(-rhs)});
}

// --- modified vacuum action (generic gauge) --------------------------------

template <class R>
Cx<R> c_eps_M(const ModelParams<R> &m, const GenericAngles<R> &a, int eps,
              int M) {
    const Cx<R> e(R(eps), 0), half(0.5, 0), one(1, 0);
    const Cx<R> qhp = m.qp(a.phi / Cx<R>(2));
    const Cx<R> base = (a.phi_p + m.nu - m.nu_p) / Cx<R>(2);
    const Cx<R> lead = std::exp(-a.xi * (one + e) + a.xi_p * (one - e)) *
                       m.qp(-Cx<R>(2) * e * Cx<R>(R(2 * M + 1), 0));
    const Cx<R> num =
        qhp - std::exp((m.mu_p + a.xi) * (one + e) * half +
                       (m.mu - a.xi_p) * (one - e) * half) *
                  m.qp(base + e * Cx<R>(R(2 * M - m.two_s + 1), 0)) *
                  a.sqrt_rho;
    const Cx<R> den =
        qhp - std::exp((m.mu_p - a.xi) * (one + e) * half +
                       (m.mu + a.xi_p) * (one - e) * half) *
                  m.qp(base - e * Cx<R>(R(2 * M + m.two_s + 1), 0)) *
                  a.sqrt_rho;
    return lead * num / den;
}

} // namespace dynops
} // namespace haw
