#pragma once

// R-matrix, operator-valued K-matrix, scalar dual K^+, reflection-equation
// machinery, transfer matrix and the Heun-Askey-Wilson operator it generates.

#include "haw/reps.hpp"

namespace haw {
namespace reflection {

using qcore::bfun;
using qcore::eye;
using qcore::kron;
using qcore::qcomm;
using reps::AWPair;
using reps::StructureConstants;
using reps::TriplePair;

template <class R = double> struct Couplings {
    Cx<R> kappa, kappa_star, kappa_plus, kappa_minus, chi;

    void validate() const {
        if (chi == Cx<R>(0, 0))
            throw std::invalid_argument("Couplings: chi must be nonzero");
    }
};

// U_q(sl2-hat) R-matrix.
template <class R> Mat<R> rmatrix(const Cx<R> &u, const Cx<R> &q) {
    if (u == Cx<R>(0, 0))
        throw std::invalid_argument("rmatrix: u = 0");
    Mat<R> r = Mat<R>::Zero(4, 4);
    const Cx<R> ui = Cx<R>(1) / u, qi = Cx<R>(1) / q;
    r(0, 0) = u * q - ui * qi;
    r(3, 3) = r(0, 0);
    r(1, 1) = u - ui;
    r(2, 2) = u - ui;
    r(1, 2) = q - qi;
    r(2, 1) = q - qi;
    return r;
}

// Yang-Baxter residual on C^2 x C^2 x C^2.
template <class R>
R yang_baxter_residual(const Cx<R> &u, const Cx<R> &v, const Cx<R> &q) {
    const Mat<R> i2 = eye<R>(2);
    auto r12 = [&](const Cx<R> &w) { return kron(rmatrix(w, q), i2); };
    auto r23 = [&](const Cx<R> &w) { return kron(i2, rmatrix(w, q)); };
    auto r13 = [&](const Cx<R> &w) {
        // permute middle factor: R13 = P23 R12 P23
        Mat<R> p = Mat<R>::Zero(8, 8);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    p(4 * a + 2 * c + b, 4 * a + 2 * b + c) = Cx<R>(1);
        return Mat<R>(p * r12(w) * p);
    };
    const Mat<R> lhs = r12(u / v) * r13(u) * r23(v);
    const Mat<R> rhs = r23(v) * r13(u) * r12(u / v);
    return qcore::rel_err(lhs, rhs);
}

// 2x2 matrix with operator entries.
template <class R = double> struct KEntries {
    Mat<R> A, B, C, D;
    Eigen::Index dim() const { return A.rows(); }
    const Mat<R> &at(int i, int j) const {
        return i == 0 ? (j == 0 ? A : B) : (j == 0 ? C : D);
    }
};

namespace detail {

template <class R>
KEntries<R> kmatrix_impl(const Mat<R> &A, const Mat<R> &As, const Cx<R> &q,
                         const Cx<R> &rho, const Mat<R> &omega,
                         const Mat<R> &eta, const Mat<R> &eta_star,
                         const Cx<R> &chi, const Cx<R> &u) {
    const Eigen::Index n = A.rows();
    const Mat<R> id = eye<R>(n);
    const Cx<R> ui = Cx<R>(1) / u, qi = Cx<R>(1) / q;
    const Cx<R> uu = u * u - ui * ui;
    const Cx<R> qq = q + qi, dq = q - qi, dq2 = q * q - qi * qi;
    const Cx<R> quad = q * u * u + qi * ui * ui;
    KEntries<R> k;
    k.A = uu * (q * u * A - qi * ui * As) -
          (qq / rho) * Mat<R>(eta * u + eta_star * ui);
    k.D = uu * (q * u * As - qi * ui * A) -
          (qq / rho) * Mat<R>(eta_star * u + eta * ui);
    k.B = chi * uu *
          ((qcomm(As, A, q) + omega / dq) / rho + (quad / dq2) * id);
    k.C = (rho / chi) * uu *
          ((qcomm(A, As, q) + omega / dq) / rho + (quad / dq2) * id);
    return k;
}

} // namespace detail

template <class R>
KEntries<R> kmatrix(const AWPair<R> &pair, const Cx<R> &chi, const Cx<R> &u) {
    const Mat<R> id = eye<R>(pair.dim);
    return detail::kmatrix_impl(pair.A, pair.A_star, pair.q, pair.sc.rho,
                                Mat<R>(pair.sc.omega * id),
                                Mat<R>(pair.sc.eta * id),
                                Mat<R>(pair.sc.eta_star * id), chi, u);
}

template <class R>
KEntries<R> kmatrix(const TriplePair<R> &t, const Cx<R> &chi, const Cx<R> &u) {
    return detail::kmatrix_impl(t.A, t.A_star, t.q, t.rho, t.omega, t.eta,
                                t.eta_star, chi, u);
}

// Scalar dual reflection matrix K^+(u).
template <class R>
Mat<R> kplus(const Couplings<R> &c, const Cx<R> &rho, const Cx<R> &q,
             const Cx<R> &u) {
    const Cx<R> ui = Cx<R>(1) / u, qi = Cx<R>(1) / q;
    const Cx<R> w = q * q * u * u - qi * qi * ui * ui;
    Mat<R> k(2, 2);
    k(0, 0) = q * u * c.kappa + qi * ui * c.kappa_star;
    k(0, 1) = c.kappa_plus * w;
    k(1, 0) = c.kappa_minus * rho * w;
    k(1, 1) = q * u * c.kappa_star + qi * ui * c.kappa;
    return k;
}

// Embeddings of the K-matrix into aux1 x aux2 x V.
template <class R> Mat<R> on_aux1(const KEntries<R> &k) {
    const Eigen::Index d = k.dim();
    const Mat<R> i2 = eye<R>(2);
    Mat<R> out = Mat<R>::Zero(4 * d, 4 * d);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Mat<R> e = Mat<R>::Zero(2, 2);
            e(a, b) = Cx<R>(1);
            out += kron(e, kron(i2, k.at(a, b)));
        }
    return out;
}

template <class R> Mat<R> on_aux2(const KEntries<R> &k) {
    const Eigen::Index d = k.dim();
    const Mat<R> i2 = eye<R>(2);
    Mat<R> out = Mat<R>::Zero(4 * d, 4 * d);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Mat<R> e = Mat<R>::Zero(2, 2);
            e(a, b) = Cx<R>(1);
            out += kron(i2, kron(e, k.at(a, b)));
        }
    return out;
}

// Residual of the reflection equation at spectral points (u, v).
template <class R, class KBuilder>
R reflection_residual(KBuilder &&kfun, const Cx<R> &q, const Cx<R> &u,
                      const Cx<R> &v) {
    const KEntries<R> ku = kfun(u);
    const KEntries<R> kv = kfun(v);
    const Eigen::Index d = ku.dim();
    const Mat<R> id = eye<R>(d);
    const Mat<R> ruv = kron(rmatrix(u / v, q), id);
    const Mat<R> ruv2 = kron(rmatrix(u * v, q), id);
    const Mat<R> k1 = on_aux1(ku), k2 = on_aux2(kv);
    const Mat<R> lhs = ruv * k1 * ruv2 * k2;
    const Mat<R> rhs = k2 * ruv2 * k1 * ruv;
    return qcore::rel_err(lhs, rhs);
}

// t(u) = tr_aux K^+(u) K(u)
template <class R>
Mat<R> transfer_from_entries(const KEntries<R> &k, const Mat<R> &kp) {
    return kp(0, 0) * k.A + kp(0, 1) * k.C + kp(1, 0) * k.B + kp(1, 1) * k.D;
}

template <class R>
Mat<R> transfer(const AWPair<R> &pair, const Couplings<R> &c, const Cx<R> &u) {
    c.validate();
    const KEntries<R> k = kmatrix(pair, c.chi, u);
    return transfer_from_entries(k, kplus(c, pair.sc.rho, pair.q, u));
}

template <class R>
Mat<R> transfer(const TriplePair<R> &t, const Couplings<R> &c, const Cx<R> &u) {
    c.validate();
    const KEntries<R> k = kmatrix(t, c.chi, u);
    return transfer_from_entries(k, kplus(c, t.rho, t.q, u));
}

// kappa A + kappa* A* + kappa_+ chi^-1 [A,A*]_q + kappa_- chi [A*,A]_q
template <class R>
Mat<R> heun_aw_operator(const Mat<R> &A, const Mat<R> &As, const Cx<R> &q,
                        const Couplings<R> &c) {
    c.validate();
    return c.kappa * A + c.kappa_star * As +
           (c.kappa_plus / c.chi) * qcomm(A, As, q) +
           (c.kappa_minus * c.chi) * qcomm(As, A, q);
}

template <class R>
Mat<R> heun_aw_operator(const AWPair<R> &pair, const Couplings<R> &c) {
    return heun_aw_operator(pair.A, pair.A_star, pair.q, c);
}

template <class R>
Mat<R> heun_aw_operator(const TriplePair<R> &t, const Couplings<R> &c) {
    return heun_aw_operator(t.A, t.A_star, t.q, c);
}

// Sklyanin quantum determinant Gamma(u); commutes with every K(u) entry.
template <class R, class KBuilder>
Mat<R> quantum_determinant(KBuilder &&kfun, const Cx<R> &q, const Cx<R> &u) {
    const KEntries<R> ku = kfun(u);
    const KEntries<R> kuq = kfun(u * q);
    const Eigen::Index d = ku.dim();
    const Mat<R> id = eye<R>(d);
    const Mat<R> p = rmatrix(Cx<R>(1), q) / (q - Cx<R>(1) / q);
    const Mat<R> pminus = (eye<R>(4) - p) / Cx<R>(2);
    const Mat<R> x = kron(pminus, id) * on_aux1(ku) *
                     kron(rmatrix(u * u * q, q), id) * on_aux2(kuq);
    Mat<R> out = Mat<R>::Zero(d, d);
    for (int a = 0; a < 4; ++a)
        out += x.block(a * d, a * d, d, d);
    return out;
}

} // namespace reflection
} // namespace haw
