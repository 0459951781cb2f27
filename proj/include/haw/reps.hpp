#pragma once

// U_q(sl2) representations, the concrete Askey-Wilson pairs (q-Euler top and
// triple tensor product), Leonard spectra, the element A-diamond and the
// Casimir Gamma.

#include "haw/qcore.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <vector>

namespace haw {
namespace reps {

using qcore::bfun;
using qcore::comm;
using qcore::eye;
using qcore::kron;
using qcore::qcomm;
using qcore::qnum;
using qcore::qpow;

template <class R = double> struct StructureConstants {
    Cx<R> rho, omega, eta, eta_star;
};

// Representation data (q, nu, nu', mu, mu', v, s) with the derived spectral
// parameters b, c, b*, c*, b_d, c_d and structure constants.
template <class R = double> struct ModelParams {
    Cx<R> q, nu, nu_p, mu, mu_p, v;
    int two_s = 1;

    int dim() const { return two_s + 1; }
    R s() const { return R(two_s) / R(2); }

    Cx<R> qp(const Cx<R> &x) const { return qpow(q, x); }
    Cx<R> qp(R x) const { return qpow(q, Cx<R>(x, 0)); }
    Cx<R> qp(int x) const { return qpow(q, x); }

    Cx<R> chi() const {
        return -Cx<R>(0.5) * qp(nu) * (q * q - Cx<R>(1) / (q * q));
    }

    Cx<R> half_qnn() const { return Cx<R>(0.5) * qp((nu + nu_p) / Cx<R>(2)); }

    Cx<R> b() const { return half_qnn() * std::exp(-mu) * qp(-two_s); }
    Cx<R> c() const { return half_qnn() * std::exp(mu) * qp(two_s); }
    Cx<R> b_star() const { return half_qnn() * std::exp(mu_p) * qp(-two_s); }
    Cx<R> c_star() const { return half_qnn() * std::exp(-mu_p) * qp(two_s); }
    Cx<R> b_diamond() const { return half_qnn() * v * v * qp(-two_s); }
    Cx<R> c_diamond() const { return half_qnn() / (v * v) * qp(two_s); }

    Cx<R> theta(int M) const { return b() * qp(2 * M) + c() * qp(-2 * M); }
    Cx<R> theta_star(int M) const {
        return b_star() * qp(2 * M) + c_star() * qp(-2 * M);
    }
    Cx<R> theta_diamond(int M) const {
        return b_diamond() * qp(2 * M) + c_diamond() * qp(-2 * M);
    }

    StructureConstants<R> sc() const {
        const Cx<R> q2 = q * q, qm2 = Cx<R>(1) / q2;
        const Cx<R> dq2 = q2 - qm2, dq = q - Cx<R>(1) / q;
        const Cx<R> qnn = qp(nu + nu_p);
        const Cx<R> vv = v * v + Cx<R>(1) / (v * v);
        const Cx<R> qs = qp(two_s + 1) + qp(-two_s - 1);
        const Cx<R> chm = std::cosh(mu), chp = std::cosh(mu_p);
        StructureConstants<R> k;
        k.rho = -Cx<R>(0.25) * qnn * dq2 * dq2;
        k.omega = Cx<R>(0.25) * qnn * dq * dq * (vv * qs - Cx<R>(4) * chm * chp);
        const Cx<R> pref = -Cx<R>(0.25) * qp(Cx<R>(1.5) * (nu + nu_p)) * dq2 *
                           dq2 / (q + Cx<R>(1) / q);
        k.eta = pref * (chm * vv - chp * qs);
        k.eta_star = pref * (chp * vv - chm * qs);
        return k;
    }
};

// A, A* as dense matrices forming a Leonard pair, with scalar structure
// constants and, when built from (q,nu,nu',mu,mu',v,s), the model data.
template <class R = double> struct AWPair {
    Mat<R> A, A_star;
    int dim = 0;
    StructureConstants<R> sc;
    Cx<R> q;
    std::optional<ModelParams<R>> params;
};

// Residual of the Askey-Wilson relations with scalar structure constants.
template <class R>
R aw_residual(const Mat<R> &A, const Mat<R> &As, const StructureConstants<R> &k,
              const Cx<R> &q) {
    const Mat<R> id = eye<R>(A.rows());
    const Cx<R> qi = Cx<R>(1) / q;
    const Mat<R> lhs1 = qi * (A * qcomm(A, As, q)) - q * (qcomm(A, As, q) * A);
    const Mat<R> lhs2 =
        qi * (As * qcomm(As, A, q)) - q * (qcomm(As, A, q) * As);
    const R r1 = qcore::sum_residual<R>(
        {lhs1, -k.rho * As, -k.omega * A, -k.eta * id});
    const R r2 = qcore::sum_residual<R>(
        {lhs2, -k.rho * A, -k.omega * As, -k.eta_star * id});
    return std::max(r1, r2);
}

template <class R = double> struct SpinRep {
    Mat<R> qs3, qs3i, sp, sm;
    int dim = 0;
};

// Irreducible spin-s representation of U_q(sl2).
template <class R>
SpinRep<R> spin_rep(int two_s, const Cx<R> &q) {
    if (two_s < 0)
        throw std::invalid_argument("spin_rep: 2s must be nonnegative");
    const int n = two_s + 1;
    SpinRep<R> rep;
    rep.dim = n;
    rep.qs3 = Mat<R>::Zero(n, n);
    rep.qs3i = Mat<R>::Zero(n, n);
    rep.sp = Mat<R>::Zero(n, n);
    rep.sm = Mat<R>::Zero(n, n);
    const R s = R(two_s) / R(2);
    for (int k = 1; k <= n; ++k) {
        rep.qs3(k - 1, k - 1) = qpow(q, Cx<R>(s + R(1) - R(k), 0));
        rep.qs3i(k - 1, k - 1) = qpow(q, Cx<R>(-(s + R(1) - R(k)), 0));
    }
    for (int k = 1; k <= n - 1; ++k) {
        const Cx<R> w = std::sqrt(qnum(k, q) * qnum(two_s + 1 - k, q));
        rep.sp(k - 1, k) = w;
        rep.sm(k, k - 1) = w;
    }
    return rep;
}

// Casimir C = (q - q^-1)^2 S- S+ + q^{2 s3 + 1} + q^{-2 s3 - 1}
template <class R>
Mat<R> casimir(const SpinRep<R> &rep, const Cx<R> &q) {
    const Cx<R> dq = q - Cx<R>(1) / q;
    return dq * dq * (rep.sm * rep.sp) + q * (rep.qs3 * rep.qs3) +
           (Cx<R>(1) / q) * (rep.qs3i * rep.qs3i);
}

// q-Euler top pair: A, A* acting on V(s) built from one U_q(sl2) factor.
template <class R>
AWPair<R> euler_top_pair(const ModelParams<R> &m, double residual_tol = 1e-9) {
    const Cx<R> q = m.q;
    const Cx<R> dq = q - Cx<R>(1) / q;
    const Cx<R> kp = -Cx<R>(0.5) * m.qp(m.nu) * dq;
    const Cx<R> km = Cx<R>(0.5) * m.qp(m.nu_p) * dq;
    const Cx<R> ep = std::cosh(m.mu) * m.qp((m.nu + m.nu_p) / Cx<R>(2));
    const Cx<R> em = std::cosh(m.mu_p) * m.qp((m.nu + m.nu_p) / Cx<R>(2));
    const Cx<R> qh = qpow(q, Cx<R>(0.5));

    const SpinRep<R> rep = spin_rep(m.two_s, q);
    AWPair<R> pair;
    pair.q = q;
    pair.dim = rep.dim;
    pair.params = m;
    pair.sc = m.sc();
    pair.A = kp * m.v * qh * (rep.sp * rep.qs3) +
             km / m.v / qh * (rep.sm * rep.qs3) + ep * (rep.qs3 * rep.qs3);
    pair.A_star = kp / m.v / qh * (rep.sp * rep.qs3i) +
                  km * m.v * qh * (rep.sm * rep.qs3i) +
                  em * (rep.qs3i * rep.qs3i);

    const R res = aw_residual(pair.A, pair.A_star, pair.sc, q);
    if (res > R(residual_tol))
        throw std::runtime_error(
            "euler_top_pair: Askey-Wilson relation residual " +
            std::to_string(double(res)));
    return pair;
}

// Triple tensor product pair A = Delta(C) x I, A* = I x Delta(C) with the
// central elements c1..c4; structure constants are matrices here.
template <class R = double> struct TriplePair {
    Mat<R> A, A_star;
    Mat<R> c1, c2, c3, c4;
    Mat<R> omega, eta, eta_star; // central, matrix-valued
    Cx<R> rho;
    Cx<R> q;
    int two_j1 = 1, two_j2 = 1, two_j3 = 1;
    int dim = 0;
};

template <class R>
TriplePair<R> triple_tensor_pair(int two_j1, int two_j2, int two_j3,
                                 const Cx<R> &q) {
    const SpinRep<R> r1 = spin_rep(two_j1, q);
    const SpinRep<R> r2 = spin_rep(two_j2, q);
    const SpinRep<R> r3 = spin_rep(two_j3, q);
    const Mat<R> i1 = eye<R>(r1.dim), i2 = eye<R>(r2.dim), i3 = eye<R>(r3.dim);
    const Cx<R> dq = q - Cx<R>(1) / q;

    // two-site coproduct images
    auto delta_c = [&](const SpinRep<R> &a, const SpinRep<R> &b) {
        const Mat<R> ia = eye<R>(a.dim), ib = eye<R>(b.dim);
        const Mat<R> dsp =
            kron(a.sp, ib) + kron<R>(a.qs3 * a.qs3, b.sp);
        const Mat<R> dsm =
            kron<R>(a.sm, Mat<R>(b.qs3i * b.qs3i)) + kron(ia, b.sm);
        const Mat<R> dq3 = kron(a.qs3, b.qs3);
        const Mat<R> dq3i = kron(a.qs3i, b.qs3i);
        Mat<R> out = dq * dq * (dsm * dsp) + q * (dq3 * dq3) +
                     (Cx<R>(1) / q) * (dq3i * dq3i);
        return out;
    };

    TriplePair<R> t;
    t.q = q;
    t.two_j1 = two_j1;
    t.two_j2 = two_j2;
    t.two_j3 = two_j3;
    t.dim = r1.dim * r2.dim * r3.dim;
    t.A = kron(delta_c(r1, r2), i3);
    t.A_star = kron(i1, delta_c(r2, r3));
    t.c1 = kron(kron(casimir(r1, q), i2), i3);
    t.c2 = kron(kron(i1, casimir(r2, q)), i3);
    t.c3 = kron(kron(i1, i2), casimir(r3, q));

    // three-site coproduct
    const Mat<R> q3_12 = kron(r1.qs3, r2.qs3);
    const Mat<R> sp3 = kron(kron(r1.sp, i2), i3) +
                       kron(kron<R>(r1.qs3 * r1.qs3, r2.sp), i3) +
                       kron(kron<R>(r1.qs3 * r1.qs3, Mat<R>(r2.qs3 * r2.qs3)),
                            r3.sp);
    const Mat<R> sm3 =
        kron(kron<R>(r1.sm, Mat<R>(r2.qs3i * r2.qs3i)),
             Mat<R>(r3.qs3i * r3.qs3i)) +
        kron(kron<R>(i1, r2.sm), Mat<R>(r3.qs3i * r3.qs3i)) +
        kron(kron(i1, i2), r3.sm);
    const Mat<R> q33 = kron(kron(r1.qs3, r2.qs3), r3.qs3);
    const Mat<R> q33i = kron(kron(r1.qs3i, r2.qs3i), r3.qs3i);
    t.c4 = dq * dq * (sm3 * sp3) + q * (q33 * q33) +
           (Cx<R>(1) / q) * (q33i * q33i);

    const Cx<R> dq2 = q * q - Cx<R>(1) / (q * q);
    t.rho = -dq2 * dq2;
    t.omega = -dq * dq * (t.c1 * t.c3 + t.c2 * t.c4);
    t.eta_star = dq2 * dq2 / (q + Cx<R>(1) / q) * (t.c1 * t.c2 + t.c3 * t.c4);
    t.eta = dq2 * dq2 / (q + Cx<R>(1) / q) * (t.c2 * t.c3 + t.c1 * t.c4);
    return t;
}

// Residual of the AW relations for the triple pair (central matrix-valued
// structure constants).
template <class R> R aw_residual(const TriplePair<R> &t) {
    const Cx<R> q = t.q, qi = Cx<R>(1) / q;
    const Mat<R> B = qcomm(t.A, t.A_star, q);
    const Mat<R> Bs = qcomm(t.A_star, t.A, q);
    const Mat<R> lhs1 = qi * (t.A * B) - q * (B * t.A);
    const Mat<R> lhs2 = qi * (t.A_star * Bs) - q * (Bs * t.A_star);
    const R res1 = qcore::sum_residual<R>(
        {lhs1, -t.rho * t.A_star, Mat<R>(-t.omega * t.A), Mat<R>(-t.eta)});
    const R res2 = qcore::sum_residual<R>(
        {lhs2, -t.rho * t.A, Mat<R>(-t.omega * t.A_star),
         Mat<R>(-t.eta_star)});
    return std::max(res1, res2);
}

// One simultaneous eigenspace V_k(ell) of the weight operator and c4.
template <class R = double> struct Sector {
    int ell = 0, k = 0;
    Mat<R> basis; // dim_full x dim_sector, columns spanning the sector
    int dim = 0;
    ModelParams<R> effective; // spin-chain identification (equal spins)
};

// Restriction of a full-space operator to the sector spanned by V's columns.
template <class R> Mat<R> restrict_to(const Mat<R> &op, const Mat<R> &V) {
    // solve V X = op V; exact when span(V) is op-invariant
    return V.colPivHouseholderQr().solve(op * V);
}

template <class R>
std::vector<Sector<R>> sector_decompose(const TriplePair<R> &t) {
    const int tj1 = t.two_j1, tj2 = t.two_j2, tj3 = t.two_j3;
    const int twoJ = tj1 + tj2 + tj3;
    const Cx<R> q = t.q;
    const int ell_max =
        std::min(std::min(tj1 + tj2, tj2 + tj3), std::min(tj1 + tj3, twoJ / 2));

    // weight operator is diagonal in the product basis
    const SpinRep<R> r1 = spin_rep(tj1, q), r2 = spin_rep(tj2, q),
                     r3 = spin_rep(tj3, q);
    const Mat<R> w_op = kron(kron<R>(Mat<R>(r1.qs3 * r1.qs3),
                                     Mat<R>(r2.qs3 * r2.qs3)),
                             Mat<R>(r3.qs3 * r3.qs3));

    std::vector<Sector<R>> sectors;
    for (int ell = 0; ell <= ell_max; ++ell) {
        const Cx<R> lam4 = qpow(q, twoJ - 2 * ell + 1) +
                           qpow(q, -(twoJ - 2 * ell) - 1);
        for (int k = 0; k <= twoJ - 2 * ell; ++k) {
            const Cx<R> w = qpow(q, twoJ - 2 * (k + ell));
            // indices of the weight-w subspace
            std::vector<int> idx;
            for (int i = 0; i < t.dim; ++i)
                if (std::abs(w_op(i, i) - w) < R(1e-9) * std::abs(w))
                    idx.push_back(i);
            if (idx.empty())
                throw std::runtime_error("sector_decompose: empty weight space");
            // c4 restricted to the weight subspace
            Mat<R> c4w(idx.size(), idx.size());
            for (size_t a = 0; a < idx.size(); ++a)
                for (size_t b = 0; b < idx.size(); ++b)
                    c4w(a, b) = t.c4(idx[a], idx[b]);
            Eigen::ComplexEigenSolver<Mat<R>> es(c4w);
            std::vector<int> sel;
            for (int a = 0; a < c4w.rows(); ++a)
                if (std::abs(es.eigenvalues()(a) - lam4) <
                    R(1e-7) * std::max<R>(R(1), std::abs(lam4)))
                    sel.push_back(a);
            const int d_expect = std::min(tj1, ell) + std::min(tj2, ell) +
                                 std::min(tj3, ell) - 2 * ell + 1;
            if (static_cast<int>(sel.size()) != d_expect)
                throw std::runtime_error(
                    "sector_decompose: dimension mismatch in sector (" +
                    std::to_string(ell) + "," + std::to_string(k) + ")");
            Sector<R> sec;
            sec.ell = ell;
            sec.k = k;
            sec.dim = d_expect;
            sec.basis = Mat<R>::Zero(t.dim, d_expect);
            for (int a = 0; a < d_expect; ++a) {
                Vec<R> col = Vec<R>::Zero(t.dim);
                for (size_t b = 0; b < idx.size(); ++b)
                    col(idx[b]) = es.eigenvectors()(b, sel[a]);
                sec.basis.col(a) = col / col.norm();
            }
            sectors.push_back(std::move(sec));
        }
    }
    return sectors;
}

// Spin-chain identification of the effective Leonard-pair parameters for
// equal spins j and nu = nu' = 1 (used for the q = 2 chains).
template <class R>
ModelParams<R> chain_effective_params(int two_j, int ell, const Cx<R> &q) {
    const int mn = std::min(two_j, ell);
    ModelParams<R> m;
    m.q = q;
    m.nu = Cx<R>(1);
    m.nu_p = Cx<R>(1);
    m.two_s = 3 * mn - 2 * ell;
    const Cx<R> lq = std::log(q);
    // e^{-mu} = e^{mu'} = -v^2 = q^{min(2j,ell) - (4j + 1)}
    const Cx<R> expnt = Cx<R>(R(mn - (2 * two_j + 1)), 0);
    m.mu = -expnt * lq;
    m.mu_p = expnt * lq;
    m.v = std::sqrt(-qpow(q, expnt));
    return m;
}

// Scalar AW pair on one sector of the triple tensor product.
template <class R>
AWPair<R> sector_pair(const TriplePair<R> &t, const Sector<R> &sec,
                      const ModelParams<R> &effective) {
    AWPair<R> pair;
    pair.q = t.q;
    pair.dim = sec.dim;
    pair.A = restrict_to(t.A, sec.basis);
    pair.A_star = restrict_to(t.A_star, sec.basis);
    pair.params = effective;
    pair.sc = effective.sc();
    return pair;
}

template <class R> Mat<R> adiamond(const AWPair<R> &pair);

// Eigen-decompositions of A, A*, A^d ordered to follow theta_M = b q^{2M} +
// c q^{-2M}.
template <class R = double> struct LeonardSpectra {
    std::vector<Cx<R>> theta, theta_star, theta_diamond;
    Mat<R> eigvecs, eigvecs_star, eigvecs_diamond;
    Cx<R> b, c, b_star, c_star, b_diamond, c_diamond;
    bool diamond_ok = false;
};

namespace detail {

template <class R>
void fix_phase(Mat<R> &vecs) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        vecs.col(j).normalize();
        for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
            if (std::abs(vecs(i, j)) > R(1e-9)) {
                vecs.col(j) *= std::abs(vecs(i, j)) / vecs(i, j);
                break;
            }
        }
    }
}

// Order eigenpairs so the eigenvalue sequence matches bq^{2M}+cq^{-2M},
// preferring the model's predicted sequence when available.
template <class R>
bool order_geometric(const Cx<R> &q, std::vector<Cx<R>> &vals, Mat<R> &vecs,
                     Cx<R> &b_out, Cx<R> &c_out,
                     const std::vector<Cx<R>> *predicted) {
    const int n = static_cast<int>(vals.size());
    std::vector<int> perm(n);
    R best = std::numeric_limits<R>::max();
    std::vector<int> best_perm;

    auto try_sequence = [&](const std::vector<Cx<R>> &target) {
        std::vector<bool> used(n, false);
        std::vector<int> p(n, -1);
        R total = 0;
        for (int m = 0; m < n; ++m) {
            int arg = -1;
            R dmin = std::numeric_limits<R>::max();
            for (int i = 0; i < n; ++i) {
                if (used[i])
                    continue;
                const R d = std::abs(vals[i] - target[m]);
                if (d < dmin) {
                    dmin = d;
                    arg = i;
                }
            }
            used[arg] = true;
            p[m] = arg;
            total += dmin / std::max<R>(R(1), std::abs(target[m]));
        }
        if (total < best) {
            best = total;
            best_perm = p;
        }
    };

    if (predicted) {
        try_sequence(*predicted);
    } else {
        const Cx<R> denom = q * q - Cx<R>(1) / (q * q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                const Cx<R> b = (vals[j] - vals[i] / (q * q)) / denom;
                const Cx<R> c = vals[i] - b;
                std::vector<Cx<R>> target(n);
                for (int m = 0; m < n; ++m)
                    target[m] = b * qpow(q, 2 * m) + c * qpow(q, -2 * m);
                try_sequence(target);
            }
    }
    if (best_perm.empty())
        return false;

    std::vector<Cx<R>> nv(n);
    Mat<R> nvecs(vecs.rows(), vecs.cols());
    for (int m = 0; m < n; ++m) {
        nv[m] = vals[best_perm[m]];
        nvecs.col(m) = vecs.col(best_perm[m]);
    }
    vals = nv;
    vecs = nvecs;
    if (n >= 2) {
        const Cx<R> denom = q * q - Cx<R>(1) / (q * q);
        b_out = (vals[1] - vals[0] / (q * q)) / denom;
        c_out = vals[0] - b_out;
    } else {
        b_out = vals[0] / Cx<R>(2);
        c_out = vals[0] - b_out;
    }
    // residual of the geometric form over the whole sequence
    R res = 0;
    for (int m = 0; m < n; ++m)
        res = std::max(res, qcore::rel_err(
                                vals[m], b_out * qpow(q, 2 * m) +
                                             c_out * qpow(q, -2 * m)));
    return res < R(1e-6);
}

template <class R>
bool multiplicity_free(const std::vector<Cx<R>> &vals, double tol) {
    for (size_t i = 0; i < vals.size(); ++i)
        for (size_t j = i + 1; j < vals.size(); ++j) {
            const R scale = std::max<R>(
                R(1), std::max(std::abs(vals[i]), std::abs(vals[j])));
            if (std::abs(vals[i] - vals[j]) < R(tol) * scale)
                return false;
        }
    return true;
}

} // namespace detail

template <class R>
LeonardSpectra<R> leonard_spectra(const AWPair<R> &pair) {
    LeonardSpectra<R> out;
    const Cx<R> q = pair.q;

    auto decompose = [&](const Mat<R> &op, std::vector<Cx<R>> &vals,
                         Mat<R> &vecs) {
        Eigen::ComplexEigenSolver<Mat<R>> es(op);
        vals.assign(es.eigenvalues().data(),
                    es.eigenvalues().data() + es.eigenvalues().size());
        vecs = es.eigenvectors();
    };

    std::vector<Cx<R>> predict, predict_s, predict_d;
    if (pair.params) {
        for (int m = 0; m < pair.dim; ++m) {
            predict.push_back(pair.params->theta(m));
            predict_s.push_back(pair.params->theta_star(m));
            predict_d.push_back(pair.params->theta_diamond(m));
        }
    }

    decompose(pair.A, out.theta, out.eigvecs);
    decompose(pair.A_star, out.theta_star, out.eigvecs_star);
    if (!detail::multiplicity_free(out.theta, 1e-6) ||
        !detail::multiplicity_free(out.theta_star, 1e-6))
        throw std::runtime_error(
            "leonard_spectra: degenerate spectrum, not a Leonard pair");

    if (!detail::order_geometric(q, out.theta, out.eigvecs, out.b, out.c,
                                 pair.params ? &predict : nullptr))
        throw std::runtime_error("leonard_spectra: A spectrum does not fit "
                                 "b q^{2M} + c q^{-2M}");
    if (!detail::order_geometric(q, out.theta_star, out.eigvecs_star,
                                 out.b_star, out.c_star,
                                 pair.params ? &predict_s : nullptr))
        throw std::runtime_error("leonard_spectra: A* spectrum does not fit "
                                 "b* q^{2M} + c* q^{-2M}");
    detail::fix_phase(out.eigvecs);
    detail::fix_phase(out.eigvecs_star);

    // A-diamond is optional: its spectrum degenerates at v = 1
    if (std::abs(pair.sc.rho) > 0) {
        const Mat<R> ad = adiamond(pair);
        std::vector<Cx<R>> dvals;
        Mat<R> dvecs;
        decompose(ad, dvals, dvecs);
        if (detail::multiplicity_free(dvals, 1e-6)) {
            out.theta_diamond = dvals;
            out.eigvecs_diamond = dvecs;
            out.diamond_ok = detail::order_geometric(
                q, out.theta_diamond, out.eigvecs_diamond, out.b_diamond,
                out.c_diamond, pair.params ? &predict_d : nullptr);
            if (out.diamond_ok)
                detail::fix_phase(out.eigvecs_diamond);
        }
    }
    return out;
}

// Off-tridiagonal leakage of A* in the A-eigenbasis (and dually).
template <class R>
R tridiagonality_residual(const AWPair<R> &pair, const LeonardSpectra<R> &sp) {
    auto leakage = [&](const Mat<R> &op, const Mat<R> &basis) {
        const Mat<R> m = basis.colPivHouseholderQr().solve(op * basis);
        R worst = 0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (std::abs(long(i) - long(j)) >= 2)
                    worst = std::max(worst, std::abs(m(i, j)) / m.norm());
        return worst;
    };
    return std::max(leakage(pair.A_star, sp.eigvecs),
                    leakage(pair.A, sp.eigvecs_star));
}

// A-diamond = (i/sqrt(rho)) [A*,A]_q + i omega / ((q-q^-1) sqrt(rho))
template <class R> Mat<R> adiamond(const AWPair<R> &pair) {
    const Cx<R> q = pair.q;
    const Cx<R> sq = qcore::sqrt_det(pair.sc.rho);
    const Cx<R> i_(0, 1);
    return (i_ / sq) * qcomm(pair.A_star, pair.A, q) +
           (i_ * pair.sc.omega / ((q - Cx<R>(1) / q) * sq)) *
               eye<R>(pair.dim);
}

// Casimir Gamma of the Askey-Wilson algebra, and its scalar value.
template <class R> Mat<R> casimir_gamma(const AWPair<R> &pair) {
    const Cx<R> q = pair.q;
    const Cx<R> q2 = q * q, qm2 = Cx<R>(1) / q2;
    const Mat<R> Bs = qcomm(pair.A_star, pair.A, q);
    const Mat<R> id = eye<R>(pair.dim);
    const auto &k = pair.sc;
    return (q2 - qm2) / q * (pair.A * pair.A_star * Bs) - qm2 * (Bs * Bs) +
           qm2 * k.rho * (pair.A * pair.A) +
           q2 * k.rho * (pair.A_star * pair.A_star) +
           k.omega * (pair.A * pair.A_star + pair.A_star * pair.A) +
           k.eta_star * (Cx<R>(1) + qm2) * pair.A +
           q2 * k.eta * (Cx<R>(1) + qm2) * pair.A_star;
}

// Closed form of the Gamma eigenvalue in the (par) parametrization.
template <class R> Cx<R> gamma0_closed(const ModelParams<R> &m) {
    const Cx<R> q = m.q;
    const Cx<R> dq = q - Cx<R>(1) / q;
    const Cx<R> vv = m.v * m.v + Cx<R>(1) / (m.v * m.v);
    const Cx<R> v4 = qcore::qpow(m.v, 4) + qcore::qpow(m.v, -4);
    const Cx<R> chm = std::cosh(m.mu), chp = std::cosh(m.mu_p);
    const Cx<R> ch2m = std::cosh(Cx<R>(2) * m.mu),
                ch2p = std::cosh(Cx<R>(2) * m.mu_p);
    const Cx<R> q4s = m.qp(2 * m.two_s), q8s = m.qp(4 * m.two_s);
    const Cx<R> inner =
        (q * q + Cx<R>(1) / (q * q)) *
            (-(m.qp(-m.two_s - 1) + m.qp(m.two_s + 1)) * vv * chm * chp +
             Cx<R>(0.5) * (ch2m + ch2p)) -
        ch2m * ch2p;
    const Cx<R> term1 = q4s / Cx<R>(4) * inner;
    const Cx<R> term2 = -Cx<R>(1.0 / 16.0) * (q4s - Cx<R>(1)) *
                        (q * q * q4s - Cx<R>(1) / (q * q)) * v4;
    const Cx<R> term3 =
        Cx<R>(1.0 / 16.0) *
        ((Cx<R>(1) + m.qp(4)) * q8s +
         (-m.qp(-4) + Cx<R>(4) * m.qp(-2) + Cx<R>(2) + Cx<R>(4) * m.qp(2) -
          m.qp(4)) *
             q4s +
         m.qp(-4) + Cx<R>(1));
    return dq * dq *
           qcore::qpow(q, Cx<R>(2) * (m.nu + m.nu_p - Cx<R>(m.two_s))) *
           (term1 + term2 + term3);
}

// --- JSON serialization -----------------------------------------------

template <class R>
nlohmann::json to_json_complex(const Cx<R> &z) {
    return nlohmann::json::array({double(z.real()), double(z.imag())});
}

template <class R>
Cx<R> complex_from_json(const nlohmann::json &j) {
    if (j.is_number())
        return Cx<R>(R(j.get<double>()), 0);
    return Cx<R>(R(j.at(0).get<double>()), R(j.at(1).get<double>()));
}

template <class R>
nlohmann::json to_json(const ModelParams<R> &m) {
    nlohmann::json j;
    j["q"] = to_json_complex(m.q);
    j["nu"] = to_json_complex(m.nu);
    j["nu_prime"] = to_json_complex(m.nu_p);
    j["mu"] = to_json_complex(m.mu);
    j["mu_prime"] = to_json_complex(m.mu_p);
    j["v"] = to_json_complex(m.v);
    j["two_s"] = m.two_s;
    return j;
}

template <class R>
ModelParams<R> model_from_json(const nlohmann::json &j) {
    ModelParams<R> m;
    m.q = complex_from_json<R>(j.at("q"));
    m.nu = complex_from_json<R>(j.at("nu"));
    m.nu_p = complex_from_json<R>(j.at("nu_prime"));
    m.mu = complex_from_json<R>(j.at("mu"));
    m.mu_p = complex_from_json<R>(j.at("mu_prime"));
    m.v = complex_from_json<R>(j.at("v"));
    m.two_s = j.at("two_s").get<int>();
    return m;
}

} // namespace reps
} // namespace haw
