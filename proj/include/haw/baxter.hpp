#pragma once

// Baxter T-Q relations, Q-polynomials, Askey-Wilson polynomial evaluation,
// the q-difference realization of the algebra and of the Heun operator, and
// the transition-coefficient construction of Q.

#include "haw/bethe.hpp"

namespace haw {
namespace baxter {

using bethe::BetheCase;
using bethe::CaseTag;
using bethe::lift;
using bethe::symmetrize;
using dynops::DynOps;
using dynops::GaugeConfig;
using qcore::bfun;
using qcore::qpoch;
using qcore::qpow;
using reflection::Couplings;
using reps::ModelParams;

// --- Laurent polynomials in z ------------------------------------------------

template <class R = double> struct Laurent {
    std::map<int, Cx<R>> c;

    static Laurent monomial(int k, const Cx<R> &v) {
        Laurent p;
        p.c[k] = v;
        return p;
    }
    static Laurent one() { return monomial(0, Cx<R>(1, 0)); }

    bool empty() const { return c.empty(); }

    Laurent &operator+=(const Laurent &o) {
        for (const auto &[k, v] : o.c)
            c[k] += v;
        return *this;
    }
    Laurent operator+(const Laurent &o) const {
        Laurent r = *this;
        r += o;
        return r;
    }
    Laurent operator-(const Laurent &o) const {
        Laurent r = *this;
        for (const auto &[k, v] : o.c)
            r.c[k] -= v;
        return r;
    }
    Laurent operator*(const Laurent &o) const {
        Laurent r;
        for (const auto &[k1, v1] : c)
            for (const auto &[k2, v2] : o.c)
                r.c[k1 + k2] += v1 * v2;
        return r;
    }
    Laurent operator*(const Cx<R> &s) const {
        Laurent r = *this;
        for (auto &[k, v] : r.c)
            v *= s;
        return r;
    }

    // T_pm: f(z) -> f(q^{pm 2} z)
    Laurent shifted(const Cx<R> &q, int pm) const {
        Laurent r;
        for (const auto &[k, v] : c)
            r.c[k] = v * qpow(q, 2 * pm * k);
        return r;
    }

    Cx<R> eval(const Cx<R> &z) const {
        Cx<R> acc(0, 0);
        for (const auto &[k, v] : c)
            acc += v * qpow(z, k);
        return acc;
    }

    R norm() const {
        R n = 0;
        for (const auto &[k, v] : c)
            n = std::max(n, std::abs(v));
        return n;
    }

    Laurent trimmed(R tol_rel = R(1e-12)) const {
        Laurent r;
        const R cut = norm() * tol_rel;
        for (const auto &[k, v] : c)
            if (std::abs(v) > cut)
                r.c[k] = v;
        return r;
    }

    // projection onto z <-> 1/z symmetric functions; keeps roundoff from
    // compounding through repeated exact divisions
    Laurent symmetrized() const {
        Laurent r;
        for (const auto &[k, v] : c) {
            auto it = c.find(-k);
            const Cx<R> w = it == c.end() ? Cx<R>(0, 0) : it->second;
            r.c[k] = (v + w) / Cx<R>(2);
        }
        return r;
    }

    // f(z) = f(1/z)
    bool symmetric(R tol_rel = R(1e-10)) const {
        const R cut = std::max<R>(norm(), R(1)) * tol_rel;
        for (const auto &[k, v] : c) {
            auto it = c.find(-k);
            const Cx<R> w = it == c.end() ? Cx<R>(0, 0) : it->second;
            if (std::abs(v - w) > cut)
                return false;
        }
        return true;
    }
};

// exact Laurent division; throws when the remainder is not negligible
template <class R>
Laurent<R> laurent_div(const Laurent<R> &num, const Laurent<R> &den,
                       double tol = 3e-8) {
    if (den.empty())
        throw std::invalid_argument("laurent_div: zero denominator");
    // numerators can span many decades; trimming here would corrupt the
    // quotient, so only drop hard zeros
    Laurent<R> n;
    for (const auto &[k, v] : num.c)
        if (v != Cx<R>(0, 0))
            n.c[k] = v;
    if (n.empty())
        return {};
    const int nlo = n.c.begin()->first, nhi = n.c.rbegin()->first;
    const int dlo = den.c.begin()->first, dhi = den.c.rbegin()->first;
    // ordinary polynomial long division on shifted coefficients
    std::vector<Cx<R>> a(static_cast<size_t>(nhi - nlo) + 1, Cx<R>(0, 0));
    std::vector<Cx<R>> b(static_cast<size_t>(dhi - dlo) + 1, Cx<R>(0, 0));
    for (const auto &[k, v] : n.c)
        a[static_cast<size_t>(k - nlo)] = v;
    for (const auto &[k, v] : den.c)
        b[static_cast<size_t>(k - dlo)] = v;
    const int da = static_cast<int>(a.size()) - 1,
              db = static_cast<int>(b.size()) - 1;
    if (da < db)
        throw std::runtime_error("laurent_div: nonzero remainder (degree)");
    std::vector<Cx<R>> qout(static_cast<size_t>(da - db) + 1, Cx<R>(0, 0));
    const R scale = std::max<R>(R(1), num.norm());
    for (int i = da; i >= db; --i) {
        const Cx<R> f = a[static_cast<size_t>(i)] / b[static_cast<size_t>(db)];
        qout[static_cast<size_t>(i - db)] = f;
        for (int j = 0; j <= db; ++j)
            a[static_cast<size_t>(i - db + j)] -= f * b[static_cast<size_t>(j)];
    }
    for (const auto &rv : a)
        if (std::abs(rv) > R(tol) * scale)
            throw std::runtime_error("laurent_div: nonzero remainder");
    Laurent<R> out;
    for (size_t i = 0; i < qout.size(); ++i)
        if (qout[i] != Cx<R>(0, 0))
            out.c[static_cast<int>(i) + nlo - dlo] = qout[i];
    return out.trimmed();
}

// polynomial in Z = (z + 1/z)/(q + 1/q) as a symmetric Laurent polynomial
template <class R>
Laurent<R> z_poly_from_coeffs(const std::vector<Cx<R>> &coeffs,
                              const Cx<R> &q) {
    // coeffs ascending in Z
    Laurent<R> zvar;
    const Cx<R> s = Cx<R>(1) / (q + Cx<R>(1) / q);
    zvar.c[1] = s;
    zvar.c[-1] = s;
    Laurent<R> acc, pw = Laurent<R>::one();
    for (const auto &cf : coeffs) {
        acc += pw * cf;
        pw = pw * zvar;
    }
    return acc;
}

// extract ascending Z-coefficients from a symmetric Laurent polynomial
template <class R>
std::vector<Cx<R>> z_coeffs_from_poly(const Laurent<R> &f, const Cx<R> &q) {
    if (!f.symmetric())
        throw std::runtime_error("z_coeffs_from_poly: not symmetric in z");
    Laurent<R> rem = f.trimmed();
    const int deg = rem.empty() ? 0 : rem.c.rbegin()->first;
    std::vector<Cx<R>> out(static_cast<size_t>(deg) + 1, Cx<R>(0, 0));
    const Cx<R> qq = q + Cx<R>(1) / q;
    for (int d = deg; d >= 1; --d) {
        auto it = rem.c.find(d);
        const Cx<R> top = it == rem.c.end() ? Cx<R>(0, 0) : it->second;
        const Cx<R> coef = top * qpow(qq, d);
        out[static_cast<size_t>(d)] = coef;
        std::vector<Cx<R>> zc(static_cast<size_t>(d) + 1, Cx<R>(0, 0));
        zc[static_cast<size_t>(d)] = coef;
        rem = rem - z_poly_from_coeffs(zc, q);
        rem = rem.trimmed(R(1e-13));
    }
    auto it = rem.c.find(0);
    out[0] = it == rem.c.end() ? Cx<R>(0, 0) : it->second;
    return out;
}

// --- Askey-Wilson polynomials -------------------------------------------------

// terminating 4phi3 with base q^2, evaluated by forward recursion on the
// term ratio; accumulated in extended precision because the partial sums
// cancel catastrophically for larger M
template <class R>
Cx<R> aw_poly(int M, const Cx<R> &a_, const Cx<R> &b_, const Cx<R> &c_,
              const Cx<R> &d_, const Cx<R> &z_, const Cx<R> &q_) {
    using P = typename std::conditional<std::is_same_v<R, double>, long double,
                                        R>::type;
    using CP = Cx<P>;
    const CP a(a_), b(b_), c(c_), d(d_), z(z_), q(q_);
    const CP Q = q * q;
    const CP abcd = a * b * c * d;
    CP sum(1, 0), term(1, 0), Qk(1, 0);
    for (int k = 0; k < M; ++k) {
        const CP den = (CP(1) - a * b * Qk) * (CP(1) - a * c * Qk) *
                       (CP(1) - a * d * Qk) * (CP(1) - Q * Qk);
        if (std::abs(den) < P(1e-300))
            throw std::runtime_error("aw_poly: degenerate parameters");
        term *= (CP(1) - qpow(Q, -M) * Qk) *
                (CP(1) - abcd * qpow(Q, M - 1) * Qk) * (CP(1) - a * z * Qk) *
                (CP(1) - a / z * Qk) * Q / den;
        sum += term;
        Qk *= Q;
    }
    return Cx<R>(R(sum.real()), R(sum.imag()));
}

// three-term recurrence coefficients (base q^2)
template <class R> struct AwRecurrence {
    Cx<R> a_M, b_M, c_M;
};

template <class R>
AwRecurrence<R> aw_recurrence(int M, const Cx<R> &a, const Cx<R> &b,
                              const Cx<R> &c, const Cx<R> &d, const Cx<R> &q) {
    const Cx<R> abcd = a * b * c * d;
    auto qp = [&](int n) { return qpow(q, 2 * n); };
    AwRecurrence<R> r;
    r.b_M = (Cx<R>(1) - a * b * qp(M)) * (Cx<R>(1) - a * c * qp(M)) *
            (Cx<R>(1) - a * d * qp(M)) * (Cx<R>(1) - abcd * qp(M - 1)) /
            (a * (Cx<R>(1) - abcd * qp(2 * M - 1)) *
             (Cx<R>(1) - abcd * qp(2 * M)));
    r.c_M = a * (Cx<R>(1) - qp(M)) * (Cx<R>(1) - b * c * qp(M - 1)) *
            (Cx<R>(1) - b * d * qp(M - 1)) * (Cx<R>(1) - c * d * qp(M - 1)) /
            ((Cx<R>(1) - abcd * qp(2 * M - 2)) *
             (Cx<R>(1) - abcd * qp(2 * M - 1)));
    r.a_M = a + Cx<R>(1) / a - r.b_M - r.c_M;
    return r;
}

// Askey-Wilson divided-difference operator on Laurent polynomials,
// normalized so the eigenvalue on degree-M polynomials is
// q^{-2M} + abcd q^{2M-2}
template <class R>
Laurent<R> aw_difference_op(const Laurent<R> &f, const Cx<R> &a,
                            const Cx<R> &b, const Cx<R> &c, const Cx<R> &d,
                            const Cx<R> &q) {
    auto abar = [&](int sgn) { // numerator of A(z^{sgn})
        Laurent<R> n = Laurent<R>::one();
        for (const Cx<R> &p : {a, b, c, d}) {
            Laurent<R> fac = Laurent<R>::one();
            fac.c[sgn] = -p;
            n = n * fac;
        }
        return n;
    };
    Laurent<R> dp; // (1 - z^2)(1 - q^2 z^2)
    dp.c[0] = Cx<R>(1);
    dp.c[2] = -(Cx<R>(1) + q * q);
    dp.c[4] = q * q;
    Laurent<R> dp2;
    for (const auto &[k, v] : dp.c)
        dp2.c[-k] = v; // mirrored denominator
    const Laurent<R> num = abar(+1) * (f.shifted(q, +1) - f) * dp2 +
                           abar(-1) * (f.shifted(q, -1) - f) * dp;
    Laurent<R> out = laurent_div(num, Laurent<R>(dp * dp2));
    out += f * (Cx<R>(1) + a * b * c * d / (q * q));
    return out.trimmed();
}

// parameter map of the special case
template <class R> struct AwParams {
    Cx<R> a, b, c, d;
};

template <class R> AwParams<R> aw_params(const ModelParams<R> &m) {
    AwParams<R> p;
    p.a = -m.q * std::exp(-m.mu + m.mu_p);
    p.b = -m.q * std::exp(m.mu + m.mu_p);
    p.c = m.qp(-m.two_s) * m.v * m.v;
    p.d = m.qp(-m.two_s) / (m.v * m.v);
    return p;
}

// expansion coefficient Q_{l,M} of the Q-polynomial in the variable Z,
// accumulated in extended precision (the k-sum cancels strongly)
template <class R>
Cx<R> q_coefficient(int l, int M, const ModelParams<R> &m) {
    using P = typename std::conditional<std::is_same_v<R, double>, long double,
                                        R>::type;
    using CP = Cx<P>;
    const auto p0 = aw_params(m);
    const CP a(p0.a), b(p0.b), c(p0.c), d(p0.d), q(m.q);
    const CP q2 = q * q, q4 = q2 * q2;
    const CP abcd = a * b * c * d;
    const P sgn = M % 2 == 0 ? P(1) : P(-1);
    const CP lead = CP(sgn, 0) * qpoch(CP(a * b), q2, M) *
                    qpoch(CP(a * c), q2, M) * qpoch(CP(a * d), q2, M) *
                    qpoch(CP(abcd / q2), q2, M) /
                    (qpow(q + CP(1) / q, l) * qpow(a, M) *
                     qpoch(CP(abcd / q2), q4, M) * qpoch(abcd, q4, M));
    CP sum(0, 0);
    std::vector<CP> xs;
    for (int j = 1; j <= M; ++j)
        xs.push_back(a * qpow(q, 2 * j - 2) + qpow(q, 2 - 2 * j) / a);
    for (int k = std::max(0, M - l); k <= M; ++k) {
        std::vector<CP> xk(xs.begin(), xs.begin() + k);
        sum += qpoch(qpow(q, -2 * M), q2, k) *
               qpoch(CP(abcd * qpow(q, 2 * M - 2)), q2, k) *
               qpow(q, k * (k + 1)) * qpow(a, k) /
               (qpoch(CP(a * b), q2, k) * qpoch(CP(a * c), q2, k) *
                qpoch(CP(a * d), q2, k) * qpoch(q2, q2, k)) *
               qcore::esym(l + k - M, xk);
    }
    const CP out = lead * sum;
    return Cx<R>(R(out.real()), R(out.imag()));
}

// monic Q-polynomial from the Askey-Wilson expansion, ascending coefficients
template <class R>
std::vector<Cx<R>> q_from_aw(int M, const ModelParams<R> &m) {
    std::vector<Cx<R>> coeffs(static_cast<size_t>(M) + 1);
    for (int l = 0; l <= M; ++l) {
        const R sgn = l % 2 == 0 ? R(1) : R(-1);
        coeffs[static_cast<size_t>(M - l)] =
            Cx<R>(sgn, 0) * q_coefficient(l, M, m);
    }
    return coeffs;
}

// --- the q-difference realization ---------------------------------------------

template <class R = double> class PiRealization {
  public:
    explicit PiRealization(const ModelParams<R> &m) : m_(m), q_(m.q) {
        const Cx<R> q = q_;
        // phi(z) = cphi N(z) / ((1-z^2)(1-q^2 z^2))
        cphi_ = Cx<R>(0.5) * m.qp((m.nu + m.nu_p) / Cx<R>(2)) *
                std::exp(-m.mu_p) * m.qp(m.two_s);
        nplus_ = Laurent<R>::one();
        for (const Cx<R> &root :
             {q * std::exp(-m.mu + m.mu_p), q * std::exp(m.mu + m.mu_p),
              -m.qp(-m.two_s) * m.v * m.v, -m.qp(-m.two_s) / (m.v * m.v)}) {
            Laurent<R> fac = Laurent<R>::one();
            fac.c[1] = root;
            nplus_ = nplus_ * fac;
        }
        for (const auto &[k, v] : nplus_.c)
            nminus_.c[-k] = v;
        dplus_.c[0] = Cx<R>(1);
        dplus_.c[2] = -(Cx<R>(1) + q * q);
        dplus_.c[4] = q * q;
        for (const auto &[k, v] : dplus_.c)
            dminus_.c[-k] = v;
        den_ = dplus_ * dminus_;
    }

    const ModelParams<R> &model() const { return m_; }

    // pi(A*) f
    Laurent<R> apply_astar(const Laurent<R> &f) const {
        const Laurent<R> num =
            (nplus_ * (f.shifted(q_, +1) - f)) * dminus_ +
            (nminus_ * (f.shifted(q_, -1) - f)) * dplus_;
        Laurent<R> out = laurent_div(num, den_) * cphi_;
        out += f * m_.theta_star(0);
        return out.symmetrized().trimmed();
    }

    // pi(A) f
    Laurent<R> apply_a(const Laurent<R> &f) const {
        const Cx<R> q = q_;
        const Laurent<R> num =
            (nplus_ * (f.shifted(q, +1) - f)) * dminus_ *
                Laurent<R>::monomial(-1, Cx<R>(1) / q) +
            (nminus_ * (f.shifted(q, -1) - f)) * dplus_ *
                Laurent<R>::monomial(1, Cx<R>(1) / q);
        Laurent<R> out = laurent_div(num, den_) * cphi_;
        Laurent<R> affine;
        const Cx<R> lead = Cx<R>(0.5) * m_.qp((m_.nu + m_.nu_p) / Cx<R>(2)) *
                           std::exp(-m_.mu_p) * m_.qp(m_.two_s);
        affine.c[0] = lead * (Cx<R>(2) * std::exp(m_.mu_p) * std::cosh(m_.mu) -
                              (m_.v * m_.v + Cx<R>(1) / (m_.v * m_.v)) *
                                  m_.qp(-m_.two_s - 1));
        affine.c[1] = lead / q;
        affine.c[-1] = lead / q;
        out += affine * f;
        return out.symmetrized().trimmed();
    }

    Laurent<R> apply_qcomm_ab(const Laurent<R> &f) const { // [A,A*]_q
        return (apply_a(apply_astar(f)) * q_ -
                apply_astar(apply_a(f)) * (Cx<R>(1) / q_))
            .trimmed();
    }
    Laurent<R> apply_qcomm_ba(const Laurent<R> &f) const { // [A*,A]_q
        return (apply_astar(apply_a(f)) * q_ -
                apply_a(apply_astar(f)) * (Cx<R>(1) / q_))
            .trimmed();
    }

    Laurent<R> apply_heun(const Couplings<R> &c, const Laurent<R> &f) const {
        c.validate();
        Laurent<R> out = apply_a(f) * c.kappa + apply_astar(f) * c.kappa_star;
        if (c.kappa_plus != Cx<R>(0, 0))
            out += apply_qcomm_ab(f) * (c.kappa_plus / c.chi);
        if (c.kappa_minus != Cx<R>(0, 0))
            out += apply_qcomm_ba(f) * (c.kappa_minus * c.chi);
        return out.trimmed();
    }

    // gauge-transformed dynamical operators realized through the same
    // coefficients as the matrix route
    Laurent<R> apply_dyn(char which, const Cx<R> &u, int m,
                         const GaugeConfig<R> &cfg, const Cx<R> &chi,
                         const Laurent<R> &f) const {
        const auto co = dynops::op_coeffs_free(which, m_.sc(), q_, cfg, chi,
                                               u, m);
        Laurent<R> out = apply_qcomm_ba(f) * co[0] + apply_qcomm_ab(f) * co[1] +
                         apply_a(f) * co[2] + apply_astar(f) * co[3] +
                         f * co[4];
        return out.trimmed();
    }

  private:
    ModelParams<R> m_;
    Cx<R> q_, cphi_;
    Laurent<R> nplus_, nminus_, dplus_, dminus_, den_;
};

// --- T-Q relations -------------------------------------------------------------

enum class TqCase { sp_star, sp_kappa, diag, generic };

// |LHS - RHS| of the stated T-Q relation at the spectral point u, relative
template <class R>
R tq_residual(TqCase tq, const ModelParams<R> &m, const Couplings<R> &c,
              const std::vector<Cx<R>> &qpoly, const Cx<R> &lambda,
              const Cx<R> &u,
              const std::optional<dynops::GenericAngles<R>> &angles = {}) {
    const Cx<R> q = m.q, ui = Cx<R>(1) / u;
    const Cx<R> bu2 = bfun(u * u), bqu2 = bfun(q * u * u),
                bq2u2 = bfun(q * q * u * u);
    auto qval = [&](const Cx<R> &w) { // Q at the symmetrized variable of w
        Cx<R> acc(0, 0), p(1, 0);
        const Cx<R> W = symmetrize(w, q);
        for (const auto &cf : qpoly) {
            acc += cf * p;
            p *= W;
        }
        return acc;
    };
    const Cx<R> Qu = qval(u);
    const Cx<R> Qp = qval(u * q);  // T_+: u^2 -> q^2 u^2
    const Cx<R> Qm = qval(u / q);  // T_-
    const Cx<R> l1 = dynops::vacuum_lambda1(m, +1, u);
    const Cx<R> l2 = dynops::vacuum_lambda2(m, +1, u);
    const auto k = m.sc();
    const Cx<R> qq = q + Cx<R>(1) / q;
    const Cx<R> U = symmetrize(u, q);
    const Cx<R> lhs = bu2 * bq2u2 * lambda * Qu;
    const int two_s = m.two_s;
    const R sgn_odd = (two_s + 1) % 2 == 0 ? R(1) : R(-1); // (-1)^{2s+1}
    Cx<R> rhs(0, 0);
    switch (tq) {
    case TqCase::sp_star:
        rhs = c.kappa_star * u * l2 * Qp +
              c.kappa_star * u * l1 * bq2u2 / bqu2 * Qm +
              c.kappa_star * qq * qq / k.rho * (k.eta + k.eta_star * U) * Qu;
        break;
    case TqCase::sp_kappa: {
        const Cx<R> dd = dynops::delta_d(m, +1);
        rhs = c.kappa / (q * q) * ui * l2 * Qp +
              c.kappa * u * u * u * l1 * bq2u2 / bqu2 * Qm +
              c.kappa * qq * qq / k.rho * (k.eta_star + k.eta * U) * Qu +
              c.kappa * q * dd * Cx<R>(sgn_odd, 0) * (U * U - Cx<R>(1)) *
                  dynops::boundary_product(m, u) / qpow(qq, two_s - 2);
        break;
    }
    case TqCase::diag: {
        const Cx<R> dd = dynops::delta_d(m, +1);
        auto deltad = [&](const Cx<R> &w) {
            return w * (c.kappa * w + c.kappa_star / w); // eps = +1
        };
        rhs = u * deltad(Cx<R>(1) / (q * u)) * l2 * Qp +
              u * deltad(u) * l1 * bq2u2 / bqu2 * Qm +
              qq * qq / k.rho *
                  (c.kappa * k.eta_star + c.kappa_star * k.eta +
                   (c.kappa * k.eta + c.kappa_star * k.eta_star) * U) *
                  Qu +
              c.kappa * q * dd * Cx<R>(sgn_odd, 0) * (U * U - Cx<R>(1)) *
                  dynops::boundary_product(m, u) / qpow(qq, two_s - 2);
        break;
    }
    case TqCase::generic: {
        if (!angles)
            throw std::invalid_argument("tq_residual: generic needs angles");
        const auto &a = *angles;
        BetheCase<R> bc;
        bc.tag = CaseTag::g_plus;
        bc.M = two_s;
        bc.model = m;
        bc.couplings = c;
        bc.angles = a;
        const Cx<R> dg = dynops::delta_g(m, a, +1);
        const R sgn = two_s % 2 == 0 ? R(1) : R(-1); // (-1)^{2s}
        const Cx<R> zeta_g =
            qq * qq *
            ((c.kappa * k.eta_star + c.kappa_star * k.eta +
              (c.kappa * k.eta + c.kappa_star * k.eta_star) * U) /
                 k.rho -
             (c.kappa_plus / c.chi + c.kappa_minus * c.chi) /
                 (q - Cx<R>(1) / q) * (U * U - Cx<R>(1)) *
                 (k.rho * U + k.omega));
        rhs = u * bethe::delta_a(bc, Cx<R>(1) / (q * u)) * l2 * Qp +
              u * bethe::delta_a(bc, u) * l1 * bq2u2 / bqu2 * Qm +
              zeta_g * Qu +
              dg * Cx<R>(sgn, 0) * (U * U - Cx<R>(1)) *
                  dynops::boundary_product(m, u) / qpow(qq, two_s - 2);
        break;
    }
    }
    return qcore::rel_err(lhs, rhs);
}

// --- action of the Heun q-difference operator on Q ------------------------------

template <class R> struct QDiffAction {
    std::vector<Cx<R>> residual_coeffs; // pi(I)Q - lambda Q in Z coefficients
    std::vector<Cx<R>> inhomog_coeffs;  // expected inhomogeneity
};

// pi(I(kappa, kappa*, 0, 0)) Q - lambda Q compared against the closed-form
// inhomogeneity -kappa q delta_d (-1)^{2s+1} H(Z) / (q+q^-1)^{2s}
template <class R>
QDiffAction<R> heun_qdiff_action(const ModelParams<R> &m,
                                 const Couplings<R> &c,
                                 const std::vector<Cx<R>> &qpoly,
                                 const Cx<R> &lambda) {
    PiRealization<R> pi(m);
    const Laurent<R> Q = z_poly_from_coeffs(qpoly, m.q);
    const Laurent<R> lhs = pi.apply_heun(c, Q) - Q * lambda;
    QDiffAction<R> out;
    out.residual_coeffs = z_coeffs_from_poly(lhs.trimmed(R(1e-9)), m.q);
    const auto h = bethe::h_poly(m);
    const Cx<R> pref = -c.kappa * m.q * dynops::delta_d(m, +1) *
                       Cx<R>((m.two_s + 1) % 2 == 0 ? R(1) : R(-1), 0) /
                       qpow(m.q + Cx<R>(1) / m.q, m.two_s);
    for (const auto &cf : h)
        out.inhomog_coeffs.push_back(pref * cf);
    return out;
}

// --- Q as a transition coefficient ----------------------------------------------

// pi-realized B-string applied to 1, divided by the normalization N_M;
// returns the Z-coefficients of Q_M
template <class R>
std::vector<Cx<R>> transition_coefficient(const ModelParams<R> &m,
                                          const std::vector<Cx<R>> &u_roots,
                                          int m0 = 0) {
    const int M = static_cast<int>(u_roots.size());
    PiRealization<R> pi(m);
    GaugeConfig<R> cfg = dynops::gauge_case_sp(m, +1, m0);
    const Cx<R> chi = m.chi();
    Laurent<R> f = Laurent<R>::one();
    for (int i = M - 1; i >= 0; --i)
        f = pi.apply_dyn('B', u_roots[static_cast<size_t>(i)],
                         m0 + 2 * (M - 1 - i), cfg, chi, f);
    // N_M = (-1)^M ((q+q^-1)/2)^M (q^{(nu+nu')/2} e^{-mu'} q^{2s-M-1})^M
    //       prod b(u_i^2)/u_i
    Cx<R> norm = Cx<R>(M % 2 == 0 ? R(1) : R(-1), 0) *
           qpow((m.q + Cx<R>(1) / m.q) / Cx<R>(2), M) *
           qpow(m.qp((m.nu + m.nu_p) / Cx<R>(2)) * std::exp(-m.mu_p) *
                    m.qp(m.two_s - M - 1),
                M);
    for (const auto &u : u_roots)
        norm *= bfun(u * u) / u;
    return z_coeffs_from_poly(Laurent<R>(f * (Cx<R>(1) / norm)), m.q);
}

// vacuum actions of the pi-realized dynamical operators on 1
template <class R>
std::array<Cx<R>, 3> pi_vacuum_actions(const ModelParams<R> &m, const Cx<R> &u,
                                       int m0 = 0) {
    PiRealization<R> pi(m);
    GaugeConfig<R> cfg = dynops::gauge_case_sp(m, +1, m0);
    const Cx<R> chi = m.chi();
    const Laurent<R> one = Laurent<R>::one();
    auto scalar = [&](char which) {
        Laurent<R> r = pi.apply_dyn(which, u, m0, cfg, chi, one);
        r = r.trimmed(R(1e-11));
        Cx<R> c0(0, 0);
        R rest = 0;
        for (const auto &[k, v] : r.c) {
            if (k == 0)
                c0 = v;
            else
                rest = std::max(rest, std::abs(v));
        }
        if (rest > 1e-8 * std::max<R>(R(1), std::abs(c0)))
            throw std::runtime_error("pi_vacuum_actions: non-scalar result");
        return c0;
    };
    return {scalar('A'), scalar('D'), scalar('C')};
}

// scalar value of phi(z) at a point (for the closed-form vacuum actions)
template <class R>
Cx<R> phi_value(const ModelParams<R> &m, const Cx<R> &z) {
    const Cx<R> q = m.q;
    return Cx<R>(0.5) * m.qp((m.nu + m.nu_p) / Cx<R>(2)) * std::exp(-m.mu_p) *
           m.qp(m.two_s) *
           (Cx<R>(1) + q * std::exp(-m.mu + m.mu_p) * z) *
           (Cx<R>(1) + q * std::exp(m.mu + m.mu_p) * z) *
           (Cx<R>(1) - m.qp(-m.two_s) * m.v * m.v * z) *
           (Cx<R>(1) - m.qp(-m.two_s) / (m.v * m.v) * z) /
           ((Cx<R>(1) - z * z) * (Cx<R>(1) - q * q * z * z));
}

} // namespace baxter
} // namespace haw
