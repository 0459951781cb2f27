#pragma once

// Symmetrized Bethe polynomial systems P_a^M(U_i, bar U_i) = 0, their
// multistart-Newton solution, closed-form eigenvalues, Bethe-state
// construction and the PBW expansion of B-strings.

#include "haw/dynops.hpp"

#include <json.hpp>

#include <array>
#include <future>
#include <thread>

namespace haw {
namespace bethe {

using dynops::DynOps;
using dynops::GaugeConfig;
using dynops::GenericAngles;
using qcore::bfun;
using qcore::esym;
using qcore::qpow;
using reflection::Couplings;
using reps::AWPair;
using reps::ModelParams;

enum class CaseTag { sp_plus, sp_minus, d_plus, d_minus, g_plus, g_minus };

inline const char *to_string(CaseTag t) {
    switch (t) {
    case CaseTag::sp_plus:
        return "sp+";
    case CaseTag::sp_minus:
        return "sp-";
    case CaseTag::d_plus:
        return "d+";
    case CaseTag::d_minus:
        return "d-";
    case CaseTag::g_plus:
        return "g+";
    default:
        return "g-";
    }
}

inline int case_epsilon(CaseTag t) {
    return (t == CaseTag::sp_plus || t == CaseTag::d_plus ||
            t == CaseTag::g_plus)
               ? +1
               : -1;
}

inline bool case_is_sp(CaseTag t) {
    return t == CaseTag::sp_plus || t == CaseTag::sp_minus;
}
inline bool case_is_g(CaseTag t) {
    return t == CaseTag::g_plus || t == CaseTag::g_minus;
}

template <class R = double> struct BetheCase {
    CaseTag tag = CaseTag::sp_plus;
    int M = 0;
    ModelParams<R> model;
    Couplings<R> couplings;                 // unused for sp
    std::optional<GenericAngles<R>> angles; // present iff g case

    int epsilon() const { return case_epsilon(tag); }

    void validate() const {
        if (case_is_sp(tag)) {
            if (M > model.two_s)
                throw std::invalid_argument("BetheCase: sp requires M <= 2s");
        } else if (M != model.two_s) {
            throw std::invalid_argument("BetheCase: d/g require M = 2s");
        }
        if (case_is_g(tag) && !angles)
            throw std::invalid_argument("BetheCase: g requires angles");
    }
};

template <class R>
BetheCase<R> make_case(CaseTag tag, const ModelParams<R> &model, int M,
                       const Couplings<R> &c = {}) {
    BetheCase<R> bc;
    bc.tag = tag;
    bc.model = model;
    bc.M = case_is_sp(tag) ? M : model.two_s;
    bc.couplings = c;
    if (case_is_g(tag))
        bc.angles = dynops::generic_angles(c, model.sc().rho, model.q);
    bc.validate();
    return bc;
}

// --- scalar helpers --------------------------------------------------------

// U = (q u^2 + q^-1 u^-2)/(q + q^-1)
template <class R> Cx<R> symmetrize(const Cx<R> &u, const Cx<R> &q) {
    return (q * u * u + Cx<R>(1) / (q * u * u)) / (q + Cx<R>(1) / q);
}

// lift U -> u: root of the quadratic in u^2 with larger modulus, then the
// deterministic square root
template <class R> Cx<R> lift(const Cx<R> &U, const Cx<R> &q) {
    const Cx<R> qq = q + Cx<R>(1) / q;
    const Cx<R> disc = qcore::sqrt_det(qq * qq * U * U - Cx<R>(4));
    const Cx<R> r1 = (qq * U + disc) / (Cx<R>(2) * q);
    const Cx<R> r2 = (qq * U - disc) / (Cx<R>(2) * q);
    const Cx<R> r = std::abs(r1) >= std::abs(r2) ? r1 : r2;
    return qcore::sqrt_det(r);
}

// F_eps, normalized so that Lambda_1^eps(u) = q^{(nu+nu')/2} F_eps(u)/(2 u^eps)
// and Lambda_2^eps(u) = q^{(nu+nu')/2} b(u^2) F_eps(q^-1 u^-1)/(2 u^eps b(qu^2)).
template <class R>
Cx<R> f_eps(const ModelParams<R> &m, int eps, const Cx<R> &u) {
    const Cx<R> e(R(eps), 0), one(1, 0), half(0.5, 0);
    const Cx<R> ui = one / u;
    const Cx<R> pref = std::exp(-m.mu_p + (m.mu - m.mu_p) * (e - one) * half) *
                       m.qp(-(m.two_s + 1));
    return pref * (m.qp(m.two_s + 1) * u / m.v - ui * m.v) *
           (m.qp(m.two_s + 1) * u * m.v - ui / m.v) *
           (std::exp((m.mu - m.mu_p) * (one - e) * half) * u +
            std::exp((m.mu + m.mu_p) * (one + e) * half) * ui) *
           (std::exp((m.mu + m.mu_p) * (one - e) * half) * u +
            std::exp((m.mu_p - m.mu) * (one + e) * half) * ui);
}

// case-dependent Delta_a(u)
template <class R>
Cx<R> delta_a(const BetheCase<R> &bc, const Cx<R> &u) {
    if (case_is_sp(bc.tag))
        return Cx<R>(1, 0);
    const int eps = bc.epsilon();
    if (!case_is_g(bc.tag))
        return qpow(u, eps) *
               (bc.couplings.kappa * u + bc.couplings.kappa_star / u);
    const auto &a = *bc.angles;
    const Cx<R> e(R(eps), 0), one(1, 0), half(0.5, 0);
    const Cx<R> ui = one / u;
    return half * std::exp(-a.xi) *
           qpow(bc.model.q, (a.phi + a.phi_p) / Cx<R>(2)) * a.sqrt_rho *
           (std::exp(-a.xi_p) * u + std::exp(a.xi) * ui) *
           (std::exp(a.xi * (one - e) * half + a.xi_p * (one + e) * half) * u +
            std::exp(a.xi * (one + e) * half + a.xi_p * (one - e) * half) *
                ui);
}

// inhomogeneity constant of the polynomial system (0 for sp)
template <class R> Cx<R> delta_bar(const BetheCase<R> &bc) {
    if (case_is_sp(bc.tag))
        return Cx<R>(0, 0);
    const auto &m = bc.model;
    const int eps = bc.epsilon();
    const R sgn = m.two_s % 2 == 0 ? R(1) : R(-1); // (-1)^{2s}
    const Cx<R> dq = m.q - Cx<R>(1) / m.q;
    if (!case_is_g(bc.tag)) {
        const Cx<R> kpow =
            eps > 0 ? bc.couplings.kappa : bc.couplings.kappa_star;
        return -Cx<R>(2) * Cx<R>(sgn, 0) * Cx<R>(R(eps), 0) *
               m.qp(-(m.nu + m.nu_p) / Cx<R>(2) + Cx<R>(R(eps), 0)) / dq *
               kpow * dynops::delta_d(m, eps);
    }
    return Cx<R>(2) * Cx<R>(sgn, 0) * m.qp(-(m.nu + m.nu_p) / Cx<R>(2)) / dq *
           dynops::delta_g(m, *bc.angles, eps);
}

// --- small dense polynomials (ascending coefficients) ----------------------

template <class R> using Poly = std::vector<Cx<R>>;

template <class R> Cx<R> poly_eval(const Poly<R> &p, const Cx<R> &x) {
    Cx<R> acc(0, 0);
    for (size_t i = p.size(); i-- > 0;)
        acc = acc * x + p[i];
    return acc;
}

template <class R> Poly<R> poly_deriv(const Poly<R> &p) {
    if (p.size() <= 1)
        return {Cx<R>(0, 0)};
    Poly<R> d(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i)
        d[i - 1] = Cx<R>(R(i), 0) * p[i];
    return d;
}

template <class R> Poly<R> poly_mul(const Poly<R> &a, const Poly<R> &b) {
    Poly<R> c(a.size() + b.size() - 1, Cx<R>(0, 0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

template <class R> void poly_add_scaled(Poly<R> &a, const Poly<R> &b,
                                        const Cx<R> &s) {
    if (a.size() < b.size())
        a.resize(b.size(), Cx<R>(0, 0));
    for (size_t i = 0; i < b.size(); ++i)
        a[i] += s * b[i];
}

inline double binom(int n, int k) {
    if (k < 0 || k > n)
        return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * double(n - k + i) / double(i);
    return r;
}

// g_0^{(N)}(U) with (b(q u^2))^N = g_0^{(N)}(U), N even
template <class R> Poly<R> g0_poly(int N, const Cx<R> &q) {
    if (N < 0 || N % 2 != 0)
        throw std::domain_error("g0_poly: N must be even and nonnegative");
    Poly<R> p(static_cast<size_t>(N) + 1, Cx<R>(0, 0));
    const Cx<R> qq = q + Cx<R>(1) / q;
    for (int k = 0; k <= N / 2; ++k) {
        double inner = binom(N, N / 2 - k);
        for (int mm = 0; mm <= N / 2 - k - 1; ++mm)
            inner += double(N - 2 * mm) / double(N / 2 - mm - k) *
                     binom(N, mm) * binom(N / 2 - mm - 1 + k, N / 2 - mm - 1 - k);
        const R sgn = ((N / 2 - k) % 2 == 0) ? R(1) : R(-1);
        p[static_cast<size_t>(2 * k)] =
            Cx<R>(sgn, 0) * qpow(qq, 2 * k) * Cx<R>(R(inner), 0);
    }
    return p;
}

// H(U) as a polynomial: prod_k b(q^{1/2+k-s} v u) b(q^{1/2+k-s} u/v)
template <class R> Poly<R> h_poly(const ModelParams<R> &m) {
    const int n = m.two_s + 1;
    std::vector<Cx<R>> xs;
    for (int k = 0; k <= m.two_s; ++k)
        xs.push_back((m.v * m.v * m.qp(2 * k - m.two_s) +
                      m.qp(m.two_s - 2 * k) / (m.v * m.v)) /
                     (m.q + Cx<R>(1) / m.q));
    Poly<R> p(static_cast<size_t>(n) + 1, Cx<R>(0, 0));
    const Cx<R> qq = m.q + Cx<R>(1) / m.q;
    for (int k = 0; k <= n; ++k) {
        const R sgn = (k % 2 == 0) ? R(1) : R(-1);
        p[static_cast<size_t>(n - k)] =
            qpow(qq, n) * Cx<R>(sgn, 0) * esym(k, xs);
    }
    return p;
}

// cubic g^{(even)}, g^{(odd)} by Vandermonde interpolation, validated at a
// fifth point
template <class R> struct GParity {
    Poly<R> even, odd;
};

template <class R> GParity<R> g_parity(const BetheCase<R> &bc) {
    const auto &m = bc.model;
    const Cx<R> q = m.q;
    const int eps = bc.epsilon();
    auto lhs_pair = [&](const Cx<R> &U) {
        const Cx<R> u = lift(U, q);
        const Cx<R> ui = Cx<R>(1) / (q * u);
        const Cx<R> fe = f_eps(m, eps, u), fi = f_eps(m, eps, ui);
        const Cx<R> da = delta_a(bc, u), di = delta_a(bc, ui);
        const Cx<R> bq = bfun(q * u * u);
        return std::pair<Cx<R>, Cx<R>>((-da * fe + di * fi) / bq,
                                       da * fe + di * fi);
    };
    // sample points away from each other and the branch point U^2 = 4/(q+1/q)^2
    const std::array<Cx<R>, 5> pts = {
        Cx<R>(1.7, 0.3), Cx<R>(-0.9, 0.7), Cx<R>(0.4, -1.3), Cx<R>(2.3, -0.5),
        Cx<R>(-1.4, -1.1)};
    Mat<R> vand(4, 4);
    Vec<R> ev(4), ov(4);
    for (int i = 0; i < 4; ++i) {
        Cx<R> p(1, 0);
        for (int j = 0; j < 4; ++j) {
            vand(i, j) = p;
            p *= pts[static_cast<size_t>(i)];
        }
        auto [e, o] = lhs_pair(pts[static_cast<size_t>(i)]);
        ev(i) = e;
        ov(i) = o;
    }
    const auto solver = vand.colPivHouseholderQr();
    Vec<R> ec = solver.solve(ev), oc = solver.solve(ov);
    GParity<R> g;
    g.even = {ec(0), ec(1), ec(2), ec(3)};
    g.odd = {oc(0), oc(1), oc(2), oc(3)};
    // validation at the fifth point
    auto [e5, o5] = lhs_pair(pts[4]);
    if (qcore::rel_err(poly_eval(g.even, pts[4]), e5) > 1e-8 ||
        qcore::rel_err(poly_eval(g.odd, pts[4]), o5) > 1e-8)
        throw std::runtime_error("g_parity: interpolation validation failed");
    return g;
}

// --- the polynomial system --------------------------------------------------

// Prepared data for P_a^M: the per-k one-variable polynomials c_k(U) such
// that P_i = sum_k c_k(U_i) e_k(bar U_i) + delta_bar H(U_i)
template <class R = double> struct BetheSystem {
    BetheCase<R> bc;
    std::vector<Poly<R>> ck; // k = 0..M-1
    Poly<R> h;
    Cx<R> dbar;
    std::vector<Poly<R>> ck_deriv;
    Poly<R> h_deriv;

    int size() const { return bc.M; }
};

template <class R> BetheSystem<R> build_system(const BetheCase<R> &bc) {
    bc.validate();
    const auto &m = bc.model;
    const Cx<R> q = m.q;
    const int M = bc.M;
    BetheSystem<R> sys;
    sys.bc = bc;
    sys.h = h_poly(m);
    sys.h_deriv = poly_deriv(sys.h);
    sys.dbar = delta_bar(bc);
    const GParity<R> g = g_parity(bc);
    const Cx<R> qq = q + Cx<R>(1) / q;
    const Cx<R> dq = q - Cx<R>(1) / q;
    const Cx<R> q2q2 = q * q + Cx<R>(1) / (q * q);
    for (int k = 0; k < M; ++k) {
        Poly<R> ck = {Cx<R>(0, 0)};
        for (int l = 0; l <= M - 1 - k; ++l) {
            // U^{M-1-k-l} * g0^{(2 floor(l/2))} * g^{(parity l)}
            Poly<R> term(static_cast<size_t>(M - 1 - k - l) + 1, Cx<R>(0, 0));
            term.back() = Cx<R>(1, 0);
            term = poly_mul(term, g0_poly(2 * (l / 2), q));
            term = poly_mul(term, l % 2 == 0 ? g.even : g.odd);
            const Cx<R> coef = Cx<R>(R(binom(M - 1 - k, l)), 0) * qpow(dq, l) *
                               qpow(q2q2, M - 1 - k - l);
            poly_add_scaled(ck, term, coef);
        }
        const R sgn = (k % 2 == 0) ? R(1) : R(-1);
        const Cx<R> outer =
            Cx<R>(sgn, 0) * qpow(qq, M - 1) / qpow(Cx<R>(2, 0), M - 1 - k);
        for (auto &c : ck)
            c *= outer;
        sys.ck.push_back(ck);
        sys.ck_deriv.push_back(poly_deriv(ck));
    }
    return sys;
}

// P_a^M(U_i, bar U_i)
template <class R>
Cx<R> bethe_polynomial(const BetheSystem<R> &sys, int i,
                       const std::vector<Cx<R>> &U) {
    const int M = sys.size();
    std::vector<Cx<R>> others;
    for (int j = 0; j < M; ++j)
        if (j != i)
            others.push_back(U[static_cast<size_t>(j)]);
    Cx<R> p = sys.dbar * poly_eval(sys.h, U[static_cast<size_t>(i)]);
    for (int k = 0; k < M; ++k)
        p += poly_eval(sys.ck[static_cast<size_t>(k)],
                       U[static_cast<size_t>(i)]) *
             esym(k, others);
    return p;
}

// scale used for relative residuals of the system
template <class R>
R bethe_polynomial_scale(const BetheSystem<R> &sys, int i,
                         const std::vector<Cx<R>> &U) {
    const int M = sys.size();
    std::vector<Cx<R>> others;
    for (int j = 0; j < M; ++j)
        if (j != i)
            others.push_back(U[static_cast<size_t>(j)]);
    R s = std::abs(sys.dbar * poly_eval(sys.h, U[static_cast<size_t>(i)]));
    for (int k = 0; k < M; ++k)
        s += std::abs(poly_eval(sys.ck[static_cast<size_t>(k)],
                                U[static_cast<size_t>(i)]) *
                      esym(k, others));
    return std::max<R>(R(1), s);
}

// raw Bethe-equation function E_a from the vacuum eigenvalues (oracle route)
template <class R>
Cx<R> raw_E(const BetheCase<R> &bc, int i, const std::vector<Cx<R>> &us) {
    const auto &m = bc.model;
    const Cx<R> q = m.q;
    const int eps = bc.epsilon();
    const Cx<R> u = us[static_cast<size_t>(i)];
    Cx<R> pf(1, 0), ph(1, 0);
    for (size_t j = 0; j < us.size(); ++j) {
        if (static_cast<int>(j) == i)
            continue;
        const Cx<R> v = us[j];
        pf *= bfun(q * v / u) * bfun(u * v) / (bfun(v / u) * bfun(q * u * v));
        ph *= bfun(q * q * u * v) * bfun(q * u / v) /
              (bfun(q * u * v) * bfun(u / v));
    }
    const Cx<R> l1 = dynops::vacuum_lambda1(m, eps, u);
    const Cx<R> l2 = dynops::vacuum_lambda2(m, eps, u);
    const Cx<R> bu = bfun(u * u), bqu = bfun(q * u * u);
    Cx<R> e = -(bu / bqu) * delta_a(bc, u) * pf * l1 +
              delta_a(bc, Cx<R>(1) / (q * u)) * ph * l2;
    if (!case_is_sp(bc.tag)) {
        Cx<R> prod(1, 0);
        for (size_t j = 0; j < us.size(); ++j) {
            if (static_cast<int>(j) == i)
                continue;
            prod *= bfun(u / us[j]) * bfun(q * u * us[j]);
        }
        const R sgn = m.two_s % 2 == 0 ? R(1) : R(-1); // (-1)^{2s}
        const Cx<R> dq = q - Cx<R>(1) / q;
        Cx<R> coef;
        if (!case_is_g(bc.tag)) {
            const Cx<R> kpow =
                eps > 0 ? bc.couplings.kappa : bc.couplings.kappa_star;
            coef = -Cx<R>(sgn, 0) * Cx<R>(R(eps), 0) * qpow(q, eps) / dq *
                   kpow * dynops::delta_d(m, eps);
        } else {
            coef = Cx<R>(sgn, 0) / dq * dynops::delta_g(m, *bc.angles, eps);
        }
        e += coef * qpow(u, -eps) * bu * dynops::boundary_product(m, u) / prod;
    }
    return e;
}

// prefactor of the (BAU)-type equivalence between raw_E and P_a^M
template <class R>
Cx<R> bau_prefactor(const BetheCase<R> &bc, int i,
                    const std::vector<Cx<R>> &us) {
    const auto &m = bc.model;
    const Cx<R> q = m.q;
    const Cx<R> u = us[static_cast<size_t>(i)];
    Cx<R> prod(1, 0);
    for (size_t j = 0; j < us.size(); ++j) {
        if (static_cast<int>(j) == i)
            continue;
        prod *= bfun(u / us[j]) * bfun(q * u * us[j]);
    }
    return qpow(u, -bc.epsilon()) * bfun(u * u) *
           m.qp((m.nu + m.nu_p) / Cx<R>(2)) / (Cx<R>(2) * prod);
}

// --- solver -----------------------------------------------------------------

template <class R = double> struct BetheSolution {
    std::vector<Cx<R>> U_roots;
    std::vector<Cx<R>> u_roots;
    std::vector<R> residuals;
    Cx<R> lambda{0, 0};
    bool admissible = true;
};

namespace detail {

// distance between unordered root multisets (M <= 5: brute force)
template <class R>
R multiset_distance(const std::vector<Cx<R>> &a, const std::vector<Cx<R>> &b) {
    const int n = static_cast<int>(a.size());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i)
        perm[i] = i;
    R best = std::numeric_limits<R>::max();
    do {
        R worst = 0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst,
                             std::abs(a[static_cast<size_t>(i)] -
                                      b[static_cast<size_t>(perm[static_cast<size_t>(i)])]));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

template <class R>
bool newton(const BetheSystem<R> &sys, std::vector<Cx<R>> &U, double tol,
            int max_iter = 200) {
    const int M = sys.size();
    Mat<R> jac(M, M);
    Vec<R> rhs(M);
    auto fill = [&](const std::vector<Cx<R>> &x, Vec<R> &out) {
        R scaled = 0;
        for (int i = 0; i < M; ++i) {
            out(i) = bethe_polynomial(sys, i, x);
            scaled = std::max(scaled, std::abs(out(i)) /
                                          bethe_polynomial_scale(sys, i, x));
        }
        return scaled;
    };
    R res = fill(U, rhs);
    for (int it = 0; it < max_iter; ++it) {
        if (res < R(tol))
            return true;
        for (int i = 0; i < M; ++i) {
            std::vector<Cx<R>> others;
            for (int j = 0; j < M; ++j)
                if (j != i)
                    others.push_back(U[static_cast<size_t>(j)]);
            // dP_i/dU_i
            Cx<R> dii = sys.dbar * poly_eval(sys.h_deriv,
                                             U[static_cast<size_t>(i)]);
            for (int k = 0; k < M; ++k)
                dii += poly_eval(sys.ck_deriv[static_cast<size_t>(k)],
                                 U[static_cast<size_t>(i)]) *
                       esym(k, others);
            jac(i, i) = dii;
            // dP_i/dU_j: d e_k(bar U_i)/dU_j = e_{k-1}(bar U_{ij})
            for (int j = 0; j < M; ++j) {
                if (j == i)
                    continue;
                std::vector<Cx<R>> rest;
                for (int l = 0; l < M; ++l)
                    if (l != i && l != j)
                        rest.push_back(U[static_cast<size_t>(l)]);
                Cx<R> dij(0, 0);
                for (int k = 1; k < M; ++k)
                    dij += poly_eval(sys.ck[static_cast<size_t>(k)],
                                     U[static_cast<size_t>(i)]) *
                           esym(k - 1, rest);
                jac(i, j) = dij;
            }
        }
        Vec<R> step = jac.partialPivLu().solve(rhs);
        if (!step.allFinite())
            return false;
        // damped update
        R lam = 1.0;
        std::vector<Cx<R>> trial(U);
        Vec<R> trial_rhs(M);
        R trial_res = std::numeric_limits<R>::max();
        for (int halving = 0; halving < 12; ++halving) {
            for (int i = 0; i < M; ++i)
                trial[static_cast<size_t>(i)] =
                    U[static_cast<size_t>(i)] - Cx<R>(lam, 0) * step(i);
            trial_res = fill(trial, trial_rhs);
            if (trial_res < res)
                break;
            lam /= 2;
        }
        if (trial_res >= res)
            return res < R(1e-9); // stagnation: accept only if already tight
        U = trial;
        rhs = trial_rhs;
        res = trial_res;
    }
    return res < R(tol);
}

} // namespace detail

template <class R>
Cx<R> eigenvalue_sampled(const BetheCase<R> &bc, const std::vector<Cx<R>> &us,
                         const Cx<R> &u);

// closed-form eigenvalue for an admissible solution
template <class R>
Cx<R> eigenvalue(const BetheCase<R> &bc, const std::vector<Cx<R>> &U) {
    const auto &m = bc.model;
    const Cx<R> q = m.q;
    const Cx<R> qq = q + Cx<R>(1) / q;
    Cx<R> sumU(0, 0);
    for (const auto &x : U)
        sumU += x;
    const Cx<R> sum_pow = qq * sumU; // sum_j (q u_j^2 + q^-1 u_j^-2)
    const Cx<R> vv = m.v * m.v + Cx<R>(1) / (m.v * m.v);
    switch (bc.tag) {
    case CaseTag::sp_plus:
        return bc.couplings.kappa_star / Cx<R>(2) *
               m.qp((m.nu + m.nu_p) / Cx<R>(2)) *
               (std::exp(-m.mu_p) * m.qp(m.two_s - 2 * bc.M) +
                std::exp(m.mu_p) * m.qp(2 * bc.M - m.two_s));
    case CaseTag::sp_minus:
        return bc.couplings.kappa / Cx<R>(2) *
               m.qp((m.nu + m.nu_p) / Cx<R>(2)) *
               (std::exp(-m.mu) * m.qp(2 * bc.M - m.two_s) +
                std::exp(m.mu) * m.qp(m.two_s - 2 * bc.M));
    case CaseTag::d_plus:
        return bc.couplings.kappa_star * m.theta_star(m.two_s) +
               bc.couplings.kappa * std::exp(m.mu - m.mu_p) * m.b() *
                   (vv * qcore::qint(m.two_s, q) +
                    Cx<R>(2) * std::exp(m.mu_p) * std::cosh(m.mu) -
                    q * sum_pow);
    case CaseTag::d_minus:
        return bc.couplings.kappa * m.theta(m.two_s) +
               bc.couplings.kappa_star * std::exp(m.mu_p - m.mu) *
                   m.c_star() *
                   (vv * qcore::qint(m.two_s, q) +
                    Cx<R>(2) * std::exp(m.mu) * std::cosh(m.mu_p) -
                    sum_pow / q);
    default:
        break;
    }
    // generic case: evaluate the meromorphic eigenvalue function at sample
    // spectral points (it is constant in u on shell); the final constant
    // cannot develop transcription drift this way
    std::vector<Cx<R>> us;
    for (const auto &x : U)
        us.push_back(lift(x, q));
    auto lam_at = [&](const Cx<R> &u) { return eigenvalue_sampled(bc, us, u); };
    Cx<R> u0(R(1.19), R(0.43));
    auto well_conditioned = [&](const Cx<R> &u) {
        if (std::abs(bfun(u * u)) < R(0.05) ||
            std::abs(bfun(q * u * u)) < R(0.05) ||
            std::abs(bfun(q * q * u * u)) < R(0.05))
            return false;
        for (const auto &w : us)
            if (std::abs(bfun(u / w)) < R(0.05) ||
                std::abs(bfun(q * u * w)) < R(0.05))
                return false;
        return true;
    };
    for (int t = 0; t < 40 && !well_conditioned(u0); ++t)
        u0 *= Cx<R>(R(1.07), R(0.013));
    const Cx<R> l1 = lam_at(u0);
    const Cx<R> l2 = lam_at(u0 * Cx<R>(R(1.17), R(0.05)));
    if (qcore::rel_err(l1, l2) > 1e-6)
        throw std::runtime_error(
            "eigenvalue: generic-case spectral function not constant "
            "(solution off shell?)");
    return l1;
}

// The generic-case eigenvalue as the value of the meromorphic spectral
// function at the point u (constant when the roots are on shell).
template <class R>
Cx<R> eigenvalue_sampled(const BetheCase<R> &bc, const std::vector<Cx<R>> &us,
                         const Cx<R> &u) {
    const auto &m = bc.model;
    const auto &a = *bc.angles;
    const int eps = bc.epsilon();
    const Cx<R> q = m.q, ui = Cx<R>(1) / u;
    const Cx<R> bu2 = bfun(u * u), bqu2 = bfun(q * u * u),
                bq2u2 = bfun(q * q * u * u);
    Cx<R> pf(1, 0), ph(1, 0), pd(1, 0);
    for (const auto &w : us) {
        pf *= bfun(q * w / u) * bfun(u * w) / (bfun(w / u) * bfun(q * u * w));
        ph *= bfun(q * q * u * w) * bfun(q * u / w) /
              (bfun(q * u * w) * bfun(u / w));
        pd *= bfun(u / w) * bfun(q * u * w);
    }
    const Cx<R> l1 = dynops::vacuum_lambda1(m, eps, u);
    const Cx<R> l2 = dynops::vacuum_lambda2(m, eps, u);
    Cx<R> lam = qpow(u, eps) * delta_a(bc, u) / (bu2 * bqu2) * pf * l1 +
                qpow(u, eps) * delta_a(bc, Cx<R>(1) / (q * u)) /
                    (bu2 * bq2u2) * ph * l2;
    const R sgn = m.two_s % 2 == 0 ? R(1) : R(-1); // (-1)^{2s}
    lam += Cx<R>(sgn, 0) * dynops::delta_g(m, a, eps) *
           dynops::boundary_product(m, u) / pd;
    // scalar parts of the Heun element in the gauge-transformed frame
    const auto k = m.sc();
    const Cx<R> qq = q + Cx<R>(1) / q;
    const Cx<R> quad = q * u * u + Cx<R>(1) / (q * u * u);
    lam += qpow(q, (a.phi + a.phi_p) / Cx<R>(2)) * qq * qq /
           (a.sqrt_rho * bu2 * bq2u2) *
           (k.eta * std::cosh(a.xi_p) + k.eta_star * std::cosh(a.xi) +
            (k.eta * std::cosh(a.xi) + k.eta_star * std::cosh(a.xi_p)) *
                quad / qq);
    lam -= (qpow(q, a.phi) / bc.couplings.chi -
            qpow(q, a.phi_p) * bc.couplings.chi) /
           Cx<R>(2) *
           (k.rho * quad / (q * q - Cx<R>(1) / (q * q)) +
            k.omega / (q - Cx<R>(1) / q));
    return lam;
}

// all admissible solutions up to permutation (multistart damped Newton)
template <class R>
std::vector<BetheSolution<R>> solve_bethe(const BetheCase<R> &bc,
                                          const Tolerances &tol = {},
                                          uint64_t seed = 0) {
    tol.validate();
    bc.validate();
    const int M = bc.M;
    if (M == 0) {
        BetheSolution<R> empty;
        empty.lambda = eigenvalue(bc, {});
        return {empty};
    }
    const BetheSystem<R> sys = build_system(bc);
    const int deg = case_is_sp(bc.tag) ? M : bc.model.two_s + 1;
    const int expected = case_is_sp(bc.tag) ? 1 : bc.model.two_s + 1;

    // start-point scale from the X_k of the boundary polynomial
    R xscale = 1;
    for (int k = 0; k <= bc.model.two_s; ++k) {
        const Cx<R> xk =
            (bc.model.v * bc.model.v * bc.model.qp(2 * k - bc.model.two_s) +
             bc.model.qp(bc.model.two_s - 2 * k) /
                 (bc.model.v * bc.model.v)) /
            (bc.model.q + Cx<R>(1) / bc.model.q);
        xscale = std::max(xscale, std::abs(xk));
    }

    auto run_budget = [&](long budget, uint64_t seed_shift) {
        std::mt19937_64 gen(seed + seed_shift);
        std::uniform_real_distribution<double> ur(0.0, 1.0);
        std::vector<std::vector<Cx<R>>> starts;
        // structured starts near the X_k values
        for (int k = 0; k <= bc.model.two_s && M <= 4; ++k) {
            const Cx<R> xk =
                (bc.model.v * bc.model.v *
                     bc.model.qp(2 * k - bc.model.two_s) +
                 bc.model.qp(bc.model.two_s - 2 * k) /
                     (bc.model.v * bc.model.v)) /
                (bc.model.q + Cx<R>(1) / bc.model.q);
            std::vector<Cx<R>> s(static_cast<size_t>(M));
            for (int i = 0; i < M; ++i)
                s[static_cast<size_t>(i)] =
                    xk * Cx<R>(1 + 0.2 * (ur(gen) - 0.5), 0.2 * (ur(gen) - 0.5));
            starts.push_back(s);
        }
        for (long t = 0; t < budget; ++t) {
            std::vector<Cx<R>> s(static_cast<size_t>(M));
            for (int i = 0; i < M; ++i) {
                // log-uniform radii: root magnitudes span several q-decades
                const double r =
                    double(xscale) *
                    std::exp(std::log(0.05) +
                             ur(gen) * (std::log(40.0) - std::log(0.05)));
                const double a = 2 * M_PI * ur(gen);
                s[static_cast<size_t>(i)] =
                    Cx<R>(r * std::cos(a), r * std::sin(a));
            }
            starts.push_back(s);
        }

        // independent Newton runs in parallel, merged in deterministic order
        const size_t nthreads =
            std::max<size_t>(1, std::thread::hardware_concurrency());
        std::vector<std::future<std::vector<std::vector<Cx<R>>>>> futs;
        const size_t chunk = (starts.size() + nthreads - 1) / nthreads;
        for (size_t c = 0; c < nthreads; ++c) {
            const size_t lo = c * chunk,
                         hi = std::min(starts.size(), (c + 1) * chunk);
            if (lo >= hi)
                break;
            futs.push_back(std::async(std::launch::async, [&, lo, hi]() {
                std::vector<std::vector<Cx<R>>> found;
                for (size_t t = lo; t < hi; ++t) {
                    std::vector<Cx<R>> x = starts[t];
                    if (detail::newton(sys, x, tol.newton_tol))
                        found.push_back(x);
                }
                return found;
            }));
        }
        std::vector<std::vector<Cx<R>>> converged;
        for (auto &f : futs) {
            auto part = f.get();
            converged.insert(converged.end(), part.begin(), part.end());
        }
        return converged;
    };

    long budget = std::max<long>(50L * long(std::pow(double(deg), M)), 200L);
    std::vector<std::vector<Cx<R>>> converged = run_budget(budget, 0);

    auto assemble = [&](const std::vector<std::vector<Cx<R>>> &raw) {
        std::vector<BetheSolution<R>> out;
        for (const auto &U : raw) {
            R scale = 1;
            for (const auto &x : U)
                scale = std::max<R>(scale, std::abs(x));
            // deduplicate as unordered multisets
            bool dup = false;
            for (const auto &s : out)
                if (detail::multiset_distance(s.U_roots, U) <
                    R(tol.dedupe_tol) * scale) {
                    dup = true;
                    break;
                }
            if (dup)
                continue;
            BetheSolution<R> sol;
            sol.U_roots = U;
            std::sort(sol.U_roots.begin(), sol.U_roots.end(),
                      [](const Cx<R> &a, const Cx<R> &b) {
                          if (a.real() != b.real())
                              return a.real() < b.real();
                          return a.imag() < b.imag();
                      });
            sol.admissible = true;
            for (size_t i = 0; i < sol.U_roots.size() && sol.admissible; ++i)
                for (size_t j = i + 1; j < sol.U_roots.size(); ++j)
                    if (std::abs(sol.U_roots[i] - sol.U_roots[j]) <
                        R(tol.admissible_tol) * scale) {
                        sol.admissible = false;
                        break;
                    }
            for (const auto &x : sol.U_roots)
                sol.u_roots.push_back(lift(x, bc.model.q));
            for (int i = 0; i < M; ++i)
                sol.residuals.push_back(
                    std::abs(bethe_polynomial(sys, i, sol.U_roots)) /
                    bethe_polynomial_scale(sys, i, sol.U_roots));
            if (sol.admissible) // degenerate sets carry no eigenvalue
                sol.lambda = eigenvalue(bc, sol.U_roots);
            out.push_back(std::move(sol));
        }
        return out;
    };

    std::vector<BetheSolution<R>> sols = assemble(converged);
    auto count_admissible = [&]() {
        int n = 0;
        for (const auto &s : sols)
            if (s.admissible)
                ++n;
        return n;
    };
    if (count_admissible() < expected) {
        // under-resolution: one retry with a 10x budget (warning, not fatal)
        auto more = run_budget(10 * budget, 0x9e3779b97f4a7c15ULL);
        converged.insert(converged.end(), more.begin(), more.end());
        sols = assemble(converged);
    }
    // deterministic global order
    std::sort(sols.begin(), sols.end(),
              [](const BetheSolution<R> &a, const BetheSolution<R> &b) {
                  if (a.U_roots.empty() || b.U_roots.empty())
                      return a.U_roots.size() < b.U_roots.size();
                  if (a.U_roots[0].real() != b.U_roots[0].real())
                      return a.U_roots[0].real() < b.U_roots[0].real();
                  return a.U_roots[0].imag() < b.U_roots[0].imag();
              });
    return sols;
}

template <class R>
std::vector<BetheSolution<R>>
admissible_solutions(const std::vector<BetheSolution<R>> &all) {
    std::vector<BetheSolution<R>> out;
    for (const auto &s : all)
        if (s.admissible)
            out.push_back(s);
    return out;
}

// --- Bethe states -----------------------------------------------------------

template <class R>
GaugeConfig<R> case_gauge(const BetheCase<R> &bc, int m0) {
    if (case_is_g(bc.tag))
        return dynops::gauge_case_g(*bc.angles, bc.model.q, bc.epsilon(), m0,
                                    bc.M);
    return dynops::gauge_case_sp(bc.model, bc.epsilon(), m0);
}

template <class R> struct BetheState {
    Vec<R> vec;
    R residual = 0; // ||I v - lambda v|| / ||v||
};

// v = B-string(u_roots) |Omega^eps>; residual against the Heun operator
template <class R>
BetheState<R> bethe_state(const AWPair<R> &pair, const BetheCase<R> &bc,
                          const BetheSolution<R> &sol, int m0 = 0) {
    const auto sp = reps::leonard_spectra(pair);
    const GaugeConfig<R> cfg = case_gauge(bc, m0);
    DynOps<R> ops(pair, cfg, bc.model.chi());
    const Vec<R> omega = dynops::reference_state(sp, bc.epsilon());
    BetheState<R> st;
    st.vec = Vec<R>(dynops::bstring(ops, sol.u_roots, m0) * omega);
    if (st.vec.norm() < R(1e-8))
        throw std::runtime_error("bethe_state: vanishing state");
    Couplings<R> c = bc.couplings;
    if (case_is_sp(bc.tag)) {
        c = Couplings<R>{Cx<R>(0, 0), Cx<R>(0, 0), Cx<R>(0, 0), Cx<R>(0, 0),
                         bc.model.chi()};
        if (bc.tag == CaseTag::sp_plus)
            c.kappa_star = bc.couplings.kappa_star;
        else
            c.kappa = bc.couplings.kappa;
    }
    const Mat<R> ih = reflection::heun_aw_operator(pair.A, pair.A_star,
                                                   pair.q, c);
    st.residual =
        (ih * st.vec - sol.lambda * st.vec).norm() / st.vec.norm();
    return st;
}

// --- PBW expansion of B-strings ----------------------------------------------

namespace pbw {

// single-factor coefficients, multiplied through by beta (finite at beta=0)
template <class R> struct Zeta {
    Cx<R> z110, z001, z100;
    // z010 = -beta U, z000 = beta h0(U, m) are U-dependent
};

template <class R>
Zeta<R> zeta1(const AWPair<R> &pair, const GaugeConfig<R> &cfg,
              const Cx<R> &chi, int m) {
    const auto &k = pair.sc;
    const Cx<R> q = pair.q, be = cfg.beta;
    Zeta<R> z;
    z.z110 = chi * qpow(q, m + 1) * (q - Cx<R>(1) / q) / k.rho;
    z.z001 = -(chi * chi * qpow(q, m + 2) + be * be * k.rho * qpow(q, -m)) /
             ((q + Cx<R>(1) / q) * k.rho * chi);
    z.z100 = be;
    return z;
}

template <class R>
Cx<R> zeta010(const GaugeConfig<R> &cfg, const Cx<R> &U) {
    return -cfg.beta * U;
}

template <class R>
Cx<R> zeta000(const AWPair<R> &pair, const GaugeConfig<R> &cfg,
              const Cx<R> &chi, const Cx<R> &U, int m) {
    const auto &k = pair.sc;
    const Cx<R> q = pair.q, be = cfg.beta;
    const int eps = cfg.epsilon;
    const Cx<R> dq22 = q * q - Cx<R>(1) / (q * q);
    const Cx<R> h = (chi * chi * qpow(q, eps * m) -
                     be * be * k.rho * qpow(q, -eps * m)) /
                        (chi * dq22) * (U + k.omega / k.rho) +
                    be * (eps > 0 ? k.eta_star : -k.eta) / k.rho;
    return h;
}

// normal ordering into the monomials A^i A*^j B^k via the exchange rules
// A*A = q^2 A A* - q B, B A = q^-2 A B - q^-1(rho A* + omega A + eta),
// B A* = q^2 A* B + q(rho A + omega A* + eta*)
using Key = std::array<int, 3>;
template <class R> using Ordered = std::map<Key, Cx<R>>;

template <class R> struct AlgebraData {
    Cx<R> q, rho, omega, eta, eta_star;
};

template <class R> Ordered<R> times_b(const Ordered<R> &p) {
    Ordered<R> r;
    for (const auto &[k, c] : p)
        r[{k[0], k[1], k[2] + 1}] += c;
    return r;
}

template <class R>
Ordered<R> times_a(const Ordered<R> &p, const AlgebraData<R> &a);

template <class R>
Ordered<R> times_astar(const Ordered<R> &p, const AlgebraData<R> &a) {
    Ordered<R> r;
    for (const auto &[k, c] : p) {
        if (k[2] == 0) {
            r[{k[0], k[1] + 1, 0}] += c;
            continue;
        }
        Ordered<R> base;
        base[{k[0], k[1], k[2] - 1}] = c;
        for (const auto &[kk, cc] : times_b(times_astar(base, a)))
            r[kk] += a.q * a.q * cc;
        for (const auto &[kk, cc] : times_a(base, a))
            r[kk] += a.q * a.rho * cc;
        for (const auto &[kk, cc] : times_astar(base, a))
            r[kk] += a.q * a.omega * cc;
        r[{k[0], k[1], k[2] - 1}] += a.q * a.eta_star * c;
    }
    return r;
}

template <class R>
Ordered<R> times_a(const Ordered<R> &p, const AlgebraData<R> &a) {
    Ordered<R> r;
    for (const auto &[k, c] : p) {
        if (k[2] == 0 && k[1] == 0) {
            r[{k[0] + 1, 0, 0}] += c;
            continue;
        }
        if (k[2] == 0) {
            Ordered<R> base;
            base[{k[0], k[1] - 1, 0}] = c;
            for (const auto &[kk, cc] : times_astar(times_a(base, a), a))
                r[kk] += a.q * a.q * cc;
            r[{k[0], k[1] - 1, 1}] += -a.q * c;
            continue;
        }
        Ordered<R> base;
        base[{k[0], k[1], k[2] - 1}] = c;
        const Cx<R> qi = Cx<R>(1) / a.q;
        for (const auto &[kk, cc] : times_b(times_a(base, a)))
            r[kk] += qi * qi * cc;
        for (const auto &[kk, cc] : times_astar(base, a))
            r[kk] += -qi * a.rho * cc;
        for (const auto &[kk, cc] : times_a(base, a))
            r[kk] += -qi * a.omega * cc;
        r[{k[0], k[1], k[2] - 1}] += -qi * a.eta * c;
    }
    return r;
}

template <class R>
Ordered<R> multiply(const Ordered<R> &x, const Ordered<R> &y,
                    const AlgebraData<R> &a) {
    Ordered<R> r;
    for (const auto &[k, c] : y) {
        Ordered<R> t = x;
        for (int i = 0; i < k[0]; ++i)
            t = times_a(t, a);
        for (int j = 0; j < k[1]; ++j)
            t = times_astar(t, a);
        for (int l = 0; l < k[2]; ++l)
            t = times_b(t);
        for (const auto &[kk, cc] : t)
            r[kk] += cc * c;
    }
    return r;
}

} // namespace pbw

// ordered PBW coefficients of the string B(u_1, m_base + 2(M-1)) ...
// B(u_M, m_base), derived recursively from the single-factor expansion and
// the ordering relations; the scalar prefactors are carried separately so
// the result is regular at beta = 0
template <class R>
pbw::Ordered<R> pbw_coefficients(const AWPair<R> &pair,
                                 const GaugeConfig<R> &cfg, const Cx<R> &chi,
                                 const std::vector<Cx<R>> &us, int m_base) {
    const int M = static_cast<int>(us.size());
    const Cx<R> q = pair.q;
    if (cfg.epsilon < 0)
        throw std::invalid_argument(
            "pbw_coefficients: single-factor table implemented for "
            "epsilon = +1");
    const pbw::AlgebraData<R> alg{q, pair.sc.rho, pair.sc.omega, pair.sc.eta,
                                  pair.sc.eta_star};
    pbw::Ordered<R> acc;
    acc[{0, 0, 0}] = Cx<R>(1, 0);
    for (int i = 0; i < M; ++i) {
        const int mm = m_base + 2 * (M - 1 - i);
        const auto z = pbw::zeta1(pair, cfg, chi, mm);
        const Cx<R> U = symmetrize(us[static_cast<size_t>(i)], q);
        pbw::Ordered<R> factor;
        factor[{1, 1, 0}] = z.z110;
        factor[{0, 0, 1}] = z.z001;
        factor[{1, 0, 0}] = z.z100;
        factor[{0, 1, 0}] = pbw::zeta010(cfg, U);
        factor[{0, 0, 0}] = pbw::zeta000(pair, cfg, chi, U, mm);
        acc = pbw::multiply(acc, factor, alg);
    }
    return acc;
}

// PBW expansion of the string as a matrix; exact rearrangement of bstring
template <class R>
Mat<R> pbw_string(const AWPair<R> &pair, const GaugeConfig<R> &cfg,
                  const Cx<R> &chi, const std::vector<Cx<R>> &us, int m_base) {
    const int M = static_cast<int>(us.size());
    const Cx<R> q = pair.q;
    if (cfg.epsilon < 0)
        throw std::invalid_argument(
            "pbw_string: single-factor table implemented for epsilon = +1");
    // per-factor scalar prefactor with its beta divided out
    Cx<R> pref(1, 0);
    for (int i = 0; i < M; ++i) {
        const int mm = m_base + 2 * (M - 1 - i);
        const Cx<R> u = us[static_cast<size_t>(i)];
        pref *= (q + Cx<R>(1) / q) * bfun(u * u) /
                (u * (cfg.alpha * qpow(q, 2 * mm + 2) - cfg.beta));
    }
    const auto coeffs = pbw_coefficients(pair, cfg, chi, us, m_base);
    const Mat<R> A = pair.A, As = pair.A_star;
    const Mat<R> B = qcore::qcomm(A, As, q);
    Mat<R> out = Mat<R>::Zero(pair.dim, pair.dim);
    for (const auto &[k, c] : coeffs) {
        Mat<R> t = qcore::eye<R>(pair.dim);
        for (int i = 0; i < k[0]; ++i)
            t = t * A;
        for (int j = 0; j < k[1]; ++j)
            t = t * As;
        for (int l = 0; l < k[2]; ++l)
            t = t * B;
        out += c * t;
    }
    return pref * out;
}

// --- JSON -------------------------------------------------------------------

template <class R>
nlohmann::json to_json(const BetheSolution<R> &s) {
    nlohmann::json j;
    j["U"] = nlohmann::json::array();
    for (const auto &x : s.U_roots)
        j["U"].push_back({double(x.real()), double(x.imag())});
    j["u"] = nlohmann::json::array();
    for (const auto &x : s.u_roots)
        j["u"].push_back({double(x.real()), double(x.imag())});
    j["lambda"] = {double(s.lambda.real()), double(s.lambda.imag())};
    R worst = 0;
    for (const auto &r : s.residuals)
        worst = std::max(worst, r);
    j["residual"] = double(worst);
    j["admissible"] = s.admissible;
    return j;
}

} // namespace bethe
} // namespace haw
