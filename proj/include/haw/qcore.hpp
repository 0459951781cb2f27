#pragma once

// Scalar q-arithmetic and shared numeric utilities: q-numbers, q-Pochhammer
// symbols, b(x) = x - 1/x, elementary symmetric polynomials, complex powers
// and residual helpers used across the library.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace haw {

template <class R = double> using Cx = std::complex<R>;
template <class R = double>
using Mat = Eigen::Matrix<Cx<R>, Eigen::Dynamic, Eigen::Dynamic>;
template <class R = double>
using Vec = Eigen::Matrix<Cx<R>, Eigen::Dynamic, 1>;

struct Tolerances {
    double newton_tol = 1e-13;
    double residual_tol = 1e-10;
    double dedupe_tol = 1e-7;
    double admissible_tol = 1e-7;

    void validate() const {
        if (newton_tol <= 0 || residual_tol <= 0 || dedupe_tol <= 0 ||
            admissible_tol <= 0)
            throw std::invalid_argument("Tolerances: all must be positive");
        if (newton_tol > residual_tol)
            throw std::invalid_argument(
                "Tolerances: newton_tol must not exceed residual_tol");
    }
};

namespace qcore {

// q^x as exp(x log q), principal branch.
template <class R> Cx<R> qpow(const Cx<R> &q, const Cx<R> &x) {
    return std::exp(x * std::log(q));
}
template <class R> Cx<R> qpow(const Cx<R> &q, R x) {
    return qpow(q, Cx<R>(x, 0));
}
template <class R> Cx<R> qpow(const Cx<R> &q, int x) {
    return qpow(q, Cx<R>(R(x), 0));
}

// [n]_q = (q^n - q^-n)/(q - q^-1), with [0]_q = 1 by convention.
template <class R> Cx<R> qnum(int n, const Cx<R> &q) {
    if (n == 0)
        return Cx<R>(1, 0);
    const Cx<R> d = q - Cx<R>(1, 0) / q;
    if (std::abs(d) < std::numeric_limits<R>::epsilon() * 8)
        throw std::domain_error("qnum: q = +-1 is singular for n != 0");
    return (qpow(q, n) - qpow(q, -n)) / d;
}

// Natural q-integer (no [0]_q = 1 override); used inside eigenvalue formulas
// where the M = 0 sector must give zero.
template <class R> Cx<R> qint(int n, const Cx<R> &q) {
    if (n == 0)
        return Cx<R>(0, 0);
    return qnum(n, q);
}

// (a; q)_n = prod_{k=0}^{n-1} (1 - a q^k)
template <class R> Cx<R> qpoch(const Cx<R> &a, const Cx<R> &q, int n) {
    if (n < 0)
        throw std::domain_error("qpoch: negative order");
    Cx<R> p(1, 0), aq = a;
    for (int k = 0; k < n; ++k) {
        p *= (Cx<R>(1, 0) - aq);
        aq *= q;
    }
    return p;
}

// Square root pinned to Re >= 0, and Im >= 0 on the imaginary axis. Avoids
// the -0.0 branch-cut instability of std::sqrt for negative reals.
template <class R> Cx<R> sqrt_det(const Cx<R> &z) {
    Cx<R> w = std::sqrt(z);
    if (w.real() < 0)
        w = -w;
    if (std::abs(w.real()) <= R(1e-14) * std::abs(w) && w.imag() < 0)
        w = -w;
    return w;
}

// b(x) = x - 1/x
template <class R> Cx<R> bfun(const Cx<R> &x) {
    if (x == Cx<R>(0, 0))
        throw std::domain_error("bfun: x = 0");
    return x - Cx<R>(1, 0) / x;
}

// Elementary symmetric polynomial e_k(xs), e_0 = 1.
template <class R> Cx<R> esym(int k, const std::vector<Cx<R>> &xs) {
    const int n = static_cast<int>(xs.size());
    if (k < 0 || k > n)
        throw std::domain_error("esym: k out of range");
    std::vector<Cx<R>> e(static_cast<size_t>(k) + 1, Cx<R>(0, 0));
    e[0] = Cx<R>(1, 0);
    for (int i = 0; i < n; ++i)
        for (int j = std::min(k, i + 1); j >= 1; --j)
            e[j] += xs[static_cast<size_t>(i)] * e[j - 1];
    return e[static_cast<size_t>(k)];
}

// Relative closeness ||a-b|| <= tol * max(1, |a|, |b|).
template <class R>
bool rel_close(const Cx<R> &a, const Cx<R> &b, double tol) {
    const R scale = std::max<R>(R(1), std::max(std::abs(a), std::abs(b)));
    return std::abs(a - b) <= R(tol) * scale;
}

template <class R> R rel_err(const Cx<R> &a, const Cx<R> &b) {
    const R scale = std::max<R>(R(1), std::max(std::abs(a), std::abs(b)));
    return std::abs(a - b) / scale;
}

// ||A - B||_F / max(1, ||A||_F, ||B||_F)
template <class R> R rel_err(const Mat<R> &a, const Mat<R> &b) {
    const R scale = std::max<R>(R(1), std::max(a.norm(), b.norm()));
    return (a - b).norm() / scale;
}

// Residual of sum-of-terms identities, scaled by the largest term so
// cancellation-heavy checks are judged against their conditioning.
template <class R> R sum_residual(const std::vector<Mat<R>> &terms) {
    if (terms.empty())
        return R(0);
    Mat<R> s = terms[0];
    R scale = terms[0].norm();
    for (size_t i = 1; i < terms.size(); ++i) {
        s += terms[i];
        scale = std::max(scale, terms[i].norm());
    }
    return s.norm() / std::max<R>(R(1), scale);
}

template <class R> R sum_residual_vec(const std::vector<Vec<R>> &terms) {
    if (terms.empty())
        return R(0);
    Vec<R> s = terms[0];
    R scale = terms[0].norm();
    for (size_t i = 1; i < terms.size(); ++i) {
        s += terms[i];
        scale = std::max(scale, terms[i].norm());
    }
    return s.norm() / std::max<R>(R(1), scale);
}

template <class R> Mat<R> comm(const Mat<R> &x, const Mat<R> &y) {
    return x * y - y * x;
}

// [X, Y]_q = q X Y - q^-1 Y X
template <class R>
Mat<R> qcomm(const Mat<R> &x, const Mat<R> &y, const Cx<R> &q) {
    return q * (x * y) - (Cx<R>(1, 0) / q) * (y * x);
}

template <class R> Mat<R> kron(const Mat<R> &a, const Mat<R> &b) {
    Mat<R> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

template <class R> Mat<R> eye(Eigen::Index n) {
    return Mat<R>::Identity(n, n);
}

// Spectral-parameter draws from the annulus 0.5 < |u| < 2, rejecting the
// neighborhoods of the removable factors |u^2 - u^-2| < 0.1.
template <class R> class SpectralSampler {
  public:
    explicit SpectralSampler(uint64_t seed) : gen_(seed) {}

    Cx<R> draw() {
        std::uniform_real_distribution<double> rad(0.55, 1.9);
        std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
        for (int tries = 0; tries < 1000; ++tries) {
            Cx<R> u = std::polar<R>(R(rad(gen_)), R(ang(gen_)));
            if (std::abs(u * u - Cx<R>(1, 0) / (u * u)) > R(0.1))
                return u;
        }
        return Cx<R>(R(1.3), R(0.4));
    }

    // Draw avoiding |b(u/w)| or |b(q u w)| small against a set of points.
    Cx<R> draw_avoiding(const std::vector<Cx<R>> &pts, const Cx<R> &q,
                        double margin = 0.05) {
        for (int tries = 0; tries < 2000; ++tries) {
            Cx<R> u = draw();
            bool ok = true;
            for (const auto &w : pts) {
                if (std::abs(bfun(u / w)) < R(margin) ||
                    std::abs(bfun(q * u * w)) < R(margin) ||
                    std::abs(bfun(u * w)) < R(margin)) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                return u;
        }
        throw std::runtime_error("SpectralSampler: rejection budget exhausted");
    }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }

    std::mt19937_64 &engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

} // namespace qcore
} // namespace haw
