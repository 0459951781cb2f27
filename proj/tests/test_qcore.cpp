#include "haw/qcore.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace haw;
using namespace haw::qcore;
using C = Cx<double>;

TEST(QNum, BaseCases) {
    EXPECT_NEAR(std::abs(qnum(0, C(2, 0)) - C(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(qnum(1, C(0.7, 0.3)) - C(1, 0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(qnum(2, C(2, 0)) - C(2.5, 0)), 0.0, 1e-14);
}

TEST(QNum, Antisymmetry) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> d(1.1, 2.5);
    for (int n = 1; n <= 10; ++n) {
        C q(d(gen), d(gen) * 0.1);
        EXPECT_LT(std::abs(qnum(-n, q) + qnum(n, q)), 1e-12);
    }
}

TEST(QNum, SingularAtUnitQ) {
    EXPECT_THROW(qnum(2, C(1, 0)), std::domain_error);
    EXPECT_THROW(qnum(3, C(-1, 0)), std::domain_error);
    EXPECT_NO_THROW(qnum(0, C(1, 0)));
}

TEST(QPoch, BaseCases) {
    EXPECT_EQ(qpoch(C(0.3, 0.4), C(2, 0), 0), C(1, 0));
    for (int n = 1; n <= 5; ++n)
        EXPECT_LT(std::abs(qpoch(C(1, 0), C(1.7, 0), n)), 1e-15);
    EXPECT_NEAR(std::abs(qpoch(C(2, 0), C(3, 0), 2) - C(5, 0)), 0.0, 1e-13);
    EXPECT_THROW(qpoch(C(2, 0), C(3, 0), -1), std::domain_error);
}

TEST(QPoch, SplitsProduct) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        C a(d(gen), d(gen)), q(d(gen), d(gen));
        int m = t % 4, n = (t / 4) % 4;
        C lhs = qpoch(a, q, m + n);
        C rhs = qpoch(a, q, m) * qpoch(a * qpow(q, m), q, n);
        EXPECT_LT(std::abs(lhs - rhs),
                  1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(BFun, Values) {
    EXPECT_EQ(bfun(C(1, 0)), C(0, 0));
    EXPECT_NEAR(std::abs(bfun(C(2, 0)) - C(1.5, 0)), 0.0, 1e-15);
    EXPECT_THROW(bfun(C(0, 0)), std::domain_error);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> d(0.2, 2.0);
    for (int t = 0; t < 10; ++t) {
        C x(d(gen), d(gen));
        EXPECT_LT(std::abs(bfun(C(1, 0) / x) + bfun(x)), 1e-13);
    }
}

TEST(ESym, BaseCases) {
    std::vector<C> xs = {C(2, 0), C(3, 0)};
    EXPECT_EQ(esym(0, xs), C(1, 0));
    EXPECT_EQ(esym(1, xs), C(5, 0));
    EXPECT_EQ(esym(2, xs), C(6, 0));
    EXPECT_THROW(esym(3, xs), std::domain_error);
    EXPECT_THROW(esym(-1, xs), std::domain_error);
}

// prod_i (t + x_i) = sum_k e_{n-k}(x) t^k
TEST(ESym, GeneratingFunction) {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    const int n = 6;
    std::vector<C> xs;
    for (int i = 0; i < n; ++i)
        xs.emplace_back(d(gen), d(gen));
    for (int trial = 0; trial < 5; ++trial) {
        C t(d(gen), d(gen));
        C lhs(1, 0);
        for (const auto &x : xs)
            lhs *= (t + x);
        C rhs(0, 0), tk(1, 0);
        for (int k = 0; k <= n; ++k) {
            rhs += esym(n - k, xs) * tk;
            tk *= t;
        }
        EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Tolerances, Validation) {
    Tolerances tol;
    EXPECT_NO_THROW(tol.validate());
    tol.newton_tol = 1e-3;
    EXPECT_THROW(tol.validate(), std::invalid_argument);
    tol = Tolerances{};
    tol.dedupe_tol = 0.0;
    EXPECT_THROW(tol.validate(), std::invalid_argument);
}

TEST(ExtendedPrecision, ScalarLayerCompiles) {
    using CL = Cx<long double>;
    CL q(2.0L, 0.0L);
    EXPECT_LT(std::abs(qnum(2, q) - CL(2.5L, 0.0L)), 1e-18L);
    EXPECT_LT(std::abs(qpoch(CL(2, 0), CL(3, 0), 2) - CL(5, 0)), 1e-17L);
}
