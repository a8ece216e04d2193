#include "polycyclic/core/poly_parse.hpp"
#include "polycyclic/euler_calculus.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace polycyclic;

namespace
{

using Big = boost::multiprecision::cpp_bin_float_50;

// (y^beta - 1)/beta in 50 digits, log y at beta = 0
double ld_big(double y, double beta)
{
    Big by(y);
    if (beta == 0.0) {
        return static_cast<double>(log(by));
    }
    Big bb(beta);
    return static_cast<double>((pow(by, bb) - 1) / bb);
}

// f(1): terms carrying a log vanish at x = 1
CoeffRing at_one(const LogExpSum& f)
{
    CoeffRing s;
    for (const auto& t : f.terms()) {
        if (t.log_power == 0) {
            s += t.coeff;
        }
    }
    return s;
}

Rational small_rational(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> num(-9, 9), den(1, 6);
    return make_rational(num(rng), den(rng));
}

} // namespace

TEST(LdEval, Examples)
{
    EXPECT_EQ(ld_eval(1.0, 0.37), 0.0);
    EXPECT_NEAR(ld_eval(std::exp(1.0), 0.0), 1.0, 1e-15);
    EXPECT_NEAR(ld_eval(std::exp(1.0), 1.0), std::exp(1.0) - 1.0, 1e-15);
    EXPECT_LT(std::fabs(ld_eval(2.0, 1e-14) - ld_eval(2.0, 0.0)), 1e-12);
    EXPECT_THROW(ld_eval(0.0, 1.0), std::domain_error);
    EXPECT_THROW(ld_eval(-1.0, 0.0), std::domain_error);
}

TEST(LdEval, CompensatorGrid)
{
    auto t0 = std::chrono::steady_clock::now();
    double worst_identity = 0.0, worst_oracle = 0.0;
    for (int i = 0; i < 100; ++i) {
        double y = std::exp(-4.0 + 8.0 * i / 99.0);
        for (int j = 0; j <= 20; ++j) {
            double beta = -0.5 + 0.05 * j;
            if (j == 10) {
                beta = 0.0;
            }
            double ld = ld_eval(y, beta);
            double lhs = beta * ld + 1.0;
            double rhs = std::pow(y, beta);
            worst_identity = std::max(worst_identity, std::fabs(lhs - rhs) / rhs);
            double ref = ld_big(y, beta);
            if (ref != 0.0) {
                worst_oracle = std::max(worst_oracle, std::fabs(ld - ref) / std::fabs(ref));
            }
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LE(worst_identity, 1e-12);
    EXPECT_LE(worst_oracle, 1e-12);
    EXPECT_LT(secs, 1.0);
}

TEST(LdEval, ContinuityAtZero)
{
    // |Ld(y, beta) - log y| <= C |beta| with C = max (log y)^2 / 2 (1 + small) on [0.1, 10]
    const double C = 0.5 * std::log(10.0) * std::log(10.0) * 1.05;
    for (int i = 0; i <= 50; ++i) {
        double y = 0.1 * std::pow(100.0, i / 50.0);
        for (double beta : {-1e-2, -1e-5, -1e-9, 1e-9, 1e-5, 1e-2}) {
            EXPECT_LE(std::fabs(ld_eval(y, beta) - std::log(y)), C * std::fabs(beta));
        }
    }
}

TEST(Chi0Apply, Examples)
{
    auto x = LogExpSum::x();
    EXPECT_EQ(chi0_apply(x * x), LogExpSum::monomial(CoeffRing(2), CoeffRing(2)));
    auto xlog = LogExpSum::monomial(CoeffRing(1), CoeffRing(1), 1);
    EXPECT_EQ(chi0_apply(xlog), xlog + x);
    EXPECT_TRUE(chi0_apply(LogExpSum(1)).is_zero());
}

TEST(Chi0Apply, Leibniz)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<unsigned> lp(0, 2);
    for (int t = 0; t < 30; ++t) {
        LogExpSum f, g;
        for (int i = 0; i < 3; ++i) {
            f += LogExpSum::monomial(CoeffRing(small_rational(rng)), CoeffRing(small_rational(rng)), lp(rng));
            g += LogExpSum::monomial(CoeffRing(small_rational(rng)), CoeffRing(small_rational(rng)), lp(rng));
        }
        EXPECT_EQ(chi0_apply(f * g), chi0_apply(f) * g + f * chi0_apply(g));
    }
}

TEST(EulerResolve, Examples)
{
    auto x = LogExpSum::x();
    CoeffRing mu = CoeffRing::var(symbol("mu1"));
    EXPECT_EQ(euler_resolve(CoeffRing(1) + mu, x), compensator(mu));
    EXPECT_EQ(euler_resolve(CoeffRing(1), x), LogExpSum::monomial(CoeffRing(1), CoeffRing(1), 1));
    EXPECT_EQ(euler_resolve(CoeffRing(2), x), x * x - x);
    EXPECT_TRUE(at_one(compensator(mu)).is_zero());
}

TEST(EulerResolve, RandomIdentity)
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> nterms(1, 5), coin(0, 3);
    std::uniform_int_distribution<unsigned> lp(0, 3);
    auto t0 = std::chrono::steady_clock::now();
    int resonant = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Rational rq = small_rational(rng);
        CoeffRing r(rq);
        LogExpSum g;
        int n = nterms(rng);
        for (int i = 0; i < n; ++i) {
            // one time in four the term sits on the resonant exponent
            CoeffRing e = coin(rng) == 0 ? r : CoeffRing(small_rational(rng));
            resonant += e == r;
            g += LogExpSum::monomial(CoeffRing(small_rational(rng)), e, lp(rng));
        }
        auto f = euler_resolve(r, g);
        EXPECT_TRUE((chi0_apply(f) - f.scaled(r) - g).is_zero()) << "trial " << trial;
        EXPECT_TRUE(at_one(f).is_zero());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_GT(resonant, 0);
    EXPECT_LT(secs, 5.0);
}

TEST(LogExpSum, NormalForm)
{
    auto a = LogExpSum::monomial(CoeffRing(1), CoeffRing(2)) + LogExpSum::monomial(CoeffRing(3), CoeffRing(1), 1);
    auto b = LogExpSum::monomial(CoeffRing(3), CoeffRing(1), 1) + LogExpSum::monomial(CoeffRing(1), CoeffRing(2));
    EXPECT_EQ(a, b);
    EXPECT_TRUE((a - b).is_zero());
    EXPECT_EQ(a.terms().front().exponent, CoeffRing(1));
    EXPECT_NEAR(a.evaluate(2.0), 4.0 + 6.0 * std::log(2.0), 1e-14);
}
