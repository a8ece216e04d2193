#include "polycyclic/dulac_engine.hpp"
#include "polycyclic/euler_calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace polycyclic;

namespace
{

SaddleDeployment deployment(double mu, std::vector<std::vector<CoefficientTerm>> a)
{
    SaddleDeployment d;
    d.mu = mu;
    d.a = std::move(a);
    return d;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        v.push_back(a + (b - a) * i / (n - 1));
    }
    return v;
}

double rel(double a, double b)
{
    return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

} // namespace

TEST(DulacOperator, ClosedForms)
{
    auto zero = [](Complex) { return Complex(0.0); };
    EXPECT_EQ(dulac_operator(1.0, zero, DulacPath::real(), 2.0).value, Complex(0.0));
    auto one = [](Complex) { return Complex(1.0); };
    for (double w : {0.1, 0.7, 2.5}) {
        double expect = 2.0 * std::exp(-2.0 * w) * std::expm1(w);
        EXPECT_NEAR(dulac_operator(2.0, one, DulacPath::real(), w).value.real(), expect, 1e-14);
    }
}

TEST(DulacOperator, CompensatorIdentity)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.01, 1.0), um(-0.3, 0.3);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        double x = ux(rng), mu = (i == 0) ? 0.0 : um(rng);
        double r = 1.0 + mu;
        auto c = [r](Complex) { return Complex(-1.0 / r); };
        double got = dulac_operator(r, c, DulacPath::real(), -std::log(x)).value.real();
        double expect = x * ld_eval(x, mu);
        worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-300));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(DulacOperator, BoundOnAdmissiblePaths)
{
    auto one = [](Complex) { return Complex(1.0); };
    std::vector<Complex> real_targets;
    for (int i = 1; i <= 50; ++i) {
        real_targets.emplace_back(0.1 * i, 0.0);
    }
    auto rep = operator_bound_check(1.0, one, DulacPath::real(), real_targets);
    EXPECT_TRUE(rep.admissible);
    EXPECT_EQ(rep.samples, 50u);
    EXPECT_LE(rep.max_ratio, 2.0);

    auto zero = [](Complex) { return Complex(0.0); };
    EXPECT_EQ(operator_bound_check(1.0, zero, DulacPath::real(), {Complex(1.0)}).max_ratio, 0.0);

    auto decay = [](Complex z) { return std::exp(-z); };
    std::vector<Complex> arc;
    for (int i = 0; i < 50; ++i) {
        double U = 0.2 + 0.1 * i;
        double C = -1.0 + 2.0 * i / 49.0;
        arc.emplace_back(1.0 + U, C * std::expm1(U / 2.0));
    }
    auto rep2 = operator_bound_check(3.0, decay, DulacPath{1.0, 2.0, 1.0}, arc);
    EXPECT_TRUE(rep2.admissible) << rep2.violation;
    EXPECT_EQ(rep2.samples, 50u);
    EXPECT_LE(rep2.max_ratio, 2.0);
}

TEST(DulacOperator, InadmissiblePathReported)
{
    // steep arc with s rotated: tan(arg(s z')) exceeds |exp(z)| on the arc
    auto one = [](Complex) { return Complex(1.0); };
    Complex s = std::polar(1.0, 1.4);
    auto rep = operator_bound_check(s, one, DulacPath{1.0, 1.0, 1.0}, {Complex(3.0, std::expm1(2.0))});
    EXPECT_FALSE(rep.admissible);
    EXPECT_NE(rep.violation.find("inadmissible"), std::string::npos);
}

TEST(DulacMap, LinearSaddle)
{
    for (double mu : {-0.3, 0.0, 0.5}) {
        auto m = dulac_coefficients(deployment(mu, {}), 12, linspace(0.05, 0.9, 18));
        for (std::size_t i = 0; i < m.grid.size(); ++i) {
            EXPECT_LE(rel(m.d[i], std::pow(m.grid[i], 1.0 + mu)), 1e-12);
        }
        EXPECT_TRUE(m.monotone_ok);
        EXPECT_TRUE(m.decay_ok);
        EXPECT_NEAR(dulac_ode_oracle(deployment(mu, {}), 0.25), std::pow(0.25, 1.0 + mu), 1e-12);
    }
}

TEST(DulacMap, SecondCoefficientClosedForm)
{
    // a_1 = c constant: x f_2' - 2r f_2 = c x^{r+1}, f_2(1) = 0
    const double c = 0.2;
    for (double mu : {0.0, 0.15}) {
        double r = 1.0 + mu;
        auto m = dulac_coefficients(deployment(mu, {{{0, {}, c}}}), 3, linspace(0.05, 0.95, 10));
        for (double x : m.grid) {
            double expect = mu == 0.0 ? c * x * x * std::log(x) : c * (std::pow(x, r + 1) - std::pow(x, 2 * r)) / (1 - r);
            EXPECT_NEAR(m.coefficient(2, x), expect, 1e-14) << "x=" << x << " mu=" << mu;
        }
    }
}

TEST(DulacMap, MatchesOdeOracle)
{
    std::vector<SaddleDeployment> deps{
        deployment(0.0, {{{1, {}, 1.0}}}),
        deployment(0.1, {{{1, {}, 1.0}}}),
        deployment(-0.2, {{{0, {}, 0.1}, {1, {}, 0.05}}, {{2, {}, 0.05}}}),
    };
    SaddleDeployment with_nu = deployment(0.3, {{{1, {1}, 2.0}}, {}, {{0, {2}, 1.0}}});
    with_nu.nu = {0.5};
    deps.push_back(with_nu);
    auto grid = linspace(0.05, 0.9, 35);
    for (const auto& dep : deps) {
        auto m = dulac_coefficients(dep, 12, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst = std::max(worst, rel(m.d[i], dulac_ode_oracle(dep, grid[i])));
        }
        EXPECT_LE(worst, 1e-8) << "mu=" << dep.mu;
        EXPECT_TRUE(m.decay_ok);
        EXPECT_TRUE(m.monotone_ok);
        EXPECT_TRUE(m.diagnostic.empty()) << m.diagnostic;
        EXPECT_LE(m.kappa, 1.0);
    }
}

TEST(DulacMap, AsymptoticApproach)
{
    auto m = dulac_coefficients(deployment(0.1, {{{1, {}, 1.0}}}), 12, linspace(0.01, 0.5, 50));
    EXPECT_TRUE(m.asymptotic_ok);
    double prev = 0.0;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        double D = std::fabs(m.d[i] / std::pow(m.grid[i], 1.1) - 1.0);
        EXPECT_GE(D, prev);
        prev = D;
    }
}

TEST(DulacMap, RescalesLargeCoefficients)
{
    auto nd = normalize(deployment(0.0, {{{1, {}, 1.0}}}));
    EXPECT_NEAR(nd.kappa, 0.25, 1e-15);
    auto nd2 = normalize(deployment(0.0, {{{1, {}, 0.1}}}));
    EXPECT_EQ(nd2.kappa, 1.0);
    EXPECT_THROW(normalize(deployment(-1.0, {})), std::invalid_argument);
}

TEST(DulacMap, OracleEdgeCases)
{
    auto dep = deployment(0.0, {{{1, {}, 1.0}}});
    EXPECT_DOUBLE_EQ(dulac_ode_oracle(dep, 1.0), 1.0);
    double v = dulac_ode_oracle(dep, 0.4);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 0.4);
    EXPECT_THROW(dulac_ode_oracle(dep, 0.001), std::domain_error);
}

TEST(Inversion, ClosedForms)
{
    auto grid = linspace(0.01, 0.99, 40);
    auto id = invert_map([](double x) { return x; }, grid);
    EXPECT_NEAR(id(0.3), 0.3, 1e-15);
    auto sq = invert_map([](double x) { return x * x; }, grid);
    for (double y : {0.0001, 0.01, 0.2, 0.5, 0.9}) {
        EXPECT_NEAR(sq(y), std::sqrt(y), 1e-12);
    }
    EXPECT_THROW(invert_map([](double x) { return -x; }, grid), std::invalid_argument);
}

TEST(Inversion, DulacRoundTrip)
{
    auto grid = linspace(0.05, 0.9, 35);
    for (double mu : {0.0, 0.1, -0.2}) {
        auto m = dulac_coefficients(deployment(mu, {{{1, {}, 1.0}}}), 12, grid);
        auto g = invert_map(std::cref(m), grid);
        auto rep = check_inverse(g, std::cref(m), m.r);
        EXPECT_LE(rep.max_roundtrip_error, 1e-9);
        EXPECT_TRUE(rep.asymptotic_ok);
    }
}
