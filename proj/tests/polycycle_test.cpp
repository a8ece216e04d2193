#include "polycyclic/polycycle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace polycyclic;

namespace
{

PolycycleSpec spec_of(std::vector<double> rs, std::vector<std::vector<double>> corr = {})
{
    PolycycleSpec s;
    for (std::size_t j = 0; j < rs.size(); ++j) {
        Vertex v;
        v.r = rs[j];
        v.d = principal_dulac(rs[j], j < corr.size() ? corr[j] : std::vector<double>{});
        s.vertices.push_back(v);
        Breaking b;
        b.slope.assign(rs.size(), 0.0);
        b.slope[j] = 1.0;
        s.lambda.push_back(b);
    }
    return s;
}

// sign changes of delta on a dense log grid, escapes skipped
int dense_count(const PolycycleSpec& s, const std::vector<double>& nu, int n = 1 << 16)
{
    double a = std::log(s.x_min), b = std::log(s.vertices[0].x_max);
    int c = 0;
    std::optional<double> prev;
    for (int i = 0; i < n; ++i) {
        auto v = displacement(s, std::exp(a + (b - a) * i / (n - 1)), nu);
        if (v && prev && (*v > 0) != (*prev > 0)) {
            ++c;
        }
        prev = v;
    }
    return c;
}

} // namespace

TEST(Displacement, Examples)
{
    auto id = spec_of({1.0});
    for (double x : {0.01, 0.2, 0.5}) {
        EXPECT_EQ(*displacement(id, x, {0.0}), 0.0);
    }
    auto loop = spec_of({1.2});
    for (double x : {1e-6, 0.01, 0.3, 0.5}) {
        EXPECT_LT(*displacement(loop, x, {0.0}), 0.0);
    }
    auto resonant = spec_of({2.0, 0.5});
    for (double x : {0.01, 0.2, 0.5}) {
        EXPECT_NEAR(*displacement(resonant, x, {0.0, 0.0}), 0.0, 1e-15);
    }
    // chain escapes when d_1(x) - lambda_1 <= 0
    EXPECT_FALSE(displacement(resonant, 0.01, {0.01, 0.0}).has_value());
}

TEST(CountCycles, SaddleLoopSweep)
{
    auto loop = spec_of({1.2});
    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 400; ++i) {
        grid.push_back({-1e-4 + 2e-4 * i / 400.0});
    }
    auto res = count_cycles(loop, grid);
    int mx = 0;
    for (const auto& c : res) {
        mx = std::max(mx, c.count());
        // delta is convex with delta(0+) = -lambda: one cycle exactly when lambda < 0
        EXPECT_EQ(c.count(), c.nu[0] < 0.0 ? 1 : 0) << "lambda=" << c.nu[0];
        for (const auto& r : c.roots) {
            EXPECT_LT(r.delta_lo * r.delta_hi, 0.0);
            EXPECT_LE(r.bracket_lo, r.x);
            EXPECT_GE(r.bracket_hi, r.x);
            EXPECT_NEAR(*displacement(loop, r.x, c.nu), 0.0, 1e-12);
        }
    }
    EXPECT_EQ(mx, 1);
}

TEST(CountCycles, TwoSaddleSweep)
{
    auto two = spec_of({1.3, 0.8}, {{0.4}, {-0.3}});
    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            grid.push_back({-1e-3 + 1e-4 * i, -1e-3 + 1e-4 * j});
        }
    }
    CountOptions opt;
    opt.threads = 2;
    auto res = count_cycles(two, grid, opt);
    int mx = 0;
    for (const auto& c : res) {
        mx = std::max(mx, c.count());
        for (const auto& r : c.roots) {
            EXPECT_LT(r.delta_lo * r.delta_hi, 0.0);
        }
    }
    EXPECT_LE(mx, 2);
    EXPECT_GE(mx, 1);
    // independent dense scan on a subset
    for (std::size_t i = 0; i < grid.size(); i += 37) {
        EXPECT_EQ(res[i].count(), dense_count(two, grid[i])) << "i=" << i;
    }
}

TEST(CountCycles, DeterministicAcrossThreads)
{
    auto two = spec_of({1.3, 0.8});
    std::vector<std::vector<double>> grid;
    for (int i = 0; i < 9; ++i) {
        grid.push_back({-4e-4 + 1e-4 * i, 2e-4});
    }
    CountOptions one, four;
    four.threads = 4;
    auto a = count_cycles(two, grid, one), b = count_cycles(two, grid, four);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_EQ(a[i].count(), b[i].count());
        for (std::size_t j = 0; j < a[i].roots.size(); ++j) {
            EXPECT_EQ(a[i].roots[j].x, b[i].roots[j].x);
        }
    }
    EXPECT_THROW(count_cycles(two, {}), std::invalid_argument);
}

TEST(CountCycles, ReductionInvariance)
{
    const double c = 0.3;
    auto f = [c](double x) { return x * (1 + c * x); };
    auto finv = [c](double y) { return (-1 + std::sqrt(1 + 4 * c * y)) / (2 * c); };
    auto orig = spec_of({1.3, 0.8}, {{0.4}, {-0.3}});
    auto red = orig;
    for (auto& v : orig.vertices) {
        v.transition = f;
        v.transition_inverse = finv;
    }
    for (std::size_t j = 0; j < red.vertices.size(); ++j) {
        auto d = orig.vertices[j].d;
        red.vertices[j].d = [d, finv](double x) { return d(finv(x)); };
        red.vertices[j].x_max = f(orig.vertices[j].x_max);
    }
    red.x_min = f(orig.x_min);
    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            grid.push_back({-1e-3 + 2e-4 * i, -1e-3 + 2e-4 * j});
        }
    }
    auto a = count_cycles(orig, grid), b = count_cycles(red, grid);
    int nonzero = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(a[i].count(), b[i].count());
        for (std::size_t j = 0; j < a[i].roots.size() && j < b[i].roots.size(); ++j) {
            EXPECT_NEAR(f(a[i].roots[j].x), b[i].roots[j].x, 1e-10);
        }
        nonzero += a[i].count() > 0;
    }
    EXPECT_GT(nonzero, 0);
}

TEST(Rolle, Examples)
{
    auto rep0 = rolle_bound_polynomial({1.0, 0.2}, -1.0, 1.0);
    EXPECT_TRUE(rep0.certified);
    EXPECT_EQ(rep0.bound, 0);
    const double eps = 1e-3;
    auto rep = rolle_bound_polynomial({-eps, 0.0, 1.0}, -1.0, 1.0);
    EXPECT_TRUE(rep.certified);
    EXPECT_GE(rep.bound, 2);
    EXPECT_EQ(scan_zero_count([&](double t) { return t * t - eps; }, -1.0, 1.0), 2);
    auto fn = rolle_bound({[&](double t) { return t * t - eps; }, [](double t) { return 2 * t; }, [](double) { return 2.0; }}, -1.0, 1.0);
    EXPECT_GE(fn.bound, 2);
    EXPECT_FALSE(rolle_bound({[](double) { return 0.0; }}, 0.0, 1.0).certified);
}

TEST(Rolle, RandomPolynomialsDominateScan)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
        for (auto& v : c) {
            v = U(rng);
        }
        auto rep = rolle_bound_polynomial(c, -1.0, 1.0);
        ASSERT_TRUE(rep.certified);
        int zeros = scan_zero_count([&](double t) { return detail::poly_eval(c, t); }, -1.0, 1.0);
        EXPECT_GE(rep.bound, zeros) << "trial " << trial;
    }
}

TEST(Blowup, IdentitiesHold)
{
    for (int k = 2; k <= 4; ++k) {
        auto rep = blowup_verify(k);
        EXPECT_TRUE(rep.ok()) << "k=" << k;
        EXPECT_TRUE(rep.first_integrals_ok);
        EXPECT_EQ(rep.nontrivial_dimension, k - 1);
    }
    EXPECT_EQ(blowup_verify(2).s_k, Poly::var("r1"));
    EXPECT_EQ(blowup_verify(3).s_k, Poly::var("r1") + Poly::var("r1") * Poly::var("r2"));
    auto flat = blowup_verify(2, {{symbol("r1"), Rational(1)}});
    EXPECT_TRUE(flat.ok());
    EXPECT_EQ(flat.s_k, Poly(Rational(1)));
    EXPECT_EQ(flat.weights[1], Poly(Rational(1)));
    EXPECT_THROW(blowup_verify(5), std::invalid_argument);
}

TEST(Blowup, DetectsWrongField)
{
    // a field that does not preserve g_1 = x1^{r1} - x2
    auto H = HilbertDerivation::principal(2);
    H.component[1] = H.component[0];
    EXPECT_FALSE(H.apply(H.first_integral(1)).is_zero());
}

TEST(CountCycles, NearDoubleFlag)
{
    PolycycleSpec s = spec_of({1.0});
    s.vertices[0].d = [](double x) { return x + 10.0 * (x - 0.1) * (x - 0.1); };
    auto res = count_cycles(s, {{1e-12}, {0.01}, {0.0}});
    ASSERT_EQ(res[0].count(), 2);
    EXPECT_TRUE(res[0].roots[0].near_double);
    EXPECT_TRUE(res[0].roots[1].near_double);
    ASSERT_EQ(res[1].count(), 2);
    EXPECT_FALSE(res[1].roots[0].near_double);
    // tangency without a sign change is not counted
    EXPECT_EQ(res[2].count(), 0);
    auto loop = count_cycles(spec_of({1.2}), {{-1e-4}});
    ASSERT_EQ(loop[0].count(), 1);
    EXPECT_FALSE(loop[0].roots[0].near_double);
}
