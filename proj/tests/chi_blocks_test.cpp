#include "polycyclic/chi_blocks.hpp"
#include "polycyclic/core/poly_parse.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace polycyclic;

namespace
{

CoeffRing R(std::string_view s)
{
    return parse_ratfun(s);
}

ChiSum mono(const ChiDerivation& D, const CoeffRing& c, Rational x, std::vector<unsigned> z = {}, std::vector<unsigned> u = {})
{
    return ChiSum::monomial(D.key(x, std::move(z), std::move(u)), c);
}

} // namespace

TEST(ChiApply, Examples)
{
    auto D = ChiDerivation::generic(1);
    EXPECT_EQ(chi_apply(D, mono(D, R("1"), 0, {1})), mono(D, R("1+mu1"), 0, {1}) + mono(D, R("1"), 1));
    EXPECT_EQ(chi_apply(D, mono(D, R("1"), 2)), mono(D, R("2"), 2));
    EXPECT_EQ(chi_apply(D, mono(D, R("1"), 1, {1})), mono(D, R("2+mu1"), 1, {1}) + mono(D, R("1"), 2));
    auto Du = ChiDerivation::generic(0, 1);
    EXPECT_EQ(chi_apply(Du, mono(Du, R("1"), 1, {}, {1})), mono(Du, R("-mu1"), 1, {}, {1}));
}

TEST(ChiApply, FirstIntegralsAndDegree)
{
    // lambda_j = x^{s_j} u_j: with s_j integer-specialized, chi(x^{s} u) = 0 exactly
    for (int q1 = 0; q1 <= 3; ++q1) {
        for (int ell = 1; ell <= 3; ++ell) {
            std::vector<CoeffRing> r, s;
            for (int j = 1; j <= q1; ++j) {
                r.push_back(R("1") + CoeffRing::var(mu_symbol(j)));
            }
            for (int j = 1; j <= ell; ++j) {
                s.push_back(CoeffRing(j));
            }
            auto D = ChiDerivation::with(r, s);
            for (int j = 0; j < ell; ++j) {
                std::vector<unsigned> u(static_cast<std::size_t>(ell), 0);
                u[static_cast<std::size_t>(j)] = 1;
                auto lam = mono(D, R("1"), j + 1, {}, u);
                EXPECT_TRUE(chi_apply(D, lam).is_zero());
            }
        }
    }
    auto D = ChiDerivation::generic(2);
    ChiBlock b(2, mono(D, R("a1"), 1, {1, 0}) + mono(D, R("a2"), 0, {1, 1}));
    auto cb = chi_apply(D, b);
    EXPECT_EQ(cb.degree(), Rational(2));
}

TEST(EulerOperator, Examples)
{
    auto D = ChiDerivation::generic(1);
    auto F1 = degree_family(D, 1);
    EXPECT_TRUE(euler_operator(D, F1, mono(D, R("a1"), 1) + mono(D, R("c1"), 0, {1})).is_zero());
    ChiSum x = mono(D, R("1"), 1);
    // e_m = 5 via m = x^5
    EXPECT_EQ(euler_operator(D, {D.key(5)}, x), mono(D, R("-4"), 1));
    EXPECT_TRUE(euler_operator(D, degree_family(D, 2), mono(D, R("1"), 1, {1})).is_zero());
}

TEST(EulerOperator, AnnihilatesRandomBlocks)
{
    std::mt19937 rng(5);
    for (int q1 = 1; q1 <= 2; ++q1) {
        auto D = ChiDerivation::generic(q1);
        for (int n = 1; n <= 3; ++n) {
            auto F = degree_family(D, n);
            for (int t = 0; t < 5; ++t) {
                ChiSum b;
                for (const auto& k : F) {
                    b.add(k, CoeffRing(static_cast<long>(rng() % 7) - 3));
                }
                EXPECT_TRUE(euler_operator(D, F, b).is_zero());
            }
        }
    }
}

TEST(Wronskian, SmallCases)
{
    auto D0 = ChiDerivation::generic(0);
    auto w0 = wronskian(D0, 3);
    EXPECT_EQ(w0.N, 1u);
    EXPECT_EQ(w0.determinant, LogExpSum::monomial(CoeffRing(1), CoeffRing(3)));
    auto D = ChiDerivation::generic(1);
    auto w1 = wronskian(D, 1);
    EXPECT_EQ(w1.b_n, CoeffRing(1));
    EXPECT_EQ(w1.s_n, R("2 + mu1"));
    EXPECT_TRUE(w1.factorization_ok);
    auto w2 = wronskian(D, 2);
    EXPECT_EQ(w2.s_n, R("6 + 3*mu1"));
    EXPECT_TRUE(w2.s_n_at_zero_ok);
}

TEST(Wronskian, FunctionModelAgrees)
{
    for (int q1 = 1; q1 <= 2; ++q1) {
        auto D = ChiDerivation::generic(q1);
        for (int n = 1; n <= (q1 == 1 ? 3 : 1); ++n) {
            auto w = wronskian(D, n);
            EXPECT_EQ(wronskian_function_model(D, n), w.determinant) << "q1=" << q1 << " n=" << n;
        }
    }
}

TEST(Wronskian, RoutesAgree)
{
    for (int q1 = 1; q1 <= 2; ++q1) {
        auto D = ChiDerivation::generic(q1);
        for (int n = 1; n <= (q1 == 1 ? 3 : 2); ++n) {
            auto a = wronskian(D, n, WronskianMethod::bareiss);
            auto b = wronskian(D, n, WronskianMethod::eigenbasis);
            EXPECT_EQ(a.det_at_x1, b.det_at_x1) << "q1=" << q1 << " n=" << n;
            EXPECT_EQ(a.b_n, b.b_n);
            EXPECT_EQ(a.determinant, b.determinant);
        }
    }
}

TEST(Wronskian, TimingLargest)
{
    auto D = ChiDerivation::generic(2);
    auto t0 = std::chrono::steady_clock::now();
    auto w = wronskian(D, 3);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_TRUE(w.factorization_ok);
    EXPECT_TRUE(w.s_n_at_zero_ok);
    EXPECT_EQ(w.N, 10u);
    std::printf("q1=2 n=3 wronskian: %.2f s, s_n = %s\n", secs, w.s_n.to_string().c_str());
}

TEST(FewnomialSplit, Examples)
{
    auto D = ChiDerivation::generic(1);
    ChiSum f = mono(D, R("1"), 1) + mono(D, R("1"), 0, {1}) + mono(D, R("1"), 1, {1});
    auto parts = fewnomial_split(f);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].degree(), Rational(1));
    EXPECT_EQ(parts[0].sum().size(), 2u);
    EXPECT_EQ(parts[1].degree(), Rational(2));
    ChiSum back;
    for (const auto& p : parts) {
        back = back + p.sum();
    }
    EXPECT_EQ(back, f);
    auto Du = ChiDerivation::generic(0, 1);
    auto p2 = fewnomial_split(mono(Du, R("1"), 2, {}, {1}));
    ASSERT_EQ(p2.size(), 1u);
    EXPECT_EQ(p2[0].degree(), Rational(1));
    EXPECT_TRUE(fewnomial_split(ChiSum()).empty());
}

TEST(TransverseIdeal, Examples)
{
    auto D = ChiDerivation::generic(0);
    auto J = transverse_ideal(D, mono(D, R("a1"), 3), Rational(1));
    ASSERT_EQ(J.basis.elements.size(), 1u);
    EXPECT_EQ(J.generator_string(0), "a1");
    EXPECT_TRUE(transverse_ideal(D, ChiSum(), Rational(1)).is_zero());
    for (unsigned N = 1; N <= 5; ++N) {
        auto Dz = ChiDerivation::with({CoeffRing(1)}, {CoeffRing(1)});
        ChiSum f = mono(Dz, R("1"), 0, {1}, {N});
        for (Rational x0 : {Rational(1), Rational(1, 2), Rational(2)}) {
            auto T = transverse_ideal(Dz, f, x0);
            ASSERT_EQ(T.basis.elements.size(), 1u);
            EXPECT_EQ(T.generator_string(0), "lambda1" + (N > 1 ? "^" + std::to_string(N) : std::string()));
        }
    }
}

TEST(TransverseIdeal, IndependentOfTransversal)
{
    auto D = ChiDerivation::generic(1);
    ChiSum f = mono(D, R("a1"), 1) + mono(D, R("a2"), 0, {1});
    std::vector<TransverseIdeal> Js;
    for (Rational x0 : {Rational(1), Rational(1, 2), Rational(2)}) {
        Js.push_back(transverse_ideal(D, f, x0));
    }
    EXPECT_TRUE(same_ideal(Js[0], Js[1]));
    EXPECT_TRUE(same_ideal(Js[0], Js[2]));
}

TEST(Multiplicity, Examples)
{
    auto D = ChiDerivation::generic(0);
    auto m = algebraic_multiplicity(D, {ChiBlock(1, mono(D, R("1"), 1))}, Rational(1), 10);
    EXPECT_TRUE(m.stabilized);
    EXPECT_EQ(m.ma, 1);
    EXPECT_TRUE(m.chain[0].is_zero());
    EXPECT_TRUE(m.chain[1].is_unit());
    // non-noetherian witness: blocks alpha^n x^{1/n} in ascending degree
    const int T = 24;
    std::vector<ChiBlock> series;
    for (int n = T; n >= 1; --n) {
        series.emplace_back(Rational(1, n), mono(D, CoeffRing(Poly::var("a1", static_cast<unsigned>(n))), Rational(1, n)));
    }
    auto w = algebraic_multiplicity(D, series, Rational(1), 20);
    EXPECT_FALSE(w.stabilized);
    ASSERT_EQ(w.strict.size(), 20u);
    for (bool s : w.strict) {
        EXPECT_TRUE(s);
    }
}

TEST(Saturation, LogMonomialFamily)
{
    auto D = ChiDerivation::with({CoeffRing(1)}, {CoeffRing(1)});
    for (unsigned N = 1; N <= 5; ++N) {
        ChiSum f = mono(D, R("1"), 0, {1}, {N});
        EXPECT_EQ(saturation_exponent(D, f, {{Rational(N), {N}}}), static_cast<int>(N));
    }
}

TEST(DoubleInclusion, Examples)
{
    auto D = ChiDerivation::generic(1);
    auto r1 = double_inclusion_check(D, ChiBlock(1, mono(D, R("a1"), 1)), Rational(1), 5);
    EXPECT_TRUE(r1.holds);
    EXPECT_EQ(r1.max_achieved, Rational(1));
    EXPECT_TRUE(double_inclusion_check(D, ChiBlock(1, ChiSum()), Rational(1), 5).holds);
    auto r2 = double_inclusion_check(D, ChiBlock(1, mono(D, R("a1"), 1) + mono(D, R("c1"), 0, {1})), Rational(1, 10), 20);
    EXPECT_TRUE(r2.holds);
    EXPECT_EQ(r2.samples.size(), 20u);
    EXPECT_LE(r2.max_achieved, Rational(11, 10));
}

TEST(EulerPreimage, Corollary)
{
    auto D = ChiDerivation::generic(1);
    ChiBlock g(2, mono(D, R("2"), 2) + mono(D, R("-3"), 1, {1}) + mono(D, R("5"), 0, {2}));
    std::map<int, Rational> pt{{mu_symbol(1), Rational(1, 37)}};
    auto c = euler_preimage_check(D, g, R("7/2"), pt);
    EXPECT_TRUE(c.has_value());
}
