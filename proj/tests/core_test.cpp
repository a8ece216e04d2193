#include "polycyclic/core/poly_parse.hpp"

#include <gtest/gtest.h>

using namespace polycyclic;

TEST(Polynomial, ArithmeticAndDivision)
{
    Poly a = parse_poly("x1^2 - y1^2");
    Poly b = parse_poly("x1 + y1");
    auto q = a.divide_exact(b);
    ASSERT_TRUE(q.has_value());
    EXPECT_EQ(*q, parse_poly("x1 - y1"));
    EXPECT_FALSE(parse_poly("x1^2 + y1^2").divide_exact(b).has_value());
    EXPECT_EQ((b * b).to_string(), "x1^2 + 2*x1*y1 + y1^2");
}

TEST(Polynomial, Gcd)
{
    Poly g = parse_poly("x1*y1 + 3*z1 - 1/2");
    Poly a = g * parse_poly("x1^3 - y1*z1 + 2");
    Poly b = g * parse_poly("x1 + y1^2*z1");
    EXPECT_EQ(poly_gcd(a, b), poly_monic(g));
    EXPECT_EQ(poly_gcd(parse_poly("x1"), parse_poly("y1")), Poly(1));
}

TEST(RatFun, Canonical)
{
    RatFun r = parse_ratfun("(mu1^2 - 1)/(2*mu1 + 2)");
    EXPECT_EQ(r, parse_ratfun("mu1/2 - 1/2"));
    RatFun s = parse_ratfun("1/mu1 + 1/(1-mu1)");
    EXPECT_EQ(s * parse_ratfun("mu1*(1-mu1)"), RatFun(1));
    EXPECT_EQ(parse_rational("-0.125"), Rational(-1, 8));
    EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
}
