#ifndef POLYCYCLIC_CORE_RATFUN_HPP
#define POLYCYCLIC_CORE_RATFUN_HPP

#include "polycyclic/core/polynomial.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace polycyclic
{

// Rational function num/den over Q. Canonical form: gcd(num, den) = 1 and den monic
// (lex-leading coefficient 1), so structural equality is mathematical equality.
class RatFun
{
public:
    RatFun() : m_den(Rational(1)) {}
    RatFun(const Rational& c) : m_num(c), m_den(Rational(1)) {}
    RatFun(long c) : RatFun(Rational(c)) {}
    RatFun(const Poly& p) : m_num(p), m_den(Rational(1)) {}
    RatFun(const Poly& num, const Poly& den) : m_num(num), m_den(den)
    {
        if (m_den.is_zero()) {
            throw std::domain_error("rational function with zero denominator");
        }
        canonicalize();
    }

    static RatFun var(int idx) { return RatFun(Poly::var(idx)); }
    static RatFun var(std::string_view name) { return RatFun(Poly::var(name)); }

    const Poly& num() const { return m_num; }
    const Poly& den() const { return m_den; }

    bool is_zero() const { return m_num.is_zero(); }
    bool is_constant() const { return m_num.is_constant() && m_den.is_constant(); }
    bool is_polynomial() const { return m_den.is_constant(); }

    Rational constant_value() const
    {
        if (!is_constant()) {
            throw std::domain_error("rational function is not constant");
        }
        return m_num.constant_term() / m_den.constant_term();
    }

    RatFun operator-() const
    {
        RatFun r = *this;
        r.m_num = -r.m_num;
        return r;
    }

    friend RatFun operator+(const RatFun& a, const RatFun& b)
    {
        if (a.m_den.is_constant() && b.m_den.is_constant()) {
            return RatFun::raw(a.m_num + b.m_num, Poly(Rational(1)));
        }
        if (a.m_den == b.m_den) {
            return RatFun(a.m_num + b.m_num, a.m_den);
        }
        return RatFun(a.m_num * b.m_den + b.m_num * a.m_den, a.m_den * b.m_den);
    }
    friend RatFun operator-(const RatFun& a, const RatFun& b) { return a + (-b); }

    friend RatFun operator*(const RatFun& a, const RatFun& b)
    {
        if (a.is_zero() || b.is_zero()) {
            return RatFun();
        }
        if (a.m_den.is_constant() && b.m_den.is_constant()) {
            return RatFun::raw(a.m_num * b.m_num, Poly(Rational(1)));
        }
        if (a.is_constant()) {
            return RatFun::raw(b.m_num.scaled(a.constant_value()), b.m_den);
        }
        if (b.is_constant()) {
            return RatFun::raw(a.m_num.scaled(b.constant_value()), a.m_den);
        }
        return RatFun(a.m_num * b.m_num, a.m_den * b.m_den);
    }

    friend RatFun operator/(const RatFun& a, const RatFun& b)
    {
        if (b.is_zero()) {
            throw std::domain_error("rational function division by zero");
        }
        if (b.is_constant()) {
            return RatFun::raw(a.m_num.scaled(Rational(1) / b.constant_value()), a.m_den);
        }
        return RatFun(a.m_num * b.m_den, a.m_den * b.m_num);
    }

    RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
    RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
    RatFun& operator*=(const RatFun& o) { return *this = *this * o; }
    RatFun& operator/=(const RatFun& o) { return *this = *this / o; }

    bool operator==(const RatFun& o) const { return m_num == o.m_num && m_den == o.m_den; }
    bool operator!=(const RatFun& o) const { return !(*this == o); }

    RatFun pow(long k) const
    {
        if (k < 0) {
            return RatFun(Rational(1)) / pow(-k);
        }
        return RatFun::raw(m_num.pow(static_cast<unsigned>(k)), m_den.pow(static_cast<unsigned>(k)));
    }

    // Ring homomorphism: substitute exact values for (some of) the symbols.
    RatFun partial_eval(const std::map<int, Rational>& values) const
    {
        Poly d = m_den.partial_eval(values);
        if (d.is_zero()) {
            throw std::domain_error("evaluation point is a pole");
        }
        return RatFun(m_num.partial_eval(values), d);
    }

    Rational evaluate(const std::map<int, Rational>& values) const
    {
        Rational d = m_den.evaluate(values);
        if (sgn(d) == 0) {
            throw std::domain_error("evaluation point is a pole");
        }
        return m_num.evaluate(values) / d;
    }

    double evaluate_double(const std::function<double(int)>& value_of) const
    {
        return m_num.evaluate<double>(value_of) / m_den.evaluate<double>(value_of);
    }

    RatFun substitute(int v, const RatFun& q) const
    {
        if (!m_num.depends_on(v) && !m_den.depends_on(v)) {
            return *this;
        }
        return eval_poly_at(m_num, v, q) / eval_poly_at(m_den, v, q);
    }

    std::string to_string() const
    {
        if (m_den.is_constant() && m_den.constant_term() == 1) {
            return m_num.to_string();
        }
        std::string n = m_num.to_string();
        std::string d = m_den.to_string();
        if (m_num.size() > 1) {
            n = "(" + n + ")";
        }
        if (m_den.size() > 1 || !m_den.is_constant()) {
            d = "(" + d + ")";
        }
        return n + "/" + d;
    }

private:
    static RatFun raw(Poly num, Poly den)
    {
        RatFun r;
        r.m_num = std::move(num);
        r.m_den = std::move(den);
        if (r.m_num.is_zero()) {
            r.m_den = Poly(Rational(1));
        }
        return r;
    }

    static RatFun eval_poly_at(const Poly& p, int v, const RatFun& q)
    {
        auto cs = p.as_univariate(v);
        RatFun acc(cs.back());
        for (std::size_t k = cs.size() - 1; k-- > 0;) {
            acc = acc * q + RatFun(cs[k]);
        }
        return acc;
    }

    void canonicalize()
    {
        if (m_num.is_zero()) {
            m_den = Poly(Rational(1));
            return;
        }
        if (!m_den.is_constant()) {
            Poly g = poly_gcd(m_num, m_den);
            if (!g.is_constant()) {
                m_num = *m_num.divide_exact(g);
                m_den = *m_den.divide_exact(g);
            }
        }
        Rational lc = m_den.leading().second;
        if (lc != 1) {
            Rational inv = Rational(1) / lc;
            m_num = m_num.scaled(inv);
            m_den = m_den.scaled(inv);
        }
    }

    Poly m_num;
    Poly m_den;
};

template <>
struct CoeffOps<RatFun>
{
    static bool is_zero(const RatFun& c) { return c.is_zero(); }
    static bool is_one(const RatFun& c) { return c.is_constant() && c.constant_value() == 1; }
    static RatFun zero() { return RatFun(); }
    static RatFun one() { return RatFun(1); }
    static RatFun div(const RatFun& a, const RatFun& b) { return a / b; }
    static bool divides(const RatFun& b, const RatFun&) { return !b.is_zero(); }
    static std::string str(const RatFun& c) { return c.to_string(); }
    static bool needs_parens(const RatFun& c) { return !c.is_constant(); }
    static bool negative(const RatFun& c) { return c.is_constant() && sgn(c.constant_value()) < 0; }
};

using RatPoly = Polynomial<RatFun>;

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_RATFUN_HPP
