#ifndef POLYCYCLIC_CORE_COEFF_OPS_HPP
#define POLYCYCLIC_CORE_COEFF_OPS_HPP

#include "polycyclic/core/rational.hpp"

#include <stdexcept>
#include <string>

namespace polycyclic
{

// Customization point for polynomial coefficient types.
template <class C>
struct CoeffOps;

template <>
struct CoeffOps<Rational>
{
    static bool is_zero(const Rational& c) { return sgn(c) == 0; }
    static bool is_one(const Rational& c) { return c == 1; }
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational div(const Rational& a, const Rational& b)
    {
        if (sgn(b) == 0) {
            throw std::domain_error("division by zero coefficient");
        }
        return a / b;
    }
    static bool divides(const Rational& b, const Rational&) { return sgn(b) != 0; }
    static std::string str(const Rational& c) { return c.get_str(); }
    static bool needs_parens(const Rational&) { return false; }
    static bool negative(const Rational& c) { return sgn(c) < 0; }
};

template <>
struct CoeffOps<Integer>
{
    static bool is_zero(const Integer& c) { return sgn(c) == 0; }
    static bool is_one(const Integer& c) { return c == 1; }
    static Integer zero() { return Integer(0); }
    static Integer one() { return Integer(1); }
    static Integer div(const Integer& a, const Integer& b)
    {
        if (sgn(b) == 0) {
            throw std::domain_error("division by zero coefficient");
        }
        Integer q;
        mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        return q;
    }
    static bool divides(const Integer& b, const Integer& a)
    {
        return sgn(b) != 0 && mpz_divisible_p(a.get_mpz_t(), b.get_mpz_t()) != 0;
    }
    static std::string str(const Integer& c) { return c.get_str(); }
    static bool needs_parens(const Integer&) { return false; }
    static bool negative(const Integer& c) { return sgn(c) < 0; }
};

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_COEFF_OPS_HPP
