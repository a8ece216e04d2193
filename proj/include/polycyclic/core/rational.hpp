#ifndef POLYCYCLIC_CORE_RATIONAL_HPP
#define POLYCYCLIC_CORE_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polycyclic
{

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1)
{
    if (den == 0) {
        throw std::domain_error("rational with zero denominator");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Accepts "p", "p/q", and finite decimals such as "-0.125" or "1e-3" (converted exactly).
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    while (!s.empty() && s.front() == ' ') {
        s.erase(s.begin());
    }
    while (!s.empty() && s.back() == ' ') {
        s.pop_back();
    }
    if (s.empty()) {
        throw std::invalid_argument("empty rational literal");
    }
    if (s.find_first_of(".eE") != std::string::npos) {
        // Decimal literal: split mantissa/exponent and build an exact fraction.
        std::size_t epos = s.find_first_of("eE");
        std::string mant = s.substr(0, epos);
        long exp10 = 0;
        if (epos != std::string::npos) {
            exp10 = std::stol(s.substr(epos + 1));
        }
        bool neg = false;
        if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
            neg = mant[0] == '-';
            mant.erase(mant.begin());
        }
        std::size_t dot = mant.find('.');
        std::string digits = mant;
        if (dot != std::string::npos) {
            exp10 -= static_cast<long>(mant.size() - dot - 1);
            digits.erase(dot, 1);
        }
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("malformed rational literal: " + s);
        }
        Integer m(digits, 10);
        Integer p10 = 1;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
        Rational q = exp10 >= 0 ? Rational(m * p10) : Rational(m, p10);
        q.canonicalize();
        return neg ? Rational(-q) : q;
    }
    try {
        Rational q(s, 10);
        if (q.get_den() == 0) {
            throw std::invalid_argument("zero denominator");
        }
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("malformed rational literal: " + s);
    }
}

inline std::string to_string(const Rational& q)
{
    return q.get_str();
}

inline double to_double(const Rational& q)
{
    return q.get_d();
}

// Exact conversion of a finite double.
inline Rational rational_from_double(double v)
{
    Rational q(v);
    q.canonicalize();
    return q;
}

inline bool is_integer(const Rational& q)
{
    return q.get_den() == 1;
}

inline Rational rational_pow(const Rational& base, long exponent)
{
    if (exponent == 0) {
        return Rational(1);
    }
    if (exponent < 0) {
        if (base == 0) {
            throw std::domain_error("zero to a negative power");
        }
        return Rational(1) / rational_pow(base, -exponent);
    }
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational rational_abs(const Rational& q)
{
    return q < 0 ? Rational(-q) : q;
}

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_RATIONAL_HPP
