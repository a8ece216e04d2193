#ifndef POLYCYCLIC_EULER_CALCULUS_HPP
#define POLYCYCLIC_EULER_CALCULUS_HPP

#include "polycyclic/core/ratfun.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace polycyclic
{

using CoeffRing = RatFun;

// Ld(y, beta) = (y^beta - 1)/beta, log y at beta = 0.
struct LdOptions
{
    double switch_threshold = 1e-4;
    int series_terms = 8;
};

inline double ld_eval(double y, double beta, const LdOptions& opt = {})
{
    if (!(y > 0.0)) {
        throw std::domain_error("ld_eval: y must be positive");
    }
    double ly = std::log(y);
    double t = beta * ly;
    if (std::fabs(t) < opt.switch_threshold) {
        // sum_{n>=0} beta^n (log y)^{n+1} / (n+1)!, Horner form
        double acc = 1.0;
        for (int n = opt.series_terms - 1; n >= 1; --n) {
            acc = 1.0 + acc * t / static_cast<double>(n + 1);
        }
        return ly * acc;
    }
    return std::expm1(t) / beta;
}

namespace detail
{

// Fixed generic evaluation point used to order exponents: symbol i -> 1/(7+4i).
inline Rational generic_value(int idx)
{
    return Rational(1, 7 + 4 * idx);
}

inline Rational generic_eval(const RatFun& f)
{
    std::map<int, Rational> pt;
    for (int v : f.num().variables()) {
        pt[v] = generic_value(v);
    }
    for (int v : f.den().variables()) {
        pt[v] = generic_value(v);
    }
    return f.evaluate(pt);
}

inline int ratfun_compare(const RatFun& a, const RatFun& b)
{
    int c = Poly::compare(a.num(), b.num());
    return c != 0 ? c : Poly::compare(a.den(), b.den());
}

} // namespace detail

struct LogExpTerm
{
    CoeffRing coeff;
    CoeffRing exponent;
    unsigned log_power = 0;
};

// Finite sum  sum_i c_i x^{e_i} (log x)^{k_i}  kept in normal form.
class LogExpSum
{
public:
    LogExpSum() = default;
    LogExpSum(const CoeffRing& c) { add_term(c, CoeffRing(0), 0); }
    LogExpSum(long c) : LogExpSum(CoeffRing(c)) {}

    static LogExpSum monomial(const CoeffRing& c, const CoeffRing& e, unsigned k = 0)
    {
        LogExpSum s;
        s.add_term(c, e, k);
        return s;
    }

    static LogExpSum x() { return monomial(CoeffRing(1), CoeffRing(1), 0); }

    static LogExpSum from_terms(std::vector<LogExpTerm> terms)
    {
        LogExpSum s;
        s.m_terms = std::move(terms);
        s.normalize();
        return s;
    }

    const std::vector<LogExpTerm>& terms() const { return m_terms; }
    bool is_zero() const { return m_terms.empty(); }
    std::size_t size() const { return m_terms.size(); }

    LogExpSum operator-() const
    {
        LogExpSum r = *this;
        for (auto& t : r.m_terms) {
            t.coeff = -t.coeff;
        }
        return r;
    }

    friend LogExpSum operator+(const LogExpSum& a, const LogExpSum& b)
    {
        std::vector<LogExpTerm> all = a.m_terms;
        all.insert(all.end(), b.m_terms.begin(), b.m_terms.end());
        return from_terms(std::move(all));
    }
    friend LogExpSum operator-(const LogExpSum& a, const LogExpSum& b) { return a + (-b); }

    friend LogExpSum operator*(const LogExpSum& a, const LogExpSum& b)
    {
        std::vector<LogExpTerm> all;
        all.reserve(a.size() * b.size());
        for (const auto& s : a.m_terms) {
            for (const auto& t : b.m_terms) {
                all.push_back({s.coeff * t.coeff, s.exponent + t.exponent, s.log_power + t.log_power});
            }
        }
        return from_terms(std::move(all));
    }

    LogExpSum scaled(const CoeffRing& c) const
    {
        if (c.is_zero()) {
            return {};
        }
        LogExpSum r = *this;
        for (auto& t : r.m_terms) {
            t.coeff = t.coeff * c;
        }
        return r;
    }

    // Multiply by x^e.
    LogExpSum shifted(const CoeffRing& e) const
    {
        std::vector<LogExpTerm> all = m_terms;
        for (auto& t : all) {
            t.exponent = t.exponent + e;
        }
        return from_terms(std::move(all));
    }

    LogExpSum& operator+=(const LogExpSum& o) { return *this = *this + o; }
    LogExpSum& operator-=(const LogExpSum& o) { return *this = *this - o; }
    LogExpSum& operator*=(const LogExpSum& o) { return *this = *this * o; }

    bool operator==(const LogExpSum& o) const
    {
        if (m_terms.size() != o.m_terms.size()) {
            return false;
        }
        for (std::size_t i = 0; i < m_terms.size(); ++i) {
            const auto& s = m_terms[i];
            const auto& t = o.m_terms[i];
            if (s.log_power != t.log_power || s.exponent != t.exponent || s.coeff != t.coeff) {
                return false;
            }
        }
        return true;
    }
    bool operator!=(const LogExpSum& o) const { return !(*this == o); }

    // Numeric value; params supplies values of the coefficient-ring symbols.
    double evaluate(double x, const std::function<double(int)>& params = [](int) -> double {
        throw std::invalid_argument("LogExpSum::evaluate: unassigned symbol");
    }) const
    {
        if (!(x > 0.0)) {
            throw std::domain_error("LogExpSum::evaluate: x must be positive");
        }
        double lx = std::log(x);
        double acc = 0.0;
        for (const auto& t : m_terms) {
            double c = t.coeff.is_constant() ? t.coeff.constant_value().get_d() : t.coeff.evaluate_double(params);
            double e = t.exponent.is_constant() ? t.exponent.constant_value().get_d() : t.exponent.evaluate_double(params);
            acc += c * std::pow(x, e) * std::pow(lx, static_cast<double>(t.log_power));
        }
        return acc;
    }

    // Substitutes exact values for coefficient-ring symbols (a ring homomorphism).
    LogExpSum specialize(const std::map<int, Rational>& values) const
    {
        std::vector<LogExpTerm> all;
        all.reserve(m_terms.size());
        for (const auto& t : m_terms) {
            all.push_back({t.coeff.partial_eval(values), t.exponent.partial_eval(values), t.log_power});
        }
        return from_terms(std::move(all));
    }

    std::string to_string() const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string s;
        for (std::size_t i = 0; i < m_terms.size(); ++i) {
            const auto& t = m_terms[i];
            if (i) {
                s += " + ";
            }
            s += "(" + t.coeff.to_string() + ")";
            if (!t.exponent.is_zero()) {
                s += "*x^(" + t.exponent.to_string() + ")";
            }
            if (t.log_power == 1) {
                s += "*log(x)";
            } else if (t.log_power > 1) {
                s += "*log(x)^" + std::to_string(t.log_power);
            }
        }
        return s;
    }

private:
    void add_term(const CoeffRing& c, const CoeffRing& e, unsigned k)
    {
        if (!c.is_zero()) {
            m_terms.push_back({c, e, k});
        }
    }

    void normalize()
    {
        struct Keyed
        {
            Rational gen;
            LogExpTerm term;
        };
        std::vector<Keyed> keyed;
        keyed.reserve(m_terms.size());
        for (auto& t : m_terms) {
            if (!t.coeff.is_zero()) {
                Rational g = t.exponent.is_constant() ? t.exponent.constant_value() : detail::generic_eval(t.exponent);
                keyed.push_back({std::move(g), std::move(t)});
            }
        }
        std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
            if (a.gen != b.gen) {
                return a.gen < b.gen;
            }
            int c = detail::ratfun_compare(a.term.exponent, b.term.exponent);
            if (c != 0) {
                return c < 0;
            }
            return a.term.log_power < b.term.log_power;
        });
        m_terms.clear();
        for (auto& k : keyed) {
            if (!m_terms.empty() && m_terms.back().log_power == k.term.log_power &&
                m_terms.back().exponent == k.term.exponent) {
                m_terms.back().coeff += k.term.coeff;
                if (m_terms.back().coeff.is_zero()) {
                    m_terms.pop_back();
                }
            } else {
                m_terms.push_back(std::move(k.term));
            }
        }
    }

    std::vector<LogExpTerm> m_terms;
};

// chi0 = x d/dx, term-wise: x^e L^k -> e x^e L^k + k x^e L^{k-1}.
inline LogExpSum chi0_apply(const LogExpSum& f)
{
    std::vector<LogExpTerm> out;
    out.reserve(2 * f.size());
    for (const auto& t : f.terms()) {
        out.push_back({t.coeff * t.exponent, t.exponent, t.log_power});
        if (t.log_power > 0) {
            out.push_back({t.coeff * CoeffRing(static_cast<long>(t.log_power)), t.exponent, t.log_power - 1});
        }
    }
    return LogExpSum::from_terms(std::move(out));
}

// Unique solution of chi0 f = r f + g with f(1) = 0.
inline LogExpSum euler_resolve(const CoeffRing& r, const LogExpSum& g)
{
    std::vector<LogExpTerm> out;
    for (const auto& t : g.terms()) {
        if (t.exponent == r) {
            out.push_back({t.coeff / CoeffRing(static_cast<long>(t.log_power + 1)), r, t.log_power + 1});
            continue;
        }
        CoeffRing inv = CoeffRing(1) / (t.exponent - r);
        CoeffRing d = t.coeff * inv;
        for (unsigned i = t.log_power + 1; i-- > 0;) {
            out.push_back({d, t.exponent, i});
            if (i == 0) {
                out.push_back({-d, r, 0});
            } else {
                d = -CoeffRing(static_cast<long>(i)) * d * inv;
            }
        }
    }
    return LogExpSum::from_terms(std::move(out));
}

// z(x, mu) = x Ld(x, mu): (x^{1+mu} - x)/mu, or x log x when mu = 0.
inline LogExpSum compensator(const CoeffRing& mu)
{
    if (mu.is_zero()) {
        return LogExpSum::monomial(CoeffRing(1), CoeffRing(1), 1);
    }
    CoeffRing inv = CoeffRing(1) / mu;
    return LogExpSum::monomial(inv, CoeffRing(1) + mu) - LogExpSum::monomial(inv, CoeffRing(1));
}

inline LogExpSum compensator_symbolic(int j)
{
    return compensator(CoeffRing::var(mu_symbol(j)));
}

} // namespace polycyclic

#endif // POLYCYCLIC_EULER_CALCULUS_HPP
