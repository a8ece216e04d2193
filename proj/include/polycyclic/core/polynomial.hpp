#ifndef POLYCYCLIC_CORE_POLYNOMIAL_HPP
#define POLYCYCLIC_CORE_POLYNOMIAL_HPP

#include "polycyclic/core/coeff_ops.hpp"
#include "polycyclic/core/symbols.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polycyclic
{

// Packed exponent vector. Ordering is lexicographic with slot 0 most significant.
struct Monomial
{
    std::array<std::uint16_t, kMaxVars> e{};

    static Monomial var(int idx, unsigned power = 1)
    {
        Monomial m;
        m.set(idx, power);
        return m;
    }

    unsigned operator[](int idx) const { return e[static_cast<std::size_t>(idx)]; }

    void set(int idx, unsigned power)
    {
        if (idx < 0 || static_cast<std::size_t>(idx) >= kMaxVars) {
            throw std::out_of_range("monomial slot out of range");
        }
        if (power > 0xFFFFu) {
            throw std::overflow_error("monomial exponent overflow");
        }
        e[static_cast<std::size_t>(idx)] = static_cast<std::uint16_t>(power);
    }

    unsigned total_degree() const
    {
        unsigned d = 0;
        for (auto v : e) {
            d += v;
        }
        return d;
    }

    bool is_one() const
    {
        for (auto v : e) {
            if (v) {
                return false;
            }
        }
        return true;
    }

    bool divides(const Monomial& other) const
    {
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            if (e[i] > other.e[i]) {
                return false;
            }
        }
        return true;
    }

    Monomial operator*(const Monomial& o) const
    {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            unsigned s = unsigned(e[i]) + o.e[i];
            if (s > 0xFFFFu) {
                throw std::overflow_error("monomial exponent overflow");
            }
            r.e[i] = static_cast<std::uint16_t>(s);
        }
        return r;
    }

    // Caller guarantees o divides *this.
    Monomial operator/(const Monomial& o) const
    {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            r.e[i] = static_cast<std::uint16_t>(e[i] - o.e[i]);
        }
        return r;
    }

    static Monomial lcm(const Monomial& a, const Monomial& b)
    {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            r.e[i] = std::max(a.e[i], b.e[i]);
        }
        return r;
    }

    auto operator<=>(const Monomial&) const = default;
    bool operator==(const Monomial&) const = default;
};

template <class C>
class Polynomial
{
public:
    using Coeff = C;
    using Ops = CoeffOps<C>;
    using Term = std::pair<Monomial, C>;

    Polynomial() = default;
    Polynomial(const C& c)
    {
        if (!Ops::is_zero(c)) {
            m_terms.emplace_back(Monomial{}, c);
        }
    }
    Polynomial(long c) : Polynomial(C(c)) {}

    static Polynomial var(int idx, unsigned power = 1) { return monomial(Monomial::var(idx, power), Ops::one()); }
    static Polynomial var(std::string_view name, unsigned power = 1) { return var(symbol(name), power); }

    static Polynomial monomial(const Monomial& m, const C& c)
    {
        Polynomial p;
        if (!Ops::is_zero(c)) {
            p.m_terms.emplace_back(m, c);
        }
        return p;
    }

    // Builds from arbitrary (possibly duplicated, unsorted) terms.
    static Polynomial from_terms(std::vector<Term> terms)
    {
        Polynomial p;
        p.m_terms = std::move(terms);
        p.normalize();
        return p;
    }

    const std::vector<Term>& terms() const { return m_terms; }
    std::size_t size() const { return m_terms.size(); }
    bool is_zero() const { return m_terms.empty(); }
    bool is_constant() const { return m_terms.empty() || (m_terms.size() == 1 && m_terms[0].first.is_one()); }

    C constant_term() const
    {
        if (!m_terms.empty() && m_terms.back().first.is_one()) {
            return m_terms.back().second;
        }
        return Ops::zero();
    }

    C coeff(const Monomial& m) const
    {
        auto it = std::lower_bound(m_terms.begin(), m_terms.end(), m,
                                   [](const Term& t, const Monomial& key) { return t.first > key; });
        if (it != m_terms.end() && it->first == m) {
            return it->second;
        }
        return Ops::zero();
    }

    // Lex-leading term (slot 0 most significant).
    const Term& leading() const
    {
        if (m_terms.empty()) {
            throw std::domain_error("leading term of zero polynomial");
        }
        return m_terms.front();
    }

    unsigned total_degree() const
    {
        unsigned d = 0;
        for (const auto& t : m_terms) {
            d = std::max(d, t.first.total_degree());
        }
        return d;
    }

    unsigned degree_in(int v) const
    {
        unsigned d = 0;
        for (const auto& t : m_terms) {
            d = std::max(d, t.first[v]);
        }
        return d;
    }

    bool depends_on(int v) const { return degree_in(v) > 0; }

    // Variables that occur, in ascending slot order.
    std::vector<int> variables() const
    {
        Monomial any;
        for (const auto& t : m_terms) {
            any = Monomial::lcm(any, t.first);
        }
        std::vector<int> out;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            if (any.e[i]) {
                out.push_back(static_cast<int>(i));
            }
        }
        return out;
    }

    // Coefficient of v^k, as a polynomial free of v.
    Polynomial coeff_in(int v, unsigned k) const
    {
        std::vector<Term> out;
        for (const auto& t : m_terms) {
            if (t.first[v] == k) {
                Monomial m = t.first;
                m.set(v, 0);
                out.emplace_back(m, t.second);
            }
        }
        return from_terms(std::move(out));
    }

    // Dense coefficient list in v: result[k] = coeff_in(v, k).
    std::vector<Polynomial> as_univariate(int v) const
    {
        std::vector<std::vector<Term>> buckets(degree_in(v) + 1);
        for (const auto& t : m_terms) {
            Monomial m = t.first;
            unsigned k = m[v];
            m.set(v, 0);
            buckets[k].emplace_back(m, t.second);
        }
        std::vector<Polynomial> out;
        out.reserve(buckets.size());
        for (auto& b : buckets) {
            out.push_back(from_terms(std::move(b)));
        }
        return out;
    }

    static Polynomial from_univariate(const std::vector<Polynomial>& cs, int v)
    {
        Polynomial acc;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            if (!cs[k].is_zero()) {
                acc += cs[k] * var(v, static_cast<unsigned>(k));
            }
        }
        return acc;
    }

    Polynomial operator-() const
    {
        Polynomial r = *this;
        for (auto& t : r.m_terms) {
            t.second = -t.second;
        }
        return r;
    }

    Polynomial& operator+=(const Polynomial& o) { return *this = merge(*this, o, false); }
    Polynomial& operator-=(const Polynomial& o) { return *this = merge(*this, o, true); }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) { return merge(a, b, false); }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return merge(a, b, true); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        if (a.is_zero() || b.is_zero()) {
            return {};
        }
        if (b.is_constant()) {
            return a.scaled(b.m_terms[0].second);
        }
        if (a.is_constant()) {
            return b.scaled(a.m_terms[0].second);
        }
        std::vector<Term> out;
        out.reserve(a.size() * b.size());
        for (const auto& s : a.m_terms) {
            for (const auto& t : b.m_terms) {
                out.emplace_back(s.first * t.first, s.second * t.second);
            }
        }
        return from_terms(std::move(out));
    }

    Polynomial scaled(const C& c) const
    {
        if (Ops::is_zero(c)) {
            return {};
        }
        Polynomial r = *this;
        for (auto& t : r.m_terms) {
            t.second = t.second * c;
        }
        r.drop_zeros();
        return r;
    }

    Polynomial mul_monomial(const Monomial& m, const C& c) const
    {
        if (Ops::is_zero(c)) {
            return {};
        }
        Polynomial r;
        r.m_terms.reserve(m_terms.size());
        for (const auto& t : m_terms) {
            r.m_terms.emplace_back(t.first * m, t.second * c);
        }
        r.drop_zeros();
        return r;
    }

    Polynomial pow(unsigned k) const
    {
        Polynomial result(Ops::one());
        Polynomial base = *this;
        while (k) {
            if (k & 1u) {
                result *= base;
            }
            k >>= 1u;
            if (k) {
                base = base * base;
            }
        }
        return result;
    }

    bool operator==(const Polynomial& o) const
    {
        if (m_terms.size() != o.m_terms.size()) {
            return false;
        }
        for (std::size_t i = 0; i < m_terms.size(); ++i) {
            if (m_terms[i].first != o.m_terms[i].first || !(m_terms[i].second == o.m_terms[i].second)) {
                return false;
            }
        }
        return true;
    }
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

    // Lexicographic structural order; used only for deterministic tie-breaking.
    static int compare(const Polynomial& a, const Polynomial& b)
    {
        std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.m_terms[i].first != b.m_terms[i].first) {
                return a.m_terms[i].first > b.m_terms[i].first ? 1 : -1;
            }
        }
        if (a.size() != b.size()) {
            return a.size() > b.size() ? 1 : -1;
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::string sa = Ops::str(a.m_terms[i].second);
            std::string sb = Ops::str(b.m_terms[i].second);
            if (sa != sb) {
                return sa < sb ? -1 : 1;
            }
        }
        return 0;
    }

    // Replace variable v by polynomial q.
    Polynomial substitute(int v, const Polynomial& q) const
    {
        if (!depends_on(v)) {
            return *this;
        }
        auto cs = as_univariate(v);
        Polynomial acc = cs.back();
        for (std::size_t k = cs.size() - 1; k-- > 0;) {
            acc = acc * q + cs[k];
        }
        return acc;
    }

    // Evaluate selected variables at values in C; others stay symbolic.
    Polynomial partial_eval(const std::map<int, C>& values) const
    {
        std::vector<Term> out;
        out.reserve(m_terms.size());
        std::map<std::pair<int, unsigned>, C> cache;
        for (const auto& t : m_terms) {
            Monomial m = t.first;
            C c = t.second;
            for (const auto& [v, val] : values) {
                unsigned k = m[v];
                if (k == 0) {
                    continue;
                }
                auto key = std::make_pair(v, k);
                auto it = cache.find(key);
                if (it == cache.end()) {
                    C pw = Ops::one();
                    for (unsigned i = 0; i < k; ++i) {
                        pw = pw * val;
                    }
                    it = cache.emplace(key, pw).first;
                }
                c = c * it->second;
                m.set(v, 0);
            }
            out.emplace_back(m, c);
        }
        return from_terms(std::move(out));
    }

    // Full evaluation; every variable present must appear in values.
    template <class V>
    V evaluate(const std::function<V(int)>& value_of) const
    {
        V acc = V(0);
        for (const auto& t : m_terms) {
            V term = convert<V>(t.second);
            for (std::size_t i = 0; i < kMaxVars; ++i) {
                unsigned k = t.first.e[i];
                if (k) {
                    V base = value_of(static_cast<int>(i));
                    V pw = V(1);
                    for (unsigned j = 0; j < k; ++j) {
                        pw = pw * base;
                    }
                    term = term * pw;
                }
            }
            acc = acc + term;
        }
        return acc;
    }

    C evaluate(const std::map<int, C>& values) const
    {
        Polynomial p = partial_eval(values);
        if (!p.is_constant()) {
            throw std::invalid_argument("evaluate: unassigned variable");
        }
        return p.constant_term();
    }

    template <class D, class F>
    Polynomial<D> map_coeffs(F&& f) const
    {
        std::vector<typename Polynomial<D>::Term> out;
        out.reserve(m_terms.size());
        for (const auto& t : m_terms) {
            out.emplace_back(t.first, f(t.second));
        }
        return Polynomial<D>::from_terms(std::move(out));
    }

    // Partial derivative in v.
    Polynomial derivative(int v) const
    {
        std::vector<Term> out;
        for (const auto& t : m_terms) {
            unsigned k = t.first[v];
            if (k) {
                Monomial m = t.first;
                m.set(v, k - 1);
                out.emplace_back(m, t.second * C(static_cast<long>(k)));
            }
        }
        return from_terms(std::move(out));
    }

    // Exact division by d (lex-leading-term reduction); nullopt if d does not divide.
    std::optional<Polynomial> divide_exact(const Polynomial& d) const
    {
        if (d.is_zero()) {
            throw std::domain_error("polynomial division by zero");
        }
        if (d.is_constant()) {
            C c = d.m_terms[0].second;
            std::vector<Term> out;
            out.reserve(m_terms.size());
            for (const auto& t : m_terms) {
                if (!Ops::divides(c, t.second)) {
                    return std::nullopt;
                }
                out.emplace_back(t.first, Ops::div(t.second, c));
            }
            return from_terms(std::move(out));
        }
        const auto& [lm, lc] = d.leading();
        Polynomial rem = *this;
        std::vector<Term> quot;
        while (!rem.is_zero()) {
            const auto& [rm, rc] = rem.leading();
            if (!lm.divides(rm) || !Ops::divides(lc, rc)) {
                return std::nullopt;
            }
            Monomial qm = rm / lm;
            C qc = Ops::div(rc, lc);
            quot.emplace_back(qm, qc);
            rem -= d.mul_monomial(qm, qc);
        }
        return from_terms(std::move(quot));
    }

    std::string to_string(const std::function<std::string(int)>& namer = symbol_name) const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string s;
        bool first = true;
        for (const auto& [m, c] : m_terms) {
            bool neg = Ops::negative(c);
            C mag = neg ? C(-c) : c;
            if (!first) {
                s += neg ? " - " : " + ";
            } else if (neg) {
                s += "-";
            }
            first = false;
            std::string mono;
            for (std::size_t i = 0; i < kMaxVars; ++i) {
                if (m.e[i]) {
                    if (!mono.empty()) {
                        mono += "*";
                    }
                    mono += namer(static_cast<int>(i));
                    if (m.e[i] > 1) {
                        mono += "^" + std::to_string(m.e[i]);
                    }
                }
            }
            std::string cs = Ops::str(mag);
            if (Ops::needs_parens(mag)) {
                cs = "(" + cs + ")";
            }
            if (mono.empty()) {
                s += cs;
            } else if (Ops::is_one(mag)) {
                s += mono;
            } else {
                s += cs + "*" + mono;
            }
        }
        return s;
    }

private:
    template <class V>
    static V convert(const C& c)
    {
        if constexpr (std::is_same_v<V, double>) {
            return c.get_d();
        } else {
            return V(c);
        }
    }

    void drop_zeros()
    {
        m_terms.erase(std::remove_if(m_terms.begin(), m_terms.end(),
                                     [](const Term& t) { return Ops::is_zero(t.second); }),
                      m_terms.end());
    }

    void normalize()
    {
        std::sort(m_terms.begin(), m_terms.end(), [](const Term& a, const Term& b) { return a.first > b.first; });
        std::vector<Term> merged;
        merged.reserve(m_terms.size());
        for (auto& t : m_terms) {
            if (!merged.empty() && merged.back().first == t.first) {
                merged.back().second = merged.back().second + t.second;
            } else {
                merged.push_back(std::move(t));
            }
        }
        m_terms = std::move(merged);
        drop_zeros();
    }

    static Polynomial merge(const Polynomial& a, const Polynomial& b, bool subtract)
    {
        Polynomial r;
        r.m_terms.reserve(a.size() + b.size());
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a.m_terms[i].first > b.m_terms[j].first)) {
                r.m_terms.push_back(a.m_terms[i++]);
            } else if (i == a.size() || b.m_terms[j].first > a.m_terms[i].first) {
                const auto& t = b.m_terms[j++];
                r.m_terms.emplace_back(t.first, subtract ? C(-t.second) : t.second);
            } else {
                C c = subtract ? C(a.m_terms[i].second - b.m_terms[j].second)
                               : C(a.m_terms[i].second + b.m_terms[j].second);
                if (!Ops::is_zero(c)) {
                    r.m_terms.emplace_back(a.m_terms[i].first, std::move(c));
                }
                ++i;
                ++j;
            }
        }
        return r;
    }

    std::vector<Term> m_terms; // strictly decreasing monomials, nonzero coefficients
};

using Poly = Polynomial<Rational>;
using IntPoly = Polynomial<Integer>;

inline Poly to_rational_poly(const IntPoly& p)
{
    return p.map_coeffs<Rational>([](const Integer& c) { return Rational(c); });
}

// Clears denominators: returns (k, P) with p = P / k, P integral, k > 0.
inline std::pair<Integer, IntPoly> clear_denominators(const Poly& p)
{
    Integer l = 1;
    for (const auto& t : p.terms()) {
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), t.second.get_den_mpz_t());
    }
    IntPoly q = p.map_coeffs<Integer>([&](const Rational& c) { return Integer(c.get_num() * (l / c.get_den())); });
    return {l, q};
}

namespace detail
{

inline Poly pseudo_remainder(const Poly& a, const Poly& b, int v)
{
    auto bu = b.as_univariate(v);
    std::size_t db = bu.size() - 1;
    const Poly& lb = bu.back();
    auto au = a.as_univariate(v);
    while (au.size() >= bu.size()) {
        bool allzero = true;
        for (const auto& c : au) {
            allzero = allzero && c.is_zero();
        }
        if (allzero) {
            return {};
        }
        Poly la = au.back();
        std::size_t shift = au.size() - 1 - db;
        for (auto& c : au) {
            c = c * lb;
        }
        for (std::size_t k = 0; k <= db; ++k) {
            au[k + shift] -= la * bu[k];
        }
        au.pop_back();
        while (!au.empty() && au.back().is_zero()) {
            au.pop_back();
        }
    }
    return Poly::from_univariate(au, v);
}

} // namespace detail

Poly poly_gcd(const Poly& a, const Poly& b);

// Content of p with respect to v: gcd of its coefficients in v.
inline Poly poly_content(const Poly& p, int v)
{
    auto cs = p.as_univariate(v);
    Poly g;
    for (const auto& c : cs) {
        if (c.is_zero()) {
            continue;
        }
        g = g.is_zero() ? c : poly_gcd(g, c);
        if (g.is_constant()) {
            return Poly(Rational(1));
        }
    }
    return g;
}

// Makes the lex-leading coefficient 1.
inline Poly poly_monic(const Poly& p)
{
    if (p.is_zero()) {
        return p;
    }
    return p.scaled(Rational(1) / p.leading().second);
}

// Multivariate gcd over Q via recursive primitive pseudo-remainder sequences. Result is monic.
inline Poly poly_gcd(const Poly& a, const Poly& b)
{
    if (a.is_zero()) {
        return poly_monic(b);
    }
    if (b.is_zero()) {
        return poly_monic(a);
    }
    if (a.is_constant() || b.is_constant()) {
        return Poly(Rational(1));
    }
    if (a == b) {
        return poly_monic(a);
    }
    auto va = a.variables();
    auto vb = b.variables();
    int v = std::min(va.front(), vb.front());
    if (!a.depends_on(v)) {
        return poly_gcd(a, poly_content(b, v));
    }
    if (!b.depends_on(v)) {
        return poly_gcd(poly_content(a, v), b);
    }
    Poly ca = poly_content(a, v);
    Poly cb = poly_content(b, v);
    Poly c = poly_gcd(ca, cb);
    Poly pa = *a.divide_exact(ca);
    Poly pb = *b.divide_exact(cb);
    if (pa.degree_in(v) < pb.degree_in(v)) {
        std::swap(pa, pb);
    }
    Poly g;
    while (true) {
        Poly r = detail::pseudo_remainder(pa, pb, v);
        if (r.is_zero()) {
            g = *pb.divide_exact(poly_content(pb, v));
            break;
        }
        if (!r.depends_on(v)) {
            g = Poly(Rational(1));
            break;
        }
        pa = std::move(pb);
        pb = *r.divide_exact(poly_content(r, v));
    }
    return poly_monic(c * g);
}

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_POLYNOMIAL_HPP
