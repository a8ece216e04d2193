#ifndef POLYCYCLIC_POLYCYCLE_HPP
#define POLYCYCLIC_POLYCYCLE_HPP

#include "polycyclic/core/polynomial.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/interval.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace polycyclic
{

// ---------------------------------------------------------------------------
// Fixed-point system of a polycycle with k hyperbolic vertices.

using RealMap = std::function<double(double)>;

struct Vertex
{
    RealMap d;                 // Dulac map, d(x) = x^r (1 + o(1)), increasing
    double r = 1.0;
    RealMap transition;        // f_j, defaults to identity
    RealMap transition_inverse;
    double x_max = 0.5;        // window for the abscissa x_j
};

// Affine breaking parameter lambda_j(nu) = offset + sum_i slope[i] nu_i.
struct Breaking
{
    double offset = 0.0;
    std::vector<double> slope;

    double operator()(const std::vector<double>& nu) const
    {
        double v = offset;
        for (std::size_t i = 0; i < slope.size() && i < nu.size(); ++i) {
            v += slope[i] * nu[i];
        }
        return v;
    }
};

struct PolycycleSpec
{
    std::vector<Vertex> vertices;
    std::vector<Breaking> lambda; // size k
    double x_min = 1e-10;         // lower end of the log-spaced scan

    std::size_t k() const { return vertices.size(); }

    void validate() const
    {
        if (vertices.empty()) {
            throw std::invalid_argument("polycycle: need at least one vertex");
        }
        if (lambda.size() != vertices.size()) {
            throw std::invalid_argument("polycycle: need one breaking parameter per vertex");
        }
        for (const auto& v : vertices) {
            if (!v.d) {
                throw std::invalid_argument("polycycle: vertex without a Dulac map");
            }
            if (!(v.x_max > x_min)) {
                throw std::invalid_argument("polycycle: empty window");
            }
            if (static_cast<bool>(v.transition) != static_cast<bool>(v.transition_inverse)) {
                throw std::invalid_argument("polycycle: transition map needs its inverse");
            }
        }
    }
};

// d(x) = x^r (1 + sum_i c_i x^{i+1})
inline RealMap principal_dulac(double r, std::vector<double> c = {})
{
    return [r, c = std::move(c)](double x) {
        double corr = 1.0, xp = x;
        for (double ci : c) {
            corr += ci * xp;
            xp *= x;
        }
        return std::pow(x, r) * corr;
    };
}

// delta(x1) = d_k(x_k) - f_1(x1) - lambda_k with x_{j+1} = f_{j+1}^{-1}(d_j(x_j) - lambda_j);
// nullopt when the chain leaves a window (escape, not a zero).
inline std::optional<double> displacement(const PolycycleSpec& spec, double x1, const std::vector<double>& nu = {})
{
    const std::size_t k = spec.k();
    if (!(x1 > 0.0 && x1 <= spec.vertices[0].x_max)) {
        return std::nullopt;
    }
    double x = x1;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        double v = spec.vertices[j].d(x) - spec.lambda[j](nu);
        const auto& nxt = spec.vertices[j + 1];
        if (nxt.transition_inverse) {
            if (!(v > 0.0)) {
                return std::nullopt;
            }
            v = nxt.transition_inverse(v);
        }
        if (!(v > 0.0 && v <= nxt.x_max) || !std::isfinite(v)) {
            return std::nullopt;
        }
        x = v;
    }
    const auto& first = spec.vertices[0];
    double f1 = first.transition ? first.transition(x1) : x1;
    return spec.vertices[k - 1].d(x) - f1 - spec.lambda[k - 1](nu);
}

struct CycleRoot
{
    double x = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0; // delta changes sign on [lo, hi]
    double delta_lo = 0.0, delta_hi = 0.0;
    double derivative = 0.0;
    bool near_double = false; // numerical proxy for multiplicity >= 2
};

struct CycleCount
{
    std::vector<double> nu;
    std::vector<CycleRoot> roots;
    int count() const { return static_cast<int>(roots.size()); }
    bool resolution_limited = false;
    std::size_t scan_points = 0;
};

struct CountOptions
{
    int scan_points = 2048;
    int max_points = 1 << 16;
    double multiplicity_threshold = 1e-6;
    unsigned threads = 1;
};

namespace detail
{

inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g(static_cast<std::size_t>(n));
    double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    }
    g.back() = hi;
    return g;
}

inline CycleCount count_one(const PolycycleSpec& spec, const std::vector<double>& nu, const CountOptions& opt)
{
    CycleCount cc;
    cc.nu = nu;
    auto delta = [&](double x) { return displacement(spec, x, nu); };
    std::vector<double> xs = log_grid(spec.x_min, spec.vertices[0].x_max, opt.scan_points);
    std::vector<std::optional<double>> ds;
    for (double x : xs) {
        ds.push_back(delta(x));
    }
    // Refine around sampled local extrema of delta that come close to zero: a pair of
    // nearby roots could hide between two samples of equal sign.
    std::size_t budget = static_cast<std::size_t>(opt.max_points) - xs.size();
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<double> nx;
        std::vector<std::optional<double>> nd;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            bool suspicious = false;
            if (i > 0 && i + 1 < xs.size() && ds[i - 1] && ds[i] && ds[i + 1]) {
                double a = *ds[i - 1], b = *ds[i], c = *ds[i + 1];
                bool extremum = (b - a) * (c - b) < 0.0;
                bool same_sign = (a > 0) == (b > 0) && (b > 0) == (c > 0);
                suspicious = extremum && same_sign && std::fabs(b) < std::fabs(b - a) + std::fabs(c - b);
            }
            if (suspicious && budget >= 2 && xs[i + 1] - xs[i - 1] > 1e-13 * xs[i]) {
                double l = std::sqrt(xs[i - 1] * xs[i]), r = std::sqrt(xs[i] * xs[i + 1]);
                if (!nx.empty() && nx.back() >= l) {
                    l = 0.5 * (nx.back() + xs[i]);
                }
                nx.push_back(l);
                nd.push_back(delta(l));
                nx.push_back(xs[i]);
                nd.push_back(ds[i]);
                nx.push_back(r);
                nd.push_back(delta(r));
                budget -= 2;
                changed = true;
                ++i;
                if (i < xs.size()) {
                    nx.push_back(xs[i]);
                    nd.push_back(ds[i]);
                }
            } else {
                nx.push_back(xs[i]);
                nd.push_back(ds[i]);
            }
            if (suspicious && budget < 2) {
                cc.resolution_limited = true;
            }
        }
        xs = std::move(nx);
        ds = std::move(nd);
        if (budget < 2) {
            break;
        }
    }
    cc.scan_points = xs.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ds[i]) {
            scale = std::max(scale, std::fabs(*ds[i]));
        }
    }
    auto value = [&](double x) {
        auto v = delta(x);
        if (!v) {
            throw std::logic_error("count_cycles: escape inside a sign-change bracket");
        }
        return *v;
    };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!ds[i] || !ds[i + 1]) {
            continue;
        }
        double a = *ds[i], b = *ds[i + 1];
        CycleRoot root;
        if (a == 0.0) {
            if (i > 0 && ds[i - 1] && *ds[i - 1] != 0.0 && (*ds[i - 1] > 0) != (b > 0)) {
                root.x = xs[i];
                root.bracket_lo = xs[i - 1];
                root.bracket_hi = xs[i + 1];
                root.delta_lo = *ds[i - 1];
                root.delta_hi = b;
            } else {
                continue;
            }
        } else if (b != 0.0 && (a > 0) != (b > 0)) {
            std::uintmax_t iters = 200;
            auto res = boost::math::tools::toms748_solve(value, xs[i], xs[i + 1], a, b,
                                                         boost::math::tools::eps_tolerance<double>(42), iters);
            root.x = 0.5 * (res.first + res.second);
            root.bracket_lo = xs[i];
            root.bracket_hi = xs[i + 1];
            root.delta_lo = a;
            root.delta_hi = b;
        } else {
            continue;
        }
        double h = 1e-6 * root.x;
        auto p = delta(root.x + h), m = delta(root.x - h);
        if (p && m) {
            root.derivative = (*p - *m) / (2 * h);
            // x delta'(x) against the size of delta on the window
            root.near_double = std::fabs(root.x * root.derivative) < opt.multiplicity_threshold * std::max(scale, 1e-300);
        }
        cc.roots.push_back(root);
    }
    return cc;
}

} // namespace detail

inline std::vector<CycleCount> count_cycles(const PolycycleSpec& spec, const std::vector<std::vector<double>>& nu_grid,
                                            const CountOptions& opt = {})
{
    spec.validate();
    if (nu_grid.empty()) {
        throw std::invalid_argument("count_cycles: empty parameter grid");
    }
    std::vector<CycleCount> out(nu_grid.size());
    unsigned nt = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(nu_grid.size())));
    if (nt == 1) {
        for (std::size_t i = 0; i < nu_grid.size(); ++i) {
            out[i] = detail::count_one(spec, nu_grid[i], opt);
        }
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < nu_grid.size(); i += nt) {
                    out[i] = detail::count_one(spec, nu_grid[i], opt);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rolle bound from a domination partition of (g, chi g, ..., chi^l g) along an orbit.

struct RolleInterval
{
    double a = 0.0, b = 0.0;
    int j = 0; // index of the dominating derivative, certified nonvanishing on [a, b]
};

struct RolleReport
{
    bool certified = false;
    int bound = 0; // sum over intervals of j
    std::vector<RolleInterval> intervals;
    std::string diagnostic;
};

namespace detail
{

inline RolleReport assemble_rolle(const std::vector<double>& ts, const std::vector<int>& arg)
{
    RolleReport rep;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= ts.size(); ++i) {
        if (i == ts.size() || arg[i] != arg[start]) {
            rep.intervals.push_back({ts[start], ts[i - 1], arg[start]});
            start = i;
        }
    }
    // join consecutive intervals so that the partition covers [t0, t1]
    for (std::size_t i = 0; i + 1 < rep.intervals.size(); ++i) {
        rep.intervals[i].b = rep.intervals[i + 1].a;
    }
    return rep;
}

} // namespace detail

// Sign-consistency mode: derivs[j] = chi^j g as a function of the orbit parameter t.
inline RolleReport rolle_bound(const std::vector<RealMap>& derivs, double t0, double t1, int samples = 2048)
{
    if (derivs.empty() || !(t1 > t0) || samples < 2) {
        throw std::invalid_argument("rolle_bound: need derivatives and a nondegenerate orbit segment");
    }
    std::vector<double> ts;
    std::vector<int> arg;
    std::vector<std::vector<double>> vals(derivs.size());
    for (int i = 0; i < samples; ++i) {
        double t = t0 + (t1 - t0) * i / (samples - 1);
        ts.push_back(t);
        int best = -1;
        double bv = 0.0;
        for (std::size_t j = 0; j < derivs.size(); ++j) {
            double v = derivs[j](t);
            vals[j].push_back(v);
            if (std::fabs(v) > bv) {
                bv = std::fabs(v);
                best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            RolleReport rep;
            rep.diagnostic = "no certificate: all derivatives vanish at t = " + std::to_string(t);
            return rep;
        }
        arg.push_back(best);
    }
    auto rep = detail::assemble_rolle(ts, arg);
    // the dominating derivative keeps a constant sign over its interval (including the joined ends)
    std::size_t pos = 0;
    for (auto& iv : rep.intervals) {
        auto& col = vals[static_cast<std::size_t>(iv.j)];
        while (pos < ts.size() && ts[pos] < iv.a) {
            ++pos;
        }
        double sgn = 0.0;
        for (std::size_t i = pos; i < ts.size() && ts[i] <= iv.b; ++i) {
            double v = col[i];
            if (v == 0.0 || (sgn != 0.0 && (v > 0) != (sgn > 0))) {
                // fall back to a higher derivative on this piece
                iv.j = static_cast<int>(derivs.size()) - 1;
                break;
            }
            sgn = v;
        }
        rep.bound += iv.j;
    }
    rep.certified = true;
    return rep;
}

namespace detail
{

using Interval = boost::numeric::interval<
    double, boost::numeric::interval_lib::policies<boost::numeric::interval_lib::save_state<boost::numeric::interval_lib::rounded_transc_std<double>>,
                                                   boost::numeric::interval_lib::checking_base<double>>>;

inline std::vector<double> poly_derivative(const std::vector<double>& c)
{
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) {
        d.push_back(c[i] * static_cast<double>(i));
    }
    return d;
}

inline double poly_eval(const std::vector<double>& c, double t)
{
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) {
        acc = acc * t + c[i];
    }
    return acc;
}

inline Interval poly_eval(const std::vector<double>& c, const Interval& t)
{
    Interval acc(0.0);
    for (std::size_t i = c.size(); i-- > 0;) {
        acc = acc * t + Interval(c[i]);
    }
    return acc;
}

inline bool certified_nonzero(const std::vector<double>& c, double a, double b, int depth = 12)
{
    Interval v = poly_eval(c, Interval(a, b));
    if (!boost::numeric::zero_in(v)) {
        return true;
    }
    if (depth == 0) {
        return false;
    }
    double m = 0.5 * (a + b);
    return certified_nonzero(c, a, m, depth - 1) && certified_nonzero(c, m, b, depth - 1);
}

} // namespace detail

// Interval mode for polynomial g(t) = sum c_i t^i with chi = d/dt: the dominating derivative is
// certified nonvanishing on each interval with outward-rounded interval arithmetic.
inline RolleReport rolle_bound_polynomial(std::vector<double> c, double t0, double t1, int samples = 512)
{
    while (!c.empty() && c.back() == 0.0) {
        c.pop_back();
    }
    if (c.empty()) {
        RolleReport rep;
        rep.diagnostic = "no certificate: g vanishes identically";
        return rep;
    }
    std::vector<std::vector<double>> D{c};
    while (D.back().size() > 1) {
        D.push_back(detail::poly_derivative(D.back()));
    }
    std::vector<RealMap> derivs;
    for (const auto& p : D) {
        derivs.push_back([p](double t) { return detail::poly_eval(p, t); });
    }
    auto rep = rolle_bound(derivs, t0, t1, samples);
    if (!rep.certified) {
        return rep;
    }
    rep.bound = 0;
    for (auto& iv : rep.intervals) {
        while (!detail::certified_nonzero(D[static_cast<std::size_t>(iv.j)], iv.a, iv.b)) {
            ++iv.j; // the top derivative is a nonzero constant
        }
        rep.bound += iv.j;
    }
    return rep;
}

// Zeros of g on [t0, t1] counted by sign changes on a fine grid (exact zeros included).
inline int scan_zero_count(const RealMap& g, double t0, double t1, int samples = 20001)
{
    int n = 0;
    double prev = g(t0);
    if (prev == 0.0) {
        ++n;
    }
    for (int i = 1; i < samples; ++i) {
        double v = g(t0 + (t1 - t0) * i / (samples - 1));
        if (v == 0.0) {
            ++n;
        } else if (prev != 0.0 && (v > 0) != (prev > 0)) {
            ++n;
        }
        prev = v;
    }
    return n;
}

// ---------------------------------------------------------------------------
// Symbolic blow-up: generalized monomials c(r) * prod v^{e_v(r)} with exponents in Q[r].

struct GenMonomial
{
    Poly coeff;
    std::vector<std::pair<int, Poly>> exps; // sorted by variable, nonzero exponents

    static GenMonomial var(int v, const Poly& e = Poly(Rational(1)))
    {
        GenMonomial m{Poly(Rational(1)), {}};
        if (!e.is_zero()) {
            m.exps.emplace_back(v, e);
        }
        return m;
    }

    Poly exponent(int v) const
    {
        for (const auto& [w, e] : exps) {
            if (w == v) {
                return e;
            }
        }
        return Poly();
    }

    static int compare_key(const GenMonomial& a, const GenMonomial& b)
    {
        std::size_t n = std::min(a.exps.size(), b.exps.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.exps[i].first != b.exps[i].first) {
                return a.exps[i].first < b.exps[i].first ? -1 : 1;
            }
            int c = Poly::compare(a.exps[i].second, b.exps[i].second);
            if (c != 0) {
                return c;
            }
        }
        return a.exps.size() == b.exps.size() ? 0 : (a.exps.size() < b.exps.size() ? -1 : 1);
    }

    friend GenMonomial operator*(const GenMonomial& a, const GenMonomial& b)
    {
        GenMonomial m{a.coeff * b.coeff, {}};
        std::map<int, Poly> e;
        for (const auto& [v, p] : a.exps) {
            e[v] = p;
        }
        for (const auto& [v, p] : b.exps) {
            e[v] = e[v] + p;
        }
        for (auto& [v, p] : e) {
            if (!p.is_zero()) {
                m.exps.emplace_back(v, p);
            }
        }
        return m;
    }
};

class GenSum
{
public:
    GenSum() = default;
    GenSum(const GenMonomial& m) : m_terms{m} { normalize(); }

    const std::vector<GenMonomial>& terms() const { return m_terms; }
    bool is_zero() const { return m_terms.empty(); }

    friend GenSum operator+(const GenSum& a, const GenSum& b)
    {
        GenSum s;
        s.m_terms = a.m_terms;
        s.m_terms.insert(s.m_terms.end(), b.m_terms.begin(), b.m_terms.end());
        s.normalize();
        return s;
    }
    GenSum operator-() const
    {
        GenSum s = *this;
        for (auto& t : s.m_terms) {
            t.coeff = -t.coeff;
        }
        return s;
    }
    friend GenSum operator-(const GenSum& a, const GenSum& b) { return a + (-b); }
    friend GenSum operator*(const GenSum& a, const GenSum& b)
    {
        GenSum s;
        for (const auto& x : a.m_terms) {
            for (const auto& y : b.m_terms) {
                s.m_terms.push_back(x * y);
            }
        }
        s.normalize();
        return s;
    }
    bool operator==(const GenSum& o) const { return (*this - o).is_zero(); }

    GenSum derivative(int v) const
    {
        GenSum s;
        for (const auto& t : m_terms) {
            Poly e = t.exponent(v);
            if (e.is_zero()) {
                continue;
            }
            GenMonomial m = t * GenMonomial::var(v, Poly(Rational(-1)));
            m.coeff = t.coeff * e;
            s.m_terms.push_back(m);
        }
        s.normalize();
        return s;
    }

    // v -> image (a single monomial with unit coefficient), exponents multiply.
    GenSum substitute(const std::map<int, GenMonomial>& images) const
    {
        GenSum s;
        for (const auto& t : m_terms) {
            GenMonomial m{t.coeff, {}};
            for (const auto& [v, e] : t.exps) {
                auto it = images.find(v);
                if (it == images.end()) {
                    m = m * GenMonomial::var(v, e);
                    continue;
                }
                if (!it->second.coeff.is_constant() || it->second.coeff.constant_term() != 1) {
                    throw std::invalid_argument("GenSum::substitute: images must have unit coefficient");
                }
                for (const auto& [w, f] : it->second.exps) {
                    m = m * GenMonomial::var(w, f * e);
                }
            }
            s.m_terms.push_back(m);
        }
        s.normalize();
        return s;
    }

    GenSum specialize(const std::map<int, Rational>& values) const
    {
        GenSum s;
        for (const auto& t : m_terms) {
            GenMonomial m{t.coeff.partial_eval(values), {}};
            for (const auto& [v, e] : t.exps) {
                m = m * GenMonomial::var(v, e.partial_eval(values));
            }
            s.m_terms.push_back(m);
        }
        s.normalize();
        return s;
    }

    // all coefficients are polynomials in r with nonnegative rational coefficients
    bool nonnegative_coefficients() const
    {
        for (const auto& t : m_terms) {
            for (const auto& [m, c] : t.coeff.terms()) {
                if (c < 0) {
                    return false;
                }
            }
        }
        return true;
    }

    std::string to_string(const std::function<std::string(int)>& name) const
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
            for (const auto& [v, e] : t.exps) {
                s += "*" + name(v);
                if (!(e.is_constant() && e.constant_term() == 1)) {
                    s += "^(" + e.to_string() + ")";
                }
            }
        }
        return s;
    }

private:
    void normalize()
    {
        std::stable_sort(m_terms.begin(), m_terms.end(),
                         [](const GenMonomial& a, const GenMonomial& b) { return GenMonomial::compare_key(a, b) < 0; });
        std::vector<GenMonomial> out;
        for (auto& t : m_terms) {
            if (!out.empty() && GenMonomial::compare_key(out.back(), t) == 0) {
                out.back().coeff = out.back().coeff + t.coeff;
                if (out.back().coeff.is_zero()) {
                    out.pop_back();
                }
            } else if (!t.coeff.is_zero()) {
                out.push_back(std::move(t));
            }
        }
        m_terms = std::move(out);
    }

    std::vector<GenMonomial> m_terms;
};

// Local variable ids for the blow-up (not registered as polynomial symbols).
struct BlowupVars
{
    int k = 0;
    int x(int j) const { return j - 1; }
    int y(int j) const { return 16 + j - 1; }
    int u(int j) const { return 32 + j - 1; }
    int rho() const { return 48; }
    std::string name(int v) const
    {
        if (v < 16) {
            return "x" + std::to_string(v + 1);
        }
        if (v < 32) {
            return "y" + std::to_string(v - 15);
        }
        if (v < 48) {
            return "u" + std::to_string(v - 31);
        }
        return "rho";
    }
};

// Principal-part derivation: chi x_1 = prod x_j, first integrals g_j = x_j^{r_j} - x_{j+1}.
struct HilbertDerivation
{
    int k = 0;
    std::vector<Poly> r;         // r_1..r_{k-1} (symbols or values); r_k = 1
    std::vector<GenSum> component; // chi x_j, j = 1..k

    static HilbertDerivation principal(int k, std::vector<Poly> r = {})
    {
        if (k < 1) {
            throw std::invalid_argument("HilbertDerivation: k >= 1");
        }
        HilbertDerivation h;
        h.k = k;
        if (r.empty()) {
            for (int j = 1; j < k; ++j) {
                r.push_back(Poly::var("r" + std::to_string(j)));
            }
        }
        if (static_cast<int>(r.size()) != k - 1) {
            throw std::invalid_argument("HilbertDerivation: need k - 1 ratios");
        }
        h.r = std::move(r);
        BlowupVars V{k};
        GenMonomial prod{Poly(Rational(1)), {}};
        for (int j = 1; j <= k; ++j) {
            prod = prod * GenMonomial::var(V.x(j));
        }
        // chi x_{j+1} = r_j x_j^{r_j - 1} chi x_j, forced by chi g_j = 0
        GenSum cur(prod);
        h.component.push_back(cur);
        for (int j = 1; j < k; ++j) {
            GenMonomial m = GenMonomial::var(V.x(j), h.r[static_cast<std::size_t>(j) - 1] - Poly(Rational(1)));
            m.coeff = h.r[static_cast<std::size_t>(j) - 1];
            cur = GenSum(m) * cur;
            h.component.push_back(cur);
        }
        return h;
    }

    GenSum first_integral(int j) const
    {
        BlowupVars V{k};
        return GenSum(GenMonomial::var(V.x(j), r[static_cast<std::size_t>(j) - 1])) - GenSum(GenMonomial::var(V.x(j + 1)));
    }

    GenSum apply(const GenSum& f) const
    {
        BlowupVars V{k};
        GenSum out;
        for (int j = 1; j <= k; ++j) {
            out = out + component[static_cast<std::size_t>(j) - 1] * f.derivative(V.x(j));
        }
        return out;
    }
};

struct BlowupReport
{
    int k = 0;
    Poly s_k;
    std::vector<Poly> weights;       // T = Diag(rho^{w_1}, ..., rho^{w_k}), w_1 = 1, w_{j+1} = r_{1,j}
    bool first_integrals_ok = false; // chi(g_j) = 0
    int nontrivial_dimension = 0;
    bool pushforward_ok = false;     // (T^{-1})_* chi_pr = rho^{s_k} Y_pr
    bool factorization_ok = false;   // g_j o T = rho^{r_{1,j}} L_j
    bool transverse_ok = false;      // Y_pr Q has nonnegative coefficients (and is nonzero)
    bool chi_tilde_ok = false;       // chi~ annihilates rho^{r_{1,j}} u_j
    std::vector<std::string> lines;

    bool ok() const { return first_integrals_ok && pushforward_ok && factorization_ok && transverse_ok && chi_tilde_ok; }
};

inline BlowupReport blowup_verify(int k, const std::map<int, Rational>& specialization = {})
{
    if (k < 2 || k > 4) {
        throw std::invalid_argument("blowup_verify: 2 <= k <= 4");
    }
    auto H = HilbertDerivation::principal(k);
    if (!specialization.empty()) {
        for (auto& r : H.r) {
            r = r.partial_eval(specialization);
        }
        H = HilbertDerivation::principal(k, H.r);
    }
    BlowupVars V{k};
    auto nm = [&](int v) { return V.name(v); };
    BlowupReport rep;
    rep.k = k;
    // weights and s_k
    rep.weights.push_back(Poly(Rational(1)));
    for (int j = 1; j < k; ++j) {
        rep.weights.push_back(rep.weights.back() * H.r[static_cast<std::size_t>(j) - 1]);
    }
    rep.s_k = Poly();
    for (int j = 1; j < k; ++j) {
        rep.s_k = rep.s_k + rep.weights[static_cast<std::size_t>(j)];
    }
    rep.lines.push_back("s_" + std::to_string(k) + " = " + rep.s_k.to_string());
    {
        std::string t = "T = Diag(";
        for (int j = 0; j < k; ++j) {
            t += (j ? ", " : "") + std::string("rho^(") + rep.weights[static_cast<std::size_t>(j)].to_string() + ")";
        }
        rep.lines.push_back(t + ")");
    }
    // chi(g_j) = 0
    rep.first_integrals_ok = true;
    for (int j = 1; j < k; ++j) {
        rep.first_integrals_ok = rep.first_integrals_ok && H.apply(H.first_integral(j)).is_zero();
    }
    // d g_j / d x_{j+1} = -1 gives a triangular (k-1)-minor of the Jacobian
    rep.nontrivial_dimension = 0;
    for (int j = 1; j < k; ++j) {
        auto d = H.first_integral(j).derivative(V.x(j + 1));
        if (d == GenSum(GenMonomial{Poly(Rational(-1)), {}})) {
            ++rep.nontrivial_dimension;
        }
    }
    // x_j = rho^{w_j} y_j
    std::map<int, GenMonomial> T, rename;
    for (int j = 1; j <= k; ++j) {
        T[V.x(j)] = GenMonomial::var(V.rho(), rep.weights[static_cast<std::size_t>(j) - 1]) * GenMonomial::var(V.y(j));
        rename[V.x(j)] = GenMonomial::var(V.y(j));
    }
    rep.pushforward_ok = true;
    for (int j = 1; j <= k; ++j) {
        const auto& cj = H.component[static_cast<std::size_t>(j) - 1];
        GenSum lhs = GenSum(GenMonomial::var(V.rho(), -rep.weights[static_cast<std::size_t>(j) - 1])) * cj.substitute(T);
        GenSum rhs = GenSum(GenMonomial::var(V.rho(), rep.s_k)) * cj.substitute(rename);
        bool same = lhs == rhs;
        rep.pushforward_ok = rep.pushforward_ok && same;
        rep.lines.push_back("Y_pr y" + std::to_string(j) + " = " + cj.substitute(rename).to_string(nm) +
                            (same ? "  [identity holds]" : "  [MISMATCH]"));
    }
    rep.factorization_ok = true;
    for (int j = 1; j < k; ++j) {
        GenSum G = H.first_integral(j).substitute(T);
        GenSum L = H.first_integral(j).substitute(rename);
        GenSum expect = GenSum(GenMonomial::var(V.rho(), rep.weights[static_cast<std::size_t>(j)])) * L;
        rep.factorization_ok = rep.factorization_ok && G == expect;
    }
    // Q(y) = sum_j y_j^{r_{j,k}}, r_{j,k} = r_j ... r_{k-1}
    GenSum Q;
    for (int j = 1; j <= k; ++j) {
        Poly e(Rational(1));
        for (int i = j; i < k; ++i) {
            e = e * H.r[static_cast<std::size_t>(i) - 1];
        }
        Q = Q + GenSum(GenMonomial::var(V.y(j), e));
    }
    GenSum YQ;
    for (int j = 1; j <= k; ++j) {
        YQ = YQ + H.component[static_cast<std::size_t>(j) - 1].substitute(rename) * Q.derivative(V.y(j));
    }
    rep.transverse_ok = !YQ.is_zero() && YQ.nonnegative_coefficients();
    // chi~ = rho d/drho - sum_j r_{1,j} u_j d/du_j kills G_j = rho^{r_{1,j}} u_j
    rep.chi_tilde_ok = true;
    for (int j = 1; j < k; ++j) {
        GenSum G = GenSum(GenMonomial::var(V.rho(), rep.weights[static_cast<std::size_t>(j)]) * GenMonomial::var(V.u(j)));
        GenSum act = GenSum(GenMonomial::var(V.rho())) * G.derivative(V.rho());
        for (int i = 1; i < k; ++i) {
            GenMonomial m = GenMonomial::var(V.u(i));
            m.coeff = -rep.weights[static_cast<std::size_t>(i)];
            act = act + GenSum(m) * G.derivative(V.u(i));
        }
        rep.chi_tilde_ok = rep.chi_tilde_ok && act.is_zero();
    }
    rep.lines.push_back(std::string("chi(g_j) = 0: ") + (rep.first_integrals_ok ? "yes" : "no"));
    rep.lines.push_back("dimension of non-triviality: " + std::to_string(rep.nontrivial_dimension));
    rep.lines.push_back(std::string("g_j o T = rho^(r_1j) L_j: ") + (rep.factorization_ok ? "yes" : "no"));
    rep.lines.push_back(std::string("Y_pr Q > 0: ") + (rep.transverse_ok ? "yes" : "no"));
    rep.lines.push_back(std::string("pushforward proportional to chi~: ") + (rep.chi_tilde_ok ? "yes" : "no"));
    rep.lines.push_back(rep.ok() ? "identity holds" : "identity FAILED");
    return rep;
}

} // namespace polycyclic

#endif // POLYCYCLIC_POLYCYCLE_HPP
