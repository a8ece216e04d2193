#ifndef POLYCYCLIC_DIVISION_HPP
#define POLYCYCLIC_DIVISION_HPP

#include "polycyclic/core/ratfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycyclic
{

// Local monomial order on N^q: m < m' iff (L(m), m_1, ..., m_q) < (L(m'), m'_1, ..., m'_q)
// lexicographically, L(m) = sum_j w_j m_j with positive rational weights. The least
// element of a support is its initial exponent.
class MonomialOrder
{
public:
    MonomialOrder() : MonomialOrder(1) {}
    explicit MonomialOrder(int q) : MonomialOrder(std::vector<Rational>(static_cast<std::size_t>(q), Rational(1))) {}

    explicit MonomialOrder(std::vector<Rational> weights) : m_weights(std::move(weights))
    {
        if (m_weights.empty() || m_weights.size() > kMaxVars) {
            throw std::invalid_argument("MonomialOrder: need 1..kMaxVars weights");
        }
        Integer l = 1;
        for (const auto& w : m_weights) {
            if (sgn(w) <= 0) {
                throw std::invalid_argument("MonomialOrder: weights must be positive");
            }
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), w.get_den_mpz_t());
        }
        m_scale = l;
        for (const auto& w : m_weights) {
            Integer iw = w.get_num() * (l / w.get_den());
            if (!iw.fits_slong_p()) {
                throw std::overflow_error("MonomialOrder: weight too large");
            }
            m_int_weights.push_back(iw.get_si());
        }
    }

    int nvars() const { return static_cast<int>(m_weights.size()); }
    const std::vector<Rational>& weights() const { return m_weights; }

    // L(m) scaled by the common denominator of the weights.
    long scaled_weight(const Monomial& m) const
    {
        long s = 0;
        for (std::size_t j = 0; j < m_int_weights.size(); ++j) {
            s += m_int_weights[j] * static_cast<long>(m.e[j]);
        }
        return s;
    }

    Rational weight(const Monomial& m) const
    {
        Rational r(Integer(scaled_weight(m)), m_scale);
        r.canonicalize();
        return r;
    }

    bool less(const Monomial& a, const Monomial& b) const
    {
        long la = scaled_weight(a);
        long lb = scaled_weight(b);
        if (la != lb) {
            return la < lb;
        }
        for (std::size_t j = 0; j < m_weights.size(); ++j) {
            if (a.e[j] != b.e[j]) {
                return a.e[j] < b.e[j];
            }
        }
        return false;
    }

    // Truncation threshold L >= bound expressed in scaled units (ceil).
    long scaled_bound(const Rational& bound) const
    {
        Rational s = bound * Rational(m_scale);
        Integer c;
        mpz_cdiv_q(c.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
        return c.get_si();
    }

private:
    std::vector<Rational> m_weights;
    std::vector<long> m_int_weights;
    Integer m_scale;
};

// Precision ideal: monomials with L(m) >= bound are treated as zero. No bound = exact polynomial mode.
struct Precision
{
    std::optional<Rational> bound;
};

template <class F>
using LocalPoly = Polynomial<F>;

template <class F>
LocalPoly<F> truncate(const LocalPoly<F>& p, const MonomialOrder& ord, const Precision& prec)
{
    if (!prec.bound) {
        return p;
    }
    long b = ord.scaled_bound(*prec.bound);
    std::vector<typename LocalPoly<F>::Term> keep;
    for (const auto& t : p.terms()) {
        if (ord.scaled_weight(t.first) < b) {
            keep.push_back(t);
        }
    }
    if (keep.size() == p.size()) {
        return p;
    }
    return LocalPoly<F>::from_terms(std::move(keep));
}

template <class F>
const typename LocalPoly<F>::Term& initial_term(const LocalPoly<F>& f, const MonomialOrder& ord)
{
    if (f.is_zero()) {
        throw std::domain_error("no initial exponent: zero series");
    }
    const auto* best = &f.terms().front();
    for (const auto& t : f.terms()) {
        if (ord.less(t.first, best->first)) {
            best = &t;
        }
    }
    return *best;
}

template <class F>
Monomial initial_exponent(const LocalPoly<F>& f, const MonomialOrder& ord)
{
    return initial_term(f, ord).first;
}

// Staircase N(J) = union of corner cones, and the partition into cells.
struct ExponentDiagram
{
    int q = 0;
    std::vector<Monomial> corners; // minimal, sorted by the monomial order

    // Index i of the cell Delta_i containing m, or -1 for the complement Delta.
    int cell_of(const Monomial& m) const
    {
        for (std::size_t i = 0; i < corners.size(); ++i) {
            if (corners[i].divides(m)) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    bool in_staircase(const Monomial& m) const { return cell_of(m) >= 0; }
};

inline std::string monomial_to_string(const Monomial& m, int q)
{
    std::string s = "(";
    for (int j = 0; j < q; ++j) {
        if (j) {
            s += ",";
        }
        s += std::to_string(m[j]);
    }
    return s + ")";
}

template <class F>
struct StandardBasis
{
    MonomialOrder order;
    Precision precision;
    std::vector<LocalPoly<F>> elements; // elements[i] has initial exponent diagram.corners[i], coefficient 1
    ExponentDiagram diagram;
    bool reduced = false; // tails supported in the complement Delta
    bool unit_ideal() const { return !diagram.corners.empty() && diagram.corners[0].is_one(); }
    bool zero_ideal() const { return elements.empty(); }
};

struct DivisionOptions
{
    std::size_t step_budget = 20000;
    unsigned degree_cap = 4096; // polynomial mode only: stop once the leading term passes this total degree
};

// Budget used internally (tail reduction, membership) before falling back to Mora normal forms.
inline constexpr DivisionOptions kQuickDivision{256, 256};

template <class F>
struct DivisionResult
{
    std::vector<LocalPoly<F>> quotients;
    LocalPoly<F> remainder;
    LocalPoly<F> unresolved;           // part of f not yet processed when the budget ran out
    std::optional<Rational> attained;  // L-value below which the division is exact
    bool complete = true;
};

namespace detail
{

template <class F>
LocalPoly<F> normalize_initial(const LocalPoly<F>& f, const MonomialOrder& ord)
{
    const auto& t = initial_term(f, ord);
    return f.scaled(CoeffOps<F>::div(CoeffOps<F>::one(), t.second));
}

template <class F>
long ecart(const LocalPoly<F>& f, const MonomialOrder& ord)
{
    long lo = ord.scaled_weight(initial_exponent(f, ord));
    long hi = lo;
    for (const auto& t : f.terms()) {
        hi = std::max(hi, ord.scaled_weight(t.first));
    }
    return hi - lo;
}

// h - (c_h/c_g) x^{in(h)-in(g)} g, assuming in(g) | in(h).
template <class F>
LocalPoly<F> reduce_step(const LocalPoly<F>& h, const LocalPoly<F>& g, const MonomialOrder& ord, const Precision& prec)
{
    const auto& th = initial_term(h, ord);
    const auto& tg = initial_term(g, ord);
    Monomial shift = th.first / tg.first;
    F c = CoeffOps<F>::div(th.second, tg.second);
    return truncate(h - g.mul_monomial(shift, c), ord, prec);
}

// Mora's weak normal form for local degree orders: zero iff f lies in the ideal of G.
template <class F>
LocalPoly<F> mora_normal_form(const LocalPoly<F>& f, const std::vector<LocalPoly<F>>& basis, const MonomialOrder& ord,
                              const Precision& prec)
{
    LocalPoly<F> h = truncate(f, ord, prec);
    std::vector<LocalPoly<F>> t = basis;
    std::vector<long> ec;
    for (const auto& g : t) {
        ec.push_back(ecart(g, ord));
    }
    while (!h.is_zero()) {
        Monomial mh = initial_exponent(h, ord);
        int best = -1;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (initial_exponent(t[i], ord).divides(mh) && (best < 0 || ec[i] < ec[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(i);
            }
        }
        if (best < 0) {
            return h;
        }
        long eh = ecart(h, ord);
        LocalPoly<F> g = t[static_cast<std::size_t>(best)];
        if (ec[static_cast<std::size_t>(best)] > eh) {
            t.push_back(h);
            ec.push_back(eh);
        }
        h = reduce_step(h, g, ord, prec);
    }
    return h;
}

template <class F>
LocalPoly<F> s_polynomial(const LocalPoly<F>& a, const LocalPoly<F>& b, const MonomialOrder& ord, const Precision& prec)
{
    const auto& ta = initial_term(a, ord);
    const auto& tb = initial_term(b, ord);
    Monomial l = Monomial::lcm(ta.first, tb.first);
    LocalPoly<F> sa = a.mul_monomial(l / ta.first, CoeffOps<F>::div(CoeffOps<F>::one(), ta.second));
    LocalPoly<F> sb = b.mul_monomial(l / tb.first, CoeffOps<F>::div(CoeffOps<F>::one(), tb.second));
    return truncate(sa - sb, ord, prec);
}

} // namespace detail

template <class F>
DivisionResult<F> divide(const LocalPoly<F>& f, const StandardBasis<F>& sb, const DivisionOptions& opt = {});

// Standard basis by S-polynomial completion with Mora normal forms, then minimal corners
// and (when the tail divisions terminate) the canonical reduced basis alpha^{m^i} + R_i.
template <class F>
StandardBasis<F> standard_basis(const std::vector<LocalPoly<F>>& generators, const MonomialOrder& ord,
                                const Precision& prec = {}, const DivisionOptions& opt = {})
{
    std::vector<LocalPoly<F>> g;
    for (const auto& p : generators) {
        LocalPoly<F> t = truncate(p, ord, prec);
        if (!t.is_zero()) {
            g.push_back(detail::normalize_initial(t, ord));
        }
    }
    struct Pair
    {
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t j = 0; j < g.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            pairs.push_back({i, j});
        }
    }
    auto pair_lcm = [&](const Pair& p) {
        return Monomial::lcm(initial_exponent(g[p.i], ord), initial_exponent(g[p.j], ord));
    };
    std::size_t steps = 0;
    while (!pairs.empty()) {
        // normal strategy: smallest lcm first; ties by index for determinism
        auto it = std::min_element(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
            Monomial la = pair_lcm(a), lb = pair_lcm(b);
            if (la != lb) {
                return ord.less(la, lb);
            }
            return std::tie(a.j, a.i) < std::tie(b.j, b.i);
        });
        Pair p = *it;
        pairs.erase(it);
        if (++steps > opt.step_budget) {
            throw std::runtime_error("standard basis: step budget exhausted");
        }
        auto s = detail::s_polynomial(g[p.i], g[p.j], ord, prec);
        auto h = detail::mora_normal_form(s, g, ord, prec);
        if (h.is_zero()) {
            continue;
        }
        g.push_back(detail::normalize_initial(h, ord));
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            pairs.push_back({i, g.size() - 1});
        }
    }
    // Minimal corners: drop elements whose initial exponent is divisible by another's.
    std::vector<std::size_t> idx(g.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        Monomial ma = initial_exponent(g[a], ord), mb = initial_exponent(g[b], ord);
        if (ma != mb) {
            return ord.less(ma, mb);
        }
        if (g[a].size() != g[b].size()) {
            return g[a].size() < g[b].size();
        }
        return a < b;
    });
    StandardBasis<F> sb{ord, prec, {}, {}, false};
    sb.diagram.q = ord.nvars();
    for (std::size_t k : idx) {
        Monomial m = initial_exponent(g[k], ord);
        bool redundant = false;
        for (const auto& c : sb.diagram.corners) {
            redundant = redundant || c.divides(m);
        }
        if (!redundant) {
            sb.diagram.corners.push_back(m);
            sb.elements.push_back(g[k]);
        }
    }
    // Reduce tails so that a_i = alpha^{m^i} + R_i with supp R_i in Delta.
    bool all_reduced = true;
    std::vector<LocalPoly<F>> red;
    for (std::size_t i = 0; i < sb.elements.size(); ++i) {
        Monomial m = sb.diagram.corners[i];
        LocalPoly<F> tail = sb.elements[i] - LocalPoly<F>::monomial(m, CoeffOps<F>::one());
        auto dr = divide(tail, sb, prec.bound ? opt : kQuickDivision);
        if (dr.complete) {
            red.push_back(LocalPoly<F>::monomial(m, CoeffOps<F>::one()) + dr.remainder);
        } else {
            red.push_back(sb.elements[i]);
            all_reduced = false;
        }
    }
    sb.elements = std::move(red);
    sb.reduced = all_reduced;
    return sb;
}

template <class F>
ExponentDiagram diagram(const std::vector<LocalPoly<F>>& generators, const MonomialOrder& ord, const Precision& prec = {})
{
    return standard_basis(generators, ord, prec).diagram;
}

// Hironaka division: f = sum Q_i a_i + R with m^i + supp Q_i in Delta_i and supp R in Delta.
// Exact modulo the precision ideal; in polynomial mode the loop may not terminate (series
// quotients), in which case a partial result with the attained precision is returned.
template <class F>
DivisionResult<F> divide(const LocalPoly<F>& f, const StandardBasis<F>& sb, const DivisionOptions& opt)
{
    const auto& ord = sb.order;
    const auto& prec = sb.precision;
    DivisionResult<F> res;
    res.quotients.assign(sb.elements.size(), LocalPoly<F>());
    std::vector<typename LocalPoly<F>::Term> rem_terms;
    std::vector<std::vector<typename LocalPoly<F>::Term>> q_terms(sb.elements.size());
    std::vector<F> lead;
    for (const auto& a : sb.elements) {
        lead.push_back(initial_term(a, ord).second);
    }
    LocalPoly<F> h = truncate(f, ord, prec);
    std::size_t steps = 0;
    while (!h.is_zero()) {
        auto t = initial_term(h, ord);
        if (++steps > opt.step_budget || (!prec.bound && t.first.total_degree() > opt.degree_cap)) {
            res.complete = false;
            res.attained = ord.weight(t.first);
            break;
        }
        int cell = sb.diagram.cell_of(t.first);
        if (cell < 0) {
            rem_terms.push_back(t);
            h = h - LocalPoly<F>::monomial(t.first, t.second);
            continue;
        }
        auto ci = static_cast<std::size_t>(cell);
        Monomial shift = t.first / sb.diagram.corners[ci];
        F c = CoeffOps<F>::div(t.second, lead[ci]);
        q_terms[ci].emplace_back(shift, c);
        h = truncate(h - sb.elements[ci].mul_monomial(shift, c), ord, prec);
    }
    for (std::size_t i = 0; i < q_terms.size(); ++i) {
        res.quotients[i] = LocalPoly<F>::from_terms(std::move(q_terms[i]));
    }
    res.remainder = LocalPoly<F>::from_terms(std::move(rem_terms));
    res.unresolved = h;
    if (res.complete) {
        res.attained = prec.bound;
    }
    return res;
}

template <class F>
bool member(const LocalPoly<F>& f, const StandardBasis<F>& sb, const DivisionOptions& opt = kQuickDivision)
{
    auto dr = divide(f, sb, opt);
    if (dr.complete) {
        return dr.remainder.is_zero();
    }
    if (!dr.remainder.is_zero()) {
        return false;
    }
    return detail::mora_normal_form(f, sb.elements, sb.order, sb.precision).is_zero();
}

template <class F>
bool ideal_contains(const StandardBasis<F>& big, const std::vector<LocalPoly<F>>& gens)
{
    for (const auto& g : gens) {
        if (!member(g, big)) {
            return false;
        }
    }
    return true;
}

template <class F>
bool ideals_equal(const StandardBasis<F>& a, const StandardBasis<F>& b)
{
    return ideal_contains(a, b.elements) && ideal_contains(b, a.elements);
}

// ||f||_{L,sigma} = sum |f_m| sigma^{L(m)}.
inline double weighted_norm(const LocalPoly<Rational>& f, const MonomialOrder& ord, double sigma)
{
    double s = 0.0;
    for (const auto& t : f.terms()) {
        s += std::fabs(t.second.get_d()) * std::pow(sigma, ord.weight(t.first).get_d());
    }
    return s;
}

struct StationarityResult
{
    bool stabilized = false;
    int index = -1;      // least n with J_n = ... = J_{n+K}
    int examined = 0;    // number of ideals inspected
    std::vector<bool> strict_step; // strict_step[n] : J_n strictly contained in J_{n+1}
};

// Chain J_0 ⊂ J_1 ⊂ ... produced lazily by `next(n)` (nullopt = sequence exhausted).
// Monotonicity is asserted; violations throw std::invalid_argument.
template <class F>
StationarityResult chain_stationarity(const std::function<std::optional<std::vector<LocalPoly<F>>>(int)>& next,
                                      const MonomialOrder& ord, int n_max, int window = 3, const Precision& prec = {})
{
    StationarityResult res;
    std::vector<StandardBasis<F>> bases;
    int run_start = 0;
    int run_len = 0;
    for (int n = 0; n <= n_max; ++n) {
        auto gens = next(n);
        if (!gens) {
            break;
        }
        bases.push_back(standard_basis(*gens, ord, prec));
        res.examined = n + 1;
        if (n == 0) {
            continue;
        }
        const auto& prev = bases[static_cast<std::size_t>(n - 1)];
        const auto& cur = bases[static_cast<std::size_t>(n)];
        if (!ideal_contains(cur, prev.elements)) {
            throw std::invalid_argument("chain_stationarity: sequence is not increasing at index " + std::to_string(n));
        }
        bool equal = ideal_contains(prev, cur.elements);
        res.strict_step.push_back(!equal);
        if (equal) {
            ++run_len;
        } else {
            run_start = n;
            run_len = 0;
        }
        if (run_len >= window) {
            res.stabilized = true;
            res.index = run_start;
            return res;
        }
    }
    return res;
}

} // namespace polycyclic

#endif // POLYCYCLIC_DIVISION_HPP
