#ifndef POLYCYCLIC_CHI_BLOCKS_HPP
#define POLYCYCLIC_CHI_BLOCKS_HPP

#include "polycyclic/core/linalg.hpp"
#include "polycyclic/division.hpp"
#include "polycyclic/euler_calculus.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycyclic
{

// Bi-index (m, n) of X^m u^n with X = (x, z_1, ..., z_q1). The x-exponent is rational so that
// ramified monomials x^{1/k} can be represented.
struct ChiKey
{
    Rational x;
    std::vector<unsigned> z;
    std::vector<unsigned> u;

    Rational degree() const
    {
        Rational d = x;
        for (auto v : z) {
            d += v;
        }
        for (auto v : u) {
            d -= v;
        }
        return d;
    }

    bool operator<(const ChiKey& o) const
    {
        if (x != o.x) {
            return x < o.x;
        }
        if (z != o.z) {
            return z < o.z;
        }
        return u < o.u;
    }
    bool operator==(const ChiKey& o) const { return x == o.x && z == o.z && u == o.u; }

    std::string to_string() const
    {
        std::string s;
        auto add = [&](const std::string& f) { s += s.empty() ? f : "*" + f; };
        if (x != 0) {
            add(x == 1 ? "x" : "x^(" + x.get_str() + ")");
        }
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (z[j]) {
                add("z" + std::to_string(j + 1) + (z[j] > 1 ? "^" + std::to_string(z[j]) : ""));
            }
        }
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (u[j]) {
                add("u" + std::to_string(j + 1) + (u[j] > 1 ? "^" + std::to_string(u[j]) : ""));
            }
        }
        return s.empty() ? "1" : s;
    }
};

// chi = x d/dx - sum_j s_j u_j d/du_j acting on x, z_j (chi z_j = r_j z_j + x) and u_j.
struct ChiDerivation
{
    int q1 = 0;
    int ell = 0;
    std::vector<CoeffRing> r; // size q1
    std::vector<CoeffRing> s; // size ell

    // r_j = 1 + mu_j, s_j = 1 + mu_j (shared residue symbols).
    static ChiDerivation generic(int q1, int ell = 0)
    {
        ChiDerivation d;
        d.q1 = q1;
        d.ell = ell;
        for (int j = 1; j <= q1; ++j) {
            d.r.push_back(CoeffRing(1) + CoeffRing::var(mu_symbol(j)));
        }
        for (int j = 1; j <= ell; ++j) {
            d.s.push_back(CoeffRing(1) + CoeffRing::var(mu_symbol(j)));
        }
        return d;
    }

    static ChiDerivation with(std::vector<CoeffRing> r, std::vector<CoeffRing> s)
    {
        ChiDerivation d;
        d.q1 = static_cast<int>(r.size());
        d.ell = static_cast<int>(s.size());
        d.r = std::move(r);
        d.s = std::move(s);
        return d;
    }

    CoeffRing eigenvalue(const ChiKey& k) const
    {
        CoeffRing e(k.x);
        for (std::size_t j = 0; j < k.z.size(); ++j) {
            if (k.z[j]) {
                e += r[j] * CoeffRing(static_cast<long>(k.z[j]));
            }
        }
        for (std::size_t j = 0; j < k.u.size(); ++j) {
            if (k.u[j]) {
                e -= s[j] * CoeffRing(static_cast<long>(k.u[j]));
            }
        }
        return e;
    }

    ChiKey key(const Rational& x, std::vector<unsigned> z = {}, std::vector<unsigned> u = {}) const
    {
        z.resize(static_cast<std::size_t>(q1), 0);
        u.resize(static_cast<std::size_t>(ell), 0);
        return ChiKey{x, std::move(z), std::move(u)};
    }
};

// Finite sum of a_{m,n} X^m u^n with coefficient-ring coefficients.
class ChiSum
{
public:
    ChiSum() = default;

    static ChiSum monomial(const ChiKey& k, const CoeffRing& c)
    {
        ChiSum s;
        s.add(k, c);
        return s;
    }

    void add(const ChiKey& k, const CoeffRing& c)
    {
        if (c.is_zero()) {
            return;
        }
        auto [it, fresh] = m_terms.emplace(k, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) {
                m_terms.erase(it);
            }
        }
    }

    const std::map<ChiKey, CoeffRing>& terms() const { return m_terms; }
    bool is_zero() const { return m_terms.empty(); }
    std::size_t size() const { return m_terms.size(); }

    friend ChiSum operator+(ChiSum a, const ChiSum& b)
    {
        for (const auto& [k, c] : b.m_terms) {
            a.add(k, c);
        }
        return a;
    }
    friend ChiSum operator-(ChiSum a, const ChiSum& b)
    {
        for (const auto& [k, c] : b.m_terms) {
            a.add(k, -c);
        }
        return a;
    }
    ChiSum scaled(const CoeffRing& c) const
    {
        ChiSum r;
        for (const auto& [k, v] : m_terms) {
            r.add(k, v * c);
        }
        return r;
    }
    bool operator==(const ChiSum& o) const
    {
        if (m_terms.size() != o.m_terms.size()) {
            return false;
        }
        auto it = o.m_terms.begin();
        for (const auto& [k, c] : m_terms) {
            if (!(k == it->first) || c != it->second) {
                return false;
            }
            ++it;
        }
        return true;
    }

    std::set<Rational> degrees() const
    {
        std::set<Rational> d;
        for (const auto& [k, c] : m_terms) {
            d.insert(k.degree());
        }
        return d;
    }

    std::string to_string() const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string s;
        for (const auto& [k, c] : m_terms) {
            if (!s.empty()) {
                s += " + ";
            }
            s += "(" + c.to_string() + ")*" + k.to_string();
        }
        return s;
    }

private:
    std::map<ChiKey, CoeffRing> m_terms;
};

// Degree-validated block: every monomial has |m| - |n| = degree.
class ChiBlock
{
public:
    ChiBlock() = default;
    ChiBlock(Rational degree, ChiSum terms, unsigned u_order = 8)
        : m_degree(std::move(degree)), m_terms(std::move(terms)), m_u_order(u_order)
    {
        for (const auto& [k, c] : m_terms.terms()) {
            if (k.degree() != m_degree) {
                throw std::invalid_argument("ChiBlock: monomial " + k.to_string() + " has degree " +
                                            k.degree().get_str() + ", block degree " + m_degree.get_str());
            }
            unsigned un = 0;
            for (auto v : k.u) {
                un += v;
            }
            if (un > m_u_order) {
                throw std::invalid_argument("ChiBlock: monomial exceeds u-truncation order");
            }
        }
    }

    const Rational& degree() const { return m_degree; }
    const ChiSum& sum() const { return m_terms; }
    unsigned u_order() const { return m_u_order; }
    bool is_zero() const { return m_terms.is_zero(); }

private:
    Rational m_degree;
    ChiSum m_terms;
    unsigned m_u_order = 8;
};

inline ChiSum chi_apply(const ChiDerivation& D, const ChiSum& f)
{
    ChiSum out;
    for (const auto& [k, c] : f.terms()) {
        out.add(k, c * D.eigenvalue(k));
        for (std::size_t j = 0; j < k.z.size(); ++j) {
            if (k.z[j]) {
                ChiKey moved = k;
                moved.z[j] -= 1;
                moved.x += 1;
                out.add(moved, c * CoeffRing(static_cast<long>(k.z[j])));
            }
        }
    }
    return out;
}

inline ChiBlock chi_apply(const ChiDerivation& D, const ChiBlock& b)
{
    return ChiBlock(b.degree(), chi_apply(D, b.sum()), b.u_order());
}

inline ChiSum chi_power(const ChiDerivation& D, ChiSum f, unsigned k)
{
    for (unsigned i = 0; i < k; ++i) {
        f = chi_apply(D, f);
    }
    return f;
}

// E_F = prod_{m in F} (chi - e_m Id).
inline ChiSum euler_operator(const ChiDerivation& D, const std::vector<ChiKey>& F, ChiSum b)
{
    for (const auto& m : F) {
        b = chi_apply(D, b) - b.scaled(D.eigenvalue(m));
    }
    return b;
}

inline ChiBlock euler_operator(const ChiDerivation& D, const std::vector<ChiKey>& F, const ChiBlock& b)
{
    return ChiBlock(b.degree(), euler_operator(D, F, b.sum()), b.u_order());
}

// F_{=n}: all bi-indices of degree n with integer x-exponent, |u| <= u_order.
inline std::vector<ChiKey> degree_family(const ChiDerivation& D, int n, unsigned u_order = 0)
{
    std::vector<ChiKey> out;
    std::vector<unsigned> z(static_cast<std::size_t>(D.q1), 0), u(static_cast<std::size_t>(D.ell), 0);
    std::function<void(std::size_t, unsigned)> rec_u;
    std::function<void(std::size_t, int)> rec_z = [&](std::size_t j, int left) {
        if (j == z.size()) {
            if (left >= 0) {
                out.push_back(ChiKey{Rational(left), z, u});
            }
            return;
        }
        for (int v = 0; v <= left; ++v) {
            z[j] = static_cast<unsigned>(v);
            rec_z(j + 1, left - v);
        }
        z[j] = 0;
    };
    rec_u = [&](std::size_t j, unsigned left) {
        if (j == u.size()) {
            unsigned used = 0;
            for (auto v : u) {
                used += v;
            }
            rec_z(0, n + static_cast<int>(used));
            return;
        }
        for (unsigned v = 0; v <= left; ++v) {
            u[j] = v;
            rec_u(j + 1, left - v);
        }
        u[j] = 0;
    };
    rec_u(0, u_order);
    return out;
}

// Partition by degree |m| - |n|; parts in ascending degree.
inline std::vector<ChiBlock> fewnomial_split(const ChiSum& f, unsigned u_order = 8)
{
    std::map<Rational, ChiSum> parts;
    for (const auto& [k, c] : f.terms()) {
        parts[k.degree()].add(k, c);
    }
    std::vector<ChiBlock> out;
    for (auto& [d, s] : parts) {
        out.emplace_back(d, s, u_order);
    }
    return out;
}

// Replaces z_j by the compensator x Ld(x, r_j - 1); only for ell = 0.
inline LogExpSum to_logexp(const ChiDerivation& D, const ChiSum& f)
{
    if (D.ell != 0) {
        throw std::invalid_argument("to_logexp: u-variables present");
    }
    std::vector<LogExpSum> zs;
    for (int j = 0; j < D.q1; ++j) {
        zs.push_back(compensator(D.r[static_cast<std::size_t>(j)] - CoeffRing(1)));
    }
    LogExpSum acc;
    for (const auto& [k, c] : f.terms()) {
        LogExpSum t = LogExpSum::monomial(c, CoeffRing(k.x));
        for (std::size_t j = 0; j < k.z.size(); ++j) {
            for (unsigned p = 0; p < k.z[j]; ++p) {
                t = t * zs[j];
            }
        }
        acc += t;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Wronskian of the degree-n family

struct WronskianResult
{
    int n = 0;
    int q1 = 0;
    std::size_t N = 0;
    LogExpSum determinant; // b_n x^{s_n}
    CoeffRing b_n;
    CoeffRing s_n;
    Poly det_at_x1;        // det M_n(1, z) in Q[z, mu]
    bool factorization_ok = false;
    bool s_n_at_zero_ok = false; // s_n(0) = n N when r_j(0) = 1
    std::string method;
};

namespace detail
{

inline Poly to_poly(const CoeffRing& c, const char* what)
{
    if (!c.is_polynomial()) {
        throw std::invalid_argument(std::string(what) + " must be polynomial in the residue symbols");
    }
    return c.num().scaled(Rational(1) / c.den().constant_term());
}

inline int z_symbol(int j)
{
    return symbol("z" + std::to_string(j));
}

inline int x_symbol()
{
    return symbol("x");
}

} // namespace detail

enum class WronskianMethod
{
    automatic,
    bareiss,    // fraction-free elimination of M_n(1, z) over Q[z, mu]
    eigenbasis  // M_n P = V diag(phi_k) with P the (unit triangular) eigenvector matrix of chi
};

namespace detail
{

// det M_n(1, z) through the eigenbasis of chi on the degree-n family. Every step is checked
// exactly: A P = P diag(e), and phi_k = X^T P_k equals c_k x^{m0} prod_j (x + rho_j z_j)^{m_j}.
// Then det M_n = det V(e) prod_k phi_k / det P with det P = 1. Returns b_n, or nullopt when
// eigenvalues collide.
inline std::optional<CoeffRing> wronskian_eigenbasis(const ChiDerivation& D, std::vector<ChiKey> F)
{
    const std::size_t N = F.size();
    // sorting columns by x-exponent makes chi lower triangular; track the permutation sign
    std::vector<std::size_t> ord(N);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return F[a].x < F[b].x; });
    long perm_sign = 1;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            if (ord[i] > ord[j]) {
                perm_sign = -perm_sign;
            }
        }
    }
    {
        std::vector<ChiKey> sorted;
        for (auto i : ord) {
            sorted.push_back(F[i]);
        }
        F = std::move(sorted);
    }
    std::vector<CoeffRing> e;
    for (const auto& k : F) {
        e.push_back(D.eigenvalue(k));
    }
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            if (e[i] == e[j]) {
                return std::nullopt;
            }
        }
    }
    std::map<ChiKey, std::size_t> pos;
    for (std::size_t i = 0; i < N; ++i) {
        pos[F[i]] = i;
    }
    // A[i][c]: coefficient of X^{F_i} in chi X^{F_c}
    Matrix<CoeffRing> A(N, std::vector<CoeffRing>(N, CoeffRing(0)));
    for (std::size_t c = 0; c < N; ++c) {
        const ChiSum image = chi_apply(D, ChiSum::monomial(F[c], CoeffRing(1)));
        for (const auto& [k, v] : image.terms()) {
            A[pos.at(k)][c] = v;
        }
    }
    Matrix<CoeffRing> P(N, std::vector<CoeffRing>(N, CoeffRing(0)));
    for (std::size_t k = 0; k < N; ++k) {
        P[k][k] = CoeffRing(1);
        for (std::size_t i = k + 1; i < N; ++i) {
            CoeffRing acc(0);
            for (std::size_t c = k; c < i; ++c) {
                if (!A[i][c].is_zero() && !P[c][k].is_zero()) {
                    acc += A[i][c] * P[c][k];
                }
            }
            P[i][k] = acc.is_zero() ? acc : acc / (e[k] - e[i]);
        }
    }
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) {
            CoeffRing lhs(0);
            for (std::size_t c = 0; c < N; ++c) {
                if (!A[i][c].is_zero() && !P[c][k].is_zero()) {
                    lhs += A[i][c] * P[c][k];
                }
            }
            if (lhs != P[i][k] * e[k]) {
                throw std::logic_error("wronskian: eigenvector check failed");
            }
        }
    }
    const int xs = x_symbol();
    std::vector<Polynomial<RatFun>> zlin;
    std::vector<CoeffRing> rho;
    for (int j = 1; j <= D.q1; ++j) {
        rho.push_back(D.r[static_cast<std::size_t>(j - 1)] - CoeffRing(1));
        if (rho.back().is_zero()) {
            return std::nullopt;
        }
        zlin.push_back(Polynomial<RatFun>::var(xs) + Polynomial<RatFun>::var(z_symbol(j)).scaled(rho.back()));
    }
    auto monomial_of = [&](const ChiKey& k) {
        Monomial m = Monomial::var(xs, static_cast<unsigned>(k.x.get_num().get_ui()));
        for (std::size_t j = 0; j < k.z.size(); ++j) {
            if (k.z[j]) {
                m = m * Monomial::var(z_symbol(static_cast<int>(j) + 1), k.z[j]);
            }
        }
        return m;
    };
    CoeffRing b(1);
    for (std::size_t k = 0; k < N; ++k) {
        std::vector<Polynomial<RatFun>::Term> terms;
        for (std::size_t i = k; i < N; ++i) {
            if (!P[i][k].is_zero()) {
                terms.emplace_back(monomial_of(F[i]), P[i][k]);
            }
        }
        auto phi = Polynomial<RatFun>::from_terms(std::move(terms));
        CoeffRing c(1);
        auto expect = Polynomial<RatFun>::var(xs, static_cast<unsigned>(F[k].x.get_num().get_ui()));
        for (std::size_t j = 0; j < F[k].z.size(); ++j) {
            expect *= zlin[j].pow(F[k].z[j]);
            c *= rho[j].pow(-static_cast<long>(F[k].z[j]));
        }
        if (phi != expect.scaled(c)) {
            throw std::logic_error("wronskian: eigenfunction does not factor");
        }
        b *= c;
    }
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            b *= e[j] - e[i];
        }
    }
    return b * CoeffRing(perm_sign);
}

} // namespace detail

inline WronskianResult wronskian(const ChiDerivation& D, int n, WronskianMethod method = WronskianMethod::automatic,
                                 std::size_t max_size = 70)
{
    if (D.ell != 0) {
        throw std::invalid_argument("wronskian: requires ell = 0");
    }
    WronskianResult res;
    res.n = n;
    res.q1 = D.q1;
    auto F = degree_family(D, n);
    res.N = F.size();
    if (res.N > max_size) {
        throw std::invalid_argument("wronskian: family too large");
    }
    const int xs = detail::x_symbol();
    std::vector<int> zs;
    std::vector<Poly> rp;
    for (int j = 1; j <= D.q1; ++j) {
        zs.push_back(detail::z_symbol(j));
        rp.push_back(detail::to_poly(D.r[static_cast<std::size_t>(j - 1)], "r_j"));
    }
    Rational A = 0;
    std::vector<long> B(static_cast<std::size_t>(D.q1), 0);
    for (const auto& m : F) {
        A += m.x;
        for (std::size_t j = 0; j < m.z.size(); ++j) {
            B[j] += m.z[j];
        }
    }
    Poly factor(Rational(1));
    CoeffRing s(A);
    for (std::size_t j = 0; j < zs.size(); ++j) {
        Poly rho = rp[j] - Poly(Rational(1));
        factor *= (Poly(Rational(1)) + rho * Poly::var(zs[j])).pow(static_cast<unsigned>(B[j]));
        s += D.r[j] * CoeffRing(B[j]);
    }
    res.s_n = s;

    std::optional<CoeffRing> eig;
    if (method == WronskianMethod::eigenbasis || (method == WronskianMethod::automatic && res.N > 6)) {
        eig = detail::wronskian_eigenbasis(D, F);
        if (!eig && method == WronskianMethod::eigenbasis) {
            throw std::invalid_argument("wronskian: eigenvalues collide, eigenbasis route unavailable");
        }
    }
    if (eig) {
        res.method = "eigenbasis";
        res.b_n = *eig;
        Poly bn = detail::to_poly(*eig, "b_n");
        res.det_at_x1 = bn * factor;
        res.factorization_ok = !bn.is_zero();
    } else {
        res.method = "bareiss";
        Poly xv = Poly::var(xs);
        auto chi = [&](const Poly& p) {
            Poly out = xv * p.derivative(xs);
            for (std::size_t j = 0; j < zs.size(); ++j) {
                out += (rp[j] * Poly::var(zs[j]) + xv) * p.derivative(zs[j]);
            }
            return out;
        };
        Matrix<Poly> M(res.N, std::vector<Poly>(res.N));
        for (std::size_t c = 0; c < res.N; ++c) {
            const auto& m = F[c];
            Poly col = Poly::var(xs, static_cast<unsigned>(m.x.get_num().get_ui()));
            for (std::size_t j = 0; j < m.z.size(); ++j) {
                col *= Poly::var(zs[j], m.z[j]);
            }
            for (std::size_t row = 0; row < res.N; ++row) {
                M[row][c] = col.partial_eval({{xs, Rational(1)}});
                if (row + 1 < res.N) {
                    col = chi(col);
                }
            }
        }
        res.det_at_x1 = bareiss_determinant(M);
        std::map<int, Rational> zero_z;
        for (int z : zs) {
            zero_z[z] = 0;
        }
        Poly bn = res.det_at_x1.partial_eval(zero_z);
        res.b_n = CoeffRing(bn);
        res.factorization_ok = (bn * factor == res.det_at_x1) && !bn.is_zero();
    }
    bool unit_ratio = true;
    std::map<int, Rational> zero_all;
    for (std::size_t j = 0; j < rp.size(); ++j) {
        for (int v : rp[j].variables()) {
            zero_all[v] = 0;
        }
    }
    for (int v : s.num().variables()) {
        zero_all[v] = 0;
    }
    for (std::size_t j = 0; j < rp.size(); ++j) {
        unit_ratio = unit_ratio && rp[j].partial_eval(zero_all).constant_term() == 1;
    }
    res.s_n_at_zero_ok = !unit_ratio || s.evaluate(zero_all) == Rational(n) * Rational(static_cast<long>(res.N));
    res.determinant = LogExpSum::monomial(res.b_n, res.s_n);
    if (!res.factorization_ok) {
        throw std::logic_error("wronskian: determinant does not factor as b_n x^{s_n}");
    }
    return res;
}

// Same determinant computed in the function model: z_j replaced by compensators, columns
// (chi0^j X^m) as sums of monomials, expanded by cofactors. Small families only.
inline LogExpSum wronskian_function_model(const ChiDerivation& D, int n)
{
    auto F = degree_family(D, n);
    Matrix<LogExpSum> M(F.size(), std::vector<LogExpSum>(F.size()));
    for (std::size_t c = 0; c < F.size(); ++c) {
        LogExpSum col = to_logexp(D, ChiSum::monomial(F[c], CoeffRing(1)));
        for (std::size_t row = 0; row < F.size(); ++row) {
            M[row][c] = col;
            col = chi0_apply(col);
        }
    }
    return cofactor_determinant(M);
}

// ---------------------------------------------------------------------------
// Transverse ideals

using LocalRatPoly = LocalPoly<RatFun>;

struct TransverseOptions
{
    int max_derivatives = 64;
    std::vector<int> ring_symbols; // global symbol ids of the local ring variables; empty = automatic
    int precision_margin = 4;      // truncated mode only (x0 != 1 with residue-dependent exponents)
};

struct TransverseIdeal
{
    std::vector<int> ring_symbols;          // local slot i <-> global symbol ring_symbols[i]
    std::vector<LocalRatPoly> generators;   // restrictions of f, chi f, ...
    StandardBasis<RatFun> basis;
    Rational x0;
    int derivatives_used = 0;
    std::size_t closure_dimension = 0;
    bool stabilized = true;
    bool certified = true;  // closure dimension reached (Cayley-Hamilton)
    std::string diagnostic;

    bool is_zero() const { return basis.zero_ideal(); }
    bool is_unit() const { return basis.unit_ideal(); }

    std::string generator_string(std::size_t i) const
    {
        auto names = ring_symbols;
        return basis.elements[i].to_string([names](int slot) { return symbol_name(names[static_cast<std::size_t>(slot)]); });
    }
};

namespace detail
{

// Monomials reachable from supp f under chi (z_j -> x moves).
inline std::vector<ChiKey> chi_closure(const ChiSum& f)
{
    std::set<ChiKey> seen;
    std::vector<ChiKey> stack;
    for (const auto& [k, c] : f.terms()) {
        if (seen.insert(k).second) {
            stack.push_back(k);
        }
    }
    while (!stack.empty()) {
        ChiKey k = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < k.z.size(); ++j) {
            if (k.z[j]) {
                ChiKey m = k;
                m.z[j] -= 1;
                m.x += 1;
                if (seen.insert(m).second) {
                    stack.push_back(m);
                }
            }
        }
    }
    return {seen.begin(), seen.end()};
}

inline void collect_symbols(const CoeffRing& c, std::set<int>& out)
{
    for (int v : c.num().variables()) {
        out.insert(v);
    }
    for (int v : c.den().variables()) {
        out.insert(v);
    }
}

class Restrictor
{
public:
    Restrictor(const ChiDerivation& D, const Rational& x0, const std::vector<int>& ring, bool series, unsigned precision)
        : m_D(D), m_x0(x0), m_ring(ring), m_series(series)
    {
        m_ord = MonomialOrder(static_cast<int>(std::max<std::size_t>(ring.size(), 1)));
        if (series) {
            m_prec.bound = Rational(static_cast<long>(precision));
        }
        m_L = RatFun::var(log_transversal_symbol());
    }

    const MonomialOrder& order() const { return m_ord; }
    const Precision& precision() const { return m_prec; }

    LocalRatPoly local(const CoeffRing& c) const
    {
        Poly p = to_poly(c, "block coefficient");
        std::vector<LocalRatPoly::Term> out;
        for (const auto& [m, q] : p.terms()) {
            Monomial lm;
            for (std::size_t g = 0; g < kMaxVars; ++g) {
                if (m.e[g]) {
                    auto it = std::find(m_ring.begin(), m_ring.end(), static_cast<int>(g));
                    if (it == m_ring.end()) {
                        throw std::invalid_argument("transverse ideal: symbol '" + symbol_name(static_cast<int>(g)) +
                                                    "' is not a ring variable");
                    }
                    lm.set(static_cast<int>(it - m_ring.begin()), m.e[g]);
                }
            }
            out.emplace_back(lm, RatFun(q));
        }
        return LocalRatPoly::from_terms(std::move(out));
    }

    LocalRatPoly restrict(const ChiSum& f) const
    {
        LocalRatPoly acc;
        for (const auto& [k, c] : f.terms()) {
            LocalRatPoly t = local(c);
            if (m_x0 == 1) {
                bool has_z = false;
                for (auto v : k.z) {
                    has_z = has_z || v > 0;
                }
                if (has_z) {
                    continue;
                }
            } else {
                if (!is_integer(k.x)) {
                    throw std::invalid_argument("transverse ideal: ramified x-exponent needs x0 = 1");
                }
                t = t.scaled(RatFun(rational_pow(m_x0, k.x.get_num().get_si())));
                for (std::size_t j = 0; j < k.z.size(); ++j) {
                    for (unsigned p = 0; p < k.z[j]; ++p) {
                        t = mul(t, z_value(j));
                    }
                }
                for (std::size_t j = 0; j < k.u.size(); ++j) {
                    if (k.u[j]) {
                        t = mul(t, power_of_x0(-m_D.s[j] * CoeffRing(static_cast<long>(k.u[j]))));
                    }
                }
            }
            for (std::size_t j = 0; j < k.u.size(); ++j) {
                if (k.u[j]) {
                    t = t.mul_monomial(Monomial::var(lambda_slot(j), k.u[j]), RatFun(1));
                }
            }
            acc += t;
        }
        return truncate(acc, m_ord, m_prec);
    }

private:
    int lambda_slot(std::size_t j) const
    {
        int g = lambda_symbol(static_cast<int>(j) + 1);
        auto it = std::find(m_ring.begin(), m_ring.end(), g);
        return static_cast<int>(it - m_ring.begin());
    }

    LocalRatPoly mul(const LocalRatPoly& a, const LocalRatPoly& b) const { return truncate(a * b, m_ord, m_prec); }

    // exp(t L) truncated; t has no constant term.
    LocalRatPoly exp_series(const LocalRatPoly& t) const
    {
        LocalRatPoly acc(RatFun(1)), term(RatFun(1));
        if (t.is_zero()) {
            return acc;
        }
        for (long k = 1;; ++k) {
            term = mul(term, t).scaled(m_L / RatFun(k));
            if (term.is_zero()) {
                return acc;
            }
            acc += term;
        }
    }

    // x0^e with e = e0 + e', e0 integer, e' without constant term.
    LocalRatPoly power_of_x0(const CoeffRing& e) const
    {
        LocalRatPoly le = local(e);
        Rational e0 = le.constant_term().constant_value();
        if (!is_integer(e0)) {
            throw std::invalid_argument("transverse ideal: non-integer base exponent needs x0 = 1");
        }
        LocalRatPoly rest = le - LocalRatPoly(RatFun(e0));
        if (!m_series && !rest.is_zero()) {
            throw std::logic_error("transverse ideal: series mode required");
        }
        return exp_series(rest).scaled(RatFun(rational_pow(m_x0, e0.get_num().get_si())));
    }

    // z_j(x0) = x0 Ld(x0, rho), rho = r_j - 1.
    LocalRatPoly z_value(std::size_t j) const
    {
        LocalRatPoly rho = local(m_D.r[j] - CoeffRing(1));
        Rational r0 = rho.constant_term().constant_value();
        LocalRatPoly rest = rho - LocalRatPoly(RatFun(r0));
        LocalRatPoly ld;
        if (r0 == 0) {
            // sum_k rho^k L^{k+1}/(k+1)!
            LocalRatPoly term(m_L);
            ld = term;
            if (!rest.is_zero()) {
                if (!m_series) {
                    throw std::logic_error("transverse ideal: series mode required");
                }
                for (long k = 1;; ++k) {
                    term = mul(term, rest).scaled(m_L / RatFun(k + 1));
                    if (term.is_zero()) {
                        break;
                    }
                    ld += term;
                }
            }
        } else {
            if (!is_integer(r0)) {
                throw std::invalid_argument("transverse ideal: non-integer ratio needs x0 = 1");
            }
            // (x0^{r0} exp(rest L) - 1) / (r0 + rest), 1/(r0+rest) expanded geometrically
            LocalRatPoly num = exp_series(rest).scaled(RatFun(rational_pow(m_x0, r0.get_num().get_si()))) -
                               LocalRatPoly(RatFun(1));
            LocalRatPoly inv(RatFun(Rational(1) / r0)), term = inv;
            LocalRatPoly step = rest.scaled(RatFun(-Rational(1) / r0));
            if (!rest.is_zero()) {
                while (true) {
                    term = mul(term, step);
                    if (term.is_zero()) {
                        break;
                    }
                    inv += term;
                }
            }
            ld = mul(num, inv);
        }
        return ld.scaled(RatFun(m_x0));
    }

    const ChiDerivation& m_D;
    Rational m_x0;
    std::vector<int> m_ring;
    bool m_series;
    MonomialOrder m_ord{1};
    Precision m_prec;
    RatFun m_L;
};

} // namespace detail

// Ring variables for f: every symbol in its coefficients and in r, s, plus lambda_1..lambda_ell.
inline std::vector<int> transverse_ring(const ChiDerivation& D, const std::vector<const ChiSum*>& fs)
{
    std::set<int> syms;
    for (const auto* f : fs) {
        for (const auto& [k, c] : f->terms()) {
            detail::collect_symbols(c, syms);
        }
    }
    for (const auto& r : D.r) {
        detail::collect_symbols(r, syms);
    }
    for (const auto& s : D.s) {
        detail::collect_symbols(s, syms);
    }
    for (int j = 1; j <= D.ell; ++j) {
        syms.insert(lambda_symbol(j));
    }
    syms.erase(log_transversal_symbol());
    return {syms.begin(), syms.end()};
}

inline TransverseIdeal transverse_ideal(const ChiDerivation& D, const ChiSum& f, const Rational& x0,
                                        const TransverseOptions& opt = {})
{
    if (sgn(x0) <= 0) {
        throw std::invalid_argument("transverse ideal: x0 must be positive");
    }
    TransverseIdeal res;
    res.x0 = x0;
    res.ring_symbols = opt.ring_symbols.empty() ? transverse_ring(D, {&f}) : opt.ring_symbols;
    if (res.ring_symbols.empty()) {
        res.ring_symbols.push_back(symbol("a1"));
    }
    bool dependent_exponents = false;
    for (const auto& r : D.r) {
        dependent_exponents = dependent_exponents || !r.is_constant();
    }
    for (const auto& s : D.s) {
        dependent_exponents = dependent_exponents || !s.is_constant();
    }
    bool series = x0 != 1 && dependent_exponents;
    auto closure = detail::chi_closure(f);
    res.closure_dimension = closure.size();
    unsigned precision = 0;
    if (series) {
        for (const auto& [k, c] : f.terms()) {
            unsigned un = 0;
            for (auto v : k.u) {
                un += v;
            }
            precision = std::max(precision, detail::to_poly(c, "block coefficient").total_degree() + un);
        }
        precision += static_cast<unsigned>(opt.precision_margin);
    }
    detail::Restrictor R(D, x0, res.ring_symbols, series, precision);
    ChiSum cur = f;
    int k = 0;
    StandardBasis<RatFun> sb = standard_basis<RatFun>({}, R.order(), R.precision());
    bool last_enlarged = false;
    for (; k <= opt.max_derivatives && static_cast<std::size_t>(k) < std::max<std::size_t>(closure.size(), 1); ++k) {
        LocalRatPoly g = R.restrict(cur);
        res.generators.push_back(g);
        last_enlarged = !g.is_zero() && !member(g, sb);
        if (last_enlarged) {
            sb = standard_basis(res.generators, R.order(), R.precision());
        }
        cur = chi_apply(D, cur);
    }
    res.derivatives_used = k;
    res.basis = sb;
    res.certified = static_cast<std::size_t>(k) >= closure.size();
    if (!res.certified && last_enlarged) {
        res.stabilized = false;
        res.diagnostic = "chain not stabilized within " + std::to_string(opt.max_derivatives) + " derivatives";
    }
    return res;
}

// Two-sided membership in a common ring.
inline bool same_ideal(const TransverseIdeal& a, const TransverseIdeal& b)
{
    if (a.ring_symbols != b.ring_symbols) {
        throw std::invalid_argument("same_ideal: different ambient rings");
    }
    return ideal_contains(a.basis, b.basis.elements) && ideal_contains(b.basis, a.basis.elements);
}

inline bool ideal_member(const TransverseIdeal& J, const LocalRatPoly& g)
{
    return member(g, J.basis);
}

// Builds a local polynomial in J's ring from a global-symbol polynomial.
inline LocalRatPoly to_ring(const TransverseIdeal& J, const Poly& p)
{
    std::vector<LocalRatPoly::Term> out;
    for (const auto& [m, c] : p.terms()) {
        Monomial lm;
        for (std::size_t g = 0; g < kMaxVars; ++g) {
            if (m.e[g]) {
                auto it = std::find(J.ring_symbols.begin(), J.ring_symbols.end(), static_cast<int>(g));
                if (it == J.ring_symbols.end()) {
                    throw std::invalid_argument("to_ring: symbol outside the ring");
                }
                lm.set(static_cast<int>(it - J.ring_symbols.begin()), m.e[g]);
            }
        }
        out.emplace_back(lm, RatFun(c));
    }
    return LocalRatPoly::from_terms(std::move(out));
}

// ---------------------------------------------------------------------------
// Saturation: least integer n with x^n * f / (x^{<n,s>} u^n-monomial of the generator) bounded at 0.

// Exponent data of a monomial X^m u^n seen as a function of x near 0 (residues at 0):
// z_j ~ x^{r_j(0)} log x when r_j(0) = 1, so each z contributes its ratio and one log.
inline std::pair<Rational, unsigned> growth(const ChiDerivation& D, const ChiKey& k)
{
    std::map<int, Rational> zero;
    std::set<int> syms;
    for (const auto& r : D.r) {
        detail::collect_symbols(r, syms);
    }
    for (int v : syms) {
        zero[v] = 0;
    }
    Rational a = k.x;
    unsigned logs = 0;
    for (std::size_t j = 0; j < k.z.size(); ++j) {
        if (k.z[j]) {
            Rational r0 = D.r[j].evaluate(zero);
            if (r0 == 1) {
                a += k.z[j];
                logs += k.z[j];
            } else {
                a += std::min(Rational(1), r0) * k.z[j];
            }
        }
    }
    return {a, logs};
}

// Least n >= 0 with x^n f in the ideal generated by x^{<n,s>(0)} u^n-type monomial gens (x^a u^b),
// membership meaning the quotient is bounded on (0, 1].
inline int saturation_exponent(const ChiDerivation& D, const ChiSum& f, const std::vector<std::pair<Rational, std::vector<unsigned>>>& monomial_gens)
{
    int worst = 0;
    for (const auto& [k, c] : f.terms()) {
        auto [a, logs] = growth(D, k);
        int best = -1;
        for (const auto& [ga, gu] : monomial_gens) {
            bool divides = true;
            for (std::size_t j = 0; j < gu.size(); ++j) {
                divides = divides && k.u[j] >= gu[j];
            }
            if (!divides) {
                continue;
            }
            // need n + a - ga > 0, or = 0 without logs
            Rational need = ga - a;
            Integer nf;
            mpz_fdiv_q(nf.get_mpz_t(), need.get_num_mpz_t(), need.get_den_mpz_t());
            long n = nf.get_si();
            if (Rational(n) == need && logs > 0) {
                ++n;
            } else if (Rational(n) != need) {
                ++n;
            }
            n = std::max(0L, n);
            if (best < 0 || n < best) {
                best = static_cast<int>(n);
            }
        }
        if (best < 0) {
            return -1;
        }
        worst = std::max(worst, best);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Algebraic multiplicity: stationarity index of transverse ideals of partial sums.

struct MultiplicityResult
{
    bool stabilized = false;
    int ma = -1;
    int window = 3;
    std::vector<TransverseIdeal> chain; // chain[n] = ideal of the sum of the first n blocks
    std::vector<bool> strict;           // strict[n]: chain[n] strictly inside chain[n+1]
    std::string diagnostic;
};

inline MultiplicityResult algebraic_multiplicity(const ChiDerivation& D, const std::vector<ChiBlock>& series,
                                                 const Rational& x0, int n_max, int window = 3,
                                                 TransverseOptions opt = {})
{
    MultiplicityResult res;
    res.window = window;
    std::vector<const ChiSum*> all;
    for (const auto& b : series) {
        all.push_back(&b.sum());
    }
    if (opt.ring_symbols.empty()) {
        opt.ring_symbols = transverse_ring(D, all);
    }
    if (opt.ring_symbols.empty()) {
        opt.ring_symbols.push_back(symbol("a1"));
    }
    ChiSum partial;
    int run_start = 0, run_len = 0;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0 && static_cast<std::size_t>(n) <= series.size()) {
            partial = partial + series[static_cast<std::size_t>(n - 1)].sum();
        }
        res.chain.push_back(transverse_ideal(D, partial, x0, opt));
        if (n == 0) {
            continue;
        }
        const auto& prev = res.chain[static_cast<std::size_t>(n - 1)];
        const auto& cur = res.chain[static_cast<std::size_t>(n)];
        if (!ideal_contains(cur.basis, prev.basis.elements)) {
            res.diagnostic = "chain not increasing at index " + std::to_string(n);
            return res;
        }
        bool equal = ideal_contains(prev.basis, cur.basis.elements);
        res.strict.push_back(!equal);
        if (equal) {
            ++run_len;
        } else {
            run_start = n;
            run_len = 0;
        }
        if (run_len >= window) {
            res.stabilized = true;
            res.ma = run_start;
            return res;
        }
        if (static_cast<std::size_t>(n) >= series.size() + static_cast<std::size_t>(window)) {
            break;
        }
    }
    res.diagnostic = "non-stationary up to N_max = " + std::to_string(n_max);
    return res;
}

// ---------------------------------------------------------------------------
// Double inclusion, sampled at rational residue points.

struct DoubleInclusionSample
{
    std::map<int, Rational> mu;
    Rational achieved;  // least E with x^E h_{mj} bounded (sup over entries)
    bool log_at_edge = false;
    bool holds = false;
};

struct DoubleInclusionReport
{
    Rational degree;
    Rational eps;
    std::size_t N = 0;
    std::vector<DoubleInclusionSample> samples;
    int resamples = 0;
    bool holds = true;
    Rational max_achieved;
    std::string diagnostic;
};

namespace detail
{

inline Rational random_small_rational(std::mt19937_64& rng, const Rational& bound)
{
    std::uniform_int_distribution<long> num(-997, 997);
    Rational q(num(rng), 1000);
    q.canonicalize();
    return q * bound;
}

inline std::set<int> residue_symbols(const ChiDerivation& D)
{
    std::set<int> syms;
    for (const auto& r : D.r) {
        collect_symbols(r, syms);
    }
    return syms;
}

inline ChiDerivation specialize(const ChiDerivation& D, const std::map<int, Rational>& pt)
{
    ChiDerivation S = D;
    for (auto& r : S.r) {
        r = RatFun(r.evaluate(pt));
    }
    for (auto& s : S.s) {
        s = s.partial_eval(pt);
    }
    return S;
}

} // namespace detail

// For g of degree p (ell = 0): (chi^j g)_j = M (a_m)_m over the chi-closure of supp g; with
// h = M^{-1} = adj M / det M, x^{E} h bounded gives x^{E} a_m in the module of the chi^j g.
inline DoubleInclusionReport double_inclusion_check(const ChiDerivation& D, const ChiBlock& g, const Rational& eps,
                                                    int samples, std::uint64_t seed = 1)
{
    if (D.ell != 0) {
        throw std::invalid_argument("double_inclusion_check: implemented for ell = 0");
    }
    DoubleInclusionReport rep;
    rep.degree = g.degree();
    rep.eps = eps;
    if (g.is_zero()) {
        return rep;
    }
    auto basis = detail::chi_closure(g.sum());
    rep.N = basis.size();
    auto syms = detail::residue_symbols(D);
    std::mt19937_64 rng(seed);
    Rational bound = eps / Rational(static_cast<long>(4 * rep.N * (1 + g.degree().get_num().get_ui())));
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        bool done = false;
        for (int attempt = 0; attempt < 10 && !done; ++attempt) {
            std::map<int, Rational> pt;
            for (int v : syms) {
                pt[v] = detail::random_small_rational(rng, bound);
            }
            ChiDerivation S = detail::specialize(D, pt);
            // eigenvalue collisions make the closure basis degenerate
            std::set<Rational> eig;
            for (const auto& k : basis) {
                eig.insert(S.eigenvalue(k).constant_value());
            }
            if (eig.size() != basis.size()) {
                ++rep.resamples;
                continue;
            }
            std::size_t N = basis.size();
            Matrix<LogExpSum> M(N, std::vector<LogExpSum>(N));
            for (std::size_t c = 0; c < N; ++c) {
                LogExpSum col = to_logexp(S, ChiSum::monomial(basis[c], CoeffRing(1)));
                for (std::size_t j = 0; j < N; ++j) {
                    M[j][c] = col;
                    col = chi0_apply(col);
                }
            }
            LogExpSum det = cofactor_determinant(M);
            if (det.size() != 1) {
                ++rep.resamples;
                continue;
            }
            const auto& dt = det.terms()[0];
            if (dt.log_power != 0) {
                ++rep.resamples;
                continue;
            }
            auto adj = cofactor_adjugate(M);
            DoubleInclusionSample smp;
            smp.mu = pt;
            bool any = false;
            for (const auto& row : adj) {
                for (const auto& e : row) {
                    for (const auto& t : e.terms()) {
                        Rational ex = t.exponent.constant_value() - dt.exponent.constant_value();
                        Rational need = -ex;
                        if (!any || need > smp.achieved) {
                            smp.achieved = need;
                            smp.log_at_edge = t.log_power > 0;
                            any = true;
                        } else if (need == smp.achieved && t.log_power > 0) {
                            smp.log_at_edge = true;
                        }
                    }
                }
            }
            Rational target = g.degree() + eps;
            smp.holds = smp.achieved < target || (smp.achieved == target && !smp.log_at_edge);
            rep.holds = rep.holds && smp.holds;
            if (first || smp.achieved > rep.max_achieved) {
                rep.max_achieved = smp.achieved;
                first = false;
            }
            rep.samples.push_back(smp);
            done = true;
        }
        if (!done) {
            rep.holds = false;
            rep.diagnostic = "singular system at 10 consecutive sample points";
            return rep;
        }
    }
    return rep;
}

// Testable corollary: for E = chi - e Id with e(0) != p, g lies in the span of (chi^j E g)_j with
// constant coefficients; solved exactly at a rational point (values for every symbol of g, e, r).
inline std::optional<std::vector<Rational>> euler_preimage_check(const ChiDerivation& D, const ChiBlock& g,
                                                                  const CoeffRing& e, const std::map<int, Rational>& pt)
{
    ChiDerivation S = detail::specialize(D, pt);
    Rational ev = e.evaluate(pt);
    ChiSum gs;
    for (const auto& [k, c] : g.sum().terms()) {
        gs.add(k, CoeffRing(c.evaluate(pt)));
    }
    ChiSum Eg = chi_apply(S, gs) - gs.scaled(CoeffRing(ev));
    std::size_t N = detail::chi_closure(g.sum()).size();
    std::vector<LogExpSum> V;
    ChiSum cur = Eg;
    for (std::size_t j = 0; j < N; ++j) {
        V.push_back(to_logexp(S, cur));
        cur = chi_apply(S, cur);
    }
    LogExpSum target = to_logexp(S, gs);
    // match coefficients of each (exponent, log) pair
    std::vector<std::pair<Rational, unsigned>> keys;
    auto collect = [&](const LogExpSum& f) {
        for (const auto& t : f.terms()) {
            std::pair<Rational, unsigned> k{t.exponent.constant_value(), t.log_power};
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                keys.push_back(k);
            }
        }
    };
    for (const auto& v : V) {
        collect(v);
    }
    collect(target);
    auto coeff_of = [](const LogExpSum& f, const std::pair<Rational, unsigned>& k) {
        for (const auto& t : f.terms()) {
            if (t.exponent.constant_value() == k.first && t.log_power == k.second) {
                return t.coeff.constant_value();
            }
        }
        return Rational(0);
    };
    Matrix<Rational> A(keys.size(), std::vector<Rational>(N));
    std::vector<Rational> b(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            A[i][j] = coeff_of(V[j], keys[i]);
        }
        b[i] = coeff_of(target, keys[i]);
    }
    return field_solve(A, b);
}

} // namespace polycyclic

#endif // POLYCYCLIC_CHI_BLOCKS_HPP
