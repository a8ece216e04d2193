// Independent oracles for the division module: a Macaulay-matrix staircase and plain
// monomial divisibility. Only dense linear algebra over Q; no division code is reused.
#pragma once

#include "polycyclic/core/polynomial.hpp"

#include <map>
#include <set>
#include <vector>

namespace oracle
{

using polycyclic::Monomial;
using polycyclic::Poly;
using polycyclic::Rational;

inline void enumerate_monomials(int q, unsigned max_deg, std::vector<Monomial>& out)
{
    std::vector<unsigned> e(static_cast<std::size_t>(q), 0);
    std::function<void(int, unsigned)> rec = [&](int j, unsigned left) {
        if (j == q) {
            Monomial m;
            for (int i = 0; i < q; ++i) {
                m.set(i, e[static_cast<std::size_t>(i)]);
            }
            out.push_back(m);
            return;
        }
        for (unsigned k = 0; k <= left; ++k) {
            e[static_cast<std::size_t>(j)] = k;
            rec(j + 1, left - k);
        }
    };
    rec(0, max_deg);
}

// Local degree order with lexicographic tie-break (total degree, m1, ..., mq).
inline bool local_less(const Monomial& a, const Monomial& b, int q)
{
    unsigned da = a.total_degree(), db = b.total_degree();
    if (da != db) {
        return da < db;
    }
    for (int j = 0; j < q; ++j) {
        if (a[j] != b[j]) {
            return a[j] < b[j];
        }
    }
    return false;
}

// Initial exponents of J ∩ {deg <= D} computed as pivots of the span of all multiples
// alpha^k g with deg(k) <= D, truncated above degree D (exact for degree-compatible local orders).
inline std::set<Monomial> macaulay_staircase(const std::vector<Poly>& gens, int q, unsigned D)
{
    std::vector<Monomial> cols;
    enumerate_monomials(q, D, cols);
    std::sort(cols.begin(), cols.end(), [&](const Monomial& a, const Monomial& b) { return local_less(a, b, q); });
    std::map<Monomial, std::size_t> pos;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        pos[cols[i]] = i;
    }
    std::vector<std::vector<Rational>> rows;
    for (const auto& g : gens) {
        for (const auto& k : cols) {
            std::vector<Rational> row(cols.size());
            bool any = false;
            for (const auto& [m, c] : g.terms()) {
                Monomial mk = m * k;
                if (mk.total_degree() <= D) {
                    row[pos[mk]] = c;
                    any = true;
                }
            }
            if (any) {
                rows.push_back(std::move(row));
            }
        }
    }
    // Gaussian elimination, pivoting on the lowest column (= initial exponent).
    std::set<Monomial> lead;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols.size() && r < rows.size(); ++c) {
        std::size_t piv = r;
        while (piv < rows.size() && sgn(rows[piv][c]) == 0) {
            ++piv;
        }
        if (piv == rows.size()) {
            continue;
        }
        std::swap(rows[r], rows[piv]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (sgn(rows[i][c]) != 0) {
                Rational f = rows[i][c] / rows[r][c];
                for (std::size_t k = c; k < cols.size(); ++k) {
                    if (sgn(rows[r][k]) != 0) {
                        rows[i][k] -= f * rows[r][k];
                    }
                }
            }
        }
        lead.insert(cols[c]);
        ++r;
    }
    return lead;
}

inline bool monomial_ideal_contains(const std::vector<Monomial>& gens, const Poly& f)
{
    for (const auto& [m, c] : f.terms()) {
        bool hit = false;
        for (const auto& g : gens) {
            hit = hit || g.divides(m);
        }
        if (!hit) {
            return false;
        }
    }
    return true;
}

} // namespace oracle
