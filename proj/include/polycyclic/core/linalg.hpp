#ifndef POLYCYCLIC_CORE_LINALG_HPP
#define POLYCYCLIC_CORE_LINALG_HPP

#include "polycyclic/core/polynomial.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace polycyclic
{

template <class T>
using Matrix = std::vector<std::vector<T>>;

// Fraction-free Gaussian elimination (Bareiss) over a polynomial ring with exact division.
inline Poly bareiss_determinant(Matrix<Poly> a)
{
    const std::size_t n = a.size();
    if (n == 0) {
        return Poly(Rational(1));
    }
    Poly prev(Rational(1));
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k].is_zero()) {
            std::size_t p = k + 1;
            while (p < n && a[p][k].is_zero()) {
                ++p;
            }
            if (p == n) {
                return Poly();
            }
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Poly t = a[k][k] * a[i][j] - a[i][k] * a[k][j];
                auto q = t.divide_exact(prev);
                if (!q) {
                    throw std::logic_error("bareiss: inexact division");
                }
                a[i][j] = std::move(*q);
            }
            a[i][k] = Poly();
        }
        prev = a[k][k];
    }
    return sign > 0 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

// Exact determinant over a field by Gaussian elimination.
template <class F>
F field_determinant(Matrix<F> a)
{
    const std::size_t n = a.size();
    F det(1);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && a[p][k] == F(0)) {
            ++p;
        }
        if (p == n) {
            return F(0);
        }
        if (p != k) {
            std::swap(a[p], a[k]);
            det = -det;
        }
        det = det * a[k][k];
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a[i][k] == F(0)) {
                continue;
            }
            F f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) {
                a[i][j] = a[i][j] - f * a[k][j];
            }
        }
    }
    return det;
}

// Solves A x = b over a field; nullopt if A is singular. A may be rectangular (rows >= cols),
// in which case a consistent least-rows solution is returned or nullopt if inconsistent.
template <class F>
std::optional<std::vector<F>> field_solve(Matrix<F> a, std::vector<F> b)
{
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<std::size_t> pivcol;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == F(0)) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(a[p], a[r]);
        std::swap(b[p], b[r]);
        F inv = F(1) / a[r][c];
        for (std::size_t j = c; j < cols; ++j) {
            a[r][j] = a[r][j] * inv;
        }
        b[r] = b[r] * inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i != r && !(a[i][c] == F(0))) {
                F f = a[i][c];
                for (std::size_t j = c; j < cols; ++j) {
                    a[i][j] = a[i][j] - f * a[r][j];
                }
                b[i] = b[i] - f * b[r];
            }
        }
        pivcol.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i) {
        if (!(b[i] == F(0))) {
            return std::nullopt;
        }
    }
    if (pivcol.size() != cols) {
        return std::nullopt;
    }
    std::vector<F> x(cols, F(0));
    for (std::size_t i = 0; i < r; ++i) {
        x[pivcol[i]] = b[i];
    }
    return x;
}

// Determinant by cofactor expansion along the first row; for small matrices over rings
// without division (e.g. sums of monomials with symbolic exponents).
template <class T>
T cofactor_determinant(const Matrix<T>& a)
{
    const std::size_t n = a.size();
    if (n == 0) {
        return T(1);
    }
    if (n == 1) {
        return a[0][0];
    }
    T acc(0);
    for (std::size_t c = 0; c < n; ++c) {
        Matrix<T> minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<T> row;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != c) {
                    row.push_back(a[i][j]);
                }
            }
            minor.push_back(std::move(row));
        }
        T term = a[0][c] * cofactor_determinant(minor);
        acc = (c % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

// Adjugate via cofactors: adj[j][i] = (-1)^{i+j} det(minor_{i,j}).
template <class T>
Matrix<T> cofactor_adjugate(const Matrix<T>& a)
{
    const std::size_t n = a.size();
    Matrix<T> adj(n, std::vector<T>(n, T(0)));
    if (n == 1) {
        adj[0][0] = T(1);
        return adj;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Matrix<T> minor;
            for (std::size_t r = 0; r < n; ++r) {
                if (r == i) {
                    continue;
                }
                std::vector<T> row;
                for (std::size_t c = 0; c < n; ++c) {
                    if (c != j) {
                        row.push_back(a[r][c]);
                    }
                }
                minor.push_back(std::move(row));
            }
            T d = cofactor_determinant(minor);
            adj[j][i] = ((i + j) % 2 == 0) ? d : T(0) - d;
        }
    }
    return adj;
}

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_LINALG_HPP
