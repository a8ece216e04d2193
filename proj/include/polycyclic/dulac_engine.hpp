#ifndef POLYCYCLIC_DULAC_ENGINE_HPP
#define POLYCYCLIC_DULAC_ENGINE_HPP

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycyclic
{

using Complex = std::complex<double>;

class AccuracyError : public std::runtime_error
{
public:
    AccuracyError(const std::string& what, double achieved) : std::runtime_error(what), m_achieved(achieved) {}
    double achieved() const { return m_achieved; }

private:
    double m_achieved;
};

namespace detail
{

// Gauss-Legendre rule on [-1, 1] with its spectral integration matrix
// S[j][k] = int_{-1}^{t_j} l_k(t) dt (l_k the Lagrange basis on the nodes).
struct GaussRule
{
    int n = 0;
    std::vector<double> t, w;
    std::vector<std::vector<double>> P; // P[m][k] = P_m(t_k)
    std::vector<std::vector<double>> S;

    // int_{-1}^{tau} of the interpolant, as weights on the node values
    std::vector<double> integration_row(double tau) const
    {
        std::vector<double> q(static_cast<std::size_t>(n));
        // Q_0 = tau + 1, Q_m = (P_{m+1} - P_{m-1})/(2m+1)
        std::vector<double> leg(static_cast<std::size_t>(n) + 1);
        leg[0] = 1.0;
        leg[1] = tau;
        for (int m = 1; m < n; ++m) {
            leg[static_cast<std::size_t>(m) + 1] = ((2.0 * m + 1.0) * tau * leg[static_cast<std::size_t>(m)] -
                                                    m * leg[static_cast<std::size_t>(m) - 1]) /
                                                   (m + 1.0);
        }
        q[0] = tau + 1.0;
        for (int m = 1; m < n; ++m) {
            q[static_cast<std::size_t>(m)] =
                (leg[static_cast<std::size_t>(m) + 1] - leg[static_cast<std::size_t>(m) - 1]) / (2.0 * m + 1.0);
        }
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                acc += (2.0 * m + 1.0) / 2.0 * P[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] *
                       q[static_cast<std::size_t>(m)];
            }
            row[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)] * acc;
        }
        return row;
    }
};

inline GaussRule make_gauss_rule(int n)
{
    GaussRule g;
    g.n = n;
    auto zeros = boost::math::legendre_p_zeros<double>(n); // nonnegative zeros, ascending
    std::vector<double> pos(zeros.begin(), zeros.end());
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
        if (*it != 0.0) {
            g.t.push_back(-*it);
        }
    }
    for (double z : pos) {
        g.t.push_back(z);
    }
    for (double x : g.t) {
        double dp = boost::math::legendre_p_prime(n, x);
        g.w.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    g.P.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            g.P[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] =
                boost::math::legendre_p(m, g.t[static_cast<std::size_t>(k)]);
        }
    }
    for (int j = 0; j < n; ++j) {
        g.S.push_back(g.integration_row(g.t[static_cast<std::size_t>(j)]));
    }
    return g;
}

inline const GaussRule& gauss32()
{
    static const GaussRule rule = make_gauss_rule(32);
    return rule;
}

} // namespace detail

// gamma_w = [0, u0] followed by z(u) = u0 + u + iC(exp(u/K) - 1), u in [0, Re(w) - u0].
// C = 0 with a real target means the real segment [0, w].
struct DulacPath
{
    double u0 = 1.0;
    double K = 1.0;
    double C = 0.0;

    static DulacPath real() { return {}; }

    // Exponential path through w; throws if w is outside V_{u0,K}.
    static DulacPath through(Complex w, double u0 = 1.0, double K = 1.0)
    {
        if (u0 < 1.0 || K < 1.0) {
            throw std::invalid_argument("DulacPath: need u0 >= 1 and K >= 1");
        }
        double U = w.real() - u0;
        if (w.imag() == 0.0) {
            return {u0, K, 0.0};
        }
        if (U <= 0.0) {
            throw std::invalid_argument("DulacPath: target outside V_{u0,K}");
        }
        double C = w.imag() / std::expm1(U / K);
        if (std::fabs(C) > 1.0 + 1e-12) {
            throw std::invalid_argument("DulacPath: target outside V_{u0,K} (|C| > 1)");
        }
        return {u0, K, std::clamp(C, -1.0, 1.0)};
    }

    bool is_real() const { return C == 0.0; }

    struct Leg
    {
        double a, b;
        std::function<Complex(double)> z, dz;
    };

    std::vector<Leg> legs(Complex w) const
    {
        std::vector<Leg> out;
        if (is_real()) {
            if (w.imag() != 0.0) {
                throw std::invalid_argument("DulacPath: real path needs a real target");
            }
            out.push_back({0.0, w.real(), [](double t) { return Complex(t, 0.0); }, [](double) { return Complex(1.0, 0.0); }});
            return out;
        }
        double U = w.real() - u0;
        Complex end = Complex(u0 + U, C * std::expm1(U / K));
        if (std::abs(end - w) > 1e-10 * (1.0 + std::abs(w))) {
            throw std::invalid_argument("DulacPath: target is not the endpoint of the path");
        }
        const double cu0 = u0, cK = K, cC = C;
        out.push_back({0.0, u0, [](double t) { return Complex(t, 0.0); }, [](double) { return Complex(1.0, 0.0); }});
        out.push_back({0.0, U, [=](double u) { return Complex(cu0 + u, cC * std::expm1(u / cK)); },
                       [=](double u) { return Complex(1.0, cC / cK * std::exp(u / cK)); }});
        return out;
    }
};

struct OperatorValue
{
    Complex value;
    double error_estimate = 0.0;
};

namespace detail
{

template <class G>
Complex gl32_panel(const G& g, double a, double b)
{
    const auto& r = gauss32();
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    Complex acc = 0.0;
    for (int k = 0; k < r.n; ++k) {
        acc += r.w[static_cast<std::size_t>(k)] * g(c + h * r.t[static_cast<std::size_t>(k)]);
    }
    return acc * h;
}

template <class G>
Complex adaptive_gl32(const G& g, double a, double b, double tol, int depth, double& err)
{
    Complex whole = gl32_panel(g, a, b);
    double m = 0.5 * (a + b);
    Complex left = gl32_panel(g, a, m), right = gl32_panel(g, m, b);
    double diff = std::abs(left + right - whole);
    if (diff <= tol || depth <= 0) {
        err += diff;
        return left + right;
    }
    return adaptive_gl32(g, a, m, 0.5 * tol, depth - 1, err) + adaptive_gl32(g, m, b, 0.5 * tol, depth - 1, err);
}

} // namespace detail

struct OperatorOptions
{
    double tolerance = 1e-12;
    int max_depth = 24;
};

// L_s(f)(w) = s exp(-s w) int_{gamma_w} exp((s-1) z) f(z) dz.
inline OperatorValue dulac_operator(Complex s, const std::function<Complex(Complex)>& f, const DulacPath& path, Complex w,
                                    const OperatorOptions& opt = {})
{
    if (s == Complex(0.0)) {
        throw std::invalid_argument("dulac_operator: s must be nonzero");
    }
    auto legs = path.legs(w);
    OperatorValue out;
    for (const auto& leg : legs) {
        if (leg.b <= leg.a) {
            continue;
        }
        // non-singular domain: Re(s z) > 0 away from the origin
        for (int i = 1; i <= 64; ++i) {
            double t = leg.a + (leg.b - leg.a) * i / 64.0;
            if ((s * leg.z(t)).real() <= 0.0) {
                throw std::domain_error("dulac_operator: path enters the singular direction of L_s");
            }
        }
        auto g = [&](double t) {
            Complex z = leg.z(t);
            return s * std::exp((s - 1.0) * z - s * w) * f(z) * leg.dz(t);
        };
        double err = 0.0;
        out.value += detail::adaptive_gl32(g, leg.a, leg.b, opt.tolerance, opt.max_depth, err);
        out.error_estimate += err;
    }
    if (out.error_estimate > opt.tolerance * std::max(1.0, std::abs(out.value))) {
        throw AccuracyError("dulac_operator: quadrature did not reach tolerance, achieved " +
                                std::to_string(out.error_estimate),
                            out.error_estimate);
    }
    return out;
}

struct BoundCheckReport
{
    std::size_t samples = 0;
    double max_ratio = 0.0;
    bool admissible = true;
    bool bound_holds = true;
    std::string violation; // first point where |tan(arg(s z'))| > |exp(z)|
};

// Checks |L_s(f)(w)| <= 2 sup_{gamma_w} |f| at each target; paths are exponential paths
// through the targets (or real segments for real targets when the template is real).
inline BoundCheckReport operator_bound_check(Complex s, const std::function<Complex(Complex)>& f,
                                             const DulacPath& templ, const std::vector<Complex>& targets)
{
    BoundCheckReport rep;
    for (const auto& w : targets) {
        DulacPath path = templ.is_real() && w.imag() == 0.0 ? DulacPath::real() : DulacPath::through(w, templ.u0, templ.K);
        double sup = 0.0;
        for (const auto& leg : path.legs(w)) {
            const int M = 512;
            for (int i = 0; i <= M; ++i) {
                double t = leg.a + (leg.b - leg.a) * i / M;
                Complex z = leg.z(t);
                sup = std::max(sup, std::abs(f(z)));
                Complex v = s * leg.dz(t);
                double lhs = v.real() == 0.0 ? std::numeric_limits<double>::infinity() : std::fabs(v.imag() / v.real());
                if (lhs > std::abs(std::exp(z)) && rep.admissible) {
                    rep.admissible = false;
                    rep.violation = "path inadmissible at z = (" + std::to_string(z.real()) + ", " +
                                    std::to_string(z.imag()) + ")";
                }
            }
        }
        if (!rep.admissible) {
            return rep;
        }
        double val = std::abs(dulac_operator(s, f, path, w).value);
        double ratio = sup == 0.0 ? 0.0 : val / sup;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        rep.bound_holds = rep.bound_holds && ratio <= 2.0;
        ++rep.samples;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Deployments and Dulac maps.

struct CoefficientTerm
{
    unsigned x_power = 0;
    std::vector<unsigned> nu_powers;
    double coeff = 0.0;
};

// Prepared saddle form x dy + y(1 + mu + a) dx, a = x y sum_n a_n(x, nu) y^{n-1}.
struct SaddleDeployment
{
    double mu = 0.0;
    std::vector<double> nu;
    std::vector<std::vector<CoefficientTerm>> a; // a[n-1] = terms of a_n
};

// After substituting nu and rescaling y -> kappa y so that sum ||a_n|| <= 1/4.
struct NormalizedDeployment
{
    double r = 1.0;
    double kappa = 1.0;
    std::vector<std::vector<std::pair<unsigned, double>>> a; // (x power, coefficient)

    double a_at(std::size_t n, double x) const
    {
        double acc = 0.0;
        for (const auto& [p, c] : a[n - 1]) {
            acc += c * std::pow(x, static_cast<double>(p));
        }
        return acc;
    }
};

// Coefficient l1-norm: an upper bound for the sup over the closed unit disk.
inline double coefficient_norm(const std::vector<CoefficientTerm>& an, const std::vector<double>& nu)
{
    double s = 0.0;
    for (const auto& t : an) {
        double v = std::fabs(t.coeff);
        for (std::size_t j = 0; j < t.nu_powers.size(); ++j) {
            if (j >= nu.size()) {
                throw std::invalid_argument("deployment: coefficient uses an undefined nu component");
            }
            v *= std::pow(std::fabs(nu[j]), static_cast<double>(t.nu_powers[j]));
        }
        s += v;
    }
    return s;
}

inline NormalizedDeployment normalize(const SaddleDeployment& dep)
{
    if (!(dep.mu > -1.0)) {
        throw std::invalid_argument("deployment: need mu > -1 so that r = 1 + mu > 0");
    }
    NormalizedDeployment nd;
    nd.r = 1.0 + dep.mu;
    std::vector<double> norms;
    for (const auto& an : dep.a) {
        norms.push_back(coefficient_norm(an, dep.nu));
    }
    auto total = [&](double k) {
        double s = 0.0, kp = 1.0;
        for (double v : norms) {
            kp *= k;
            s += kp * v;
        }
        return s;
    };
    if (total(1.0) > 0.25) {
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
            double mid = 0.5 * (lo + hi);
            (total(mid) > 0.25 ? hi : lo) = mid;
        }
        nd.kappa = lo;
    }
    double kp = 1.0;
    for (const auto& an : dep.a) {
        kp *= nd.kappa;
        std::vector<std::pair<unsigned, double>> terms;
        for (const auto& t : an) {
            double v = t.coeff * kp;
            for (std::size_t j = 0; j < t.nu_powers.size(); ++j) {
                v *= std::pow(dep.nu[j], static_cast<double>(t.nu_powers[j]));
            }
            terms.emplace_back(t.x_power, v);
        }
        nd.a.push_back(std::move(terms));
    }
    return nd;
}

namespace detail
{

// One panel [a, b] of the w = -log x axis with node values of the integrands
// G_n(z) = exp(s_n (z - a)) exp(-z) h_n(z), from which f_n anywhere in the panel follows.
struct DulacPanel
{
    double a = 0.0, b = 0.0;
    std::vector<double> f0;             // f_n(a), n = 1..N
    std::vector<std::vector<double>> G; // G[n-1][k]
    std::vector<std::vector<double>> f; // f[n-1][k] at nodes
};

inline std::vector<DulacPanel> build_dulac_mesh(const NormalizedDeployment& nd, int N, std::vector<double> breaks,
                                                double hmax)
{
    const auto& rule = gauss32();
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<double> pts{0.0};
    for (double b : breaks) {
        if (b <= pts.back()) {
            continue;
        }
        int pieces = std::max(1, static_cast<int>(std::ceil((b - pts.back()) / hmax)));
        double start = pts.back();
        for (int i = 1; i <= pieces; ++i) {
            pts.push_back(i == pieces ? b : start + (b - start) * i / pieces);
        }
    }
    std::vector<DulacPanel> mesh;
    std::vector<double> cur(static_cast<std::size_t>(N), 0.0);
    cur[0] = 1.0;
    const std::size_t K = static_cast<std::size_t>(rule.n);
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        DulacPanel P;
        P.a = pts[p];
        P.b = pts[p + 1];
        P.f0 = cur;
        double h = 0.5 * (P.b - P.a), c = 0.5 * (P.a + P.b);
        std::vector<double> z(K), xz(K);
        for (std::size_t k = 0; k < K; ++k) {
            z[k] = c + h * rule.t[k];
            xz[k] = std::exp(-z[k]);
        }
        std::vector<std::vector<double>> an(static_cast<std::size_t>(N), std::vector<double>(K, 0.0));
        for (std::size_t m = 1; m <= nd.a.size() && m < static_cast<std::size_t>(N); ++m) {
            for (std::size_t k = 0; k < K; ++k) {
                an[m - 1][k] = nd.a_at(m, xz[k]);
            }
        }
        P.f.assign(static_cast<std::size_t>(N), std::vector<double>(K, 0.0));
        P.G.assign(static_cast<std::size_t>(N), std::vector<double>(K, 0.0));
        for (std::size_t k = 0; k < K; ++k) {
            P.f[0][k] = std::exp(-nd.r * z[k]);
        }
        std::vector<double> next(static_cast<std::size_t>(N));
        next[0] = std::exp(-nd.r * P.b);
        for (int n = 2; n <= N; ++n) {
            const double s = n * nd.r;
            auto& G = P.G[static_cast<std::size_t>(n) - 1];
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                for (int q = 1; q < n; ++q) {
                    double av = an[static_cast<std::size_t>(n - q) - 1][k];
                    if (av != 0.0) {
                        acc += q * av * P.f[static_cast<std::size_t>(q) - 1][k];
                    }
                }
                double hn = -acc / s;
                G[k] = std::exp(s * (z[k] - P.a)) * xz[k] * hn;
            }
            auto& fn = P.f[static_cast<std::size_t>(n) - 1];
            double f0 = P.f0[static_cast<std::size_t>(n) - 1];
            double endint = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    acc += rule.S[j][k] * G[k];
                }
                fn[j] = std::exp(-s * (z[j] - P.a)) * (f0 + s * h * acc);
                endint += rule.w[j] * G[j];
            }
            next[static_cast<std::size_t>(n) - 1] = std::exp(-s * (P.b - P.a)) * (f0 + s * h * endint);
        }
        cur = next;
        mesh.push_back(std::move(P));
    }
    return mesh;
}

} // namespace detail

struct DulacOptions
{
    double y_eval = 0.5;         // d(x) = f(x, y_eval)/y_eval
    double quad_tolerance = 1e-13;
    double tail_tolerance = 1e-9; // relative
    double initial_panel = 0.25;
    int max_refinements = 5;
};

struct DulacModel
{
    double r = 1.0;
    double kappa = 1.0;
    double y_eval = 0.5;
    int n_trunc = 0;
    std::vector<double> grid;              // x values, ascending
    std::vector<double> d;                 // d on the grid
    std::vector<std::vector<double>> f;    // f[n-1][i] = f_n(grid[i])
    std::vector<double> coefficient_norms; // max over the grid of |f_n|
    double tail_estimate = 0.0;            // relative, from the observed geometric decay
    double quad_error = 0.0;               // relative change under panel halving
    bool decay_ok = false;                 // ||f_n|| <= (1/2)^{n-1} ||f_1||
    bool monotone_ok = false;
    bool asymptotic_ok = false;            // |d/x^r - 1| shrinks toward x -> 0 at the smallest grid points
    std::string diagnostic;
    std::vector<detail::DulacPanel> mesh;

    double x_min() const { return grid.empty() ? 1.0 : grid.front(); }

    double coefficient(int n, double x) const
    {
        if (n == 1) {
            return std::pow(x, r);
        }
        double w = -std::log(x);
        if (x <= 0.0 || x > 1.0 || mesh.empty() || w > mesh.back().b * (1.0 + 1e-14)) {
            throw std::domain_error("DulacModel: x outside the tabulated range");
        }
        if (w <= 0.0) {
            return 0.0;
        }
        auto it = std::lower_bound(mesh.begin(), mesh.end(), w, [](const detail::DulacPanel& p, double v) { return p.b < v; });
        if (it == mesh.end()) {
            it = std::prev(mesh.end());
        }
        const auto& P = *it;
        const double h = 0.5 * (P.b - P.a);
        double tau = std::clamp((w - P.a) / h - 1.0, -1.0, 1.0);
        auto row = detail::gauss32().integration_row(tau);
        const double s = n * r;
        const auto& G = P.G[static_cast<std::size_t>(n) - 1];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            acc += row[k] * G[k];
        }
        return std::exp(-s * (w - P.a)) * (P.f0[static_cast<std::size_t>(n) - 1] + s * h * acc);
    }

    double operator()(double x) const
    {
        double acc = 0.0, yp = 1.0;
        for (int n = 1; n <= n_trunc; ++n) {
            acc += coefficient(n, x) * yp;
            yp *= y_eval;
        }
        return acc;
    }
};

inline DulacModel dulac_coefficients(const SaddleDeployment& dep, int n_trunc, std::vector<double> grid,
                                     const DulacOptions& opt = {})
{
    if (n_trunc < 1) {
        throw std::invalid_argument("dulac_coefficients: N_trunc must be >= 1");
    }
    if (grid.empty()) {
        throw std::invalid_argument("dulac_coefficients: empty grid");
    }
    std::sort(grid.begin(), grid.end());
    for (double x : grid) {
        if (!(x > 0.0 && x <= 1.0)) {
            throw std::domain_error("dulac_coefficients: grid points must lie in (0, 1]");
        }
    }
    auto nd = normalize(dep);
    DulacModel m;
    m.r = nd.r;
    m.kappa = nd.kappa;
    m.y_eval = opt.y_eval;
    m.n_trunc = n_trunc;
    m.grid = grid;
    std::vector<double> breaks;
    for (double x : grid) {
        breaks.push_back(-std::log(x));
    }
    auto tabulate = [&](double hmax) {
        m.mesh = detail::build_dulac_mesh(nd, n_trunc, breaks, hmax);
        std::vector<double> d;
        for (double x : grid) {
            d.push_back(m(x));
        }
        return d;
    };
    double hmax = opt.initial_panel;
    auto d = tabulate(hmax);
    for (int it = 0; it < opt.max_refinements; ++it) {
        hmax *= 0.5;
        auto d2 = tabulate(hmax);
        double diff = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            diff = std::max(diff, std::fabs(d2[i] - d[i]) / std::fabs(d2[i]));
        }
        d = std::move(d2);
        m.quad_error = diff;
        if (diff <= opt.quad_tolerance) {
            break;
        }
    }
    m.d = d;
    m.f.assign(static_cast<std::size_t>(n_trunc), {});
    for (int n = 1; n <= n_trunc; ++n) {
        double norm = 0.0;
        for (double x : grid) {
            double v = m.coefficient(n, x);
            m.f[static_cast<std::size_t>(n) - 1].push_back(v);
            norm = std::max(norm, std::fabs(v));
        }
        m.coefficient_norms.push_back(norm);
    }
    m.decay_ok = true;
    double half = 1.0;
    for (int n = 1; n <= n_trunc; ++n) {
        m.decay_ok = m.decay_ok && m.coefficient_norms[static_cast<std::size_t>(n) - 1] <=
                                       half * m.coefficient_norms[0] * (1.0 + 1e-12) + 1e-300;
        half *= 0.5;
    }
    // tail: geometric continuation of the worst observed ratio of consecutive norms
    double rho = 0.0;
    for (int n = 2; n <= n_trunc; ++n) {
        double prev = m.coefficient_norms[static_cast<std::size_t>(n) - 2];
        if (prev > 0.0) {
            rho = std::max(rho, m.coefficient_norms[static_cast<std::size_t>(n) - 1] / prev);
        }
    }
    double q = rho * opt.y_eval;
    if (q >= 1.0) {
        m.tail_estimate = std::numeric_limits<double>::infinity();
    } else {
        double ylast = std::pow(opt.y_eval, n_trunc - 1);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst = std::max(worst, std::fabs(m.f.back()[i]) * ylast / std::fabs(m.d[i]));
        }
        m.tail_estimate = worst * q / (1.0 - q);
    }
    if (m.tail_estimate > opt.tail_tolerance) {
        m.diagnostic = "increase N_trunc: tail estimate " + std::to_string(m.tail_estimate);
    }
    m.monotone_ok = true;
    for (std::size_t i = 1; i < m.d.size(); ++i) {
        m.monotone_ok = m.monotone_ok && m.d[i] > m.d[i - 1];
    }
    m.asymptotic_ok = true;
    if (grid.size() >= 3) {
        double prev = -1.0;
        for (std::size_t i = 0; i < 3; ++i) {
            double D = std::fabs(m.d[i] / std::pow(grid[i], m.r) - 1.0);
            m.asymptotic_ok = m.asymptotic_ok && D >= prev - 1e-13;
            prev = D;
        }
    }
    return m;
}

struct OdeOptions
{
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    double y_eval = 0.5;
};

// Integrates dY/dt = -Y (r + e^t Y sum_n a_n(e^t) Y^{n-1}) (t = log x) from (log x, y_eval) to t = 0;
// returns Y(0)/y_eval, i.e. f(x, y_eval)/y_eval with f(1, y) = y.
inline double dulac_ode_oracle(const SaddleDeployment& dep, double x, const OdeOptions& opt = {})
{
    if (!(x >= 0.01 && x <= 1.0)) {
        throw std::domain_error("dulac_ode_oracle: x must lie in [0.01, 1]");
    }
    auto nd = normalize(dep);
    using State = std::array<double, 1>;
    auto rhs = [&](const State& y, State& dy, double t) {
        double xv = std::exp(t);
        double Y = y[0];
        double series = 0.0, yp = 1.0;
        for (std::size_t n = 1; n <= nd.a.size(); ++n) {
            series += nd.a_at(n, xv) * yp;
            yp *= Y;
        }
        dy[0] = -Y * (nd.r + xv * Y * series);
    };
    State y{opt.y_eval};
    double t0 = std::log(x);
    if (t0 == 0.0) {
        return 1.0;
    }
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(opt.abs_tol, opt.rel_tol);
    odeint::integrate_adaptive(stepper, rhs, y, t0, 0.0, 1e-3);
    if (!std::isfinite(y[0])) {
        throw std::domain_error("dulac_ode_oracle: integration failed");
    }
    return y[0] / opt.y_eval;
}

// ---------------------------------------------------------------------------
// Inversion of a strictly increasing map on a sampled domain.

class InverseMap
{
public:
    InverseMap(std::function<double(double)> d, std::vector<double> grid) : m_d(std::move(d)), m_grid(std::move(grid))
    {
        std::sort(m_grid.begin(), m_grid.end());
        for (double x : m_grid) {
            m_values.push_back(m_d(x));
        }
        for (std::size_t i = 1; i < m_values.size(); ++i) {
            if (!(m_values[i] > m_values[i - 1])) {
                throw std::invalid_argument("invert_map: map is not strictly increasing on its grid (at x = " +
                                            std::to_string(m_grid[i]) + ")");
            }
        }
        if (m_grid.size() < 2) {
            throw std::invalid_argument("invert_map: need at least two grid points");
        }
    }

    double lo() const { return m_values.front(); }
    double hi() const { return m_values.back(); }
    const std::vector<double>& grid() const { return m_grid; }
    const std::vector<double>& values() const { return m_values; }

    double operator()(double y) const
    {
        if (y < lo() || y > hi()) {
            throw std::out_of_range("invert_map: value outside the sampled range");
        }
        auto it = std::lower_bound(m_values.begin(), m_values.end(), y);
        std::size_t i = static_cast<std::size_t>(it - m_values.begin());
        if (m_values[i] == y) {
            return m_grid[i];
        }
        double a = m_grid[i - 1], b = m_grid[i];
        auto g = [&](double x) { return m_d(x) - y; };
        std::uintmax_t iters = 200;
        auto res = boost::math::tools::toms748_solve(g, a, b, m_values[i - 1] - y, m_values[i] - y,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
        return 0.5 * (res.first + res.second);
    }

private:
    std::function<double(double)> m_d;
    std::vector<double> m_grid;
    std::vector<double> m_values;
};

inline InverseMap invert_map(std::function<double(double)> d, std::vector<double> grid)
{
    return InverseMap(std::move(d), std::move(grid));
}

struct InversionReport
{
    double max_roundtrip_error = 0.0; // max |g(d(x)) - x| over grid points and midpoints
    std::vector<double> asymptotic_ratios; // g(y)/y^{1/r} at the three smallest grid values
    bool asymptotic_ok = false;
};

inline InversionReport check_inverse(const InverseMap& g, const std::function<double(double)>& d, double r)
{
    InversionReport rep;
    const auto& xs = g.grid();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, std::fabs(g(d(xs[i])) - xs[i]));
        if (i + 1 < xs.size()) {
            double mid = 0.5 * (xs[i] + xs[i + 1]);
            rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, std::fabs(g(d(mid)) - mid));
        }
    }
    rep.asymptotic_ok = true;
    double prev = -1.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, xs.size()); ++i) {
        double y = g.values()[i];
        double ratio = g(y) / std::pow(y, 1.0 / r);
        rep.asymptotic_ratios.push_back(ratio);
        double dev = std::fabs(ratio - 1.0);
        rep.asymptotic_ok = rep.asymptotic_ok && dev >= prev - 1e-12;
        prev = dev;
    }
    return rep;
}

} // namespace polycyclic

#endif // POLYCYCLIC_DULAC_ENGINE_HPP
