#ifndef POLYCYCLIC_TOOLS_SELFTEST_HPP
#define POLYCYCLIC_TOOLS_SELFTEST_HPP

#include "polycyclic/chi_blocks.hpp"
#include "polycyclic/division.hpp"
#include "polycyclic/dulac_engine.hpp"
#include "polycyclic/euler_calculus.hpp"
#include "polycyclic/polycycle.hpp"

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace polycyclic::cli
{

struct SelftestReport
{
    std::vector<std::string> lines;
    int passed = 0;
    int failed = 0;

    void add(const std::string& name, bool ok, const std::string& detail)
    {
        lines.push_back(std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail);
        (ok ? passed : failed) += 1;
    }

    // Exceptions count as failures; the report keeps going.
    void run(const std::string& name, const std::function<std::pair<bool, std::string>()>& check)
    {
        try {
            auto [ok, detail] = check();
            add(name, ok, detail);
        } catch (const std::exception& e) {
            add(name, false, std::string("exception: ") + e.what());
        }
    }
};

namespace selftest_detail
{

inline std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline Rational small_rational(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> num(-9, 9), den(1, 6);
    return make_rational(num(rng), den(rng));
}

inline Poly random_poly(std::mt19937_64& rng, int q, unsigned maxdeg, int nterms)
{
    std::uniform_int_distribution<int> c(-5, 5);
    std::uniform_int_distribution<unsigned> d(0, maxdeg);
    std::vector<Poly::Term> t;
    for (int i = 0; i < nterms; ++i) {
        Monomial m;
        for (int j = 0; j < q; ++j) {
            m.set(j, d(rng));
        }
        t.emplace_back(m, Rational(c(rng)));
    }
    return Poly::from_terms(t);
}

inline bool division_identity(const Poly& f, const StandardBasis<Rational>& sb, const DivisionResult<Rational>& dr)
{
    Poly acc = dr.remainder + dr.unresolved;
    for (std::size_t i = 0; i < sb.elements.size(); ++i) {
        acc += dr.quotients[i] * sb.elements[i];
    }
    if (!truncate(f - acc, sb.order, sb.precision).is_zero()) {
        return false;
    }
    for (const auto& [m, c] : dr.remainder.terms()) {
        if (sb.diagram.cell_of(m) != -1) {
            return false;
        }
    }
    for (std::size_t i = 0; i < sb.elements.size(); ++i) {
        for (const auto& [m, c] : dr.quotients[i].terms()) {
            if (sb.diagram.cell_of(m * sb.diagram.corners[i]) != static_cast<int>(i)) {
                return false;
            }
        }
    }
    return true;
}

inline PolycycleSpec polycycle_of(std::vector<double> rs, std::vector<std::vector<double>> corr = {})
{
    PolycycleSpec s;
    for (std::size_t j = 0; j < rs.size(); ++j) {
        Vertex v;
        v.r = rs[j];
        v.d = principal_dulac(rs[j], j < corr.size() ? corr[j] : std::vector<double>{});
        s.vertices.push_back(v);
        Breaking b;
        b.slope.assign(rs.size(), 0.0);
        b.slope[j] = 1.0;
        s.lambda.push_back(b);
    }
    return s;
}

} // namespace selftest_detail

// Invariant suite over every module. Output depends only on the seed (no timings).
inline SelftestReport run_selftest(std::uint64_t seed, unsigned threads = 1)
{
    using namespace selftest_detail;
    SelftestReport rep;
    std::mt19937_64 rng(seed);

    rep.run("euler.ld_identity", [] {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            double y = std::exp(-4.0 + 8.0 * i / 99.0);
            for (int j = 0; j <= 20; ++j) {
                double beta = j == 10 ? 0.0 : -0.5 + 0.05 * j;
                double rhs = std::pow(y, beta);
                worst = std::max(worst, std::fabs(beta * ld_eval(y, beta) + 1.0 - rhs) / rhs);
            }
        }
        return std::pair{worst <= 1e-12, "max rel err " + sci(worst) + " on 100x21 grid"};
    });

    rep.run("euler.resolvent", [&rng] {
        std::uniform_int_distribution<int> nterms(1, 5), coin(0, 3);
        std::uniform_int_distribution<unsigned> lp(0, 3);
        int bad = 0;
        for (int trial = 0; trial < 200; ++trial) {
            CoeffRing r(small_rational(rng));
            LogExpSum g;
            int n = nterms(rng);
            for (int i = 0; i < n; ++i) {
                CoeffRing e = coin(rng) == 0 ? r : CoeffRing(small_rational(rng));
                g += LogExpSum::monomial(CoeffRing(small_rational(rng)), e, lp(rng));
            }
            auto f = euler_resolve(r, g);
            CoeffRing at1;
            for (const auto& t : f.terms()) {
                if (t.log_power == 0) {
                    at1 += t.coeff;
                }
            }
            bad += !(chi0_apply(f) - f.scaled(r) - g).is_zero() || !at1.is_zero();
        }
        return std::pair{bad == 0, std::to_string(200 - bad) + "/200 exact"};
    });

    rep.run("chi.wronskian", [] {
        std::string detail;
        bool ok = true;
        for (int q1 = 1; q1 <= 2; ++q1) {
            auto D = ChiDerivation::generic(q1);
            for (int n = 1; n <= 3; ++n) {
                auto w = wronskian(D, n);
                ok = ok && w.factorization_ok && w.s_n_at_zero_ok;
                detail += (detail.empty() ? "" : "; ") + std::string("q1=") + std::to_string(q1) + " n=" + std::to_string(n) +
                          " s_n=" + w.s_n.to_string();
            }
        }
        auto w1 = wronskian(ChiDerivation::generic(1), 1);
        ok = ok && w1.b_n == CoeffRing(1) && w1.s_n == CoeffRing(2) + CoeffRing::var(mu_symbol(1));
        return std::pair{ok, detail};
    });

    rep.run("chi.euler_kernel", [&rng] {
        int bad = 0, total = 0;
        for (int q1 = 1; q1 <= 2; ++q1) {
            auto D = ChiDerivation::generic(q1);
            for (int n = 1; n <= 3; ++n) {
                auto F = degree_family(D, n);
                for (int t = 0; t < (q1 == 1 ? 8 : 9); ++t, ++total) {
                    ChiSum b;
                    for (const auto& k : F) {
                        b.add(k, CoeffRing(small_rational(rng)));
                    }
                    bad += !euler_operator(D, F, b).is_zero();
                }
            }
        }
        return std::pair{bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " blocks annihilated"};
    });

    rep.run("chi.log_monomial_ideal", [] {
        auto D = ChiDerivation::with({CoeffRing(1)}, {CoeffRing(1)});
        std::string detail;
        bool ok = true;
        for (unsigned N = 1; N <= 5; ++N) {
            ChiSum f = ChiSum::monomial(D.key(0, {1}, {N}), CoeffRing(1));
            auto T = transverse_ideal(D, f, Rational(1));
            std::string g = T.basis.elements.size() == 1 ? T.generator_string(0) : "?";
            int sat = saturation_exponent(D, f, {{Rational(N), {N}}});
            ok = ok && g == "lambda1" + (N > 1 ? "^" + std::to_string(N) : std::string()) && sat == static_cast<int>(N);
            detail += (N > 1 ? "; " : "") + std::string("N=") + std::to_string(N) + " (" + g + ") n=" + std::to_string(sat);
        }
        return std::pair{ok, detail};
    });

    rep.run("chi.non_noetherian_witness", [] {
        auto D = ChiDerivation::generic(0);
        std::vector<ChiBlock> series;
        for (int n = 24; n >= 1; --n) {
            series.emplace_back(Rational(1, n), ChiSum::monomial(D.key(Rational(1, n)),
                                                                 CoeffRing(Poly::var("a1", static_cast<unsigned>(n)))));
        }
        auto w = algebraic_multiplicity(D, series, Rational(1), 20);
        bool strict = w.strict.size() == 20;
        for (bool s : w.strict) {
            strict = strict && s;
        }
        return std::pair{!w.stabilized && strict, std::to_string(w.strict.size()) + " steps, " +
                                                       (w.stabilized ? "stabilized" : "not stabilized")};
    });

    rep.run("division.monomial_membership", [&rng] {
        int agree = 0, laws = 0;
        for (int trial = 0; trial < 500; ++trial) {
            int q = 1 + trial % 3;
            MonomialOrder ord(q);
            std::vector<Monomial> mons;
            std::vector<Poly> gens;
            int ng = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < ng; ++i) {
                Monomial m;
                for (int j = 0; j < q; ++j) {
                    m.set(j, static_cast<unsigned>(rng() % 4));
                }
                mons.push_back(m);
                gens.push_back(Poly::monomial(m, Rational(1)));
            }
            Poly f = random_poly(rng, q, 5, 1 + static_cast<int>(rng() % 2));
            if (trial % 2 == 0) {
                f = f * gens[rng() % gens.size()];
            }
            auto sb = standard_basis(gens, ord);
            auto dr = divide(f, sb);
            laws += dr.complete && division_identity(f, sb, dr);
            bool in = true;
            for (const auto& [m, c] : f.terms()) {
                bool hit = false;
                for (const auto& g : mons) {
                    hit = hit || g.divides(m);
                }
                in = in && hit;
            }
            agree += member(f, sb) == in;
        }
        return std::pair{agree == 500 && laws == 500,
                         "membership " + std::to_string(agree) + "/500, division laws " + std::to_string(laws) + "/500"};
    });

    rep.run("division.truncated_ideals", [&rng] {
        int ok = 0;
        for (int trial = 0; trial < 60; ++trial) {
            MonomialOrder ord(2);
            Precision prec{Rational(9)};
            std::vector<Poly> gens = {random_poly(rng, 2, 3, 3), random_poly(rng, 2, 3, 3)};
            auto sb = standard_basis(gens, ord, prec);
            Poly f = random_poly(rng, 2, 6, 5);
            auto dr = divide(f, sb);
            auto again = divide(dr.remainder, sb);
            bool idem = again.remainder == dr.remainder;
            for (const auto& qi : again.quotients) {
                idem = idem && qi.is_zero();
            }
            auto sb2 = standard_basis(std::vector<Poly>(gens.rbegin(), gens.rend()), ord, prec);
            auto dr2 = divide(f, sb2);
            bool unique = dr2.remainder == dr.remainder && dr2.quotients == dr.quotients;
            ok += dr.complete && division_identity(f, sb, dr) && idem && unique;
        }
        return std::pair{ok == 60, std::to_string(ok) + "/60 (identity, support, idempotence, uniqueness)"};
    });

    rep.run("dulac.compensator", [&rng] {
        std::uniform_real_distribution<double> ux(0.01, 1.0), um(-0.3, 0.3);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            double x = ux(rng), mu = i == 0 ? 0.0 : um(rng), r = 1.0 + mu;
            auto c = [r](Complex) { return Complex(-1.0 / r); };
            double got = dulac_operator(r, c, DulacPath::real(), -std::log(x)).value.real();
            double expect = x * ld_eval(x, mu);
            worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-300));
        }
        return std::pair{worst <= 1e-10, "max rel err " + sci(worst) + " at 100 points"};
    });

    rep.run("dulac.operator_bound", [] {
        auto one = [](Complex) { return Complex(1.0); };
        std::vector<Complex> targets;
        for (int i = 1; i <= 50; ++i) {
            targets.emplace_back(0.1 * i, 0.0);
        }
        auto b = operator_bound_check(1.0, one, DulacPath::real(), targets);
        return std::pair{b.admissible && b.max_ratio <= 2.0, "max ratio " + sci(b.max_ratio) + " on 50 paths"};
    });

    std::vector<double> grid;
    for (int i = 0; i < 35; ++i) {
        grid.push_back(0.05 + 0.85 * i / 34.0);
    }
    rep.run("dulac.linear", [&grid] {
        double worst = 0.0;
        for (double mu : {-0.3, 0.0, 0.5}) {
            SaddleDeployment dep;
            dep.mu = mu;
            auto m = dulac_coefficients(dep, 12, grid);
            for (std::size_t i = 0; i < m.grid.size(); ++i) {
                double e = std::pow(m.grid[i], 1.0 + mu);
                worst = std::max(worst, std::fabs(m.d[i] - e) / e);
            }
        }
        return std::pair{worst <= 1e-12, "max rel err " + sci(worst)};
    });

    rep.run("dulac.ode_oracle", [&grid] {
        SaddleDeployment dep;
        dep.mu = 0.1;
        dep.a = {{{1, {}, 1.0}}};
        auto m = dulac_coefficients(dep, 12, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double o = dulac_ode_oracle(dep, grid[i]);
            worst = std::max(worst, std::fabs(m.d[i] - o) / std::fabs(o));
        }
        auto g = invert_map(std::cref(m), grid);
        auto inv = check_inverse(g, std::cref(m), m.r);
        bool ok = worst <= 1e-8 && m.decay_ok && inv.max_roundtrip_error <= 1e-9;
        return std::pair{ok, "a = xy, mu = 0.1: max rel err " + sci(worst) + ", roundtrip " + sci(inv.max_roundtrip_error)};
    });

    rep.run("polycycle.saddle_loop", [threads] {
        auto loop = polycycle_of({1.2});
        std::vector<std::vector<double>> nu;
        for (int i = 0; i <= 400; ++i) {
            nu.push_back({-1e-4 + 2e-4 * i / 400.0});
        }
        CountOptions opt;
        opt.threads = threads;
        auto res = count_cycles(loop, nu, opt);
        int mx = 0, wrong = 0;
        for (const auto& c : res) {
            mx = std::max(mx, c.count());
            wrong += c.count() != (c.nu[0] < 0.0 ? 1 : 0);
            for (const auto& r : c.roots) {
                wrong += !(r.delta_lo * r.delta_hi < 0.0);
            }
        }
        return std::pair{mx == 1 && wrong == 0, "max count " + std::to_string(mx) + " over 401 values"};
    });

    rep.run("polycycle.two_saddle", [threads] {
        auto two = polycycle_of({1.3, 0.8}, {{0.4}, {-0.3}});
        std::vector<std::vector<double>> nu;
        for (int i = 0; i <= 10; ++i) {
            for (int j = 0; j <= 10; ++j) {
                nu.push_back({-1e-3 + 2e-4 * i, -1e-3 + 2e-4 * j});
            }
        }
        CountOptions opt;
        opt.threads = threads;
        auto res = count_cycles(two, nu, opt);
        int mx = 0;
        bool brackets = true;
        for (const auto& c : res) {
            mx = std::max(mx, c.count());
            for (const auto& r : c.roots) {
                brackets = brackets && r.delta_lo * r.delta_hi < 0.0;
            }
        }
        return std::pair{mx <= 2 && brackets, "max count " + std::to_string(mx) + " over 121 values"};
    });

    rep.run("polycycle.rolle", [&rng] {
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        std::uniform_int_distribution<int> deg(1, 4);
        int ok = 0;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
            for (auto& v : c) {
                v = U(rng);
            }
            auto b = rolle_bound_polynomial(c, -1.0, 1.0);
            int zeros = scan_zero_count([&c](double t) { return detail::poly_eval(c, t); }, -1.0, 1.0);
            ok += b.certified && b.bound >= zeros;
        }
        return std::pair{ok == 50, std::to_string(ok) + "/50 bounds dominate the scan"};
    });

    rep.run("polycycle.blowup", [] {
        bool ok = true;
        std::string detail;
        for (int k = 2; k <= 4; ++k) {
            auto b = blowup_verify(k);
            ok = ok && b.ok();
            detail += (k > 2 ? "; " : "") + std::string("k=") + std::to_string(k) + " " + (b.lines.empty() ? "" : b.lines.back());
        }
        return std::pair{ok, detail};
    });

    return rep;
}

} // namespace polycyclic::cli

#endif // POLYCYCLIC_TOOLS_SELFTEST_HPP
