#ifndef POLYCYCLIC_TOOLS_COMMANDS_HPP
#define POLYCYCLIC_TOOLS_COMMANDS_HPP

#include "config.hpp"
#include "selftest.hpp"

#include "polycyclic/chi_blocks.hpp"
#include "polycyclic/core/poly_parse.hpp"
#include "polycyclic/division.hpp"
#include "polycyclic/dulac_engine.hpp"
#include "polycyclic/polycycle.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>

namespace polycyclic::cli
{

// ---------------------------------------------------------------------------
// dulac

inline SaddleDeployment read_deployment(const json& cfg)
{
    SaddleDeployment dep;
    dep.mu = as_double(need(cfg, "mu", ""), "mu");
    if (!(dep.mu > -1.0)) {
        throw ConfigError("mu", "need mu > -1");
    }
    if (const json* nu = maybe(cfg, "nu")) {
        dep.nu = as_doubles(*nu, "nu");
    }
    if (const json* a = maybe(cfg, "a")) {
        as_array(*a, "a");
        for (std::size_t n = 0; n < a->size(); ++n) {
            std::string pn = child("a", n);
            std::vector<CoefficientTerm> terms;
            const json& an = as_array((*a)[n], pn);
            for (std::size_t t = 0; t < an.size(); ++t) {
                std::string pt = child(pn, t);
                CoefficientTerm term;
                term.x_power = static_cast<unsigned>(as_int(need(an[t], "x_power", pt), child(pt, "x_power"), 0, 64));
                term.coeff = as_double(need(an[t], "coeff", pt), child(pt, "coeff"));
                if (const json* np = maybe(an[t], "nu_powers")) {
                    std::string pp = child(pt, "nu_powers");
                    as_array(*np, pp);
                    if (np->size() > dep.nu.size()) {
                        throw ConfigError(pp, "more entries than nu values");
                    }
                    for (std::size_t i = 0; i < np->size(); ++i) {
                        term.nu_powers.push_back(static_cast<unsigned>(as_int((*np)[i], child(pp, i), 0, 64)));
                    }
                }
                terms.push_back(term);
            }
            dep.a.push_back(std::move(terms));
        }
    }
    return dep;
}

inline int cmd_dulac(const json& cfg, const RunContext& ctx)
{
    SaddleDeployment dep = read_deployment(cfg);
    int n_trunc = static_cast<int>(as_int(need(cfg, "n_trunc", ""), "n_trunc", 1, 64));
    std::vector<double> grid = as_grid(need(cfg, "grid", ""), "grid");
    if (grid.size() < 2) {
        throw ConfigError("grid", "need at least two points");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.01 && grid[i] <= 1.0)) {
            throw ConfigError(child("grid", i), "points must lie in [0.01, 1]");
        }
        if (i && !(grid[i] > grid[i - 1])) {
            throw ConfigError(child("grid", i), "points must be strictly increasing");
        }
    }
    DulacOptions opt;
    if (const json* y = maybe(cfg, "y_eval")) {
        opt.y_eval = as_double(*y, "y_eval");
        if (!(opt.y_eval > 0.0 && opt.y_eval <= 1.0)) {
            throw ConfigError("y_eval", "must lie in (0, 1]");
        }
    }

    DulacModel m = dulac_coefficients(dep, n_trunc, grid, opt);
    std::string csv = ctx.header_comment() + "\nx,d_series,d_ode,rel_err\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        double ode = dulac_ode_oracle(dep, m.grid[i]);
        double rel = std::fabs(m.d[i] - ode) / std::max(std::fabs(ode), 1e-300);
        worst = std::max(worst, rel);
        csv += fmt17(m.grid[i]) + "," + fmt17(m.d[i]) + "," + fmt17(ode) + "," + fmt17(rel) + "\n";
    }
    ctx.write("dulac.csv", csv);

    json norms = json::array();
    for (double v : m.coefficient_norms) {
        norms.push_back(v);
    }
    json summary{{"r", m.r},
                 {"kappa", m.kappa},
                 {"n_trunc", m.n_trunc},
                 {"y_eval", m.y_eval},
                 {"max_tail_estimate", m.tail_estimate},
                 {"quadrature_error", m.quad_error},
                 {"max_rel_err", worst},
                 {"coefficient_norms", norms},
                 {"decay_ok", m.decay_ok},
                 {"monotone_ok", m.monotone_ok},
                 {"asymptotic_ok", m.asymptotic_ok},
                 {"diagnostic", m.diagnostic}};
    if (m.monotone_ok) {
        auto g = invert_map(std::cref(m), m.grid);
        auto inv = check_inverse(g, std::cref(m), m.r);
        summary["inverse_max_roundtrip_error"] = inv.max_roundtrip_error;
        summary["inverse_asymptotic_ok"] = inv.asymptotic_ok;
    }
    ctx.write_json("dulac_summary.json", summary);
    std::cout << "dulac: r = " << fmt17(m.r) << ", max rel_err = " << fmt17(worst) << "\n";
    if (!m.diagnostic.empty()) {
        std::cout << "dulac: " << m.diagnostic << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// cyclicity

inline PolycycleSpec read_polycycle(const json& cfg)
{
    PolycycleSpec spec;
    const json& vs = as_array(need(cfg, "vertices", ""), "vertices");
    if (vs.empty()) {
        throw ConfigError("vertices", "need at least one vertex");
    }
    for (std::size_t j = 0; j < vs.size(); ++j) {
        std::string p = child("vertices", j);
        Vertex v;
        v.r = as_double(need(vs[j], "r", p), child(p, "r"));
        if (!(v.r > 0.0)) {
            throw ConfigError(child(p, "r"), "must be positive");
        }
        std::vector<double> corr;
        if (const json* c = maybe(vs[j], "corrections")) {
            corr = as_doubles(*c, child(p, "corrections"));
        }
        v.d = principal_dulac(v.r, corr);
        if (const json* xm = maybe(vs[j], "x_max")) {
            v.x_max = as_double(*xm, child(p, "x_max"));
        }
        spec.vertices.push_back(v);
    }
    const std::size_t k = spec.vertices.size();
    if (const json* lam = maybe(cfg, "lambda")) {
        as_array(*lam, "lambda");
        if (lam->size() != k) {
            throw ConfigError("lambda", "need one entry per vertex");
        }
        for (std::size_t j = 0; j < k; ++j) {
            std::string p = child("lambda", j);
            Breaking b;
            if (const json* o = maybe((*lam)[j], "offset")) {
                b.offset = as_double(*o, child(p, "offset"));
            }
            b.slope = as_doubles(need((*lam)[j], "slope", p), child(p, "slope"));
            spec.lambda.push_back(b);
        }
    } else {
        // lambda_j = nu_j
        for (std::size_t j = 0; j < k; ++j) {
            Breaking b;
            b.slope.assign(k, 0.0);
            b.slope[j] = 1.0;
            spec.lambda.push_back(b);
        }
    }
    if (const json* xm = maybe(cfg, "x_min")) {
        spec.x_min = as_double(*xm, "x_min");
        if (!(spec.x_min > 0.0)) {
            throw ConfigError("x_min", "must be positive");
        }
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("vertices", e.what());
    }
    return spec;
}

// Explicit list of nu vectors, or {"axes": [grid, ...]} expanded as a cartesian product (last axis fastest).
inline std::vector<std::vector<double>> read_nu_grid(const json& j, std::size_t dim)
{
    std::vector<std::vector<double>> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            out.push_back(as_doubles(j[i], child("nu_grid", i)));
        }
    } else {
        const json& axes = as_array(need(j, "axes", "nu_grid"), "nu_grid.axes");
        out.push_back({});
        for (std::size_t a = 0; a < axes.size(); ++a) {
            auto vals = as_grid(axes[a], child("nu_grid.axes", a));
            std::vector<std::vector<double>> next;
            for (const auto& prefix : out) {
                for (double v : vals) {
                    auto row = prefix;
                    row.push_back(v);
                    next.push_back(std::move(row));
                }
            }
            out = std::move(next);
        }
        if (axes.empty()) {
            out.clear();
        }
    }
    if (out.empty()) {
        throw ConfigError("nu_grid", "empty grid");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].size() != dim) {
            throw ConfigError(child("nu_grid", i), "expected " + std::to_string(dim) + " parameter values");
        }
    }
    return out;
}

inline int cmd_cyclicity(const json& cfg, const RunContext& ctx)
{
    PolycycleSpec spec = read_polycycle(cfg);
    std::size_t dim = 0;
    for (const auto& b : spec.lambda) {
        dim = std::max(dim, b.slope.size());
    }
    auto grid = read_nu_grid(need(cfg, "nu_grid", ""), dim);
    CountOptions opt;
    opt.threads = ctx.threads;
    if (const json* s = maybe(cfg, "scan_points")) {
        opt.scan_points = static_cast<int>(as_int(*s, "scan_points", 16, 1 << 20));
    }
    if (const json* s = maybe(cfg, "max_points")) {
        opt.max_points = static_cast<int>(as_int(*s, "max_points", opt.scan_points, 1 << 22));
    }
    auto res = count_cycles(spec, grid, opt);

    std::string csv = ctx.header_comment() + "\n";
    for (std::size_t i = 0; i < dim; ++i) {
        csv += "nu" + std::to_string(i + 1) + ",";
    }
    csv += "count,roots,brackets,near_double,resolution_limited\n";
    int max_count = 0;
    bool any_double = false, any_limited = false;
    std::map<int, int> histogram;
    for (const auto& c : res) {
        for (double v : c.nu) {
            csv += fmt17(v) + ",";
        }
        std::string roots, brackets;
        bool nd = false;
        for (std::size_t i = 0; i < c.roots.size(); ++i) {
            const auto& r = c.roots[i];
            roots += (i ? ";" : "") + fmt17(r.x);
            brackets += (i ? ";" : "") + fmt17(r.bracket_lo) + ":" + fmt17(r.bracket_hi);
            nd = nd || r.near_double;
        }
        csv += std::to_string(c.count()) + "," + roots + "," + brackets + "," + (nd ? "1" : "0") + "," +
               (c.resolution_limited ? "1" : "0") + "\n";
        max_count = std::max(max_count, c.count());
        any_double = any_double || nd;
        any_limited = any_limited || c.resolution_limited;
        ++histogram[c.count()];
    }
    ctx.write("cyclicity.csv", csv);
    json hist = json::object();
    for (const auto& [k, v] : histogram) {
        hist[std::to_string(k)] = v;
    }
    ctx.write_json("cyclicity_summary.json", json{{"vertices", spec.k()},
                                                  {"grid_points", res.size()},
                                                  {"max_count", max_count},
                                                  {"max_multiplicity_flag", any_double},
                                                  {"resolution_limited", any_limited},
                                                  {"count_histogram", hist}});
    std::cout << "cyclicity: " << res.size() << " parameter points, max_count = " << max_count << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// divide

inline int cmd_divide(const json& cfg, const RunContext& ctx)
{
    const json& vars = as_array(need(cfg, "variables", ""), "variables");
    if (vars.empty() || vars.size() > kMaxVars) {
        throw ConfigError("variables", "need 1.." + std::to_string(kMaxVars) + " names");
    }
    std::vector<std::string> names;
    std::map<std::string, int, std::less<>> slot;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        names.push_back(as_string(vars[i], child("variables", i)));
        if (!slot.emplace(names.back(), static_cast<int>(i)).second) {
            throw ConfigError(child("variables", i), "duplicate name");
        }
    }
    const int q = static_cast<int>(names.size());
    auto resolve = [&slot](std::string_view n) -> int {
        auto it = slot.find(n);
        if (it == slot.end()) {
            throw std::invalid_argument("unknown variable '" + std::string(n) + "'");
        }
        return it->second;
    };
    auto namer = [&names](int s) { return names[static_cast<std::size_t>(s)]; };
    auto read_poly = [&](const json& j, const std::string& path) {
        try {
            return parse_poly(as_string(j, path), resolve);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(path, e.what());
        }
    };

    std::vector<Rational> weights(static_cast<std::size_t>(q), Rational(1));
    if (const json* w = maybe(cfg, "weights")) {
        as_array(*w, "weights");
        if (w->size() != static_cast<std::size_t>(q)) {
            throw ConfigError("weights", "need one weight per variable");
        }
        for (std::size_t i = 0; i < w->size(); ++i) {
            weights[i] = as_rational((*w)[i], child("weights", i));
            if (sgn(weights[i]) <= 0) {
                throw ConfigError(child("weights", i), "must be positive");
            }
        }
    }
    MonomialOrder ord(weights);
    Precision prec;
    if (const json* p = maybe(cfg, "precision")) {
        prec.bound = as_rational(*p, "precision");
    }
    std::vector<Poly> gens;
    const json& gj = as_array(need(cfg, "generators", ""), "generators");
    for (std::size_t i = 0; i < gj.size(); ++i) {
        gens.push_back(read_poly(gj[i], child("generators", i)));
    }
    auto sb = standard_basis(gens, ord, prec);

    json basis = json::array(), corners = json::array();
    for (std::size_t i = 0; i < sb.elements.size(); ++i) {
        basis.push_back(sb.elements[i].to_string(namer));
        corners.push_back(monomial_to_string(sb.diagram.corners[i], q));
    }
    json results = json::array();
    bool all_ok = true;
    if (const json* dj = maybe(cfg, "dividends")) {
        as_array(*dj, "dividends");
        for (std::size_t i = 0; i < dj->size(); ++i) {
            Poly f = read_poly((*dj)[i], child("dividends", i));
            auto dr = divide(f, sb);
            Poly acc = dr.remainder + dr.unresolved;
            json quots = json::array();
            for (std::size_t k = 0; k < sb.elements.size(); ++k) {
                acc += dr.quotients[k] * sb.elements[k];
                quots.push_back(dr.quotients[k].to_string(namer));
            }
            bool identity = truncate(f - acc, ord, prec).is_zero();
            all_ok = all_ok && identity;
            json r{{"dividend", f.to_string(namer)},
                   {"quotients", quots},
                   {"remainder", dr.remainder.to_string(namer)},
                   {"complete", dr.complete},
                   {"identity_ok", identity},
                   {"member", member(f, sb)}};
            if (!dr.complete) {
                r["unresolved"] = dr.unresolved.to_string(namer);
            }
            if (dr.attained) {
                r["exact_below"] = to_string(*dr.attained);
            }
            results.push_back(r);
        }
    }
    json w = json::array();
    for (const auto& x : weights) {
        w.push_back(to_string(x));
    }
    json out{{"variables", names},
             {"weights", w},
             {"standard_basis", basis},
             {"initial_exponents", corners},
             {"unit_ideal", sb.unit_ideal()},
             {"divisions", results}};
    if (prec.bound) {
        out["precision"] = to_string(*prec.bound);
    }
    ctx.write_json("divide.json", out);
    std::cout << "divide: standard basis of " << sb.elements.size() << " elements, " << results.size() << " divisions\n";
    return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// wronskian

inline int cmd_wronskian(const json& cfg, const RunContext& ctx)
{
    int q1 = static_cast<int>(as_int(need(cfg, "q1", ""), "q1", 0, 4));
    int n = static_cast<int>(as_int(need(cfg, "n", ""), "n", 1, 8));
    WronskianMethod method = WronskianMethod::automatic;
    if (const json* m = maybe(cfg, "method")) {
        std::string s = as_string(*m, "method");
        if (s == "bareiss") {
            method = WronskianMethod::bareiss;
        } else if (s == "eigenbasis") {
            method = WronskianMethod::eigenbasis;
        } else if (s != "automatic") {
            throw ConfigError("method", "expected \"automatic\", \"bareiss\" or \"eigenbasis\"");
        }
    }
    auto D = ChiDerivation::generic(q1);
    auto w = wronskian(D, n, method);
    json r = json::array();
    for (const auto& v : D.r) {
        r.push_back(v.to_string());
    }
    ctx.write_json("wronskian.json", json{{"q1", q1},
                                          {"n", n},
                                          {"N", w.N},
                                          {"ratios", r},
                                          {"b_n", w.b_n.to_string()},
                                          {"s_n", w.s_n.to_string()},
                                          {"determinant", w.determinant.to_string()},
                                          {"method", w.method},
                                          {"factorization_ok", w.factorization_ok},
                                          {"s_n_at_zero_ok", w.s_n_at_zero_ok}});
    std::cout << "wronskian: Delta_" << n << " = " << w.determinant.to_string() << "\n";
    return w.factorization_ok && w.s_n_at_zero_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// blowup

inline int cmd_blowup(const json& cfg, const RunContext& ctx)
{
    int k = static_cast<int>(as_int(need(cfg, "k", ""), "k", 2, 4));
    std::map<int, Rational> spec;
    if (const json* s = maybe(cfg, "specialization")) {
        if (!s->is_object()) {
            throw ConfigError("specialization", "expected an object");
        }
        for (const auto& [name, v] : s->items()) {
            std::string p = child("specialization", name);
            bool ok = name.size() >= 2 && name[0] == 'r' && name.find_first_not_of("0123456789", 1) == std::string::npos;
            int j = ok ? std::stoi(name.substr(1)) : 0;
            if (!ok || j < 1 || j >= k) {
                throw ConfigError(p, "expected r1..r" + std::to_string(k - 1));
            }
            Rational val = as_rational(v, p);
            if (sgn(val) <= 0) {
                throw ConfigError(p, "ratios must be positive");
            }
            spec[symbol(name)] = val;
        }
    }
    auto rep = blowup_verify(k, spec);
    json weights = json::array();
    for (const auto& w : rep.weights) {
        weights.push_back(w.to_string());
    }
    ctx.write_json("blowup.json", json{{"k", k},
                                       {"s_k", rep.s_k.to_string()},
                                       {"weights", weights},
                                       {"first_integrals_ok", rep.first_integrals_ok},
                                       {"nontrivial_dimension", rep.nontrivial_dimension},
                                       {"pushforward_ok", rep.pushforward_ok},
                                       {"factorization_ok", rep.factorization_ok},
                                       {"transverse_ok", rep.transverse_ok},
                                       {"chi_tilde_ok", rep.chi_tilde_ok},
                                       {"lines", rep.lines}});
    std::cout << "blowup: " << (rep.lines.empty() ? std::string() : rep.lines.back()) << "\n";
    return rep.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// selftest

inline int cmd_selftest(const json& cfg, const RunContext& ctx)
{
    (void)cfg;
    auto report = run_selftest(ctx.seed, ctx.threads);
    std::string body = ctx.header_comment() + "\n";
    for (const auto& l : report.lines) {
        body += l + "\n";
    }
    body += "summary: " + std::to_string(report.passed) + " passed, " + std::to_string(report.failed) + " failed\n";
    ctx.write("selftest_report.txt", body);
    std::cout << body;
    return report.failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// driver

inline int run(int argc, char** argv, std::ostream& err = std::cerr)
{
    CLI::App app{"polycyclic: cyclicity toolkit for planar polycycles"};
    std::string command, config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("command", command, "dulac | cyclicity | divide | wronskian | blowup | selftest")
        ->required()
        ->check(CLI::IsMember({"dulac", "cyclicity", "divide", "wronskian", "blowup", "selftest"}));
    app.add_option("--config", config_path, "JSON job description");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed for randomized sweeps");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    json cfg = json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            err << "config error: cannot read " << config_path << "\n";
            return 2;
        }
        try {
            cfg = json::parse(is);
        } catch (const json::parse_error& e) {
            err << "config error: " << config_path << ": " << e.what() << "\n";
            return 2;
        }
    } else if (command != "selftest") {
        err << "config error: --config is required for " << command << "\n";
        return 2;
    }

    RunContext ctx;
    ctx.command = command;
    ctx.out_dir = out_dir;
    try {
        if (const json* c = maybe(cfg, "command")) {
            if (as_string(*c, "command") != command) {
                throw ConfigError("command", "config is for '" + c->get<std::string>() + "'");
            }
        }
        if (seed) {
            ctx.seed = *seed;
        } else if (const json* s = maybe(cfg, "seed")) {
            ctx.seed = static_cast<std::uint64_t>(as_int(*s, "seed", 0, std::numeric_limits<long>::max()));
        }
        if (threads) {
            ctx.threads = *threads;
        } else if (const char* env = std::getenv("POLYCYCLIC_THREADS")) {
            long t = std::strtol(env, nullptr, 10);
            if (t < 1 || t > 256) {
                throw ConfigError("POLYCYCLIC_THREADS", "must lie in [1, 256]");
            }
            ctx.threads = static_cast<unsigned>(t);
        } else if (const json* t = maybe(cfg, "threads")) {
            ctx.threads = static_cast<unsigned>(as_int(*t, "threads", 1, 256));
        }
        ctx.config_hash = config_hash(cfg, ctx.seed);

        if (command == "dulac") {
            return cmd_dulac(cfg, ctx);
        }
        if (command == "cyclicity") {
            return cmd_cyclicity(cfg, ctx);
        }
        if (command == "divide") {
            return cmd_divide(cfg, ctx);
        }
        if (command == "wronskian") {
            return cmd_wronskian(cfg, ctx);
        }
        if (command == "blowup") {
            return cmd_blowup(cfg, ctx);
        }
        return cmd_selftest(cfg, ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "computation failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace polycyclic::cli

#endif // POLYCYCLIC_TOOLS_COMMANDS_HPP
