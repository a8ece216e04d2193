#include "commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using polycyclic::cli::json;

namespace
{

struct Outcome
{
    int code = 0;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("polycyclic_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "polycyclic");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream err;
    int code = polycyclic::cli::run(static_cast<int>(argv.size()), argv.data(), err);
    return {code, err.str()};
}

Outcome run_config(const std::string& command, const json& cfg, const fs::path& dir, std::vector<std::string> extra = {})
{
    fs::path cfg_path = dir / "config.json";
    std::ofstream(cfg_path) << cfg.dump();
    std::vector<std::string> args{command, "--config", cfg_path.string(), "--out", (dir / "out").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p)
{
    return json::parse(slurp(p));
}

// data rows of a CSV written by the tool: comment line, column header, rows
std::vector<std::vector<std::string>> csv_rows(const fs::path& p)
{
    std::istringstream is(slurp(p));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    int n = 0;
    while (std::getline(is, line)) {
        if (n++ < 2) {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

json grid(double a, double b, int n)
{
    return json{{"from", a}, {"to", b}, {"points", n}};
}

} // namespace

TEST(Cli, DulacLinearSaddle)
{
    auto dir = scratch("dulac_linear");
    auto o = run_config("dulac", {{"mu", "-3/10"}, {"n_trunc", 12}, {"grid", grid(0.05, 0.9, 20)}}, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto rows = csv_rows(dir / "out" / "dulac.csv");
    ASSERT_EQ(rows.size(), 20u);
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 4u);
        EXPECT_LE(std::stod(r[3]), 1e-12);
    }
    auto s = read_json(dir / "out" / "dulac_summary.json");
    EXPECT_DOUBLE_EQ(s["r"].get<double>(), 0.7);
    EXPECT_EQ(s["n_trunc"], 12);
    EXPECT_TRUE(s.contains("max_tail_estimate"));
}

TEST(Cli, DulacNonlinearMatchesOde)
{
    auto dir = scratch("dulac_xy");
    json cfg{{"mu", 0.1}, {"a", json::array({json::array({{{"x_power", 1}, {"coeff", 1}}})})}, {"n_trunc", 12},
             {"grid", grid(0.05, 0.9, 35)}};
    auto o = run_config("dulac", cfg, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto s = read_json(dir / "out" / "dulac_summary.json");
    EXPECT_LE(s["max_rel_err"].get<double>(), 1e-8);
    EXPECT_TRUE(s["decay_ok"].get<bool>());
    EXPECT_LE(s["inverse_max_roundtrip_error"].get<double>(), 1e-9);
}

TEST(Cli, MalformedCoefficientArray)
{
    auto dir = scratch("dulac_bad");
    json cfg{{"mu", 0.1}, {"a", json::array({json::array({{{"x_power", "one"}, {"coeff", 1}}})})}, {"n_trunc", 12},
             {"grid", grid(0.05, 0.9, 5)}};
    auto o = run_config("dulac", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("a[0][0].x_power"), std::string::npos) << o.err;
    cfg["a"] = json::array({json{{"x_power", 1}}});
    o = run_config("dulac", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("a[0]"), std::string::npos) << o.err;
    cfg.erase("a");
    cfg.erase("n_trunc");
    o = run_config("dulac", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("n_trunc: missing"), std::string::npos) << o.err;
    cfg["n_trunc"] = 12;
    cfg["mu"] = "1/0";
    o = run_config("dulac", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("mu"), std::string::npos) << o.err;
}

TEST(Cli, CyclicitySaddleLoop)
{
    auto dir = scratch("loop");
    json cfg{{"vertices", json::array({{{"r", "6/5"}}})}, {"nu_grid", {{"axes", json::array({grid(-1e-4, 1e-4, 401)})}}}};
    auto o = run_config("cyclicity", cfg, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(read_json(dir / "out" / "cyclicity_summary.json")["max_count"], 1);
    auto rows = csv_rows(dir / "out" / "cyclicity.csv");
    ASSERT_EQ(rows.size(), 401u);
    for (const auto& r : rows) {
        int count = std::stoi(r[1]);
        EXPECT_EQ(count, std::stod(r[0]) < 0.0 ? 1 : 0);
        if (count) {
            EXPECT_NE(r[3].find(':'), std::string::npos);
        }
    }

    // lambda identically zero
    cfg["lambda"] = json::array({{{"slope", {0}}}});
    o = run_config("cyclicity", cfg, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto s = read_json(dir / "out" / "cyclicity_summary.json");
    EXPECT_EQ(s["max_count"], 0);
    EXPECT_EQ(s["count_histogram"]["0"], 401);
}

TEST(Cli, CyclicityConfigErrors)
{
    auto dir = scratch("loop_bad");
    json cfg{{"vertices", json::array({{{"r", 1.2}}})}, {"nu_grid", json::array()}};
    auto o = run_config("cyclicity", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("nu_grid"), std::string::npos) << o.err;
    cfg["nu_grid"] = json::array({{0.1, 0.2}});
    o = run_config("cyclicity", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("nu_grid[0]"), std::string::npos) << o.err;
    cfg["nu_grid"] = json::array({{0.0}});
    cfg["vertices"][0]["x_max"] = 1e-12;
    o = run_config("cyclicity", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("window"), std::string::npos) << o.err;
}

TEST(Cli, Divide)
{
    auto dir = scratch("divide");
    json cfg{{"variables", {"a", "b"}}, {"generators", {"a^2 - b^3", "a*b"}}, {"dividends", {"a^3 + a*b^2 + b^5", "a"}}};
    auto o = run_config("divide", cfg, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto r = read_json(dir / "out" / "divide.json");
    EXPECT_EQ(r["standard_basis"], json({"a*b", "a^2 - b^3", "b^4"}));
    EXPECT_TRUE(r["divisions"][0]["member"].get<bool>());
    EXPECT_FALSE(r["divisions"][1]["member"].get<bool>());
    EXPECT_EQ(r["divisions"][1]["remainder"], "a");
    cfg["dividends"] = {"a + c"};
    o = run_config("divide", cfg, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("dividends[0]"), std::string::npos) << o.err;
}

TEST(Cli, WronskianExample)
{
    auto dir = scratch("wronskian");
    auto o = run_config("wronskian", {{"q1", 1}, {"n", 1}}, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto r = read_json(dir / "out" / "wronskian.json");
    EXPECT_EQ(r["b_n"], "1");
    EXPECT_EQ(r["s_n"], "mu1 + 2");
    EXPECT_EQ(r["ratios"][0], "mu1 + 1");
    EXPECT_TRUE(r["factorization_ok"].get<bool>());
    o = run_config("wronskian", {{"q1", 1}}, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("n: missing"), std::string::npos);
}

TEST(Cli, BlowupExample)
{
    auto dir = scratch("blowup");
    auto o = run_config("blowup", {{"k", 2}}, dir);
    ASSERT_EQ(o.code, 0) << o.err;
    auto r = read_json(dir / "out" / "blowup.json");
    EXPECT_EQ(r["lines"].back(), "identity holds");
    o = run_config("blowup", {{"k", 3}, {"specialization", {{"r1", "1"}}}}, dir);
    EXPECT_EQ(o.code, 0) << o.err;
    o = run_config("blowup", {{"k", 3}, {"specialization", {{"r7", "1"}}}}, dir);
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("specialization.r7"), std::string::npos) << o.err;
}

TEST(Cli, HeadersAndDeterminism)
{
    auto dir = scratch("determinism");
    json cfg{{"vertices", json::array({{{"r", 1.3}, {"corrections", {0.4}}}, {{"r", 0.8}, {"corrections", {-0.3}}}})},
             {"nu_grid", {{"axes", json::array({grid(-1e-3, 1e-3, 6), grid(-1e-3, 1e-3, 6)})}}}};
    ASSERT_EQ(run_config("cyclicity", cfg, dir, {"--threads", "1"}).code, 0);
    std::string a = slurp(dir / "out" / "cyclicity.csv"), as = slurp(dir / "out" / "cyclicity_summary.json");
    ASSERT_EQ(run_config("cyclicity", cfg, dir, {"--threads", "3"}).code, 0);
    EXPECT_EQ(a, slurp(dir / "out" / "cyclicity.csv"));
    EXPECT_EQ(as, slurp(dir / "out" / "cyclicity_summary.json"));
    auto hash = polycyclic::cli::config_hash(cfg, 0);
    EXPECT_EQ(a.rfind("# polycyclic " + std::string(polycyclic::cli::kToolVersion), 0), 0u);
    EXPECT_NE(a.find("config_hash=" + hash), std::string::npos);
    EXPECT_EQ(read_json(dir / "out" / "cyclicity_summary.json")["header"]["config_hash"], hash);
    // the seed enters the hash
    ASSERT_EQ(run_config("cyclicity", cfg, dir, {"--seed", "5"}).code, 0);
    EXPECT_NE(slurp(dir / "out" / "cyclicity.csv"), a);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(invoke({"bogus"}).code, 2);
    EXPECT_EQ(invoke({"dulac"}).code, 2);
    EXPECT_EQ(invoke({"dulac", "--config", "/nonexistent/config.json"}).code, 2);
    auto dir = scratch("usage");
    std::ofstream(dir / "broken.json") << "{\"mu\": ";
    auto o = invoke({"dulac", "--config", (dir / "broken.json").string()});
    EXPECT_EQ(o.code, 2);
    auto w = run_config("dulac", {{"command", "wronskian"}}, dir);
    EXPECT_EQ(w.code, 2);
    EXPECT_NE(w.err.find("command"), std::string::npos);
}

TEST(Cli, SelftestPasses)
{
    auto dir = scratch("selftest");
    auto o = invoke({"selftest", "--out", dir.string(), "--seed", "3"});
    EXPECT_EQ(o.code, 0) << o.err;
    std::string rep = slurp(dir / "selftest_report.txt");
    EXPECT_NE(rep.find("0 failed"), std::string::npos);
    EXPECT_EQ(rep.find("FAIL"), std::string::npos) << rep;
}

TEST(Cli, SampleConfigs)
{
    fs::path samples = POLYCYCLIC_SAMPLES_DIR;
    int seen = 0;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(samples)) {
        if (e.path().extension() == ".json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        auto cfg = read_json(p);
        std::string command = cfg["command"];
        if (command == "selftest") {
            continue;
        }
        auto dir = scratch("sample_" + p.stem().string());
        auto o = invoke({command, "--config", p.string(), "--out", dir.string()});
        EXPECT_EQ(o.code, 0) << p << ": " << o.err;
        ++seen;
    }
    EXPECT_GE(seen, 5);
}
