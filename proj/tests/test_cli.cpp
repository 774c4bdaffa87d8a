#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covbound/cli.hpp"

using namespace covbound;

namespace
{

struct Run
{
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "covbound");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

// Parses every numeric CSV field and prints it back.
std::string reemit_csv(const std::string& text)
{
    std::string result;
    for (const auto& line : lines(text))
    {
        std::string field;
        std::istringstream fields(line);
        bool first = true;
        while (std::getline(fields, field, ','))
        {
            double v;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            const bool numeric = ec == std::errc() && ptr == field.data() + field.size();
            result += (first ? "" : ",") + (numeric ? cli::format_number(v) : field);
            first = false;
        }
        result += '\n';
    }
    return result;
}

std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("covbound_test_" + name);
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("number formatting round-trips")
    {
        for (double x : {0.1, 1.0 / 3.0, 0.95, 1e-300, 123456789.0, -2.5e-7})
        {
            const std::string s = cli::format_number(x);
            double back;
            std::from_chars(s.data(), s.data() + s.size(), back);
            CHECK(back == x);
        }
        CHECK(cli::format_number(0.07) == "0.07");
        CHECK(cli::format_number(INFINITY) == "inf");
    }

    TEST_CASE("grid and list parsing")
    {
        const auto g = cli::parse_grid("0:0.01:0.99");
        CHECK(g.size() == 100);
        CHECK(g[7] == 0.07);
        CHECK(g.back() == 0.99);
        CHECK(cli::parse_grid("0.5:0.1:0.2").empty());
        CHECK_THROWS(cli::parse_grid("0:0:1"));
        CHECK_THROWS(cli::parse_grid("0:1"));
        const auto ms = cli::parse_m_list("5, 20,inf");
        REQUIRE(ms.size() == 3);
        CHECK(*ms[1] == 20);
        CHECK_FALSE(ms[2].has_value());
        CHECK_THROWS(cli::parse_m_list("0"));
        CHECK_THROWS(cli::parse_m_list("2.5"));
        CHECK(cli::parse_real_list("1,2.5") == std::vector<double>{1.0, 2.5});
    }

    TEST_CASE("bound record")
    {
        const Run r = run_cli({"bound", "--method", "cp", "--alpha", "0.05", "--m", "20", "--rho", "0.8"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["bound"].get<double>() < 0.95);
        CHECK(j["method"] == "cp");
        CHECK(j["m"] == "20");
        CHECK(j["rho"].get<double>() == 0.8);
        CHECK(j.contains("gamma_star"));
        CHECK(j.contains("quad_err"));

        const Run zero = run_cli({"bound", "--method", "cp", "--m", "20", "--rho", "0"});
        REQUIRE(zero.code == 0);
        CHECK(nlohmann::json::parse(zero.out)["bound"].get<double>() <= 0.95 + 1e-6);

        const Run one = run_cli({"bound", "--method", "cp", "--m", "20", "--rho", "1"});
        REQUIRE(one.code == 0);
        CHECK(nlohmann::json::parse(one.out)["gamma_star"] == "closed_form");

        const Run fixed = run_cli({"bound", "--m", "20", "--rho", "0.5", "--gamma", "40"});
        REQUIRE(fixed.code == 0);
        CHECK(nlohmann::json::parse(fixed.out)["bound"].get<double>() == doctest::Approx(0.95).epsilon(1e-9));
    }

    TEST_CASE("large-sample bound")
    {
        const Run lim = run_cli({"limit", "--method", "adjr2", "--rho", "0.5"});
        REQUIRE(lim.code == 0);
        CHECK(nlohmann::json::parse(lim.out)["m"] == "inf");
        const Run inf = run_cli({"bound", "--method", "adjr2", "--m", "inf", "--rho", "0.5"});
        CHECK(inf.out == lim.out);

        const Run bic = run_cli({"bound", "--method", "bic", "--m", "inf", "--rho", "0.5"});
        CHECK(bic.code == 2);
        CHECK(bic.err.find("does not apply") != std::string::npos);
        CHECK(run_cli({"limit", "--method", "ttest", "--test-size", "0.05", "--rho", "0.5"}).code == 2);
    }

    TEST_CASE("invalid input")
    {
        CHECK(run_cli({"bound", "--method", "lasso", "--rho", "0.5"}).code == 2);
        CHECK(run_cli({"bound", "--alpha", "1.5", "--rho", "0.5"}).code == 2);
        CHECK(run_cli({"bound", "--m", "5,20", "--rho", "0.5"}).code == 2);
        CHECK(run_cli({"bound", "--rho", "-0.5"}).code == 2);
        CHECK(run_cli({"bound"}).code == 2);
        CHECK(run_cli({"bound", "--bogus"}).code == 2);
        CHECK(run_cli({}).code == 2);
        CHECK(run_cli({"--help"}).code == 0);
    }

    TEST_CASE("curve output")
    {
        const Run r = run_cli({"curve", "--method", "cp", "--m", "5,inf", "--rho-grid", "0:0.25:1"});
        REQUIRE(r.code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 11);
        CHECK(ls[0] == "method,alpha,p,m,rho,bound,gamma_star");
        CHECK(ls[5].find("cp,0.05,10,5,1,") == 0);
        CHECK(ls[5].find("closed_form") != std::string::npos);
        CHECK(ls[6].find("cp,0.05,10,inf,0,") == 0);

        // Bit-identical reruns and a lossless round trip through parsing.
        CHECK(run_cli({"curve", "--method", "cp", "--m", "5,inf", "--rho-grid", "0:0.25:1"}).out == r.out);
        CHECK(reemit_csv(r.out) == r.out);

        const Run json = run_cli({"curve", "--m", "20", "--rho-list", "0.3,0.6", "--format", "json"});
        REQUIRE(json.code == 0);
        CHECK(nlohmann::json::parse(json.out).size() == 2);
    }

    TEST_CASE("curve files and errors")
    {
        const auto path = temp_path("curve.csv");
        std::filesystem::remove(path);
        CHECK(run_cli({"curve", "--m", "20", "--rho-grid", "0.5:0.1:0.2", "--out", path.string()}).code == 2);
        CHECK_FALSE(std::filesystem::exists(path));

        CHECK(run_cli({"curve", "--m", "20", "--rho-list", "0.5", "--out", "/nonexistent/dir/x.csv"}).code == 1);
        CHECK(run_cli({"curve", "--method", "bic", "--m", "20,inf", "--rho-list", "0.5"}).code == 2);

        REQUIRE(run_cli({"curve", "--m", "20", "--rho-list", "0.5", "--out", path.string()}).code == 0);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "method,alpha,p,m,rho,bound,gamma_star");
        std::filesystem::remove(path);
    }

    TEST_CASE("verify")
    {
        const Run r = run_cli({"verify", "--method", "cp", "--m", "20", "--rho", "0.9", "--gamma", "1", "--reps",
                               "10000", "--seed", "3"});
        CHECK(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        REQUIRE(j["points"].size() == 1);
        CHECK(j["points"][0]["std_err"].get<double>() == doctest::Approx(0.003).epsilon(0.5));
        CHECK(j["all_pass"] == true);
        const Run again = run_cli({"verify", "--method", "cp", "--m", "20", "--rho", "0.9", "--gamma", "1", "--reps",
                                   "10000", "--seed", "3"});
        CHECK(again.out == r.out);
        CHECK(run_cli({"verify", "--reps", "100"}).code == 2);
    }

    TEST_CASE("simulate")
    {
        const auto path = temp_path("design.txt");
        {
            std::ofstream f(path);
            f << "8 3 2\n";
            const double rows[8][3] = {{1, 0.1, 0.3}, {1, 0.5, -0.2}, {1, -0.3, 0.8}, {1, 0.9, 0.1},
                                       {1, -0.7, -0.6}, {1, 0.2, 0.4}, {1, 0.0, -0.9}, {1, 0.6, 0.7}};
            for (const auto& row : rows)
                f << row[0] << ' ' << row[1] << ' ' << row[2] << '\n';
            f << "0 1 0.5\n0 0 0\n1\n";
        }
        const Run r = run_cli({"simulate", "--design", path.string(), "--method", "cp", "--reps", "2000",
                               "--gamma", "0,1", "--seed", "4"});
        REQUIRE(r.code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 3);
        CHECK(ls[0] == "method,alpha,n,p,q,beta1,beta2,beta3,reps,coverage,std_err,seed,coverage_last,std_err_last");
        CHECK(ls[1].find("cp,0.05,8,3,2,0,0,0,2000,") == 0);
        CHECK(reemit_csv(r.out) == r.out);
        CHECK(run_cli({"simulate", "--design", path.string(), "--reps", "2000", "--gamma", "0,1", "--seed", "4"})
                  .out == r.out);

        const Run empty = run_cli({"simulate", "--design", path.string(), "--reps", "0"});
        CHECK(empty.code == 0);
        CHECK(lines(empty.out).size() == 1);

        CHECK(run_cli({"simulate", "--design", "/nonexistent/design.txt"}).code == 2);
        CHECK(run_cli({"simulate"}).code == 2);
        {
            std::ofstream f(path);
            f << "4 2 1\n1 2\n1 2\n1 2\n1 2\n0 1\n0 0\n1\n";
        }
        CHECK(run_cli({"simulate", "--design", path.string()}).code == 2);
        std::filesystem::remove(path);
    }
}
