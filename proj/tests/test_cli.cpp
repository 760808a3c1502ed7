#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jsq_cli.hpp"

using namespace jsq;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "jsq");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class ScopedBackend {
public:
    explicit ScopedBackend(const char* name) { ::setenv("JSQ_BACKEND", name, 1); }
    ~ScopedBackend() { ::unsetenv("JSQ_BACKEND"); }
};

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("jsq_cli_" + name);
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Cli, BlockingPrintsValue)
{
    const auto r = run({"blocking", "--rho", "1", "--cap", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0.4\n");
}

TEST(Cli, BlockingVariants)
{
    EXPECT_EQ(run({"blocking", "--rho", "1", "--cap", "2"}).out, "0.235294117647059\n");
    EXPECT_EQ(run({"blocking", "--rho", "1", "--cap", "1", "--odd"}).out, "0.666666666666667\n");
    const auto total = run({"blocking", "--rho", "1", "--total-cap", "2"});
    EXPECT_EQ(total.code, 0);
    EXPECT_EQ(total.out, run({"blocking", "--rho", "1", "--cap", "1"}).out);
}

TEST(Cli, BlockingJson)
{
    const auto r = run({"blocking", "--rho", "1", "--cap", "5", "--json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("schema_version"), 1);
    EXPECT_NEAR(j.at("blocking").get<double>(), 32.0 / 321.0, 1e-15);
    EXPECT_EQ(j.at("backend"), "float64");
}

TEST(Cli, RationalBackend)
{
    ScopedBackend b("rational");
    const auto r = run({"blocking", "--rho", "1", "--cap", "5", "--json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("backend"), "rational");
    EXPECT_EQ(j.at("exact"), "32/321");
    const auto odd = nlohmann::json::parse(run({"blocking", "--rho", "1", "--cap", "1", "--odd", "--json"}).out);
    EXPECT_EQ(odd.at("exact"), "2/3");
    const auto big = nlohmann::json::parse(run({"blocking", "--rho", "1", "--cap", "9", "--json"}).out);
    EXPECT_EQ(big.at("backend"), "float64");
}

TEST(Cli, UnknownBackendIsUsageError)
{
    ScopedBackend b("quad");
    const auto r = run({"blocking", "--rho", "1", "--cap", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("JSQ_BACKEND"), std::string::npos);
}

TEST(Cli, UsageErrors)
{
    const auto neg = run({"blocking", "--rho", "-1", "--cap", "2"});
    EXPECT_EQ(neg.code, 1);
    EXPECT_NE(neg.err.find("--rho"), std::string::npos);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"nonsense"}).code, 1);
    const auto missing = run({"blocking", "--rho", "1"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("--cap"), std::string::npos);
    const auto unknown = run({"blocking", "--rho", "1", "--cap", "1", "--bogus"});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("--bogus"), std::string::npos);
    EXPECT_EQ(run({"blocking", "--rho", "1", "--cap", "x"}).code, 1);
    EXPECT_EQ(run({"blocking", "--rho", "1", "--cap", "1", "--odd", "--total-cap", "3"}).code, 1);
    EXPECT_EQ(run({"blocking", "--rho", "1", "--cap", "0", "--odd"}).code, 1);
    EXPECT_EQ(run({"dist", "--rho", "1", "--cap", "inf"}).code, 1);
    EXPECT_EQ(run({"kernel", "--rho", "1", "--kmax", "2", "--jmax", "2", "--format", "tsv"}).code, 1);
    EXPECT_EQ(run({"cohen", "--rho", "0.5"}).code, 1);
    EXPECT_EQ(run({"cohen", "--rho", "0.5", "--eval", "1", "--coeffs", "3"}).code, 1);
    EXPECT_EQ(run({"compare", "--cap", "5", "--grid", "1:0:3"}).code, 1);
    EXPECT_EQ(run({"asym", "--lambda", "1", "--cap", "2"}).code, 1);
    EXPECT_EQ(run({"asym", "--lambda", "1", "--mu1", "1", "--mu2", "1", "--p1", "1.5", "--cap", "2"}).code, 1);
    EXPECT_EQ(run({"oracle", "--cap", "2"}).code, 1);
    EXPECT_EQ(run({"oracle", "--rho", "0.5", "--cap", "200"}).code, 1);
    EXPECT_EQ(run({"simulate", "--rho", "1", "--cap", "inf"}).code, 1);
}

TEST(Cli, HelpExitsZero)
{
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("blocking"), std::string::npos);
}

TEST(Cli, VerifyPasses)
{
    const auto r = run({"verify", "--rho", "0.5", "--cap", "4"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    for (const char* rho : {"1", "2", "3.5"})
        EXPECT_EQ(run({"verify", "--rho", rho, "--cap", "6"}).code, 0) << rho;
    const auto j = nlohmann::json::parse(run({"verify", "--rho", "0.9", "--cap", "3", "--json"}).out);
    EXPECT_EQ(j.at("schema_version"), 1);
    EXPECT_TRUE(j.at("passed").get<bool>());
}

TEST(Cli, VerifyRationalBackend)
{
    ScopedBackend b("rational");
    const auto r = run({"verify", "--rho", "1/3", "--cap", "3"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("exact_reconstruction 0"), std::string::npos);
}

TEST(Cli, DistCsvRoundTrips)
{
    const auto path = temp_file("dist.csv");
    const auto r = run({"dist", "--rho", "0.8", "--cap", "5", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("states 36"), std::string::npos);
    std::ifstream in(path);
    const auto d = io::read_dist_csv(in);
    const auto want = stationary_finite(SymmetricParams{0.8, 5});
    for (std::size_t k = 0; k <= 5; ++k)
        for (std::size_t j = 0; j <= 5; ++j)
            EXPECT_NEAR(d(j, k), want(j, k), 1e-14);
    std::filesystem::remove(path);
}

TEST(Cli, DistToStdoutAndJson)
{
    const auto csv = run({"dist", "--rho", "1", "--cap", "1"});
    EXPECT_EQ(csv.out, "j,k,prob\n0,0,0.2\n1,0,0.2\n0,1,0.2\n1,1,0.4\n");
    const auto j = nlohmann::json::parse(run({"dist", "--rho", "1", "--cap", "1", "--json"}).out);
    EXPECT_EQ(j.at("schema_version"), 1);
    EXPECT_NEAR(io::dist_from_json(j)(1, 1), 0.4, 1e-15);
}

TEST(Cli, InfiniteDist)
{
    const auto r = run({"dist", "--rho", "0.5", "--cap", "inf", "--window", "6"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    const auto d = io::read_dist_csv(in);
    EXPECT_EQ(d.capacity(), 6u);
    const auto want = stationary_infinite(0.5, 6);
    EXPECT_NEAR(d(2, 3), want(2, 3), 1e-15);
}

TEST(Cli, KernelCsv)
{
    const auto r = run({"kernel", "--rho", "1", "--kmax", "2", "--jmax", "4", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    const auto rows = io::read_kernel_csv(in);
    ASSERT_EQ(rows.size(), 15u);
    EXPECT_DOUBLE_EQ(rows[5 + 4].value, -48.0);
    ScopedBackend b("rational");
    EXPECT_EQ(run({"kernel", "--rho", "1", "--kmax", "2", "--jmax", "4"}).out, r.out);
}

TEST(Cli, Bounds)
{
    const auto j = nlohmann::json::parse(run({"bounds", "--rho", "1", "--cap", "5", "--json"}).out);
    EXPECT_NEAR(j.at("lower").get<double>(), 55.0 / 10.5, 1e-13);
    EXPECT_LE(j.at("lower").get<double>(), j.at("mean_total").get<double>());
    EXPECT_LE(j.at("mean_total").get<double>(), j.at("upper").get<double>());
    const auto inf = nlohmann::json::parse(run({"bounds", "--rho", "0.5", "--cap", "inf", "--json"}).out);
    EXPECT_NEAR(inf.at("upper").get<double>(), 1.5, 1e-15);
    EXPECT_EQ(run({"bounds", "--rho", "1", "--cap", "inf"}).code, 1);
}

TEST(Cli, CompareCsvRoundTrips)
{
    const auto path = temp_file("fig.csv");
    const auto r = run({"compare", "--cap", "5", "--grid", "0.01:6:600", "--out", path.string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GE(j.at("mm1k_gap_sup").get<double>(), j.at("mm1k_gap_bracket_lower").get<double>());
    EXPECT_LE(j.at("mm1k_gap_sup").get<double>(), j.at("mm1k_gap_bracket_upper").get<double>());
    std::ifstream in(path);
    const auto rows = io::read_ratio_csv(in);
    ASSERT_EQ(rows.size(), 600u);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LT(rows[i - 1].rho, rows[i].rho);
    const auto report = uniform_gap_report(5, GridSpec{0.01, 6.0, 600});
    for (std::size_t i = 0; i < rows.size(); ++i)
        EXPECT_NEAR(rows[i].nuprime_ratio, report.rows[i].nuprime_ratio, 1e-14);
    std::filesystem::remove(path);

    const auto means = run({"compare", "--cap", "inf", "--grid", "0.1:0.9:9", "--figure", "means"});
    ASSERT_EQ(means.code, 0) << means.err;
    std::istringstream min(means.out);
    EXPECT_EQ(io::read_mean_ratio_csv(min).size(), 9u);
}

TEST(Cli, Cohen)
{
    const auto j = nlohmann::json::parse(run({"cohen", "--rho", "0.5", "--eval", "2", "--json"}).out);
    EXPECT_NEAR(j.at("A").get<double>(), 0.75, 1e-8);
    const auto c = run({"cohen", "--rho", "0.5", "--coeffs", "10"});
    ASSERT_EQ(c.code, 0);
    std::istringstream in(c.out);
    const auto coeffs = io::read_series_csv(in);
    ASSERT_EQ(coeffs.size(), 11u);
    EXPECT_NEAR(coeffs[3], boundary_coeffs_infinite(0.5, 10)[3], 1e-15);
}

TEST(Cli, AsymVerify)
{
    const auto r = run({"asym", "--lambda", "0.5", "--mu1", "1", "--mu2", "2", "--p1", "0.3", "--cap", "4", "--verify"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("relation_1"), std::string::npos);
    const auto csv = run({"asym", "--lambda", "0.5", "--mu1", "1", "--mu2", "2", "--p1", "0.3", "--cap", "2"});
    std::istringstream in(csv.out);
    EXPECT_NEAR(io::read_dist_csv(in).total_mass(), 1.0, 1e-12);
}

TEST(Cli, OracleCsv)
{
    const auto r = run({"oracle", "--rho", "1", "--cap", "1"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "j,k,prob\n0,0,0.2\n1,0,0.2\n0,1,0.2\n1,1,0.4\n");
    const auto a = run({"oracle", "--asym", "--lambda", "0.5", "--mu1", "1", "--mu2", "2", "--p1", "0.3", "--cap", "3"});
    ASSERT_EQ(a.code, 0) << a.err;
    std::istringstream in(a.out);
    EXPECT_NEAR(io::read_dist_csv(in).total_mass(), 1.0, 1e-12);
}

TEST(Cli, Simulate)
{
    const auto r = run({"simulate", "--rho", "1", "--cap", "2", "--events", "200000", "--seed", "3", "--replicas",
                        "2", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("ordering_violations"), 0);
    EXPECT_EQ(j.at("events"), 400000);
    EXPECT_NEAR(j.at("blocking_jsq").get<double>(), 4.0 / 17.0, 0.02);
    EXPECT_EQ(run({"simulate", "--rho", "1", "--cap", "2", "--events", "200000", "--seed", "3", "--replicas", "2",
                   "--json"})
                  .out,
              r.out);
}
