#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace opocomb;
namespace fs = std::filesystem;

namespace
{

struct Run
{
    int status = 0;
    std::string out, err;
};

Run run(std::initializer_list<std::string> args)
{
    std::vector<std::string> store{"opocomb"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &s : store)
        argv.push_back(s.c_str());
    std::ostringstream out, err;
    Run r;
    r.status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("opocomb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    std::string write(const std::string &name, const std::string &text) const
    {
        io::write_text(path(name), text);
        return path(name);
    }

    std::string nominal_params() const
    {
        return write("nominal.json", R"({"comb_fit": {"c1": 93, "c2": 0, "bandwidth_mhz": 7.8,
            "tau0_ps": 59000, "tau_opo_ps": 1630, "tau_d_ps": 220}})");
    }

private:
    fs::path dir_;
};

// Data rows of a table as comma-split fields.
std::vector<std::vector<std::string>> rows(const std::string &table)
{
    std::vector<std::vector<std::string>> out;
    std::istringstream is(table);
    std::string line;
    bool header = true;
    while (std::getline(is, line))
    {
        if (line.empty() || line[0] == '#')
            continue;
        if (header)
        {
            header = false;
            continue;
        }
        out.push_back(io::detail::split(line, ','));
    }
    return out;
}

} // namespace

TEST_F(CliTest, EvalCombAtPeak)
{
    const auto r = run({"eval", "--params", nominal_params(), "--grid", "58000:60000:1000"});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto t = rows(r.out);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[1][1], "59000.0000");
    EXPECT_NEAR(std::stod(t[1][2]), 93.0, 0.1);
}

TEST_F(CliTest, EvalAnalyticNeedsCavity)
{
    const auto r = run({"eval", "--params", nominal_params(), "--grid", "0:10:1", "--model", "analytic"});
    EXPECT_EQ(r.status, cli::invalid);
    EXPECT_NE(r.err.find("kind=invalid_input"), std::string::npos);
}

TEST_F(CliTest, EvalAnalytic)
{
    const auto p = write("cav.json", R"({"cavity": {"gamma1_mhz": 7.8, "gamma2_mhz": 0, "epsilon": 0.01,
        "bandwidth_mhz": 7.8, "fsr_mhz": 613.4969325153374, "n_modes": 0}})");
    const auto r = run({"eval", "--params", p, "--grid", "0:0:1"});
    ASSERT_EQ(r.status, 0) << r.err;
    const double bw = units::mhz_to_rad_per_s(7.8);
    EXPECT_NEAR(std::stod(rows(r.out)[0][2]), 1e-4 * (std::pow(0.02 / bw, 2) + 1.0), 1e-15);
}

TEST_F(CliTest, SimulateEmpty)
{
    const auto r = run({"simulate", "--pairs", "0", "--background", "0", "--seed", "5"});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto h = [&] {
        std::istringstream is(r.out);
        return io::read_histogram(is);
    }();
    EXPECT_EQ(h.total(), 0);
    EXPECT_EQ(h.size(), 20491u);
    EXPECT_EQ(h.acquisition.seed, std::optional<std::uint64_t>(5));
    EXPECT_EQ(h.masks.size(), 1u);
}

TEST_F(CliTest, SimulateIsReproducible)
{
    const auto a = run({"simulate", "--pairs", "20000", "--seed", "11", "--out", path("a.csv")});
    const auto b = run({"simulate", "--pairs", "20000", "--seed", "11", "--out", path("b.csv"), "--threads", "2"});
    ASSERT_EQ(a.status, 0) << a.err;
    ASSERT_EQ(b.status, 0) << b.err;
    EXPECT_EQ(io::read_text(path("a.csv")), io::read_text(path("b.csv")));
    const auto c = run({"simulate", "--pairs", "20000", "--seed", "12"});
    EXPECT_NE(c.out, io::read_text(path("a.csv")));
}

TEST_F(CliTest, SimulateThenFit)
{
    ASSERT_EQ(run({"simulate", "--params", nominal_params(), "--seed", "3", "--out", path("h.csv")}).status, 0);
    const auto r = run({"fit", "--hist", path("h.csv"), "--out", path("fit.json"), "--residuals", path("res.csv")});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto doc = io::read_params(path("fit.json"));
    ASSERT_TRUE(doc.comb_fit && doc.fit_result);
    EXPECT_TRUE(doc.fit_result->converged);
    const double bw = units::mhz_to_rad_per_s(7.8);
    EXPECT_NEAR(doc.comb_fit->bandwidth, bw, 0.05 * bw);
    EXPECT_NEAR(doc.comb_fit->tau_opo, 1.63e-9, 0.005 * 1.63e-9);
    EXPECT_NEAR(doc.comb_fit->tau_d, 220e-12, 22e-12);
    EXPECT_NEAR(doc.comb_fit->tau0, 59e-9, 4.88e-12);
    EXPECT_EQ(doc.fit_result->loss, Loss::poisson_weighted);

    const auto res = rows(io::read_text(path("res.csv")));
    EXPECT_EQ(res.size(), 20491u - 9222u);

    const auto plot = run({"export-plot", "--hist", path("h.csv"), "--params", path("fit.json")});
    ASSERT_EQ(plot.status, 0) << plot.err;
    EXPECT_EQ(rows(plot.out).size(), res.size());
}

TEST_F(CliTest, FitWithFrozenPedestalAndMask)
{
    ASSERT_EQ(run({"simulate", "--seed", "4", "--out", path("h.csv")}).status, 0);
    const auto r = run({"fit", "--hist", path("h.csv"), "--freeze", "c2", "--mask", "70000:71000", "--loss",
                        "least_squares"});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto doc = io::parse_params(r.out);
    EXPECT_EQ(doc.fit_result->loss, Loss::least_squares);
    EXPECT_EQ(doc.fit_result->stderr_estimates[1], 0.0);
    EXPECT_EQ(run({"fit", "--hist", path("h.csv"), "--freeze", "nonsense"}).status, cli::invalid);
}

TEST_F(CliTest, FilterReportsContrast)
{
    const auto r = run({"filter", "--grid", "0:200:1", "--weights-out", path("w.csv")});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(rows(r.out).size(), 201u);
    EXPECT_NE(r.out.find("# contrast_at_etalon_period = "), std::string::npos);
    const auto w = rows(io::read_text(path("w.csv")));
    EXPECT_EQ(w.size(), 401u);
    EXPECT_EQ(w[200][0], "0");
    EXPECT_EQ(w[200][2], "1");
}

TEST_F(CliTest, ErrorStatusesAreDistinct)
{
    const auto missing = run({"fit", "--hist", path("nope.csv")});
    EXPECT_EQ(missing.status, cli::io_failure);

    const auto bad = write("bad.csv", "# opocomb histogram v1\n# bin_width_ps = 4.88\n# origin_ps = 0\n"
                                      "bin_index,time_ps,count\n0,2.4400,-1\n");
    const auto parse = run({"fit", "--hist", bad});
    EXPECT_EQ(parse.status, cli::parse_failure);
    EXPECT_NE(parse.err.find("line 5"), std::string::npos);

    const auto ns = write("ns.csv", "# opocomb histogram v1\n# bin_width_ns = 0.00488\n# origin_ps = 0\n"
                                    "bin_index,time_ps,count\n0,2.4400,1\n");
    EXPECT_EQ(run({"fit", "--hist", ns}).status, cli::unit_failure);

    EXPECT_EQ(run({"eval", "--params", nominal_params(), "--grid", "5:1:1"}).status, cli::invalid);

    std::string flat = "# opocomb histogram v1\n# bin_width_ps = 4.88\n# origin_ps = 0\nbin_index,time_ps,count\n";
    for (int i = 0; i < 2000; ++i)
        flat += std::to_string(i) + "," + io::format_fixed((i + 0.5) * 4.88, 4) + ",10\n";
    const auto per = run({"fit", "--hist", write("flat.csv", flat)});
    EXPECT_EQ(per.status, cli::no_periodicity);
    EXPECT_NE(per.err.find("visible_bins=2000"), std::string::npos);

    EXPECT_EQ(run({"eval", "--bogus"}).status, cli::usage);
    EXPECT_EQ(run({}).status, cli::usage);
}

TEST_F(CliTest, HelpSucceeds)
{
    const auto r = run({"--help"});
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}
