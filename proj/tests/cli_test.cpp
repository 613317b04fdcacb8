#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "json.hpp"
#include "momcert/cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("moment_cert_test_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const auto path = dir_ / name;
        std::ofstream(path) << text;
        return path;
    }

    static std::string slurp(const fs::path& path) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    Invocation run(const std::string& args, const std::string& env = "") const {
        const auto out = dir_ / "stdout.txt";
        const std::string cmd = env + " " + MOMENT_CERT_BIN + " " + args + " > " + out.string() + " 2> " +
                                (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        Invocation inv;
        inv.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        inv.out = slurp(out);
        return inv;
    }

    Invocation run_config(const std::string& config, const std::string& extra = "", const std::string& env = "") {
        const auto path = write("config.json", config);
        return run("--config " + path.string() + " " + extra, env);
    }

    fs::path dir_;
};

const char* kLaplaceBound = R"({
  "command": "bound",
  "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 10}],
  "r_values": [2]
})";

// Every object carrying a "value" must carry a provenance tag.
void expect_tagged(const json& j, int& seen) {
    if (j.is_object()) {
        if (j.contains("value")) {
            ++seen;
            ASSERT_TRUE(j.contains("tag")) << j.dump();
            const auto tag = j.at("tag").get<std::string>();
            EXPECT_TRUE(tag == "exact" || tag == "quadrature" || tag == "mc" || tag == "interpolated") << tag;
            if (tag != "exact") EXPECT_TRUE(j.contains("error")) << j.dump();
        }
        for (const auto& [k, v] : j.items()) expect_tagged(v, seen);
    } else if (j.is_array()) {
        for (const auto& v : j) expect_tagged(v, seen);
    }
}

}  // namespace

TEST_F(CliTest, BoundWorkedInstance) {
    const auto inv = run_config(kLaplaceBound);
    ASSERT_EQ(inv.code, 0) << inv.out;
    const auto doc = json::parse(inv.out);
    EXPECT_EQ(doc.at("schema_version"), 1);
    bool found = false;
    for (const auto& row : doc.at("rows")) {
        if (row.at("statement_id") != "even_symmetric") continue;
        found = true;
        EXPECT_NEAR(row.at("lower").at("value").get<double>(), 3.9482, 1e-4);
        EXPECT_NEAR(row.at("upper").at("value").get<double>(), 6.1620, 1e-3);
        EXPECT_NEAR(row.at("ground").at("value").get<double>(), 4.2625, 1e-3);
        EXPECT_EQ(row.at("ground").at("tag"), "exact");
        EXPECT_EQ(row.at("verdict"), "PASS");
    }
    EXPECT_TRUE(found);
}

TEST_F(CliTest, BoundIncludesNonCertifyingRowsWithReasons) {
    const auto inv = run_config(R"({"command": "bound",
        "variables": [{"family": "symmetric_three_point", "b": 1, "q": 0.01, "count": 5}],
        "p_values": [3], "r_values": [2]})");
    ASSERT_EQ(inv.code, 0);
    const auto doc = json::parse(inv.out);
    int non_cert = 0;
    for (const auto& row : doc.at("rows")) {
        if (row.at("certifying")) continue;
        ++non_cert;
        EXPECT_TRUE(row.at("upper").is_null());
        bool reason = false;
        for (const auto& a : row.at("assumptions")) reason = reason || !a.at("satisfied").get<bool>();
        EXPECT_TRUE(reason) << row.dump();
    }
    EXPECT_GE(non_cert, 3);
}

TEST_F(CliTest, RowsAreOrdered) {
    const auto inv = run_config(R"({"command": "bound",
        "variables": [{"family": "gaussian", "sigma": 1, "count": 6}],
        "p_values": [4, 2.5, 3], "r_values": [3, 2]})");
    ASSERT_EQ(inv.code, 0);
    const auto rows = json::parse(inv.out).at("rows");
    ASSERT_GT(rows.size(), 5U);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto key = [](const json& r) {
            return std::tuple(r.at("statement_id").get<std::string>(), r.at("p").get<double>(),
                              r.at("r").is_null() ? 0 : r.at("r").get<int>(), r.at("n").get<std::size_t>());
        };
        EXPECT_LE(key(rows[i - 1]), key(rows[i]));
    }
}

TEST_F(CliTest, EveryNumericFieldIsTagged) {
    int seen = 0;
    for (const char* cfg : {kLaplaceBound,
                            R"({"command": "moments", "variables": [{"family": "uniform", "a": 1, "count": 3}],
                                "p_values": [2.5, 4, 5], "samples": 20000})",
                            R"({"command": "scan", "variables": [{"family": "gaussian", "sigma": 1}],
                                "p_values": [3, 4], "n_values": [4, 8]})",
                            R"({"command": "verify", "variables": [{"family": "uniform", "a": 1, "count": 4}],
                                "p_values": [5], "samples": 20000})"}) {
        const auto inv = run_config(cfg);
        ASSERT_EQ(inv.code, 0) << cfg;
        expect_tagged(json::parse(inv.out), seen);
    }
    EXPECT_GT(seen, 50);
}

TEST_F(CliTest, VerifyPassesAndGoldenRoundTrip) {
    const auto bound = run_config(kLaplaceBound);
    ASSERT_EQ(bound.code, 0);
    const auto golden = write("golden.json", bound.out);
    const auto cfg = std::string(R"({"command": "verify",
        "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 10}],
        "r_values": [2], "golden": ")") + golden.string() + "\"}";
    EXPECT_EQ(run_config(cfg).code, 0);
}

TEST_F(CliTest, CorruptedGoldenFails) {
    auto doc = json::parse(run_config(kLaplaceBound).out);
    for (auto& row : doc.at("rows"))
        if (row.at("statement_id") == "even_symmetric")
            row.at("upper").at("value") = row.at("upper").at("value").get<double>() - 10.0;
    const auto golden = write("golden.json", doc.dump());
    const auto cfg = std::string(R"({"command": "verify",
        "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 10}],
        "r_values": [2], "golden": ")") + golden.string() + "\"}";
    const auto inv = run_config(cfg);
    EXPECT_EQ(inv.code, 1);
    const auto out = json::parse(inv.out);
    bool failed = false;
    for (const auto& row : out.at("rows")) failed = failed || row.at("verdict") == "FAIL";
    EXPECT_TRUE(failed);

    write("broken.json", "{\"rows\": [");
    const auto cfg2 = std::string(R"({"command": "verify",
        "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 10}],
        "r_values": [2], "golden": ")") + (dir_ / "broken.json").string() + "\"}";
    EXPECT_NE(run_config(cfg2).code, 0);
}

TEST_F(CliTest, ScanRadiusScalesAsInverseRootN) {
    const auto inv = run_config(R"({"command": "scan",
        "variables": [{"family": "symmetric_exponential", "sigma": 1}],
        "p_values": [4], "n_values": [4, 16, 64, 256]})");
    ASSERT_EQ(inv.code, 0);
    int rows = 0;
    const auto doc = json::parse(inv.out);
    for (const auto& row : doc.at("rows")) {
        if (row.at("statement_id") != "even_symmetric") continue;
        ++rows;
        const double n = row.at("n").get<double>();
        const double radius = row.at("radius").at("value").get<double>();
        EXPECT_NEAR(radius * std::sqrt(n), 2.0, 2e-12);
        EXPECT_LT(row.at("deviation").at("value").get<double>(), radius);
        EXPECT_TRUE(row.at("within_radius").get<bool>());
    }
    EXPECT_EQ(rows, 4);
}

TEST_F(CliTest, CheckLemmasPass) {
    const auto inv = run_config(R"({"command": "check-lemmas",
        "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 3},
                      {"family": "uniform", "a": 0.8, "count": 2},
                      {"family": "rademacher", "sigma": 0.5}],
        "r_values": [2, 3]})");
    EXPECT_EQ(inv.code, 0) << inv.out;
    const auto rows = json::parse(inv.out).at("rows");
    std::set<std::string> checks;
    for (const auto& row : rows) {
        checks.insert(row.at("check").get<std::string>());
        EXPECT_EQ(row.at("violations"), 0) << row.dump();
    }
    for (const char* c : {"cosine_bounds", "charfn_inequality", "rademacher_consecutive_moments",
                          "count_support_compositions", "count_no_singleton_compositions", "tail_symmetric",
                          "tail_centered"})
        EXPECT_TRUE(checks.count(c)) << c;
}

TEST_F(CliTest, MomentsEngines) {
    const auto inv = run_config(R"({"command": "moments",
        "variables": [{"family": "gaussian", "sigma": 1}], "p_values": [3, 4], "samples": 100000})");
    ASSERT_EQ(inv.code, 0);
    std::map<std::pair<std::string, double>, double> got;
    const auto doc = json::parse(inv.out);
    for (const auto& row : doc.at("rows"))
        got[{row.at("engine").get<std::string>(), row.at("p").get<double>()}] = row.at("moment").at("value").get<double>();
    EXPECT_NEAR((got[{"characteristic_function_quadrature", 3.0}]), 2.0 * std::sqrt(2.0 / M_PI), 1e-8);
    EXPECT_DOUBLE_EQ((got[{"even_moment_recursion", 4.0}]), 3.0);
    EXPECT_TRUE(got.count({"monte_carlo", 3.0}));
}

TEST_F(CliTest, ByteIdenticalAndThreadIndependent) {
    const char* cfg = R"({"command": "verify",
        "variables": [{"family": "symmetric_exponential", "sigma": 1, "count": 6},
                      {"family": "uniform", "a": 2}],
        "p_values": [2.5, 5], "r_values": [3], "samples": 20000, "seed": 7})";
    const auto a = run_config(cfg, "", "MOMENT_CERT_THREADS=1");
    const auto b = run_config(cfg, "", "MOMENT_CERT_THREADS=3");
    const auto c = run_config(cfg, "", "MOMENT_CERT_THREADS=3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(b.out, c.out);
    const auto d = run_config(cfg, "--seed 8");
    EXPECT_NE(a.out, d.out);
}

TEST_F(CliTest, FormatAndOutputFlags) {
    const auto path = write("config.json", kLaplaceBound);
    const auto csv = run("--config " + path.string() + " --format csv");
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(csv.out.rfind("center,", 0), 0U) << csv.out.substr(0, 80);
    EXPECT_NE(csv.out.find("even_symmetric"), std::string::npos);
    const auto out = dir_ / "report.json";
    const auto inv = run("--config " + path.string() + " --out " + out.string());
    ASSERT_EQ(inv.code, 0);
    EXPECT_TRUE(inv.out.empty());
    EXPECT_EQ(json::parse(slurp(out)).at("command"), "bound");
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(run_config("{not json").code, 2);
    EXPECT_EQ(run_config(R"({"command": "bound", "variables": [], "r_values": [2]})").code, 2);
    EXPECT_EQ(run_config(R"({"command": "bound", "variables": [{"family": "cauchy"}], "r_values": [2]})").code, 2);
    EXPECT_EQ(run_config(R"({"command": "bound", "variables": [{"family": "gaussian", "sigma": -1}], "r_values": [2]})").code, 2);
    EXPECT_EQ(run_config(R"({"command": "moments", "variables": [{"family": "gaussian", "sigma": 1}]})").code, 2);
    EXPECT_EQ(run_config(R"({"command": "bound", "variables": [{"family": "gaussian", "sigma": 1}], "r_values": [2], "tol": 0})").code, 2);
    EXPECT_EQ(run_config(R"({"command": "launch", "variables": [{"family": "gaussian", "sigma": 1}]})").code, 2);
    EXPECT_EQ(run("--config " + (dir_ / "missing.json").string()).code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run_config(kLaplaceBound, "--format xml").code, 2);
}

TEST(CliLibrary, ParseRawMomentVariables) {
    const auto cfg = momcert::cli::parse_config_text(R"({"command": "bound",
        "variables": [{"family": "raw_moments", "moments": [1, 0, 1, 1, 3], "count": 10},
                      {"family": "raw_moments", "atoms": {"values": [-1, 2], "probs": [0.6666666666666666, 0.3333333333333334]},
                       "max_order": 6}],
        "r_values": [2]})");
    const auto specs = cfg.expanded();
    ASSERT_EQ(specs.size(), 11U);
    EXPECT_TRUE(specs[0].is_raw());
    EXPECT_TRUE(specs[0].centered());
    EXPECT_FALSE(specs[0].symmetric());
    EXPECT_TRUE(specs[10].centered());
    const auto out = momcert::cli::run(cfg);
    EXPECT_EQ(out.code, momcert::cli::ExitCode::Ok);
    EXPECT_NE(out.document.find("even_centered"), std::string::npos);
}

TEST(CliLibrary, RawProfilesWithoutOracleAreSurfaced) {
    const auto cfg = momcert::cli::parse_config_text(R"({"command": "verify",
        "variables": [{"family": "raw_moments", "moments": [1, 0, 1, 0, 3], "count": 10}],
        "p_values": [3]})");
    const auto out = momcert::cli::run(cfg);
    EXPECT_NE(out.document.find("oracle_refusal"), std::string::npos);
}
