#include <doctest.h>

#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "randinf/errors.hpp"
#include "randinf/estimators.hpp"
#include "randinf/harness.hpp"
#include "randinf/inference.hpp"
#include "randinf/io.hpp"
#include "randinf/population.hpp"
#include "randinf/rng.hpp"

using namespace randinf;
namespace fs = std::filesystem;

namespace {

/// Fresh empty directory under the system temp root.
fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("randinf_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    REQUIRE(out.good());
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Run the CLI binary; returns its exit code. Output is silenced.
int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(RANDINF_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

const char* kFourUnitCsv = "yobs,t\n0,1\n1,1\n2,0\n3,0\n";

} // namespace

TEST_CASE("doubles survive a text round trip bit for bit") {
    auto g = rng::stream(211, 0);
    std::vector<double> samples = {0.0,      -0.0, 1.0 / 3.0,       -2.0,
                                   1e-300,   5e300, 0.1,            123456789.123456789,
                                   6.25e-2, -0.0036714285714285716};
    for (int i = 0; i < 200; ++i) samples.push_back(g.normal() * std::pow(10, g.below(40) * 1.0 - 20));
    for (double v : samples) {
        const std::string s = format_double(v);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
        // -0 keeps its sign bit through the text form
        if (v == 0) CHECK(std::signbit(back) == std::signbit(v));
    }
}

TEST_CASE("observed-data CSV reads values, labels, and line diagnostics") {
    std::istringstream in("yobs,t\n0.5,1\n\n-1.25,0\n2,1\n");
    const auto d = read_observed_csv(in);
    CHECK(d.y == std::vector<double>{0.5, -1.25, 2});
    CHECK(d.t == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(d.n1 == 2);
    CHECK(d.n0 == 1);

    // windows line endings are tolerated
    std::istringstream crlf("yobs,t\r\n1,1\r\n2,0\r\n");
    CHECK(read_observed_csv(crlf).y == std::vector<double>{1, 2});

    auto expect_line = [](const std::string& text, std::size_t line) {
        std::istringstream bad(text);
        try {
            (void)read_observed_csv(bad);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == line);
        }
    };
    expect_line("wrong,header\n1,1\n2,0\n", 1);
    expect_line("yobs,t\n1,1\noops,0\n", 3);
    expect_line("yobs,t\n1,1\n2,0,9\n", 3);  // wrong field count
    expect_line("yobs,t\n1,1\n2,7\n", 3);    // label out of range
    expect_line("yobs,t\n1,1\n", 2);         // too few rows: blames the last line seen
}

TEST_CASE("potential and pair CSVs round-trip") {
    std::istringstream in("y1,y0\n1,0\n2,1\n3,1\n4,2\n");
    const auto pt = read_potential_csv(in);
    const auto s = summarize_population(pt);
    CHECK(s.tau == doctest::Approx(1.5).epsilon(1e-15));

    std::istringstream pin("y11_t,y11_c,y12_t,y12_c\n3,1,5,2\n0,-1,4,4\n");
    const auto mt = read_pairs_csv(pin);
    PairAssignment a;
    a.first_treated = {1, 0};
    const auto d = observe_pairs(mt, a);
    CHECK(d.first == std::vector<double>{3, -1});
    CHECK(d.second == std::vector<double>{2, 4});
}

TEST_CASE("factorial CSV columns are permuted into canonical order") {
    const auto dir = scratch_dir("factorial_io");
    // columns supplied in scrambled order; sidecar labels each column
    write_file(dir / "pot.csv",
               "y_1,y_2,y_3,y_4\n"
               "0,5,3,2\n0.5,5.5,3.5,2.5\n1,6,4,3\n1.5,6.5,4.5,3.5\n");
    write_file(dir / "pot.json",
               R"({"k":2,"r":1,"columns":[[-1,-1],[1,1],[1,-1],[-1,1]]})");
    const auto tab = read_factorial_csv_file((dir / "pot.csv").string(),
                                             (dir / "pot.json").string());
    // canonical means: (+,+)=col2, (+,-)=col3, (-,+)=col4, (-,-)=col1
    const auto means = tab.cell_population_means();
    REQUIRE(means.size() == 4);
    CHECK(means[0] == doctest::Approx(5.75).epsilon(1e-15));
    CHECK(means[1] == doctest::Approx(3.75).epsilon(1e-15));
    CHECK(means[2] == doctest::Approx(2.75).epsilon(1e-15));
    CHECK(means[3] == doctest::Approx(0.75).epsilon(1e-15));

    // duplicate cell labels are rejected
    write_file(dir / "dup.json",
               R"({"k":2,"r":1,"columns":[[1,1],[1,1],[1,-1],[-1,-1]]})");
    CHECK_THROWS_AS((void)read_factorial_csv_file((dir / "pot.csv").string(),
                                                  (dir / "dup.json").string()),
                    parse_error);
    // row count must equal r * 2^k
    write_file(dir / "shape.json", R"({"k":2,"r":3})");
    CHECK_THROWS_AS((void)read_factorial_csv_file((dir / "pot.csv").string(),
                                                  (dir / "shape.json").string()),
                    parse_error);
}

TEST_CASE("report writers emit exact decimal forms") {
    const auto d = make_observed({0, 1, 2, 3}, {1, 1, 0, 0});
    std::ostringstream out;
    write_variance_report_csv(out, variance_report(d));
    CHECK(out.str() ==
          "tau_hat,v_neyman,v_fisher,v_ols,v_hw,v_score,v_improved,s1sq,s0sq,ssq\n"
          "-2,0.5,1.6666666666666667,0.5,0.25,1.25,0.5,0.5,0.5,1.6666666666666667\n");

    std::ostringstream tout;
    write_test_results_csv(tout, {frt_exact(d, frt_statistic::diff_in_means)});
    CHECK(tout.str() ==
          "method,statistic,p_value,m_draws\n"
          "frt_exact,-2,0.33333333333333331,0\n");

    std::ostringstream bout;
    write_binary_report_csv(bout, binary_report(make_observed({1, 1, 0, 1, 0, 0},
                                                              {1, 1, 1, 0, 0, 0})));
    const auto line = bout.str();
    CHECK(line.find("p1_hat,p0_hat,v_unpooled,v_pooled,gap") == 0);
    CHECK(line.find("0.66666666666666663,0.33333333333333331") != std::string::npos);
}

TEST_CASE("analyze subcommand reproduces in-process numbers bit for bit") {
    const auto dir = scratch_dir("analyze");
    write_file(dir / "data.csv", kFourUnitCsv);
    const int rc = run_cli("analyze --input " + (dir / "data.csv").string() +
                           " --out " + dir.string() + " --exact");
    CHECK(rc == 0);

    // the CSV written by the tool matches the library's own serialization
    const auto d = make_observed({0, 1, 2, 3}, {1, 1, 0, 0});
    std::ostringstream want;
    write_variance_report_csv(want, variance_report(d));
    CHECK(read_file(dir / "variance_report.csv") == want.str());

    const auto tests_txt = read_file(dir / "tests.csv");
    CHECK(tests_txt.find("neyman,-2.8284271247461898,0.0046777349810472654,0") !=
          std::string::npos);
    CHECK(tests_txt.find("frt_exact,-2,0.33333333333333331,0") != std::string::npos);
    CHECK(tests_txt.find("score,-1.7888543819998317,") != std::string::npos);
    CHECK(tests_txt.find("wald_hw,-4,") != std::string::npos);

    const auto iv_txt = read_file(dir / "intervals.csv");
    CHECK(iv_txt.find("neyman,") != std::string::npos);
    CHECK(iv_txt.find("fiducial,") != std::string::npos);

    // proportion report on genuinely binary data
    write_file(dir / "bin.csv", "yobs,t\n1,1\n1,1\n0,1\n1,0\n0,0\n0,0\n");
    CHECK(run_cli("analyze --input " + (dir / "bin.csv").string() + " --out " +
                  dir.string() + " --exact --binary") == 0);
    CHECK(fs::exists(dir / "binary.csv"));
    // asking for it on non-binary outcomes is a data error
    CHECK(run_cli("analyze --input " + (dir / "data.csv").string() + " --out " +
                  dir.string() + " --exact --binary") == 3);
}

TEST_CASE("CLI exit codes distinguish parse, data, and usage failures") {
    const auto dir = scratch_dir("exitcodes");
    write_file(dir / "broken.csv", "yobs,t\n1,1\nbad,0\n");
    write_file(dir / "onearm.csv", "yobs,t\n1,1\n2,1\n3,1\n");
    write_file(dir / "ok.csv", kFourUnitCsv);

    CHECK(run_cli("analyze --input " + (dir / "broken.csv").string() + " --out " +
                  dir.string()) == 2);
    CHECK(run_cli("analyze --input " + (dir / "onearm.csv").string() + " --out " +
                  dir.string()) == 3);
    CHECK(run_cli("analyze") == 64);                      // missing required option
    CHECK(run_cli("simulate --design crd") == 64);        // missing required seed
    CHECK(run_cli("nonsense") == 64);                     // unknown subcommand
    CHECK(run_cli("analyze --input " + (dir / "ok.csv").string() + " --out " +
                  dir.string() + " --statistic bogus") == 64);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("simulate subcommand is reproducible across worker counts") {
    const auto dir1 = scratch_dir("sim_w1");
    const auto dir4 = scratch_dir("sim_w4");
    const std::string base =
        "simulate --design crd --n 24 --n1 12 --mu1 0.3 --var1 0.25 --reps 25 "
        "--m 400 --seed 2024 ";
    CHECK(run_cli(base + "--workers 1 --out " + dir1.string()) == 0);
    CHECK(run_cli(base + "--workers 4 --out " + dir4.string()) == 0);
    for (const char* name : {"rejections.csv", "variances.csv", "summary.json"}) {
        CAPTURE(name);
        CHECK(read_file(dir1 / name) == read_file(dir4 / name));
    }

    // summary.json carries the config echo and a coherent table
    const auto j = nlohmann::json::parse(read_file(dir1 / "summary.json"));
    CHECK(j["config"]["design"] == "crd");
    CHECK(j["config"]["n"] == 24);
    CHECK(j["config"]["master_seed"] == 2024);
    const auto t = j["table"];
    const std::uint64_t total = t["keep_keep"].get<std::uint64_t>() +
                                t["keep_reject"].get<std::uint64_t>() +
                                t["reject_keep"].get<std::uint64_t>() +
                                t["reject_reject"].get<std::uint64_t>();
    CHECK(total + j["degenerate"].get<std::uint64_t>() == 25);
}

TEST_CASE("simulate accepts a JSON config with flag overrides") {
    const auto dir = scratch_dir("sim_cfg");
    write_file(dir / "cfg.json",
               R"({"design":"crd","n":24,"n1":12,"mu1":0.3,"var1":0.25,)"
               R"("reps":25,"m":400,"workers":1})");
    CHECK(run_cli("simulate --config " + (dir / "cfg.json").string() +
                  " --seed 2024 --out " + dir.string()) == 0);

    // identical to the all-flags invocation above given the same seed
    const auto dirf = scratch_dir("sim_cfg_flags");
    CHECK(run_cli("simulate --design crd --n 24 --n1 12 --mu1 0.3 --var1 0.25 "
                  "--reps 25 --m 400 --workers 1 --seed 2024 --out " +
                  dirf.string()) == 0);
    CHECK(read_file(dir / "rejections.csv") == read_file(dirf / "rejections.csv"));

    // an explicit flag beats the config file: reps drops to 10
    const auto dir10 = scratch_dir("sim_cfg_override");
    CHECK(run_cli("simulate --config " + (dir / "cfg.json").string() +
                  " --reps 10 --seed 2024 --out " + dir10.string()) == 0);
    const auto j = nlohmann::json::parse(read_file(dir10 / "summary.json"));
    CHECK(j["config"]["reps"] == 10);

    // malformed config maps to the input-error exit
    write_file(dir / "bad.json", "{not json");
    CHECK(run_cli("simulate --config " + (dir / "bad.json").string() +
                  " --seed 1 --out " + dir.string()) == 2);
}

TEST_CASE("gap-check and fiducial subcommands write their reports") {
    const auto dir = scratch_dir("gap_fid");
    CHECK(run_cli("gap-check --design crd --n 30 --n1 20 --mu1 0.4 --var1 0.25 "
                  "--exact-moments --reps 400 --seed 5 --out " +
                  dir.string()) == 0);
    const auto gap_txt = read_file(dir / "gap.csv");
    CHECK(gap_txt.find("predicted,empirical_mean,relative_deviation,reps") == 0);
    CHECK(gap_txt.find("400") != std::string::npos);

    write_file(dir / "data.csv", kFourUnitCsv);
    CHECK(run_cli("fiducial --input " + (dir / "data.csv").string() + " --exact --out " +
                  dir.string()) == 0);
    const auto iv = read_file(dir / "intervals.csv");
    CHECK(iv.find("method,level,lower,upper") == 0);
    CHECK(iv.find("fiducial,") != std::string::npos);

    // matched pairs are not a gap-check design
    CHECK(run_cli("gap-check --design pairs --seed 1") == 64);
}

TEST_CASE("scenario summary JSON echoes population moments for two-arm runs") {
    ScenarioConfig cfg;
    cfg.design = design_kind::crd;
    cfg.n = 16;
    cfg.n1 = 8;
    cfg.reps = 5;
    cfg.m = 100;
    cfg.master_seed = 9;
    cfg.workers = 1;
    const auto res = run_scenario(cfg);
    const auto j = nlohmann::json::parse(scenario_summary_json(cfg, res));
    CHECK(j.contains("population"));
    CHECK(j["population"]["tau"].get<double>() ==
          doctest::Approx(res.population_summary.tau).epsilon(1e-12));
    CHECK(j["reps_used"].get<std::size_t>() == res.reps_used);
}
