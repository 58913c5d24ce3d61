// Command-line front end: analyze a dataset, simulate a scenario, rerun the
// bundled demonstration scenarios, check the variance-gap prediction, or
// invert the randomization test into an interval.
//
// Exit codes: 0 success; 1 demonstration signature failed; 2 malformed
// input/config file; 3 invalid or degenerate data; 64 usage error;
// 70 unexpected internal error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "randinf/defaults.hpp"
#include "randinf/errors.hpp"
#include "randinf/estimators.hpp"
#include "randinf/harness.hpp"
#include "randinf/inference.hpp"
#include "randinf/io.hpp"
#include "randinf/population.hpp"
#include "randinf/reference.hpp"
#include "randinf/regression.hpp"
#include "randinf/rng.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kSignatureExit = 1;
constexpr int kParseExit = 2;
constexpr int kDataExit = 3;
constexpr int kUsageExit = 64;
constexpr int kInternalExit = 70;

std::ofstream open_output(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw randinf::data_error("cannot create output directory " + dir);
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p);
    if (!out) throw randinf::data_error("cannot open output file " + p.string());
    return out;
}

randinf::frt_statistic parse_statistic(const std::string& s) {
    if (s == "diff") return randinf::frt_statistic::diff_in_means;
    if (s == "var-ratio") return randinf::frt_statistic::variance_ratio;
    throw std::invalid_argument("unknown statistic '" + s + "'");
}

randinf::design_kind parse_design(const std::string& s) {
    if (s == "crd") return randinf::design_kind::crd;
    if (s == "pairs" || s == "matched_pairs") return randinf::design_kind::matched_pairs;
    if (s == "factorial") return randinf::design_kind::factorial;
    throw std::invalid_argument("unknown design '" + s + "'");
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeOpts {
    std::string input;
    std::string out_dir = ".";
    std::uint64_t m = randinf::defaults::mc_draws;
    std::uint64_t fiducial_m = 20000;
    double alpha = randinf::defaults::alpha;
    double level = 0.95;
    std::uint64_t seed = 0;
    std::string statistic = "diff";
    bool binary = false;
    bool exact = false;
    bool add_one = false;
};

int run_analyze(const AnalyzeOpts& o) {
    const auto d = randinf::read_observed_csv_file(o.input);
    const auto vr = randinf::variance_report(d);
    {
        auto f = open_output(o.out_dir, "variance_report.csv");
        randinf::write_variance_report_csv(f, vr);
    }

    std::vector<randinf::TestResult> tests;
    tests.push_back(randinf::neyman_test(vr));
    const auto stat = parse_statistic(o.statistic);
    if (o.exact) {
        tests.push_back(randinf::frt_exact(d, stat));
    } else {
        auto g = randinf::rng::stream(o.seed, 1);
        randinf::frt_options fo;
        fo.add_one = o.add_one;
        tests.push_back(randinf::frt_monte_carlo(d, stat, o.m, g, fo));
    }
    tests.push_back(randinf::score_test(d));
    tests.push_back(randinf::wald_hw_test(randinf::ols_fit(d), d));
    {
        auto f = open_output(o.out_dir, "tests.csv");
        randinf::write_test_results_csv(f, tests);
    }

    std::vector<randinf::IntervalResult> intervals;
    intervals.push_back(randinf::neyman_interval(vr, o.level));
    {
        auto g = randinf::rng::stream(o.seed, 2);
        randinf::fiducial_options fopt;
        fopt.exact = o.exact;
        fopt.add_one = o.add_one;
        intervals.push_back(randinf::fiducial_interval(d, o.level, o.fiducial_m, g, fopt));
    }
    {
        auto f = open_output(o.out_dir, "intervals.csv");
        randinf::write_interval_results_csv(f, intervals);
    }

    if (o.binary) {
        auto f = open_output(o.out_dir, "binary.csv");
        randinf::write_binary_report_csv(f, randinf::binary_report(d));
    }

    std::printf("units: %zu (treated %zu, control %zu)\n", d.size(), d.n1, d.n0);
    std::printf("mean difference: %.6g\n", vr.tau_hat);
    std::printf("tests (alpha = %g):\n", o.alpha);
    for (const auto& t : tests) {
        std::printf("  %-16s stat=%-12.6g p=%-12.6g %s%s\n",
                    randinf::method_name(t.method), t.statistic, t.p_value,
                    t.reject_at(o.alpha) ? "reject" : "keep",
                    t.degenerate ? " (degenerate)" : "");
    }
    std::printf("intervals (level = %g):\n", o.level);
    for (const auto& iv : intervals) {
        std::printf("  %-16s [%.6g, %.6g]%s%s\n",
                    randinf::interval_method_name(iv.method), iv.lower, iv.upper,
                    iv.truncated ? " (truncated)" : "",
                    iv.hull_violation ? " (non-contiguous acceptance)" : "");
    }
    std::printf("wrote variance_report.csv, tests.csv, intervals.csv%s to %s\n",
                o.binary ? ", binary.csv" : "", o.out_dir.c_str());
    return kOk;
}

// --------------------------------------------------------------- simulate --

void apply_config_json(const std::string& path, randinf::ScenarioConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw randinf::parse_error("cannot open config " + path, 0);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw randinf::parse_error(std::string("config JSON: ") + e.what(), 0);
    }
    try {
        if (j.contains("design")) cfg.design = parse_design(j["design"].get<std::string>());
        if (j.contains("n")) cfg.n = j["n"].get<std::size_t>();
        if (j.contains("n1")) cfg.n1 = j["n1"].get<std::size_t>();
        if (j.contains("mu1")) cfg.mu1 = j["mu1"].get<double>();
        if (j.contains("var1")) cfg.var1 = j["var1"].get<double>();
        if (j.contains("mu0")) cfg.mu0 = j["mu0"].get<double>();
        if (j.contains("var0")) cfg.var0 = j["var0"].get<double>();
        if (j.contains("exact_moments")) cfg.exact_moments = j["exact_moments"].get<bool>();
        if (j.contains("n_pairs")) cfg.n_pairs = j["n_pairs"].get<std::size_t>();
        if (j.contains("k")) cfg.k = j["k"].get<int>();
        if (j.contains("r")) cfg.r = j["r"].get<std::size_t>();
        if (j.contains("cell_means"))
            cfg.cell_means = j["cell_means"].get<std::vector<double>>();
        if (j.contains("cell_sd")) cfg.cell_sd = j["cell_sd"].get<double>();
        if (j.contains("reps")) cfg.reps = j["reps"].get<std::size_t>();
        if (j.contains("m")) cfg.m = j["m"].get<std::uint64_t>();
        if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
        if (j.contains("statistic"))
            cfg.statistic = parse_statistic(j["statistic"].get<std::string>());
        if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("workers")) cfg.workers = j["workers"].get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        throw randinf::parse_error("config " + path + ": " + e.what(), 0);
    }
}

void write_scenario_outputs(const std::string& dir, const randinf::ScenarioConfig& cfg,
                            const randinf::ScenarioResult& res) {
    {
        auto f = open_output(dir, "rejections.csv");
        randinf::write_rejections_csv(f, res);
    }
    {
        auto f = open_output(dir, "variances.csv");
        randinf::write_variance_scatter_csv(f, res);
    }
    {
        auto f = open_output(dir, "summary.json");
        f << randinf::scenario_summary_json(cfg, res);
    }
}

void print_scenario_summary(const randinf::ScenarioResult& res) {
    std::printf("replicates used: %zu (degenerate skipped: %llu)\n", res.reps_used,
                static_cast<unsigned long long>(res.degenerate));
    std::printf("%-18s %14s %14s\n", "", "rand. keep", "rand. reject");
    std::printf("%-18s %14llu %14llu\n", "normal keep",
                static_cast<unsigned long long>(res.table.keep_keep),
                static_cast<unsigned long long>(res.table.keep_reject));
    std::printf("%-18s %14llu %14llu\n", "normal reject",
                static_cast<unsigned long long>(res.table.reject_keep),
                static_cast<unsigned long long>(res.table.reject_reject));
    std::printf("normal-test rejection rate:        %.4f (se %.4f)\n", res.rate_neyman,
                res.se_neyman);
    std::printf("randomization-test rejection rate: %.4f (se %.4f)\n", res.rate_fisher,
                res.se_fisher);
    std::printf("mean variance estimates: two-sample %.6g, pooled-route %.6g\n",
                res.mean_v_neyman, res.mean_v_fisher);
}

// ---------------------------------------------------------------- fiducial --

struct FiducialOpts {
    std::string input;
    std::string out_dir = ".";
    double level = 0.95;
    std::uint64_t m = 20000;
    std::uint64_t seed = 0;
    bool exact = false;
    bool add_one = false;
};

int run_fiducial(const FiducialOpts& o) {
    const auto d = randinf::read_observed_csv_file(o.input);
    const auto vr = randinf::variance_report(d);

    std::vector<randinf::IntervalResult> intervals;
    intervals.push_back(randinf::neyman_interval(vr, o.level));
    auto g = randinf::rng::stream(o.seed, 2);
    randinf::fiducial_options fopt;
    fopt.exact = o.exact;
    fopt.add_one = o.add_one;
    intervals.push_back(randinf::fiducial_interval(d, o.level, o.m, g, fopt));
    {
        auto f = open_output(o.out_dir, "intervals.csv");
        randinf::write_interval_results_csv(f, intervals);
    }

    for (const auto& iv : intervals) {
        std::printf("%-10s level %g: [%.8g, %.8g] width %.8g%s%s%s\n",
                    randinf::interval_method_name(iv.method), iv.level, iv.lower,
                    iv.upper, iv.width(), iv.truncated ? " (truncated)" : "",
                    iv.hull_violation ? " (non-contiguous acceptance)" : "",
                    iv.empty ? " (empty)" : "");
    }
    std::printf("wrote intervals.csv to %s\n", o.out_dir.c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-population randomization inference for two-arm, matched-pair, "
                 "and balanced factorial experiments"};
    app.require_subcommand(1);

    // analyze ---------------------------------------------------------------
    AnalyzeOpts an;
    auto* analyze = app.add_subcommand(
        "analyze", "Estimates, tests, and intervals for one observed dataset");
    analyze->add_option("--input", an.input, "CSV with header yobs,t")->required();
    analyze->add_option("--out", an.out_dir, "Output directory (default .)");
    analyze->add_option("--m", an.m, "Randomization draws for the Monte Carlo test");
    analyze->add_option("--fiducial-m", an.fiducial_m,
                        "Randomization draws for the interval inversion");
    analyze->add_option("--alpha", an.alpha, "Test level for the printed verdicts");
    analyze->add_option("--level", an.level, "Interval coverage level");
    analyze->add_option("--seed", an.seed, "Master seed (default 0)");
    analyze->add_option("--statistic", an.statistic, "diff or var-ratio")
        ->check(CLI::IsMember({"diff", "var-ratio"}));
    analyze->add_flag("--binary", an.binary, "Also write proportion-based report");
    analyze->add_flag("--exact", an.exact,
                      "Enumerate all assignments instead of sampling");
    analyze->add_flag("--add-one", an.add_one,
                      "Fold the observed assignment into Monte Carlo tallies");

    // simulate --------------------------------------------------------------
    randinf::ScenarioConfig sim_cfg;
    std::string sim_out = ".", sim_config_path, sim_design = "crd", sim_stat = "diff";
    std::vector<double> sim_cell_means;
    std::uint64_t sim_seed = 0;
    auto* simulate = app.add_subcommand(
        "simulate", "Replicate a design many times and tabulate test agreement");
    simulate->add_option("--config", sim_config_path,
                         "JSON scenario config (explicit flags win)");
    simulate->add_option("--out", sim_out, "Output directory (default .)");
    simulate->add_option("--design", sim_design, "crd, pairs, or factorial")
        ->check(CLI::IsMember({"crd", "pairs", "factorial"}));
    simulate->add_option("--n", sim_cfg.n, "Units (crd)");
    simulate->add_option("--n1", sim_cfg.n1, "Treated units (crd)");
    simulate->add_option("--mu1", sim_cfg.mu1, "Treated potential mean");
    simulate->add_option("--var1", sim_cfg.var1, "Treated potential variance");
    simulate->add_option("--mu0", sim_cfg.mu0, "Control potential mean");
    simulate->add_option("--var0", sim_cfg.var0, "Control potential variance");
    simulate->add_flag("--exact-moments", "Rescale the frozen draw to exact moments");
    simulate->add_option("--pairs", sim_cfg.n_pairs, "Pair count (pairs design)");
    simulate->add_option("--k", sim_cfg.k, "Factor count (factorial)");
    simulate->add_option("--r", sim_cfg.r, "Units per cell (factorial)");
    simulate->add_option("--cell-means", sim_cell_means,
                         "2^k canonical cell means (factorial)")
        ->delimiter(',');
    simulate->add_option("--cell-sd", sim_cfg.cell_sd, "Cell noise sd (factorial)");
    simulate->add_option("--reps", sim_cfg.reps, "Replicates");
    simulate->add_option("--m", sim_cfg.m, "Randomization draws per replicate");
    simulate->add_option("--alpha", sim_cfg.alpha, "Rejection level");
    simulate->add_option("--statistic", sim_stat, "diff or var-ratio")
        ->check(CLI::IsMember({"diff", "var-ratio"}));
    simulate->add_option("--seed", sim_seed, "Master seed")->required();
    simulate->add_option("--workers", sim_cfg.workers, "Thread count (0 = all cores)");

    // replicate-tables ------------------------------------------------------
    int rep_example = 0;
    std::string rep_out = ".";
    std::uint64_t rep_seed = 0, rep_m = 0;
    std::size_t rep_reps = 0;
    unsigned rep_workers = 0;
    auto* replicate = app.add_subcommand(
        "replicate-tables",
        "Rerun a bundled demonstration scenario and verify its signature");
    replicate->add_option("--example", rep_example, "1 or 2")
        ->required()
        ->check(CLI::Range(1, 2));
    replicate->add_option("--out", rep_out, "Output directory (default .)");
    replicate->add_option("--seed", rep_seed, "Master seed (default: pinned)");
    replicate->add_option("--reps", rep_reps, "Replicates (default 1000)");
    replicate->add_option("--m", rep_m, "Randomization draws (default 100000)");
    replicate->add_option("--workers", rep_workers, "Thread count (0 = all cores)");

    // gap-check ---------------------------------------------------------------
    randinf::ScenarioConfig gap_cfg;
    std::string gap_out, gap_design = "crd";
    std::vector<double> gap_cell_means;
    std::uint64_t gap_seed = 0;
    auto* gapcheck = app.add_subcommand(
        "gap-check", "Compare the simulated variance-estimate excess to prediction");
    gapcheck->add_option("--design", gap_design, "crd or factorial")
        ->check(CLI::IsMember({"crd", "factorial"}));
    gapcheck->add_option("--n", gap_cfg.n, "Units (crd)");
    gapcheck->add_option("--n1", gap_cfg.n1, "Treated units (crd)");
    gapcheck->add_option("--mu1", gap_cfg.mu1, "Treated potential mean");
    gapcheck->add_option("--var1", gap_cfg.var1, "Treated potential variance");
    gapcheck->add_option("--mu0", gap_cfg.mu0, "Control potential mean");
    gapcheck->add_option("--var0", gap_cfg.var0, "Control potential variance");
    gapcheck->add_flag("--exact-moments", "Rescale the frozen draw to exact moments");
    gapcheck->add_option("--k", gap_cfg.k, "Factor count (factorial)");
    gapcheck->add_option("--r", gap_cfg.r, "Units per cell (factorial)");
    gapcheck->add_option("--cell-means", gap_cell_means,
                         "2^k canonical cell means (factorial)")
        ->delimiter(',');
    gapcheck->add_option("--cell-sd", gap_cfg.cell_sd, "Cell noise sd (factorial)");
    gapcheck->add_option("--reps", gap_cfg.reps, "Replicates");
    gapcheck->add_option("--seed", gap_seed, "Master seed")->required();
    gapcheck->add_option("--out", gap_out, "Optional output directory for gap.csv");
    gapcheck->add_option("--workers", gap_cfg.workers, "Thread count (0 = all cores)");

    // fiducial ----------------------------------------------------------------
    FiducialOpts fid;
    auto* fiducial = app.add_subcommand(
        "fiducial", "Invert the randomization test into a confidence interval");
    fiducial->add_option("--input", fid.input, "CSV with header yobs,t")->required();
    fiducial->add_option("--out", fid.out_dir, "Output directory (default .)");
    fiducial->add_option("--level", fid.level, "Coverage level");
    fiducial->add_option("--m", fid.m, "Randomization draws per candidate set");
    fiducial->add_option("--seed", fid.seed, "Master seed (default 0)");
    fiducial->add_flag("--exact", fid.exact, "Enumerate all assignments");
    fiducial->add_flag("--add-one", fid.add_one,
                       "Fold the observed assignment into Monte Carlo tallies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        std::cerr << "run with --help for details\n";
        return kUsageExit;
    }

    try {
        if (*analyze) return run_analyze(an);

        if (*simulate) {
            randinf::ScenarioConfig cfg;
            if (!sim_config_path.empty()) apply_config_json(sim_config_path, cfg);
            // explicit flags override the config file
            if (simulate->count("--design")) cfg.design = parse_design(sim_design);
            if (simulate->count("--n")) cfg.n = sim_cfg.n;
            if (simulate->count("--n1")) cfg.n1 = sim_cfg.n1;
            if (simulate->count("--mu1")) cfg.mu1 = sim_cfg.mu1;
            if (simulate->count("--var1")) cfg.var1 = sim_cfg.var1;
            if (simulate->count("--mu0")) cfg.mu0 = sim_cfg.mu0;
            if (simulate->count("--var0")) cfg.var0 = sim_cfg.var0;
            if (simulate->count("--exact-moments")) cfg.exact_moments = true;
            if (simulate->count("--pairs")) cfg.n_pairs = sim_cfg.n_pairs;
            if (simulate->count("--k")) cfg.k = sim_cfg.k;
            if (simulate->count("--r")) cfg.r = sim_cfg.r;
            if (simulate->count("--cell-means")) cfg.cell_means = sim_cell_means;
            if (simulate->count("--cell-sd")) cfg.cell_sd = sim_cfg.cell_sd;
            if (simulate->count("--reps")) cfg.reps = sim_cfg.reps;
            if (simulate->count("--m")) cfg.m = sim_cfg.m;
            if (simulate->count("--alpha")) cfg.alpha = sim_cfg.alpha;
            if (simulate->count("--statistic")) cfg.statistic = parse_statistic(sim_stat);
            if (simulate->count("--workers")) cfg.workers = sim_cfg.workers;
            cfg.master_seed = sim_seed;

            const auto res = randinf::run_scenario(cfg);
            write_scenario_outputs(sim_out, cfg, res);
            print_scenario_summary(res);
            std::printf("wrote rejections.csv, variances.csv, summary.json to %s\n",
                        sim_out.c_str());
            return kOk;
        }

        if (*replicate) {
            auto cfg = randinf::example_config(rep_example);
            if (replicate->count("--seed")) cfg.master_seed = rep_seed;
            if (replicate->count("--reps")) cfg.reps = rep_reps;
            if (replicate->count("--m")) cfg.m = rep_m;
            if (replicate->count("--workers")) cfg.workers = rep_workers;

            const auto res = randinf::run_scenario(cfg);
            write_scenario_outputs(rep_out, cfg, res);
            print_scenario_summary(res);
            std::printf("wrote rejections.csv, variances.csv, summary.json to %s\n",
                        rep_out.c_str());

            const auto sig = randinf::check_example_signature(rep_example, res);
            std::printf("signature check:\n%s", sig.detail.c_str());
            if (!sig.ok) {
                std::cerr << "signature check failed for example " << rep_example
                          << '\n';
                return kSignatureExit;
            }
            std::printf("signature ok\n");
            return kOk;
        }

        if (*gapcheck) {
            randinf::ScenarioConfig cfg = gap_cfg;
            cfg.design = parse_design(gap_design);
            if (cfg.design == randinf::design_kind::matched_pairs)
                throw std::invalid_argument("gap-check supports crd and factorial");
            if (gapcheck->count("--exact-moments")) cfg.exact_moments = true;
            if (gapcheck->count("--cell-means")) cfg.cell_means = gap_cell_means;
            if (cfg.design == randinf::design_kind::factorial && cfg.cell_means.empty())
                throw std::invalid_argument("factorial gap-check needs --cell-means");
            cfg.master_seed = gap_seed;

            const auto gap = randinf::verify_variance_gap(cfg);
            std::printf("predicted excess:  %.8g\n", gap.predicted);
            std::printf("simulated mean:    %.8g (%zu replicates)\n",
                        gap.empirical_mean, gap.reps);
            std::printf("relative deviation: %+.4f\n", gap.relative_deviation);
            if (!gap_out.empty()) {
                auto f = open_output(gap_out, "gap.csv");
                f << "predicted,empirical_mean,relative_deviation,reps\n"
                  << randinf::format_double(gap.predicted) << ','
                  << randinf::format_double(gap.empirical_mean) << ','
                  << randinf::format_double(gap.relative_deviation) << ',' << gap.reps
                  << '\n';
                std::printf("wrote gap.csv to %s\n", gap_out.c_str());
            }
            return kOk;
        }

        if (*fiducial) return run_fiducial(fid);

        std::cerr << "no subcommand selected\n";
        return kUsageExit;
    } catch (const randinf::parse_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kParseExit;
    } catch (const randinf::enumeration_cap_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataExit;
    } catch (const randinf::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataExit;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageExit;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternalExit;
    }
}
