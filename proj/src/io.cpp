#include "randinf/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "randinf/errors.hpp"

namespace randinf {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* method_name(test_method m) {
    switch (m) {
        case test_method::neyman: return "neyman";
        case test_method::frt_mc: return "frt_mc";
        case test_method::frt_exact: return "frt_exact";
        case test_method::frt_var_ratio: return "frt_var_ratio";
        case test_method::pair_neyman: return "pair_neyman";
        case test_method::pair_frt: return "pair_frt";
        case test_method::factorial_neyman: return "factorial_neyman";
        case test_method::factorial_frt: return "factorial_frt";
        case test_method::wald_hw: return "wald_hw";
        case test_method::score: return "score";
    }
    return "unknown";
}

const char* interval_method_name(interval_method m) {
    return m == interval_method::neyman ? "neyman" : "fiducial";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, std::size_t line_no) {
    const std::string f = trim(field);
    if (f.empty()) throw parse_error("empty field", line_no);
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (end != f.c_str() + f.size())
        throw parse_error("bad number '" + f + "'", line_no);
    if (!std::isfinite(v)) throw parse_error("non-finite number '" + f + "'", line_no);
    return v;
}

void expect_header(std::istream& in, const std::vector<std::string>& names) {
    std::string line;
    if (!std::getline(in, line)) throw parse_error("missing header", 1);
    const auto fields = split_csv_line(line);
    if (fields.size() != names.size())
        throw parse_error("expected " + std::to_string(names.size()) + " columns", 1);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (trim(fields[i]) != names[i])
            throw parse_error("expected column '" + names[i] + "', got '" +
                                  trim(fields[i]) + "'",
                              1);
}

/// Reads rows of exactly `width` numeric fields; skips blank lines.
std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t width) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != width)
            throw parse_error("expected " + std::to_string(width) + " fields, got " +
                                  std::to_string(fields.size()),
                              line_no);
        std::vector<double> row(width);
        for (std::size_t i = 0; i < width; ++i) row[i] = parse_number(fields[i], line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'", 0);
    return in;
}

} // namespace

ObservedData read_observed_csv(std::istream& in) {
    expect_header(in, {"yobs", "t"});
    const auto rows = read_rows(in, 2);
    if (rows.size() < 2) throw parse_error("need at least 2 data rows", rows.size() + 1);
    std::vector<double> y(rows.size());
    std::vector<std::uint8_t> t(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[i] = rows[i][0];
        if (rows[i][1] != 0.0 && rows[i][1] != 1.0)
            throw parse_error("label must be 0 or 1", i + 2);
        t[i] = rows[i][1] == 1.0;
    }
    return make_observed(std::move(y), std::move(t));
}

ObservedData read_observed_csv_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_observed_csv(in);
}

PotentialTable read_potential_csv(std::istream& in) {
    expect_header(in, {"y1", "y0"});
    const auto rows = read_rows(in, 2);
    if (rows.size() < 2) throw parse_error("need at least 2 data rows", rows.size() + 1);
    std::vector<double> y1(rows.size()), y0(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y1[i] = rows[i][0];
        y0[i] = rows[i][1];
    }
    return PotentialTable(std::move(y1), std::move(y0));
}

PotentialTable read_potential_csv_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_potential_csv(in);
}

MatchedPairTable read_pairs_csv(std::istream& in) {
    expect_header(in, {"y11_t", "y11_c", "y12_t", "y12_c"});
    const auto rows = read_rows(in, 4);
    if (rows.size() < 2) throw parse_error("need at least 2 pairs", rows.size() + 1);
    std::vector<PairPotentials> pairs(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        pairs[i] = {rows[i][0], rows[i][1], rows[i][2], rows[i][3]};
    return MatchedPairTable(std::move(pairs));
}

MatchedPairTable read_pairs_csv_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_pairs_csv(in);
}

FactorialTable read_factorial_csv_file(const std::string& csv_path,
                                       const std::string& sidecar_path) {
    nlohmann::json side;
    {
        auto sin = open_or_throw(sidecar_path);
        try {
            sin >> side;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("sidecar: ") + e.what(), 0);
        }
    }
    if (!side.contains("k") || !side.contains("r"))
        throw parse_error("sidecar: need integer fields 'k' and 'r'", 0);
    int k = 0;
    std::size_t r = 0;
    try {
        k = side["k"].get<int>();
        r = side["r"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("sidecar: ") + e.what(), 0);
    }
    if (k < 1 || k > 20 || r == 0) throw parse_error("sidecar: bad k or r", 0);
    const std::size_t cells = std::size_t{1} << k;

    // column j of the CSV holds the cell whose factor levels are columns[j];
    // default: already canonical
    std::vector<std::size_t> canon_of_col(cells);
    if (side.contains("columns")) {
        const auto& cols = side["columns"];
        if (!cols.is_array() || cols.size() != cells)
            throw parse_error("sidecar: 'columns' must list 2^k level vectors", 0);
        std::vector<bool> seen(cells, false);
        for (std::size_t j = 0; j < cells; ++j) {
            const auto& levels = cols[j];
            if (!levels.is_array() || levels.size() != static_cast<std::size_t>(k))
                throw parse_error("sidecar: each column needs k levels", 0);
            std::size_t cell = 0;
            for (int f = 0; f < k; ++f) {
                int lv = 0;
                try {
                    lv = levels[f].get<int>();
                } catch (const nlohmann::json::exception&) {
                    throw parse_error("sidecar: levels must be +1/-1", 0);
                }
                if (lv != 1 && lv != -1)
                    throw parse_error("sidecar: levels must be +1/-1", 0);
                if (lv == -1) cell |= std::size_t{1} << (k - 1 - f);
            }
            if (seen[cell]) throw parse_error("sidecar: duplicate cell", 0);
            seen[cell] = true;
            canon_of_col[j] = cell;
        }
    } else {
        for (std::size_t j = 0; j < cells; ++j) canon_of_col[j] = j;
    }

    auto in = open_or_throw(csv_path);
    std::vector<std::string> names(cells);
    for (std::size_t j = 0; j < cells; ++j) names[j] = "y_" + std::to_string(j + 1);
    expect_header(in, names);
    const auto rows = read_rows(in, cells);
    if (rows.size() != r * cells)
        throw parse_error("expected " + std::to_string(r * cells) + " rows, got " +
                              std::to_string(rows.size()),
                          rows.size() + 1);
    std::vector<double> values(rows.size() * cells);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cells; ++j)
            values[i * cells + canon_of_col[j]] = rows[i][j];
    return FactorialTable(k, r, std::move(values));
}

void write_variance_report_csv(std::ostream& out, const VarianceReport& r) {
    out << "tau_hat,v_neyman,v_fisher,v_ols,v_hw,v_score,v_improved,s1sq,s0sq,ssq\n"
        << format_double(r.tau_hat) << ',' << format_double(r.v_neyman) << ','
        << format_double(r.v_fisher) << ',' << format_double(r.v_ols) << ','
        << format_double(r.v_hw) << ',' << format_double(r.v_score) << ','
        << format_double(r.v_improved) << ',' << format_double(r.s1sq) << ','
        << format_double(r.s0sq) << ',' << format_double(r.ssq) << '\n';
}

void write_test_results_csv(std::ostream& out, const std::vector<TestResult>& results) {
    out << "method,statistic,p_value,m_draws\n";
    for (const auto& t : results)
        out << method_name(t.method) << ',' << format_double(t.statistic) << ','
            << format_double(t.p_value) << ',' << t.m_draws << '\n';
}

void write_interval_results_csv(std::ostream& out,
                                const std::vector<IntervalResult>& results) {
    out << "method,level,lower,upper\n";
    for (const auto& r : results)
        out << interval_method_name(r.method) << ',' << format_double(r.level) << ','
            << format_double(r.lower) << ',' << format_double(r.upper) << '\n';
}

void write_binary_report_csv(std::ostream& out, const BinaryVarianceReport& r) {
    out << "p1_hat,p0_hat,v_unpooled,v_pooled,gap\n"
        << format_double(r.p1_hat) << ',' << format_double(r.p0_hat) << ','
        << format_double(r.v_unpooled) << ',' << format_double(r.v_pooled) << ','
        << format_double(binary_variance_gap(r.p1_hat, r.p0_hat, r.n1, r.n0)) << '\n';
}

void write_rejections_csv(std::ostream& out, const ScenarioResult& res) {
    out << "keep_keep,keep_reject,reject_keep,reject_reject,reps_used,degenerate,"
           "rate_neyman,se_neyman,rate_fisher,se_fisher\n"
        << res.table.keep_keep << ',' << res.table.keep_reject << ','
        << res.table.reject_keep << ',' << res.table.reject_reject << ','
        << res.reps_used << ',' << res.degenerate << ','
        << format_double(res.rate_neyman) << ',' << format_double(res.se_neyman) << ','
        << format_double(res.rate_fisher) << ',' << format_double(res.se_fisher) << '\n';
}

void write_variance_scatter_csv(std::ostream& out, const ScenarioResult& res) {
    out << "rep,v_neyman,v_fisher\n";
    for (const auto& row : res.scatter)
        out << row.rep << ',' << format_double(row.v_neyman) << ','
            << format_double(row.v_fisher) << '\n';
}

std::string scenario_summary_json(const ScenarioConfig& cfg, const ScenarioResult& res) {
    nlohmann::json j;
    const char* design = cfg.design == design_kind::crd            ? "crd"
                         : cfg.design == design_kind::matched_pairs ? "matched_pairs"
                                                                    : "factorial";
    j["config"] = {
        {"design", design},
        {"reps", cfg.reps},
        {"m", cfg.m},
        {"alpha", cfg.alpha},
        {"master_seed", cfg.master_seed},
        {"statistic", cfg.statistic == frt_statistic::diff_in_means ? "diff_in_means"
                                                                    : "variance_ratio"},
    };
    if (cfg.design == design_kind::crd) {
        j["config"]["n"] = cfg.n;
        j["config"]["n1"] = cfg.n1;
        j["config"]["mu1"] = cfg.mu1;
        j["config"]["var1"] = cfg.var1;
        j["config"]["mu0"] = cfg.mu0;
        j["config"]["var0"] = cfg.var0;
        j["population"] = {
            {"tau", res.population_summary.tau},
            {"s1sq", res.population_summary.s1sq},
            {"s0sq", res.population_summary.s0sq},
            {"stausq", res.population_summary.stausq},
        };
    } else if (cfg.design == design_kind::matched_pairs) {
        j["config"]["n_pairs"] = cfg.n_pairs;
    } else {
        j["config"]["k"] = cfg.k;
        j["config"]["r"] = cfg.r;
        j["config"]["cell_means"] = cfg.cell_means;
        j["config"]["cell_sd"] = cfg.cell_sd;
    }
    j["table"] = {
        {"keep_keep", res.table.keep_keep},
        {"keep_reject", res.table.keep_reject},
        {"reject_keep", res.table.reject_keep},
        {"reject_reject", res.table.reject_reject},
    };
    j["reps_used"] = res.reps_used;
    j["degenerate"] = res.degenerate;
    j["rate_neyman"] = res.rate_neyman;
    j["se_neyman"] = res.se_neyman;
    j["rate_fisher"] = res.rate_fisher;
    j["se_fisher"] = res.se_fisher;
    j["mean_v_neyman"] = res.mean_v_neyman;
    j["mean_v_fisher"] = res.mean_v_fisher;
    return j.dump(2) + "\n";
}

} // namespace randinf
