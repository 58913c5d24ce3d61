#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "randinf/estimators.hpp"
#include "randinf/harness.hpp"
#include "randinf/inference.hpp"
#include "randinf/population.hpp"

namespace randinf {

/// Shortest round-trip decimal form of v (17 significant digits): re-reading
/// the text reproduces the exact double.
std::string format_double(double v);

const char* method_name(test_method m);
const char* interval_method_name(interval_method m);

/* CSV readers. All files are headed, comma-separated, numeric-only.
 * Malformed content raises parse_error with the 1-based line number. */

/// Header `yobs,t`: one outcome and a 0/1 arm label per row.
ObservedData read_observed_csv(std::istream& in);
ObservedData read_observed_csv_file(const std::string& path);

/// Header `y1,y0`: both potential outcomes per row.
PotentialTable read_potential_csv(std::istream& in);
PotentialTable read_potential_csv_file(const std::string& path);

/// Header `y11_t,y11_c,y12_t,y12_c`: pair potentials per row
/// (first unit treated/control, then second unit treated/control).
MatchedPairTable read_pairs_csv(std::istream& in);
MatchedPairTable read_pairs_csv_file(const std::string& path);

/* Factorial table: CSV headed `y_1..y_J` (one potential column per cell) plus
 * a JSON sidecar {"k":K,"r":R,"columns":[[level,...],...]} where columns[j]
 * lists CSV column j's +/-1 factor levels. Columns are permuted into
 * canonical order (lexicographic, +1 before -1); omit "columns" if the CSV is
 * already canonical. */
FactorialTable read_factorial_csv_file(const std::string& csv_path,
                                       const std::string& sidecar_path);

/* CSV writers (header + rows, '\n' line ends, no trailing separator). */

/// `tau_hat,v_neyman,v_fisher,v_ols,v_hw,v_score,v_improved,s1sq,s0sq,ssq`
void write_variance_report_csv(std::ostream& out, const VarianceReport& r);

/// `method,statistic,p_value,m_draws`
void write_test_results_csv(std::ostream& out, const std::vector<TestResult>& results);

/// `method,level,lower,upper`
void write_interval_results_csv(std::ostream& out,
                                const std::vector<IntervalResult>& results);

/// `p1_hat,p0_hat,v_unpooled,v_pooled,gap`
void write_binary_report_csv(std::ostream& out, const BinaryVarianceReport& r);

/// 2x2 agreement counts plus rates and binomial standard errors.
void write_rejections_csv(std::ostream& out, const ScenarioResult& res);

/// `rep,v_neyman,v_fisher` per non-degenerate replicate.
void write_variance_scatter_csv(std::ostream& out, const ScenarioResult& res);

/// Full machine-readable record of a scenario run (config echo + outcomes).
std::string scenario_summary_json(const ScenarioConfig& cfg, const ScenarioResult& res);

} // namespace randinf
