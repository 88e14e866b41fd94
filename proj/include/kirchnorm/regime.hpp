#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kirchnorm/params.hpp"
#include "kirchnorm/scalar_core.hpp"
#include "kirchnorm/solver.hpp"

namespace kirchnorm {

// Regime tags index the tool's own table of verified existence /
// nonexistence statements; see the README for the hypotheses behind each.
enum class RegimeTag {
    th21i,   // N>=5, mu=0, 0<b<b0: two-level critical structure
    th21ii,  // N>=5, mu=0, b<0: single level
    th21iii, // N>=5, mu=0, b>b0: nonexistence
    th23,    // N>=5, mu<0: multiplier sign + energy floor
    th24,    // N=4,  mu=0: threshold collapse / Lambda level
    th25,    // N=4,  mu>0, 2<q<3, c<c0: local minimizer pair
    th26,    // N>=5, small mu>0, b1<b<b0, 2<q<2+4/N: negative-level minimizer
    th27,    // N=4,  mu>0, c<min(c0,c1): path threshold below m_bar+Lambda
    inadmissible,
};

const char* to_string(RegimeTag t);
std::optional<RegimeTag> regime_from_string(const std::string& s);

struct CheckResult {
    std::string name;    // stable identifier, e.g. "levels.order"
    std::string claim;   // human-readable statement being checked
    bool pass = false;
    bool marginal = false; // passed/failed within the strict-inequality band
    double lhs = 0.0;
    double rhs = 0.0;
    std::string detail;
};

struct RegimeReport {
    std::string schema = "kirchnorm.regime-report/1";
    RegimeTag tag = RegimeTag::inadmissible;
    std::vector<RegimeTag> applicable;
    ProblemParams params;
    double S = 0.0;
    std::optional<double> Cq;
    std::string depth; // "quick" | "full"
    ThresholdSet thresholds;
    std::vector<CheckResult> checks;
    std::vector<std::string> notes;

    bool passed() const; // every non-marginal check passed
};

// Structural regime decision from the parameter tuple alone.  Cq is needed
// only for the N=4, mu>0 mass thresholds; classify throws std::logic_error
// if it is required but missing.  The decision is stable under relative
// parameter perturbations of 1e-9 away from the decision boundaries;
// boundary hits (equalities) classify as inadmissible.
RegimeTag classify(const ScalarContext& ctx);

struct VerifyOptions {
    bool full = false;          // run flows/paths, not just scalar checks
    std::optional<RegimeTag> force_tag;
    std::size_t random_samples = 100;
    std::uint64_t seed = 20240817;
    GridSpec grid;              // grid used for field-level work
};

// Runs the check list of the classified (or forced) regime at the given
// depth.  Never throws on a failed check; failures are recorded with both
// sides of the inequality.
RegimeReport verify(const ProblemParams& p, const VerifyOptions& opt);

struct SweepRow {
    double axis_value = 0.0;
    RegimeTag tag = RegimeTag::inadmissible;
    bool verify_pass = false;
    bool error = false;
    std::string error_text;
    ThresholdSet thresholds;
    std::vector<CheckResult> checks;
};

// Evaluates quick-depth verification across an axis ("b", "c", "mu", "q").
// Rows are independent (evaluated in parallel) and never abort the sweep:
// per-row errors are captured in the row.
std::vector<SweepRow> sweep(const ProblemParams& base, const std::string& axis,
                            const std::vector<double>& values,
                            const VerifyOptions& opt);

// Non-attainment probe for N = 4, 0 < b < S^-2: the quotient
//   a^2 |grad v|_2^4 / (4 (|v|_4^4 - b |grad v|_2^4))
// of the cut-off extremal v_eps = psi(r) U_eps(r) tends to the threshold
// level Lambda linearly in eps.  The grid must resolve the concentration
// scale sqrt(eps) and reach past the cut-off support r = 1.
double lambda_probe_quotient(const ProblemParams& p,
                             std::shared_ptr<const RadialGrid> grid,
                             double eps);

} // namespace kirchnorm
