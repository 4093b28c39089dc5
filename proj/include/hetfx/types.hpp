#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hetfx {

enum class CovariateKind : std::uint8_t { discrete, continuous };

struct Observation {
    double y = 0.0;
    std::uint8_t d = 0;  // treatment, exactly 0 or 1
    std::uint8_t z = 0;  // instrument, exactly 0 or 1
    std::vector<double> x;
};

// Validated sample. Stored column-wise for cache-friendly kernel sums;
// immutable after construction and safe to share across threads.
struct Dataset {
    std::vector<double> y;
    std::vector<std::uint8_t> d;
    std::vector<std::uint8_t> z;
    std::vector<std::vector<double>> x;  // one vector per covariate coordinate
    std::vector<CovariateKind> kinds;

    std::size_t n() const { return y.size(); }
    std::size_t x_dim() const { return x.size(); }

    bool all_discrete() const {
        for (auto k : kinds)
            if (k != CovariateKind::discrete) return false;
        return !kinds.empty();
    }
    bool scalar_continuous() const {
        return kinds.size() == 1 && kinds[0] == CovariateKind::continuous;
    }

    Observation record(std::size_t i) const {
        Observation o;
        o.y = y[i];
        o.d = d[i];
        o.z = z[i];
        o.x.reserve(x.size());
        for (const auto& col : x) o.x.push_back(col[i]);
        return o;
    }
};

// Partition of records by (joint) discrete covariate value.
struct CellIndex {
    std::vector<std::vector<double>> cell_values;  // representative x per cell
    std::vector<std::uint32_t> cell_of;            // record -> cell id
    std::vector<std::vector<std::uint32_t>> members;

    std::size_t cell_count() const { return cell_values.size(); }
    std::string label(std::size_t c) const;
};

// Evaluation lattice for suprema. w_points spans the transformed-outcome
// axis; x_points is either the deduplicated discrete support or an
// increasing sequence over the continuous covariate range.
struct Grid {
    std::vector<double> w_points;
    std::vector<double> x_points;
    bool degenerate_w = false;  // sample range had zero width
};

struct KernelSpec {
    enum class Rule : std::uint8_t { silverman, fixed };
    Rule bandwidth_rule = Rule::silverman;
    double fixed_bandwidth = 0.0;  // used when rule == fixed; must be > 0
    double bandwidth_scale = 1.0;
    // Exponent for the n-power in the plug-in rule. -1/5 is the classic
    // density-oriented choice; the test pipeline adopts a faster-shrinking
    // default (see RunConfig) because the first-stage bias otherwise
    // enters the root-n process scale.
    double exponent = -0.2;
};

struct MultiplierSpec {
    enum class Dist : std::uint8_t { standard_normal, rademacher, mammen };
    Dist distribution = Dist::standard_normal;
    std::uint32_t reps = 1000;
    std::uint64_t seed = 0;
};

enum class TestBranch : std::uint8_t { auto_detect, discrete, continuous };
enum class PhiSign : std::uint8_t { population, paper_estimator };

// Monte Carlo rejection rule: compare the bootstrap p-value against alpha,
// or the statistic against the bootstrap critical value. The two agree
// except when the statistic ties a bootstrap draw exactly.
enum class RejectRule : std::uint8_t { p_value, critical_value };

struct RunConfig {
    TestBranch branch = TestBranch::auto_detect;
    std::uint32_t grid_w = 100;
    std::uint32_t grid_x = 100;  // continuous branch only
    KernelSpec kernel;           // first-stage / conditional-mean smoother
    double q_bandwidth = 0.0;    // optional separate density bandwidth (0 = shared)
    MultiplierSpec multiplier;
    std::vector<double> alphas = {0.01, 0.05, 0.10};
    double relevance_tol = 0.01;
    double q_floor = 1e-8;
    // Continuous branch: orientation of the influence field. `population`
    // pairs the field with the statistic's own integrand and carries the
    // first-stage correction with a positive sign; `paper_estimator`
    // mirrors the integrand and flips the correction.
    PhiSign phi_sign = PhiSign::population;
    // Continuous branch: per-x cap on the w-axis at this empirical quantile
    // of the engaged transformed outcomes. Values >= 1 cap at the engaged
    // maximum; 0 disables the cap (full product grid). See README for the
    // finite-sample motivation.
    double w_support_quantile = 0.85;
    // Continuous first stage: n-exponent for the plug-in bandwidth.
    double stage1_exponent = -1.0 / 3.0;
    // Discrete branch: clamp negative density-ratio estimates in the
    // first-stage correction to zero. The population quantity is
    // nonnegative, but the plug-in estimate need not be; left off so the
    // influence field stays an unbiased linearization.
    bool kappa_truncate_at_zero = false;
    RejectRule reject_rule = RejectRule::p_value;  // Monte Carlo harness only
    int threads = 0;  // 0 = library default (HETFX_THREADS or all cores)
};

struct TestReport {
    double statistic = 0.0;
    double p_value = 1.0;
    std::map<double, double> critical_values;  // alpha -> c_n(alpha)
    std::size_t n = 0;
    std::uint32_t bootstrap_reps = 0;
    std::pair<std::size_t, std::size_t> grid_sizes = {0, 0};
    std::uint64_t seed = 0;
    TestBranch branch_used = TestBranch::discrete;
    RunConfig config_echo;
};

// First-stage estimates over discrete cells.
struct DeltaCell {
    double delta = 0.0;
    double mu0 = 0.0, mu1 = 0.0;
    double p0 = 0.0, p1 = 0.0;
    std::uint32_t n0 = 0, n1 = 0;  // per-arm record counts
};

struct DeltaTable {
    CellIndex cells;
    std::vector<DeltaCell> values;  // aligned with cells.cell_values
};

// Per-observation first-stage estimates (continuous covariate).
struct DeltaSeries {
    std::vector<double> delta;  // length n, all finite
};

// Estimated influence values feeding the multiplier bootstrap.
//
// Conceptually an n x G table with G = |w_points| x |x_points| (column
// g = xi * |w_points| + wi). Both branches factor as
//   entry(i, (w, x)) = engaged(i, x) * field[i][wi]
// where `engaged` is cell membership (discrete) or the X_i <= x indicator
// (continuous), so the table is stored as the n x |w| field plus the
// engagement structure. `entry` reproduces the dense value; the bootstrap
// consumes the factored form. `live` masks grid columns excluded from
// suprema (continuous support cap); excluded columns read as engaged-free.
struct InfluenceMatrix {
    enum class Kind : std::uint8_t { discrete, continuous };
    Kind kind = Kind::discrete;
    Grid grid;
    std::size_t n = 0;

    std::vector<double> field;  // n x |w_points|, row-major

    // Discrete: x_points parallel array of cell ids; engagement by equality.
    std::vector<std::uint32_t> cell_of;       // length n
    std::vector<std::uint32_t> cell_of_xpts;  // length |x_points|

    // Continuous: engagement by X_i <= x; rows pre-sorted by x_value order.
    std::vector<double> x_value;            // length n
    std::vector<std::uint32_t> sorted_by_x; // record indices, ascending X
    std::vector<std::uint32_t> x_cut;       // per x_point: #records with X <= x

    std::vector<std::uint8_t> live;  // |x_points| x |w_points|; empty = all live

    std::size_t w_count() const { return grid.w_points.size(); }
    std::size_t x_count() const { return grid.x_points.size(); }
    std::size_t column_count() const { return w_count() * x_count(); }

    bool column_live(std::size_t xi, std::size_t wi) const {
        return live.empty() || live[xi * w_count() + wi] != 0;
    }

    bool engaged(std::size_t i, std::size_t xi) const {
        if (kind == Kind::discrete) return cell_of[i] == cell_of_xpts[xi];
        return x_value[i] <= grid.x_points[xi];
    }

    // Dense-table semantics (reference path; O(1) per entry).
    double entry(std::size_t i, std::size_t g) const {
        const std::size_t xi = g / w_count();
        const std::size_t wi = g % w_count();
        if (!column_live(xi, wi) || !engaged(i, xi)) return 0.0;
        return field[i * w_count() + wi];
    }
};

struct DgpSpec {
    int id = 1;  // 1..4
    std::size_t n = 1000;
    double rho = 0.7;
    double gamma = 0.0;  // used by DGP 2 and 4
    double pz = 0.5;
    std::uint64_t seed = 0;
};

struct RejectionRow {
    DgpSpec spec;
    double alpha = 0.05;
    double rate = 0.0;
    std::uint32_t reps = 0;
    std::uint32_t errors = 0;  // replicates excluded by estimation errors
};

struct RejectionTable {
    std::vector<RejectionRow> rows;
    std::uint32_t reps = 0;
    std::uint32_t bootstrap_reps = 0;
};

struct ColumnMap {
    std::string outcome;
    std::string treatment;
    std::string instrument;
    std::vector<std::pair<std::string, CovariateKind>> covariates;
};

}  // namespace hetfx
