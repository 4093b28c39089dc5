// hetfx: nonparametric tests for unobserved treatment-effect heterogeneity
// with a binary instrument. Subcommands: test (run on a CSV), simulate
// (write one synthetic dataset), mc (Monte Carlo rejection-rate sweep).

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetfx/bootstrap.hpp"
#include "hetfx/dgp.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/io.hpp"
#include "hetfx/types.hpp"

namespace {

hetfx::ColumnMap parse_covariate_spec(const std::string& outcome,
                                      const std::string& treatment,
                                      const std::string& instrument,
                                      const std::string& covariates) {
    hetfx::ColumnMap map;
    map.outcome = outcome;
    map.treatment = treatment;
    map.instrument = instrument;
    std::size_t start = 0;
    while (start <= covariates.size()) {
        const std::size_t comma = covariates.find(',', start);
        const std::string token = covariates.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                hetfx::fail(hetfx::ErrorCode::ParseError,
                            "covariate '" + token +
                                "' needs a kind tag (name:discrete or name:continuous)");
            const std::string name = token.substr(0, colon);
            const std::string kind = token.substr(colon + 1);
            if (name.empty())
                hetfx::fail(hetfx::ErrorCode::ParseError, "empty covariate name in '" +
                                                              token + "'");
            if (kind == "discrete")
                map.covariates.emplace_back(name, hetfx::CovariateKind::discrete);
            else if (kind == "continuous")
                map.covariates.emplace_back(name, hetfx::CovariateKind::continuous);
            else
                hetfx::fail(hetfx::ErrorCode::ParseError,
                            "unknown covariate kind '" + kind + "' in '" + token + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (map.covariates.empty())
        hetfx::fail(hetfx::ErrorCode::ParseError, "at least one covariate is required");
    return map;
}

struct TestOptions {
    std::string input;
    std::string outcome = "Y", treatment = "D", instrument = "Z";
    std::string covariates;
    std::string branch = "auto";
    std::string multiplier = "standard_normal";
    std::string phi_sign = "population";
    std::string reject_rule = "p_value";
    std::string format = "text";
    std::string out = "-";
    hetfx::RunConfig config;
};

void add_run_config_options(CLI::App* cmd, TestOptions& opt) {
    cmd->add_option("--grid-w", opt.config.grid_w, "w-axis grid size")
        ->capture_default_str();
    cmd->add_option("--grid-x", opt.config.grid_x,
                    "x-axis grid size (continuous branch)")
        ->capture_default_str();
    cmd->add_option("--bootstrap", opt.config.multiplier.reps, "bootstrap replicates")
        ->capture_default_str();
    cmd->add_option("--multiplier", opt.multiplier,
                    "multiplier distribution: standard_normal | rademacher | mammen")
        ->capture_default_str();
    cmd->add_option("--seed", opt.config.multiplier.seed, "bootstrap seed")
        ->capture_default_str();
    cmd->add_option("--alpha", opt.config.alphas, "significance levels")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--relevance-tol", opt.config.relevance_tol,
                    "minimum propensity gap before WeakInstrument")
        ->capture_default_str();
    cmd->add_option("--q-floor", opt.config.q_floor,
                    "minimum leave-one-out density before DensityFloor")
        ->capture_default_str();
    cmd->add_option("--phi-sign", opt.phi_sign,
                    "first-stage correction orientation: population | paper_estimator")
        ->capture_default_str();
    cmd->add_option("--w-cap-quantile", opt.config.w_support_quantile,
                    "per-x cap on the w axis (engaged-W quantile; 0 disables, >=1 max)")
        ->capture_default_str();
    cmd->add_option("--stage1-exponent", opt.config.stage1_exponent,
                    "n-exponent of the first-stage plug-in bandwidth")
        ->capture_default_str();
    cmd->add_flag("--kappa-nonneg", opt.config.kappa_truncate_at_zero,
                  "clamp negative density-ratio estimates to zero (discrete branch)");
    cmd->add_option("--bandwidth-scale", opt.config.kernel.bandwidth_scale,
                    "multiplier on the plug-in bandwidth")
        ->capture_default_str();
    cmd->add_option("--fixed-bandwidth", opt.config.kernel.fixed_bandwidth,
                    "use this bandwidth instead of the plug-in rule (> 0)")
        ->capture_default_str();
    cmd->add_option("--q-bandwidth", opt.config.q_bandwidth,
                    "separate density bandwidth (0 = shared with the smoother)")
        ->capture_default_str();
    cmd->add_option("--threads", opt.config.threads,
                    "worker threads (0 = HETFX_THREADS or all cores)")
        ->capture_default_str();
}

void finalize_run_config(TestOptions& opt) {
    if (opt.branch == "auto")
        opt.config.branch = hetfx::TestBranch::auto_detect;
    else if (opt.branch == "discrete")
        opt.config.branch = hetfx::TestBranch::discrete;
    else if (opt.branch == "continuous")
        opt.config.branch = hetfx::TestBranch::continuous;
    else
        hetfx::fail(hetfx::ErrorCode::ParseError, "unknown branch '" + opt.branch + "'");

    if (opt.multiplier == "standard_normal")
        opt.config.multiplier.distribution = hetfx::MultiplierSpec::Dist::standard_normal;
    else if (opt.multiplier == "rademacher")
        opt.config.multiplier.distribution = hetfx::MultiplierSpec::Dist::rademacher;
    else if (opt.multiplier == "mammen")
        opt.config.multiplier.distribution = hetfx::MultiplierSpec::Dist::mammen;
    else
        hetfx::fail(hetfx::ErrorCode::ParseError,
                    "unknown multiplier '" + opt.multiplier + "'");

    if (opt.phi_sign == "population")
        opt.config.phi_sign = hetfx::PhiSign::population;
    else if (opt.phi_sign == "paper_estimator")
        opt.config.phi_sign = hetfx::PhiSign::paper_estimator;
    else
        hetfx::fail(hetfx::ErrorCode::ParseError,
                    "unknown phi-sign '" + opt.phi_sign + "'");

    if (opt.reject_rule == "p_value")
        opt.config.reject_rule = hetfx::RejectRule::p_value;
    else if (opt.reject_rule == "critical_value")
        opt.config.reject_rule = hetfx::RejectRule::critical_value;
    else
        hetfx::fail(hetfx::ErrorCode::ParseError,
                    "unknown rejection rule '" + opt.reject_rule + "'");

    if (opt.config.kernel.fixed_bandwidth > 0.0)
        opt.config.kernel.bandwidth_rule = hetfx::KernelSpec::Rule::fixed;
}

int run_cli(int argc, char** argv) {
    CLI::App app{
        "hetfx: consistent nonparametric tests for unobserved heterogeneity of "
        "treatment effects under endogenous treatment with a binary instrument"};
    app.require_subcommand(1);

    // --- test -------------------------------------------------------------
    TestOptions topt;
    CLI::App* test = app.add_subcommand("test", "run the test on a CSV dataset");
    test->add_option("--input", topt.input, "CSV file with a header row")->required();
    test->add_option("--outcome", topt.outcome, "outcome column")->capture_default_str();
    test->add_option("--treatment", topt.treatment, "binary treatment column")
        ->capture_default_str();
    test->add_option("--instrument", topt.instrument, "binary instrument column")
        ->capture_default_str();
    test->add_option("--covariates", topt.covariates,
                     "comma list of name:kind, e.g. X1:discrete,X2:discrete")
        ->required();
    test->add_option("--branch", topt.branch, "auto | discrete | continuous")
        ->capture_default_str();
    test->add_option("--format", topt.format, "json | csv | text")->capture_default_str();
    test->add_option("--out", topt.out, "output path (- for stdout)")
        ->capture_default_str();
    add_run_config_options(test, topt);

    // --- simulate -----------------------------------------------------------
    hetfx::DgpSpec sim;
    std::string sim_out;
    CLI::App* simulate = app.add_subcommand("simulate", "write one synthetic dataset");
    simulate->add_option("--dgp", sim.id, "design id 1..4")->required();
    simulate->add_option("--n", sim.n, "sample size")->capture_default_str();
    simulate->add_option("--rho", sim.rho, "selection correlation")->capture_default_str();
    simulate->add_option("--gamma", sim.gamma, "heterogeneity strength (designs 2, 4)")
        ->capture_default_str();
    simulate->add_option("--pz", sim.pz, "instrument probability")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "generator seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "output CSV path (- for stdout)")->required();

    // --- mc -----------------------------------------------------------------
    TestOptions mopt;
    int mc_dgp = 1;
    std::vector<std::size_t> mc_n = {1000};
    std::vector<double> mc_rho = {0.7}, mc_pz = {0.5}, mc_gamma = {0.0};
    std::uint32_t mc_reps = 200;
    std::uint64_t mc_seed = 0;
    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo rejection-rate sweep");
    mc->add_option("--dgp", mc_dgp, "design id 1..4")->required();
    mc->add_option("--n", mc_n, "sample sizes")->delimiter(',')->capture_default_str();
    mc->add_option("--rho", mc_rho, "selection correlations")
        ->delimiter(',')
        ->capture_default_str();
    mc->add_option("--pz", mc_pz, "instrument probabilities")
        ->delimiter(',')
        ->capture_default_str();
    mc->add_option("--gamma", mc_gamma, "heterogeneity strengths")
        ->delimiter(',')
        ->capture_default_str();
    mc->add_option("--reps", mc_reps, "Monte Carlo replicates")->capture_default_str();
    mc->add_option("--mc-seed", mc_seed, "master seed for replicate substreams")
        ->capture_default_str();
    mc->add_option("--reject-rule", mopt.reject_rule,
                   "replicate rejection rule: p_value | critical_value")
        ->capture_default_str();
    mc->add_option("--format", mopt.format, "json | csv | text")->capture_default_str();
    mc->add_option("--out", mopt.out, "output path (- for stdout)")
        ->capture_default_str();
    add_run_config_options(mc, mopt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse message
        return code == 0 ? 0 : 2;      // non-help parse problems are input errors
    }

    if (test->parsed()) {
        finalize_run_config(topt);
        const hetfx::ColumnMap map = parse_covariate_spec(topt.outcome, topt.treatment,
                                                          topt.instrument, topt.covariates);
        const hetfx::Dataset data = hetfx::read_csv(topt.input, map);
        const hetfx::TestReport report = hetfx::run_test(data, topt.config);
        hetfx::write_output(topt.out,
                            hetfx::serialize_report(report, hetfx::parse_output_format(
                                                                topt.format)));
        return 0;
    }
    if (simulate->parsed()) {
        const hetfx::Dataset data = hetfx::gen_dgp(sim);
        hetfx::write_dataset_csv(data, sim_out);
        return 0;
    }
    // mc
    finalize_run_config(mopt);
    mopt.config.branch = hetfx::TestBranch::auto_detect;
    hetfx::RejectionTable merged;
    merged.reps = mc_reps;
    merged.bootstrap_reps = mopt.config.multiplier.reps;
    for (std::size_t n : mc_n)
        for (double rho : mc_rho)
            for (double pz : mc_pz)
                for (double gamma : mc_gamma) {
                    hetfx::DgpSpec spec;
                    spec.id = mc_dgp;
                    spec.n = n;
                    spec.rho = rho;
                    spec.gamma = gamma;
                    spec.pz = pz;
                    // Same master seed across combos: common random numbers,
                    // so configurations differ only through the design knobs.
                    spec.seed = mc_seed;
                    const hetfx::RejectionTable part =
                        hetfx::monte_carlo(spec, mc_reps, mopt.config);
                    merged.rows.insert(merged.rows.end(), part.rows.begin(),
                                       part.rows.end());
                }
    hetfx::write_output(mopt.out, hetfx::serialize_table(
                                      merged, hetfx::parse_output_format(mopt.format)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const hetfx::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
