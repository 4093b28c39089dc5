#include "hetfx/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hetfx/errors.hpp"
#include "hetfx/kernel.hpp"
#include "hetfx/ks_continuous.hpp"
#include "hetfx/ks_discrete.hpp"
#include "hetfx/late.hpp"
#include "hetfx/rng.hpp"

namespace hetfx {

std::vector<double> draw_multipliers(std::size_t n, const MultiplierSpec& spec,
                                     std::uint32_t rep_index) {
    Rng rng(spec.seed, 0x6D75ULL * 0x100000000ULL + rep_index);  // multiplier stream tag
    std::vector<double> u(n);
    switch (spec.distribution) {
        case MultiplierSpec::Dist::standard_normal:
            for (auto& v : u) v = rng.normal();
            break;
        case MultiplierSpec::Dist::rademacher:
            for (auto& v : u) v = rng.rademacher();
            break;
        case MultiplierSpec::Dist::mammen:
            for (auto& v : u) v = rng.mammen();
            break;
    }
    return u;
}

namespace {

double simulate_sup_discrete(const InfluenceMatrix& im, const std::vector<double>& u) {
    const std::size_t nw = im.w_count();
    const std::size_t nx = im.x_count();
    // Accumulate per-cell column sums in one sweep over records.
    std::vector<double> acc(nx * nw, 0.0);
    for (std::size_t i = 0; i < im.n; ++i) {
        double* dst = acc.data() + static_cast<std::size_t>(im.cell_of[i]) * nw;
        const double* row = im.field.data() + i * nw;
        const double ui = u[i];
        for (std::size_t k = 0; k < nw; ++k) dst[k] += ui * row[k];
    }
    double best = 0.0;
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const double* col = acc.data() + static_cast<std::size_t>(im.cell_of_xpts[xi]) * nw;
        for (std::size_t k = 0; k < nw; ++k)
            if (im.column_live(xi, k)) best = std::max(best, std::fabs(col[k]));
    }
    return best / std::sqrt(static_cast<double>(im.n));
}

double simulate_sup_continuous(const InfluenceMatrix& im, const std::vector<double>& u) {
    const std::size_t nw = im.w_count();
    const std::size_t nx = im.x_count();
    // Running prefix over ascending-X records; snapshots at the engagement
    // cuts give every x column at once.
    std::vector<double> run(nw, 0.0);
    double best = 0.0;
    std::size_t xi = 0;
    for (std::size_t r = 0; r <= im.n; ++r) {
        while (xi < nx && im.x_cut[xi] == r) {
            for (std::size_t k = 0; k < nw; ++k)
                if (im.column_live(xi, k)) best = std::max(best, std::fabs(run[k]));
            ++xi;
        }
        if (r == im.n) break;
        const std::uint32_t i = im.sorted_by_x[r];
        const double ui = u[i];
        const double* row = im.field.data() + static_cast<std::size_t>(i) * nw;
        for (std::size_t k = 0; k < nw; ++k) run[k] += ui * row[k];
    }
    return best / std::sqrt(static_cast<double>(im.n));
}

}  // namespace

double simulate_sup(const InfluenceMatrix& im, const std::vector<double>& u) {
    if (u.size() != im.n)
        fail(ErrorCode::DimensionMismatch, "multiplier length " + std::to_string(u.size()) +
                                               " vs n = " + std::to_string(im.n));
    return im.kind == InfluenceMatrix::Kind::discrete ? simulate_sup_discrete(im, u)
                                                      : simulate_sup_continuous(im, u);
}

BootstrapDraws bootstrap_draws(const InfluenceMatrix& im, const MultiplierSpec& spec) {
    BootstrapDraws draws;
    draws.sup_values.assign(spec.reps, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(spec.reps); ++r) {
        const auto u = draw_multipliers(im.n, spec, static_cast<std::uint32_t>(r));
        draws.sup_values[static_cast<std::size_t>(r)] = simulate_sup(im, u);
    }
    return draws;
}

double critical_value(const BootstrapDraws& draws, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidAlpha, std::to_string(alpha));
    if (draws.sup_values.empty()) fail(ErrorCode::EmptyInput, "no bootstrap draws");
    const std::size_t m = draws.sup_values.size();
    auto rank = static_cast<std::size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(m)));
    rank = std::min(std::max<std::size_t>(rank, 1), m);
    std::vector<double> sorted(draws.sup_values);
    std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
    return sorted[rank - 1];
}

double p_value(const BootstrapDraws& draws, double statistic) {
    if (draws.sup_values.empty()) fail(ErrorCode::EmptyInput, "no bootstrap draws");
    std::size_t count = 0;
    for (double v : draws.sup_values) count += v >= statistic ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(draws.sup_values.size());
}

int configure_threads(int requested) {
    int threads = requested;
    if (threads <= 0) {
        if (const char* env = std::getenv("HETFX_THREADS")) {
            threads = std::atoi(env);
        }
    }
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    return threads > 0 ? threads : omp_get_max_threads();
#else
    return 1;
#endif
}

TestReport run_test(const Dataset& data, const RunConfig& config) {
    configure_threads(config.threads);

    TestBranch branch = config.branch;
    if (branch == TestBranch::auto_detect)
        branch = data.all_discrete() ? TestBranch::discrete : TestBranch::continuous;
    if (branch == TestBranch::continuous && !data.scalar_continuous())
        fail(ErrorCode::UnsupportedCovariateMix,
             "continuous branch requires one continuous covariate");
    if (branch == TestBranch::discrete && !data.all_discrete())
        fail(ErrorCode::UnsupportedCovariateMix,
             "discrete branch requires discrete covariates");

    TestReport report;
    report.n = data.n();
    report.bootstrap_reps = config.multiplier.reps;
    report.seed = config.multiplier.seed;
    report.branch_used = branch;
    report.config_echo = config;

    InfluenceMatrix influence;
    if (branch == TestBranch::discrete) {
        const DeltaTable table = delta_discrete(data, config.relevance_tol);
        const auto w_hat = construct_w(data, table);
        const Grid grid = make_grid_discrete(data, w_hat, config.grid_w);
        const double h_w = config.q_bandwidth > 0.0
                               ? config.q_bandwidth
                               : silverman_bandwidth(w_hat, -0.2, 1.0);
        report.statistic = ks_statistic_discrete(data, w_hat, grid);
        influence = influence_discrete(data, w_hat, grid, h_w, config.relevance_tol,
                                       config.kappa_truncate_at_zero);
    } else {
        KernelSpec stage = config.kernel;
        if (stage.bandwidth_rule == KernelSpec::Rule::silverman)
            stage.exponent = config.stage1_exponent;
        const double h = resolve_bandwidth(stage, data.x[0]);
        const double h_q = config.q_bandwidth > 0.0 ? config.q_bandwidth : h;
        const DeltaSeries series = delta_continuous(data, h, config.relevance_tol);
        const auto w_hat = construct_w(data, series);
        const GFunctional gf = build_g_functional(data, w_hat, h, h_q, config.q_floor);
        const Grid grid = make_grid_continuous(data, w_hat, config.grid_w, config.grid_x);
        report.statistic = ks_statistic_continuous(data, w_hat, gf, grid,
                                                   config.w_support_quantile);
        influence = influence_continuous(data, w_hat, gf, grid, config.phi_sign,
                                         config.w_support_quantile, config.relevance_tol);
    }
    report.grid_sizes = {influence.w_count(), influence.x_count()};

    const BootstrapDraws draws = bootstrap_draws(influence, config.multiplier);
    report.p_value = p_value(draws, report.statistic);
    std::vector<double> alphas = config.alphas;
    for (double a : {0.01, 0.05, 0.10})
        if (std::find(alphas.begin(), alphas.end(), a) == alphas.end()) alphas.push_back(a);
    for (double a : alphas) report.critical_values[a] = critical_value(draws, a);
    return report;
}

}  // namespace hetfx
