// Benchmark: optimized (OpenMP, shared-accumulator) kernels against the
// serial textbook reference implementations, with agreement checks.
// Build target: hetfx_bench. Not registered with ctest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "hetfx/bootstrap.hpp"
#include "hetfx/dgp.hpp"
#include "hetfx/kernel.hpp"
#include "hetfx/ks_continuous.hpp"
#include "hetfx/ks_discrete.hpp"
#include "hetfx/late.hpp"
#include "hetfx/reference.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

void report(const char* name, std::size_t n, double serial_ms, double fast_ms,
            double diff) {
    std::printf("  %-28s n=%-5zu serial %9.2f ms   optimized %9.2f ms   x%5.1f   "
                "max|diff| %.3g\n",
                name, n, serial_ms, fast_ms, serial_ms / std::max(fast_ms, 1e-9), diff);
}

void bench_continuous(std::size_t n) {
    hetfx::DgpSpec spec;
    spec.id = 3;
    spec.n = n;
    spec.seed = 20260814;
    const hetfx::Dataset data = hetfx::gen_dgp(spec);

    const double h = hetfx::silverman_bandwidth(data.x[0], -1.0 / 3.0);

    hetfx::DeltaSeries series_fast, series_ref;
    const double t_delta_fast =
        time_ms([&] { series_fast = hetfx::delta_continuous(data, h); });
    const double t_delta_ref = time_ms(
        [&] { series_ref = hetfx::reference::delta_continuous_serial(data, h); });
    report("first stage (continuous)", n, t_delta_ref, t_delta_fast,
           max_abs_diff(series_fast.delta, series_ref.delta));

    const auto w_hat = hetfx::construct_w(data, series_fast);

    hetfx::GFunctional gf_fast, gf_ref;
    const double t_q_fast =
        time_ms([&] { gf_fast = hetfx::build_g_functional(data, w_hat, h, h); });
    const double t_q_ref =
        time_ms([&] { gf_ref = hetfx::reference::q_caches_serial(data, w_hat, h, h); });
    report("density caches", n, t_q_ref, t_q_fast,
           std::max(max_abs_diff(gf_fast.q0, gf_ref.q0),
                    max_abs_diff(gf_fast.q1, gf_ref.q1)));

    const hetfx::Grid grid = hetfx::make_grid_continuous(data, w_hat, 40, 40);

    double stat_fast = 0.0, stat_ref = 0.0;
    const double t_stat_fast = time_ms(
        [&] { stat_fast = hetfx::ks_statistic_continuous(data, w_hat, gf_fast, grid, 0.85); });
    const double t_stat_ref = time_ms([&] {
        stat_ref =
            hetfx::reference::statistic_continuous_serial(data, w_hat, gf_fast, grid, 0.85);
    });
    report("statistic (continuous)", n, t_stat_ref, t_stat_fast,
           std::fabs(stat_fast - stat_ref));

    hetfx::InfluenceMatrix im_fast, im_ref;
    const double t_inf_fast = time_ms([&] {
        im_fast = hetfx::influence_continuous(data, w_hat, gf_fast, grid,
                                              hetfx::PhiSign::population, 0.85);
    });
    const double t_inf_ref = time_ms([&] {
        im_ref = hetfx::reference::influence_continuous_serial(
            data, w_hat, gf_fast, grid, hetfx::PhiSign::population, 0.85);
    });
    report("influence field (cont.)", n, t_inf_ref, t_inf_fast,
           max_abs_diff(im_fast.field, im_ref.field));

    hetfx::MultiplierSpec mult;
    mult.reps = 100;
    mult.seed = 7;
    double sup_diff = 0.0;
    const double t_sup_fast = time_ms([&] {
        for (std::uint32_t r = 0; r < mult.reps; ++r) {
            const auto u = hetfx::draw_multipliers(im_fast.n, mult, r);
            (void)hetfx::simulate_sup(im_fast, u);
        }
    });
    const double t_sup_ref = time_ms([&] {
        for (std::uint32_t r = 0; r < mult.reps; ++r) {
            const auto u = hetfx::draw_multipliers(im_fast.n, mult, r);
            const double a = hetfx::simulate_sup(im_fast, u);
            const double b = hetfx::reference::simulate_sup_serial(im_fast, u);
            sup_diff = std::max(sup_diff, std::fabs(a - b));
        }
    });
    report("bootstrap sup x100 (cont.)", n, t_sup_ref - t_sup_fast, t_sup_fast, sup_diff);
}

void bench_discrete(std::size_t n) {
    hetfx::DgpSpec spec;
    spec.id = 1;
    spec.n = n;
    spec.seed = 20260814;
    const hetfx::Dataset data = hetfx::gen_dgp(spec);

    const hetfx::DeltaTable table = hetfx::delta_discrete(data);
    const auto w_hat = hetfx::construct_w(data, table);
    const hetfx::Grid grid = hetfx::make_grid_discrete(data, w_hat, 40);
    const double h_w = hetfx::silverman_bandwidth(w_hat);

    hetfx::InfluenceMatrix im_fast, im_ref;
    const double t_inf_fast =
        time_ms([&] { im_fast = hetfx::influence_discrete(data, w_hat, grid, h_w); });
    const double t_inf_ref = time_ms([&] {
        im_ref = hetfx::reference::influence_discrete_serial(data, w_hat, grid, h_w);
    });
    report("influence field (discrete)", n, t_inf_ref, t_inf_fast,
           max_abs_diff(im_fast.field, im_ref.field));

    hetfx::MultiplierSpec mult;
    mult.reps = 100;
    mult.seed = 7;
    double sup_diff = 0.0;
    const double t_sup_fast = time_ms([&] {
        for (std::uint32_t r = 0; r < mult.reps; ++r) {
            const auto u = hetfx::draw_multipliers(im_fast.n, mult, r);
            (void)hetfx::simulate_sup(im_fast, u);
        }
    });
    const double t_sup_ref = time_ms([&] {
        for (std::uint32_t r = 0; r < mult.reps; ++r) {
            const auto u = hetfx::draw_multipliers(im_fast.n, mult, r);
            const double a = hetfx::simulate_sup(im_fast, u);
            const double b = hetfx::reference::simulate_sup_serial(im_fast, u);
            sup_diff = std::max(sup_diff, std::fabs(a - b));
        }
    });
    report("bootstrap sup x100 (disc.)", n, t_sup_ref - t_sup_fast, t_sup_fast, sup_diff);
}

}  // namespace

int main() {
    const int threads = hetfx::configure_threads(0);
    std::printf("hetfx kernel benchmark (%d worker thread%s)\n", threads,
                threads == 1 ? "" : "s");
    std::printf("discrete branch\n");
    for (std::size_t n : {500, 2000}) bench_discrete(n);
    std::printf("continuous branch\n");
    for (std::size_t n : {400, 1200}) bench_continuous(n);
    return 0;
}
