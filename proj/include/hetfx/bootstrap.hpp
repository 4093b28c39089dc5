#pragma once

#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

struct BootstrapDraws {
    std::vector<double> sup_values;  // one per replicate, indexed by rep
};

// i.i.d. multipliers for replicate `rep_index`. Deterministic in
// (spec.seed, rep_index) and independent of scheduling.
std::vector<double> draw_multipliers(std::size_t n, const MultiplierSpec& spec,
                                     std::uint32_t rep_index);

// max over live grid columns of |(1/sqrt n) sum_i U_i * entry(i, col)|,
// computed through the factored influence layout (prefix sums over the
// engagement order). Throws DimensionMismatch.
double simulate_sup(const InfluenceMatrix& influence, const std::vector<double>& multipliers);

// All bootstrap sup draws; replicates are independent tasks.
BootstrapDraws bootstrap_draws(const InfluenceMatrix& influence, const MultiplierSpec& spec);

// Smallest draw q with empirical P(sup <= q) >= 1 - alpha: the order
// statistic at rank ceil((1 - alpha) * reps). Throws InvalidAlpha.
double critical_value(const BootstrapDraws& draws, double alpha);

// Bootstrap exceedance probability (1/reps) sum 1(sup >= statistic);
// the weak inequality makes ties conservative.
double p_value(const BootstrapDraws& draws, double statistic);

// End-to-end test: first stage, transformed outcome, statistic, influence
// field, bootstrap, critical values and p-value. Branch selection follows
// config.branch or, on auto_detect, the covariate kinds.
TestReport run_test(const Dataset& data, const RunConfig& config);

// Applies config.threads / HETFX_THREADS to the OpenMP runtime; returns
// the effective worker count.
int configure_threads(int requested);

}  // namespace hetfx
