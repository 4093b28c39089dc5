#pragma once

#include <vector>

#include "hetfx/types.hpp"
#include "hetfx/ks_continuous.hpp"

namespace hetfx::reference {

// Serial, textbook-style implementations of the heavy kernels. Each mirrors
// a production routine through the most direct formula available -- per-record
// smoother calls, dense influence-table walks, per-column suprema -- with no
// shared accumulator tricks and no parallelism. They exist to pin down the
// optimized paths in tests and to serve as the baseline in the benchmark
// target; they are not meant to be fast.

// Per-cell first stage recomputed with independent per-arm passes.
DeltaTable delta_discrete_serial(const Dataset& data, double relevance_tol = 0.01);

// Per-record first stage assembled from single leave-one-out smoother calls.
DeltaSeries delta_continuous_serial(const Dataset& data, double bandwidth,
                                    double relevance_tol = 0.01);

// Leave-one-out density caches assembled one record and arm at a time.
GFunctional q_caches_serial(const Dataset& data, const std::vector<double>& w_hat,
                            double h, double h_q, double q_floor = 1e-8);

// Supremum by direct conditional-ECDF evaluation per cell and candidate w.
double statistic_discrete_serial(const Dataset& data, const std::vector<double>& w_hat,
                                 const Grid& grid);

// Supremum by direct functional evaluation per grid column and candidate w.
double statistic_continuous_serial(const Dataset& data, const std::vector<double>& w_hat,
                                   const GFunctional& gf, const Grid& grid,
                                   double cap_quantile);

// Influence field from per-(record, grid-point) smoother calls.
InfluenceMatrix influence_discrete_serial(const Dataset& data,
                                          const std::vector<double>& w_hat,
                                          const Grid& grid, double density_bandwidth,
                                          double relevance_tol = 0.01);

InfluenceMatrix influence_continuous_serial(const Dataset& data,
                                            const std::vector<double>& w_hat,
                                            const GFunctional& gf, const Grid& grid,
                                            PhiSign phi_sign, double cap_quantile,
                                            double relevance_tol = 0.01);

// Bootstrap supremum through the dense entry(i, g) interface.
double simulate_sup_serial(const InfluenceMatrix& influence,
                           const std::vector<double>& multipliers);

}  // namespace hetfx::reference
