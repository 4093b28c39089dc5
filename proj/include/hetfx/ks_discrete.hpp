#pragma once

#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

// Fraction of masked values <= w. `mask` holds record indices into w_hat.
// Right-continuous and nondecreasing in w. Throws EmptyMask.
double conditional_ecdf(const std::vector<double>& w_hat,
                        const std::vector<std::uint32_t>& mask, double w);

// sup over covariate cells and grid w-points of
// sqrt(n) * |F(w | x, z=0) - F(w | x, z=1)|.
// The w-supremum is taken over the same grid the multiplier bootstrap
// scans, never over the (denser) sample values: critical values describe
// the grid supremum of the simulated process, so the statistic must rank
// against it on an identical index set. An exact step-function sup here
// is stochastically larger and over-rejects in finite samples.
// Throws EmptyCell when a cell misses an instrument arm.
double ks_statistic_discrete(const Dataset& data, const std::vector<double>& w_hat,
                             const Grid& grid);

// Difference of untreated outcome densities across instrument arms within
// a cell, scaled by the propensity gap:
//   kappa(w, x) = -(f(w, d=0 | x, z=1) - f(w, d=0 | x, z=0)) / (p(x,1) - p(x,0))
// where f(w, 0 | x, z) = (1 / (N_xz h_w)) sum over untreated cell members
// in arm z of K((W_i - w)/h_w).
double kappa_hat(const Dataset& data, const std::vector<double>& w_hat,
                 const CellIndex& cells, std::size_t cell, double w,
                 double density_bandwidth, double relevance_tol = 0.01);

// Estimated influence values on the grid. Entry (i, (w, x)) is zero unless
// record i lies in cell x; within its own cell it is
//   psi_i(w) + phi_i(w)
//   psi_i(w) = [1(W_i <= w) - Fpool(w | x)] * b_i
//   phi_i(w) = kappa(w, x) * (W_i - cell mean of W) * b_i
//   b_i      = 1(Z_i = 0)/P(x, 0) - 1(Z_i = 1)/P(x, 1)
// with Fpool the both-arm cell ECDF and P(x, z) = N_xz / n. When
// `kappa_nonneg` is set, negative kappa estimates are clamped to zero
// before entering phi (the population kappa is nonnegative).
InfluenceMatrix influence_discrete(const Dataset& data, const std::vector<double>& w_hat,
                                   const Grid& grid, double density_bandwidth,
                                   double relevance_tol = 0.01, bool kappa_nonneg = false);

// Grid for the discrete branch: w-axis spans the sample W range; x-axis
// carries one point per covariate cell (the support value itself for a
// scalar covariate, the cell id for joint cells).
Grid make_grid_discrete(const Dataset& data, const std::vector<double>& w_hat,
                        std::uint32_t w_count);

}  // namespace hetfx
