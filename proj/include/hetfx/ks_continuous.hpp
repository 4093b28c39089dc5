#pragma once

#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

// lambda(t) = max(-t, 0): the integrated-CDF kink function. Nonnegative,
// convex, piecewise linear with the single kink at 0.
inline double lambda(double t) { return t < 0.0 ? -t : 0.0; }

// Per-observation caches for the primitive-CDF functional
//   G(w, x; z) = (1/n) sum_i 1(X_i <= x, Z_i = z) q(X_i, 1-z) lambda(W_i - w).
struct GFunctional {
    std::vector<double> q0, q1;  // leave-one-out densities q(X_i, z)
    std::vector<double> w_hat;
    double h = 0.0;    // covariate-axis smoothing bandwidth
    double h_q = 0.0;  // density bandwidth (defaults to h)
};

// Builds the q caches with one O(n^2) kernel pass. Throws DensityFloor
// when any q(X_i, z) falls at or below q_floor.
GFunctional build_g_functional(const Dataset& data, const std::vector<double>& w_hat,
                               double h, double h_q, double q_floor = 1e-8);

// Direct O(n) evaluation of G(w, x; z). Reference/inspection path; the
// statistic and bootstrap use prefix-sum evaluation over the same sums.
double g_hat(const GFunctional& gf, const Dataset& data, double w, double x, int z);

// Per-x-column cap on the w axis: the type-7 empirical quantile (at
// `quantile`) of W over engaged records (X_i <= x). quantile >= 1 caps at
// the engaged maximum; quantile <= 0 disables capping. Returned vector is
// aligned with grid.x_points; columns with w above the cap are excluded
// from every supremum (statistic and bootstrap alike).
std::vector<double> support_caps(const Dataset& data, const std::vector<double>& w_hat,
                                 const Grid& grid, double quantile);

// sup over the capped grid region of sqrt(n) |G(w,x;0) - G(w,x;1)|.
// For n <= 5000 the w-supremum is exact on each column: the arm difference
// is piecewise linear in w with kinks at engaged sample values, so kinks,
// grid points and the cap endpoint are all evaluated.
double ks_statistic_continuous(const Dataset& data, const std::vector<double>& w_hat,
                               const GFunctional& gf, const Grid& grid,
                               double cap_quantile);

// Arm difference of smoothed untreated sub-CDFs against the local
// propensity gap, evaluated at each record's covariate value:
//   kappa_c(w, X_i) = -(F(w,0|X_i,1) - F(w,0|X_i,0)) / (p(X_i,1) - p(X_i,0))
// with F(w,0|x,z) the all-j Nadaraya-Watson mean of 1(W_j <= w, D_j = 0)
// within arm z and p the same construction applied to D.
std::vector<double> kappa_c_hat(const Dataset& data, const std::vector<double>& w_hat,
                                double w, double h, double relevance_tol = 0.01);

// Estimated influence field on the grid. With s_i = q(X_i,1) for arm-0
// records and -q(X_i,0) for arm-1 records (the bracket
// [1(z=0)/q(X,0) - 1(z=1)/q(X,1)] q(X,0) q(X,1) in product form), the
// per-record field at w is
//   population (default):  [lam_i(w) - E(lam|X_i)] s_i + kappa_c (W_i - E(W|X_i)) s_i
//        with lam_i(w) = lambda(W_i - w), the statistic's own integrand;
//   paper_estimator:       [lam'_i(w) - E(lam'|X_i)] s_i - kappa_c (W_i - E(W|X_i)) s_i
//        with lam'_i(w) = lambda(w - W_i), the mirrored orientation.
// Entry (i, (w,x)) multiplies the field by 1(X_i <= x); columns above the
// support cap are masked out.
InfluenceMatrix influence_continuous(const Dataset& data, const std::vector<double>& w_hat,
                                     const GFunctional& gf, const Grid& grid,
                                     PhiSign phi_sign, double cap_quantile,
                                     double relevance_tol = 0.01);

// Grid for the continuous branch: both axes span sample ranges.
Grid make_grid_continuous(const Dataset& data, const std::vector<double>& w_hat,
                          std::uint32_t w_count, std::uint32_t x_count);

}  // namespace hetfx
