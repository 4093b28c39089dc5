#pragma once

#include <optional>
#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

// Gaussian kernel density value at u: exp(-u^2/2)/sqrt(2*pi).
double kernel_weight(double u);

// Robust plug-in spread: 1.06 * min(sd, IQR/1.34); if the IQR is zero
// (heavily tied data) the sd alone is used. Throws DegenerateBandwidth
// on constant samples. IQR uses the linear-interpolation quantile
// convention (type 7).
double silverman_factor(const std::vector<double>& sample);

// h = silverman_factor * n^exponent * scale. The classic rule has
// exponent -1/5; callers may undersmooth via the exponent.
double silverman_bandwidth(const std::vector<double>& sample, double exponent = -0.2,
                           double scale = 1.0);

// Resolves a KernelSpec against a sample.
double resolve_bandwidth(const KernelSpec& spec, const std::vector<double>& sample);

// Leave-one-out Nadaraya-Watson mean of `values` over records j != i with
// Z_j == z, weighted by K((X_j - X_i)/h). Scalar continuous X assumed.
// Throws EmptyArm if no such j exists or all weights underflow.
double loo_nw_mean(const Dataset& data, const std::vector<double>& values, std::size_t i,
                   int z, double h);

// Leave-one-out density-scale estimate at X_i for arm z:
// (1/((n-1)h)) * sum_{j != i, Z_j = z} K((X_j - X_i)/h). Zero is legal.
double loo_density(const Dataset& data, std::size_t i, int z, double h);

// Plug-in Nadaraya-Watson mean of `values` at point x over all records
// (optionally restricted to arm z). Throws ZeroWeightSum when the weight
// mass vanishes.
double nw_at_point(const Dataset& data, const std::vector<double>& values, double x,
                   std::optional<int> z, double h);

// Weight sums below this threshold are treated as zero mass.
inline constexpr double kWeightFloor = 1e-300;

}  // namespace hetfx
