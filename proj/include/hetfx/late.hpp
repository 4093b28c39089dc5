#pragma once

#include <variant>
#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

// Per-cell first stage: arm means, propensities, and
// delta = (mu1 - mu0) / (p1 - p0) for every discrete covariate cell.
// Throws EmptyCell when a cell misses an instrument arm and
// WeakInstrument when |p1 - p0| <= relevance_tol.
DeltaTable delta_discrete(const Dataset& data, double relevance_tol = 0.01);

// Per-observation first stage for a scalar continuous covariate, from
// leave-one-out Nadaraya-Watson arm means of Y and D at each X_i.
DeltaSeries delta_continuous(const Dataset& data, double bandwidth,
                             double relevance_tol = 0.01);

// W_i = Y_i + (1 - D_i) * delta(X_i).
std::vector<double> construct_w(const Dataset& data, const DeltaTable& table);
std::vector<double> construct_w(const Dataset& data, const DeltaSeries& series);

}  // namespace hetfx
