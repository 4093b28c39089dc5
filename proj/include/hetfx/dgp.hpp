#pragma once

#include "hetfx/types.hpp"

namespace hetfx {

// Synthetic sample for the Monte Carlo harness.
//
// X ~ uniform{1..5} (specs 1, 2) or uniform[0,1] (specs 3, 4);
// eps, u ~ independent uniform(0,1); eta = rho*eps + sqrt(1-rho^2)*u;
// Z ~ Bernoulli(pz) independent of X; D = 1(Z - eta > 0);
// Y = D*X + X*eps (1, 3) or D*X + (1 + gamma*D)*X*eps (2, 4).
// Per-record draw order is X, eps, u, Z; gamma = 0 collapses spec 2 to 1
// and 4 to 3 bit-for-bit at the same seed.
Dataset gen_dgp(const DgpSpec& spec);

// Derives the replicate-r seed from a master seed; replicates are
// independent substreams so partial runs and parallel schedules agree.
std::uint64_t replicate_seed(std::uint64_t master, std::uint32_t r);

// Runs `reps` replicates of (generate, test) and aggregates rejection
// rates at every config alpha. A replicate rejects when its bootstrap
// p-value falls strictly below alpha. Estimation failures are excluded
// from the rate and surfaced in RejectionRow::errors.
RejectionTable monte_carlo(const DgpSpec& spec_template, std::uint32_t reps,
                           const RunConfig& config);

}  // namespace hetfx
