#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/rng.hpp"
#include "hetfx/types.hpp"

namespace testutil {

// Runs fn and returns the hetfx error code it threw, or nullopt if it
// completed. Lets assertions pin the exact code, not just "it threw".
inline std::optional<hetfx::ErrorCode> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const hetfx::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Builds a dataset from (y, d, z, x...) rows with a single covariate kind.
inline hetfx::Dataset make_data(const std::vector<std::vector<double>>& rows,
                                hetfx::CovariateKind kind = hetfx::CovariateKind::discrete) {
    return hetfx::validate_dataset(rows, {kind});
}

// Random dataset with both instrument arms guaranteed and a strong first
// stage (D follows Z with noise), suitable for property checks.
inline hetfx::Dataset random_data(std::size_t n, hetfx::CovariateKind kind,
                                  std::uint64_t seed, int x_levels = 3) {
    hetfx::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = kind == hetfx::CovariateKind::discrete
                             ? std::floor(rng.uniform() * x_levels) + 1.0
                             : rng.uniform();
        const double z = i < 2 ? static_cast<double>(i) : (rng.uniform() < 0.5 ? 1.0 : 0.0);
        const double d = (z == 1.0 && rng.uniform() < 0.8) ? 1.0 : 0.0;
        const double y = d * x + x * rng.uniform() + 0.2 * rng.normal();
        rows.push_back({y, d, z, x});
    }
    return make_data(rows, kind);
}

// Swaps the instrument arms of every record.
inline hetfx::Dataset relabel_z(const hetfx::Dataset& data) {
    std::vector<hetfx::Observation> records;
    records.reserve(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        hetfx::Observation o = data.record(i);
        o.z = o.z ? 0 : 1;
        records.push_back(std::move(o));
    }
    return hetfx::validate_dataset(std::move(records), data.kinds);
}

}  // namespace testutil
