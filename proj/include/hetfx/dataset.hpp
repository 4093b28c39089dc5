#pragma once

#include <vector>

#include "hetfx/types.hpp"

namespace hetfx {

// Validates raw rows (y, d, z, x...) into a Dataset. Rows must be
// rectangular with dimension 3 + |kinds|. Throws NonBinaryTreatment,
// NonBinaryInstrument, NonFiniteValue, DegenerateInstrument,
// UnsupportedCovariateMix, EmptyInput, DimensionMismatch.
Dataset validate_dataset(const std::vector<std::vector<double>>& raw,
                         const std::vector<CovariateKind>& kinds);

Dataset validate_dataset(std::vector<Observation> records,
                         const std::vector<CovariateKind>& kinds);

// `count` equally spaced points spanning [min(values), max(values)].
// A zero-width range yields the single point with `degenerate` set.
struct GridAxis {
    std::vector<double> points;
    bool degenerate = false;
};
GridAxis make_grid(const std::vector<double>& values, std::uint32_t count);

// Groups records by joint discrete covariate value. Cell ids are assigned
// in lexicographic order of the covariate tuples, so the partition is a
// pure function of the dataset.
CellIndex build_cells(const Dataset& data);

}  // namespace hetfx
