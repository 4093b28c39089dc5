#include "hetfx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hetfx/errors.hpp"

namespace hetfx {

namespace {

void check_mix(const std::vector<CovariateKind>& kinds) {
    if (kinds.empty()) fail(ErrorCode::EmptyInput, "no covariate coordinates declared");
    bool any_d = false, any_c = false;
    for (auto k : kinds) (k == CovariateKind::discrete ? any_d : any_c) = true;
    if (any_d && any_c)
        fail(ErrorCode::UnsupportedCovariateMix,
             "covariates must be all discrete or a single continuous coordinate");
    if (any_c && kinds.size() != 1)
        fail(ErrorCode::UnsupportedCovariateMix,
             "continuous covariates are limited to one coordinate");
}

void finish_validation(Dataset& ds) {
    const std::size_t n = ds.n();
    if (n == 0) fail(ErrorCode::EmptyInput, "dataset has no records");
    bool any0 = false, any1 = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ds.y[i]))
            fail(ErrorCode::NonFiniteValue, "outcome at record " + std::to_string(i));
        (ds.z[i] ? any1 : any0) = true;
        for (std::size_t c = 0; c < ds.x.size(); ++c)
            if (!std::isfinite(ds.x[c][i]))
                fail(ErrorCode::NonFiniteValue, "covariate " + std::to_string(c) +
                                                    " at record " + std::to_string(i));
    }
    if (!any0 || !any1)
        fail(ErrorCode::DegenerateInstrument, "all records share one instrument arm");
}

std::uint8_t as_binary(double v, ErrorCode code, const char* what, std::size_t row) {
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    fail(code, std::string(what) + " at record " + std::to_string(row) + " is " +
                   std::to_string(v));
}

}  // namespace

Dataset validate_dataset(const std::vector<std::vector<double>>& raw,
                         const std::vector<CovariateKind>& kinds) {
    check_mix(kinds);
    if (raw.empty()) fail(ErrorCode::EmptyInput, "no rows");
    const std::size_t width = 3 + kinds.size();
    Dataset ds;
    ds.kinds = kinds;
    ds.y.reserve(raw.size());
    ds.d.reserve(raw.size());
    ds.z.reserve(raw.size());
    ds.x.assign(kinds.size(), {});
    for (auto& col : ds.x) col.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].size() != width)
            fail(ErrorCode::DimensionMismatch,
                 "row " + std::to_string(i) + " has " + std::to_string(raw[i].size()) +
                     " fields, expected " + std::to_string(width));
        ds.y.push_back(raw[i][0]);
        ds.d.push_back(as_binary(raw[i][1], ErrorCode::NonBinaryTreatment, "treatment", i));
        ds.z.push_back(as_binary(raw[i][2], ErrorCode::NonBinaryInstrument, "instrument", i));
        for (std::size_t c = 0; c < kinds.size(); ++c) ds.x[c].push_back(raw[i][3 + c]);
    }
    finish_validation(ds);
    return ds;
}

Dataset validate_dataset(std::vector<Observation> records,
                         const std::vector<CovariateKind>& kinds) {
    check_mix(kinds);
    if (records.empty()) fail(ErrorCode::EmptyInput, "no records");
    Dataset ds;
    ds.kinds = kinds;
    ds.x.assign(kinds.size(), {});
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Observation& o = records[i];
        if (o.x.size() != kinds.size())
            fail(ErrorCode::DimensionMismatch, "record " + std::to_string(i) +
                                                   " covariate dimension mismatch");
        if (o.d > 1) fail(ErrorCode::NonBinaryTreatment, "record " + std::to_string(i));
        if (o.z > 1) fail(ErrorCode::NonBinaryInstrument, "record " + std::to_string(i));
        ds.y.push_back(o.y);
        ds.d.push_back(o.d);
        ds.z.push_back(o.z);
        for (std::size_t c = 0; c < kinds.size(); ++c) ds.x[c].push_back(o.x[c]);
    }
    finish_validation(ds);
    return ds;
}

GridAxis make_grid(const std::vector<double>& values, std::uint32_t count) {
    if (values.empty()) fail(ErrorCode::EmptyInput, "make_grid: empty value set");
    if (count < 2) fail(ErrorCode::InvalidAlpha, "make_grid: count must be >= 2");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "make_grid input");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    GridAxis axis;
    if (lo == hi) {
        axis.points = {lo};
        axis.degenerate = true;
        return axis;
    }
    axis.points.resize(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::uint32_t k = 0; k < count; ++k)
        axis.points[k] = lo + step * static_cast<double>(k);
    axis.points.front() = lo;  // exact endpoints regardless of rounding
    axis.points.back() = hi;
    return axis;
}

CellIndex build_cells(const Dataset& data) {
    const std::size_t n = data.n();
    std::map<std::vector<double>, std::uint32_t> ids;
    std::vector<std::vector<double>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> key(data.x_dim());
        for (std::size_t c = 0; c < data.x_dim(); ++c) key[c] = data.x[c][i];
        ids.emplace(key, 0);
        keys[i] = std::move(key);
    }
    CellIndex idx;
    idx.cell_values.reserve(ids.size());
    std::uint32_t next = 0;
    for (auto& [key, id] : ids) {
        id = next++;
        idx.cell_values.push_back(key);
    }
    idx.cell_of.resize(n);
    idx.members.resize(ids.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t c = ids[keys[i]];
        idx.cell_of[i] = c;
        idx.members[c].push_back(static_cast<std::uint32_t>(i));
    }
    return idx;
}

std::string CellIndex::label(std::size_t c) const {
    std::ostringstream os;
    const auto& v = cell_values[c];
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ',';
        os << v[k];
    }
    return os.str();
}

}  // namespace hetfx
