#include "hetfx/late.hpp"

#include <cmath>
#include <cstdlib>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/kernel.hpp"

namespace hetfx {

DeltaTable delta_discrete(const Dataset& data, double relevance_tol) {
    DeltaTable table;
    table.cells = build_cells(data);
    const std::size_t cells = table.cells.cell_count();
    table.values.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        double sy[2] = {0.0, 0.0}, sd[2] = {0.0, 0.0};
        std::uint32_t cnt[2] = {0, 0};
        for (std::uint32_t i : table.cells.members[c]) {
            const int arm = data.z[i];
            sy[arm] += data.y[i];
            sd[arm] += data.d[i];
            ++cnt[arm];
        }
        if (cnt[0] == 0 || cnt[1] == 0)
            fail(ErrorCode::EmptyCell, "cell x=" + table.cells.label(c) + " arm z=" +
                                           std::to_string(cnt[0] == 0 ? 0 : 1) + " empty");
        DeltaCell& out = table.values[c];
        out.n0 = cnt[0];
        out.n1 = cnt[1];
        out.mu0 = sy[0] / cnt[0];
        out.mu1 = sy[1] / cnt[1];
        out.p0 = sd[0] / cnt[0];
        out.p1 = sd[1] / cnt[1];
        const double gap = out.p1 - out.p0;
        if (std::fabs(gap) <= relevance_tol)
            fail(ErrorCode::WeakInstrument,
                 "cell x=" + table.cells.label(c) + " propensity gap " + std::to_string(gap));
        out.delta = (out.mu1 - out.mu0) / gap;
    }
    return table;
}

DeltaSeries delta_continuous(const Dataset& data, double bandwidth, double relevance_tol) {
    const std::size_t n = data.n();
    if (n < 4) fail(ErrorCode::EmptyInput, "continuous first stage needs n >= 4");
    const auto& x = data.x[0];
    DeltaSeries series;
    series.delta.assign(n, 0.0);
    int bad_arm = -1;
    std::size_t bad_i = 0;
    bool weak = false;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        // One fused pass per record: arm-wise kernel mass and weighted sums
        // of Y and D over j != i, in ascending j order.
        double s[2] = {0.0, 0.0}, sy[2] = {0.0, 0.0}, sd[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = kernel_weight((x[j] - x[i]) / bandwidth);
            const int arm = data.z[j];
            s[arm] += w;
            sy[arm] += w * data.y[j];
            sd[arm] += w * data.d[j];
        }
        if (s[0] < kWeightFloor || s[1] < kWeightFloor) {
#pragma omp critical
            {
                bad_arm = s[0] < kWeightFloor ? 0 : 1;
                bad_i = i;
            }
            continue;
        }
        const double gap = sd[1] / s[1] - sd[0] / s[0];
        if (std::fabs(gap) <= relevance_tol) {
#pragma omp critical
            {
                weak = true;
                bad_i = i;
            }
            continue;
        }
        series.delta[i] = (sy[1] / s[1] - sy[0] / s[0]) / gap;
    }
    if (bad_arm >= 0)
        fail(ErrorCode::EmptyArm, "record " + std::to_string(bad_i) + " has no arm-" +
                                      std::to_string(bad_arm) + " kernel mass");
    if (weak)
        fail(ErrorCode::WeakInstrument,
             "local propensity gap below tolerance at record " + std::to_string(bad_i));
    return series;
}

std::vector<double> construct_w(const Dataset& data, const DeltaTable& table) {
    const std::size_t n = data.n();
    if (table.cells.cell_of.size() != n)
        fail(ErrorCode::MissingCell, "delta table does not cover the dataset");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double delta = table.values[table.cells.cell_of[i]].delta;
        w[i] = data.y[i] + (data.d[i] ? 0.0 : delta);
    }
    return w;
}

std::vector<double> construct_w(const Dataset& data, const DeltaSeries& series) {
    const std::size_t n = data.n();
    if (series.delta.size() != n)
        fail(ErrorCode::MissingCell, "delta series does not cover the dataset");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = data.y[i] + (data.d[i] ? 0.0 : series.delta[i]);
    return w;
}

}  // namespace hetfx
