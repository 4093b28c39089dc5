#include "hetfx/ks_discrete.hpp"

#include <algorithm>
#include <cmath>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/kernel.hpp"

namespace hetfx {

namespace {

struct CellArms {
    std::vector<double> w0, w1;  // cell member W values per arm, sorted
};

std::vector<CellArms> split_cells(const Dataset& data, const std::vector<double>& w_hat,
                                  const CellIndex& cells) {
    std::vector<CellArms> out(cells.cell_count());
    for (std::size_t c = 0; c < cells.cell_count(); ++c) {
        for (std::uint32_t i : cells.members[c])
            (data.z[i] ? out[c].w1 : out[c].w0).push_back(w_hat[i]);
        if (out[c].w0.empty() || out[c].w1.empty())
            fail(ErrorCode::EmptyCell,
                 "cell x=" + cells.label(c) + " missing an instrument arm");
        std::sort(out[c].w0.begin(), out[c].w0.end());
        std::sort(out[c].w1.begin(), out[c].w1.end());
    }
    return out;
}

double frac_leq(const std::vector<double>& sorted, double w) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), w);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

double conditional_ecdf(const std::vector<double>& w_hat,
                        const std::vector<std::uint32_t>& mask, double w) {
    if (mask.empty()) fail(ErrorCode::EmptyMask, "conditional_ecdf over empty subset");
    std::size_t count = 0;
    for (std::uint32_t i : mask) count += w_hat[i] <= w ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(mask.size());
}

Grid make_grid_discrete(const Dataset& data, const std::vector<double>& w_hat,
                        std::uint32_t w_count) {
    const CellIndex cells = build_cells(data);
    Grid grid;
    GridAxis w_axis = make_grid(w_hat, w_count);
    grid.w_points = std::move(w_axis.points);
    grid.degenerate_w = w_axis.degenerate;
    grid.x_points.reserve(cells.cell_count());
    for (std::size_t c = 0; c < cells.cell_count(); ++c)
        grid.x_points.push_back(data.x_dim() == 1 ? cells.cell_values[c][0]
                                                  : static_cast<double>(c));
    return grid;
}

double ks_statistic_discrete(const Dataset& data, const std::vector<double>& w_hat,
                             const Grid& grid) {
    const CellIndex cells = build_cells(data);
    const auto arms = split_cells(data, w_hat, cells);
    double best = 0.0;
    for (const auto& cell : arms) {
        // Evaluate on the same grid the bootstrap process scans: the test
        // inverts the distribution of the grid supremum, and an index set
        // richer than the bootstrap's (e.g. every sample value, where the
        // exact step-function sup lives) makes the statistic stochastically
        // larger than the process its critical values describe, inflating
        // finite-sample size well past nominal.
        for (double w : grid.w_points)
            best = std::max(best, std::fabs(frac_leq(cell.w0, w) - frac_leq(cell.w1, w)));
    }
    return std::sqrt(static_cast<double>(data.n())) * best;
}

double kappa_hat(const Dataset& data, const std::vector<double>& w_hat,
                 const CellIndex& cells, std::size_t cell, double w,
                 double density_bandwidth, double relevance_tol) {
    std::uint32_t cnt[2] = {0, 0};
    double untreated_kernel[2] = {0.0, 0.0};
    double d_sum[2] = {0.0, 0.0};
    for (std::uint32_t i : cells.members[cell]) {
        const int arm = data.z[i];
        ++cnt[arm];
        d_sum[arm] += data.d[i];
        if (!data.d[i])
            untreated_kernel[arm] += kernel_weight((w_hat[i] - w) / density_bandwidth);
    }
    if (cnt[0] == 0 || cnt[1] == 0)
        fail(ErrorCode::EmptyCell, "cell x=" + cells.label(cell) + " missing an arm");
    const double p0 = d_sum[0] / cnt[0];
    const double p1 = d_sum[1] / cnt[1];
    if (std::fabs(p1 - p0) <= relevance_tol)
        fail(ErrorCode::WeakInstrument, "cell x=" + cells.label(cell));
    const double f0 = untreated_kernel[0] / (cnt[0] * density_bandwidth);
    const double f1 = untreated_kernel[1] / (cnt[1] * density_bandwidth);
    return -(f1 - f0) / (p1 - p0);
}

InfluenceMatrix influence_discrete(const Dataset& data, const std::vector<double>& w_hat,
                                   const Grid& grid, double density_bandwidth,
                                   double relevance_tol, bool kappa_nonneg) {
    const std::size_t n = data.n();
    const std::size_t nw = grid.w_points.size();
    const CellIndex cells = build_cells(data);
    const std::size_t n_cells = cells.cell_count();
    if (grid.x_points.size() != n_cells)
        fail(ErrorCode::DimensionMismatch, "grid x_points do not match covariate cells");

    InfluenceMatrix im;
    im.kind = InfluenceMatrix::Kind::discrete;
    im.grid = grid;
    im.n = n;
    im.field.assign(n * nw, 0.0);
    im.cell_of = cells.cell_of;
    im.cell_of_xpts.resize(n_cells);
    for (std::uint32_t c = 0; c < n_cells; ++c) im.cell_of_xpts[c] = c;

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(n_cells); ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        const auto& members = cells.members[c];
        const double n_cell = static_cast<double>(members.size());

        std::uint32_t cnt[2] = {0, 0};
        double d_sum[2] = {0.0, 0.0};
        double w_mean = 0.0;
        std::vector<double> pooled;
        pooled.reserve(members.size());
        for (std::uint32_t i : members) {
            const int arm = data.z[i];
            ++cnt[arm];
            d_sum[arm] += data.d[i];
            w_mean += w_hat[i];
            pooled.push_back(w_hat[i]);
        }
        w_mean /= n_cell;
        std::sort(pooled.begin(), pooled.end());

        const double p0 = d_sum[0] / cnt[0];
        const double p1 = d_sum[1] / cnt[1];
        const double gap = p1 - p0;

        // Per-arm cell probabilities P(x, z) = N_xz / n.
        const double inv_p_xz0 = static_cast<double>(n) / cnt[0];
        const double inv_p_xz1 = static_cast<double>(n) / cnt[1];

        std::vector<double> f_pool(nw), kappa(nw);
        for (std::size_t wi = 0; wi < nw; ++wi) {
            const double w = grid.w_points[wi];
            f_pool[wi] = frac_leq(pooled, w);
            double untreated_kernel[2] = {0.0, 0.0};
            for (std::uint32_t i : members)
                if (!data.d[i])
                    untreated_kernel[data.z[i]] +=
                        kernel_weight((w_hat[i] - w) / density_bandwidth);
            const double f0 = untreated_kernel[0] / (cnt[0] * density_bandwidth);
            const double f1 = untreated_kernel[1] / (cnt[1] * density_bandwidth);
            kappa[wi] = -(f1 - f0) / gap;
            if (kappa_nonneg && kappa[wi] < 0.0) kappa[wi] = 0.0;
        }
        if (std::fabs(gap) <= relevance_tol) continue;  // flagged after the loop

        for (std::uint32_t i : members) {
            const double b = data.z[i] ? -inv_p_xz1 : inv_p_xz0;
            const double w_dev = w_hat[i] - w_mean;
            double* row = im.field.data() + static_cast<std::size_t>(i) * nw;
            for (std::size_t wi = 0; wi < nw; ++wi) {
                const double ind = w_hat[i] <= grid.w_points[wi] ? 1.0 : 0.0;
                row[wi] = (ind - f_pool[wi]) * b + kappa[wi] * w_dev * b;
            }
        }
    }

    // Re-check relevance outside the parallel region so the error carries
    // a cell label (throwing inside an OpenMP loop is not allowed).
    for (std::size_t c = 0; c < n_cells; ++c) {
        double d_sum[2] = {0.0, 0.0};
        std::uint32_t cnt[2] = {0, 0};
        for (std::uint32_t i : cells.members[c]) {
            ++cnt[data.z[i]];
            d_sum[data.z[i]] += data.d[i];
        }
        if (cnt[0] == 0 || cnt[1] == 0)
            fail(ErrorCode::EmptyCell, "cell x=" + cells.label(c) + " missing an arm");
        if (std::fabs(d_sum[1] / cnt[1] - d_sum[0] / cnt[0]) <= relevance_tol)
            fail(ErrorCode::WeakInstrument, "cell x=" + cells.label(c));
    }
    return im;
}

}  // namespace hetfx
