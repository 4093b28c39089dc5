#include "hetfx/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/kernel.hpp"
#include "hetfx/ks_discrete.hpp"

namespace hetfx::reference {

namespace {

std::vector<std::uint32_t> sort_indices(const std::vector<double>& v) {
    std::vector<std::uint32_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    return idx;
}

}  // namespace

DeltaTable delta_discrete_serial(const Dataset& data, double relevance_tol) {
    const CellIndex cells = build_cells(data);
    DeltaTable table;
    table.cells = cells;
    table.values.resize(cells.cell_count());
    for (std::size_t c = 0; c < cells.cell_count(); ++c) {
        // One explicit pass per arm and quantity; no shared accumulators.
        std::vector<std::uint32_t> arm0, arm1;
        for (std::uint32_t i : cells.members[c]) (data.z[i] ? arm1 : arm0).push_back(i);
        if (arm0.empty() || arm1.empty())
            fail(ErrorCode::EmptyCell, "cell x=" + cells.label(c) + " missing an arm");
        const auto mean_over = [&](const std::vector<std::uint32_t>& arm, auto&& get) {
            double s = 0.0;
            for (std::uint32_t i : arm) s += get(i);
            return s / static_cast<double>(arm.size());
        };
        DeltaCell& cell = table.values[c];
        cell.n0 = static_cast<std::uint32_t>(arm0.size());
        cell.n1 = static_cast<std::uint32_t>(arm1.size());
        cell.mu0 = mean_over(arm0, [&](std::uint32_t i) { return data.y[i]; });
        cell.mu1 = mean_over(arm1, [&](std::uint32_t i) { return data.y[i]; });
        cell.p0 = mean_over(arm0, [&](std::uint32_t i) { return double(data.d[i]); });
        cell.p1 = mean_over(arm1, [&](std::uint32_t i) { return double(data.d[i]); });
        if (std::fabs(cell.p1 - cell.p0) <= relevance_tol)
            fail(ErrorCode::WeakInstrument, "cell x=" + cells.label(c));
        cell.delta = (cell.mu1 - cell.mu0) / (cell.p1 - cell.p0);
    }
    return table;
}

DeltaSeries delta_continuous_serial(const Dataset& data, double bandwidth,
                                    double relevance_tol) {
    const std::size_t n = data.n();
    std::vector<double> d_values(n);
    for (std::size_t i = 0; i < n; ++i) d_values[i] = data.d[i];
    DeltaSeries series;
    series.delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu0 = loo_nw_mean(data, data.y, i, 0, bandwidth);
        const double mu1 = loo_nw_mean(data, data.y, i, 1, bandwidth);
        const double p0 = loo_nw_mean(data, d_values, i, 0, bandwidth);
        const double p1 = loo_nw_mean(data, d_values, i, 1, bandwidth);
        if (std::fabs(p1 - p0) <= relevance_tol)
            fail(ErrorCode::WeakInstrument,
                 "local propensity gap below tolerance at record " + std::to_string(i));
        series.delta[i] = (mu1 - mu0) / (p1 - p0);
    }
    return series;
}

GFunctional q_caches_serial(const Dataset& data, const std::vector<double>& w_hat,
                            double h, double h_q, double q_floor) {
    const std::size_t n = data.n();
    if (n < 2) fail(ErrorCode::EmptyInput, "need n >= 2");
    GFunctional gf;
    gf.h = h;
    gf.h_q = h_q > 0.0 ? h_q : h;
    gf.w_hat = w_hat;
    gf.q0.resize(n);
    gf.q1.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        gf.q0[i] = loo_density(data, i, 0, gf.h_q);
        gf.q1[i] = loo_density(data, i, 1, gf.h_q);
        if (gf.q0[i] <= q_floor)
            fail(ErrorCode::DensityFloor, "q(X_" + std::to_string(i) + ", 0) underflow");
        if (gf.q1[i] <= q_floor)
            fail(ErrorCode::DensityFloor, "q(X_" + std::to_string(i) + ", 1) underflow");
    }
    return gf;
}

double statistic_discrete_serial(const Dataset& data, const std::vector<double>& w_hat,
                                 const Grid& grid) {
    const CellIndex cells = build_cells(data);
    double best = 0.0;
    for (std::size_t c = 0; c < cells.cell_count(); ++c) {
        std::vector<std::uint32_t> arm0, arm1;
        for (std::uint32_t i : cells.members[c]) (data.z[i] ? arm1 : arm0).push_back(i);
        if (arm0.empty() || arm1.empty())
            fail(ErrorCode::EmptyCell, "cell x=" + cells.label(c) + " missing an arm");
        for (double w : grid.w_points) {
            const double f0 = conditional_ecdf(w_hat, arm0, w);
            const double f1 = conditional_ecdf(w_hat, arm1, w);
            best = std::max(best, std::fabs(f0 - f1));
        }
    }
    return std::sqrt(static_cast<double>(data.n())) * best;
}

double statistic_continuous_serial(const Dataset& data, const std::vector<double>& w_hat,
                                   const GFunctional& gf, const Grid& grid,
                                   double cap_quantile) {
    const std::size_t n = data.n();
    const auto caps = support_caps(data, w_hat, grid, cap_quantile);
    double best = 0.0;
    for (std::size_t k = 0; k < grid.x_points.size(); ++k) {
        const double x = grid.x_points[k];
        if (caps[k] == -std::numeric_limits<double>::infinity()) continue;
        std::vector<double> candidates;
        for (std::size_t i = 0; i < n; ++i)
            if (data.x[0][i] <= x && w_hat[i] <= caps[k]) candidates.push_back(w_hat[i]);
        for (double w : grid.w_points)
            if (w <= caps[k]) candidates.push_back(w);
        if (std::isfinite(caps[k])) candidates.push_back(caps[k]);
        for (double w : candidates) {
            const double diff = g_hat(gf, data, w, x, 0) - g_hat(gf, data, w, x, 1);
            best = std::max(best, std::fabs(diff));
        }
    }
    // g_hat carries the 1/n normalization already, so only root-n scaling
    // remains here (the optimized path works on the un-normalized sums).
    return best * std::sqrt(static_cast<double>(n));
}

InfluenceMatrix influence_discrete_serial(const Dataset& data,
                                          const std::vector<double>& w_hat,
                                          const Grid& grid, double density_bandwidth,
                                          double relevance_tol) {
    const std::size_t n = data.n();
    const std::size_t nw = grid.w_points.size();
    const CellIndex cells = build_cells(data);

    InfluenceMatrix im;
    im.kind = InfluenceMatrix::Kind::discrete;
    im.grid = grid;
    im.n = n;
    im.field.assign(n * nw, 0.0);
    im.cell_of = cells.cell_of;
    im.cell_of_xpts.resize(cells.cell_count());
    for (std::uint32_t c = 0; c < cells.cell_count(); ++c) im.cell_of_xpts[c] = c;

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = cells.cell_of[i];
        const auto& members = cells.members[c];
        std::uint32_t cnt[2] = {0, 0};
        double w_mean = 0.0;
        for (std::uint32_t j : members) {
            ++cnt[data.z[j]];
            w_mean += w_hat[j];
        }
        if (cnt[0] == 0 || cnt[1] == 0)
            fail(ErrorCode::EmptyCell, "cell x=" + cells.label(c) + " missing an arm");
        w_mean /= static_cast<double>(members.size());
        const double b = data.z[i] ? -static_cast<double>(n) / cnt[1]
                                   : static_cast<double>(n) / cnt[0];
        for (std::size_t wi = 0; wi < nw; ++wi) {
            const double w = grid.w_points[wi];
            std::size_t pooled_leq = 0;
            for (std::uint32_t j : members) pooled_leq += w_hat[j] <= w ? 1 : 0;
            const double f_pool =
                static_cast<double>(pooled_leq) / static_cast<double>(members.size());
            const double kap =
                kappa_hat(data, w_hat, cells, c, w, density_bandwidth, relevance_tol);
            const double ind = w_hat[i] <= w ? 1.0 : 0.0;
            im.field[i * nw + wi] = (ind - f_pool) * b + kap * (w_hat[i] - w_mean) * b;
        }
    }
    return im;
}

InfluenceMatrix influence_continuous_serial(const Dataset& data,
                                            const std::vector<double>& w_hat,
                                            const GFunctional& gf, const Grid& grid,
                                            PhiSign phi_sign, double cap_quantile,
                                            double relevance_tol) {
    const std::size_t n = data.n();
    const std::size_t nw = grid.w_points.size();
    const auto& x = data.x[0];

    InfluenceMatrix im;
    im.kind = InfluenceMatrix::Kind::continuous;
    im.grid = grid;
    im.n = n;
    im.field.assign(n * nw, 0.0);
    im.x_value = x;
    im.sorted_by_x = sort_indices(x);
    {
        std::vector<double> x_sorted(n);
        for (std::size_t k = 0; k < n; ++k) x_sorted[k] = x[im.sorted_by_x[k]];
        im.x_cut.resize(grid.x_points.size());
        for (std::size_t k = 0; k < grid.x_points.size(); ++k) {
            const auto it = std::upper_bound(x_sorted.begin(), x_sorted.end(),
                                             grid.x_points[k]);
            im.x_cut[k] = static_cast<std::uint32_t>(it - x_sorted.begin());
        }
    }
    const auto caps = support_caps(data, w_hat, grid, cap_quantile);
    im.live.assign(grid.x_points.size() * nw, 0);
    for (std::size_t xi = 0; xi < grid.x_points.size(); ++xi)
        for (std::size_t wi = 0; wi < nw; ++wi)
            im.live[xi * nw + wi] = grid.w_points[wi] <= caps[xi] ? 1 : 0;

    const bool mirrored = phi_sign == PhiSign::paper_estimator;
    for (std::size_t wi = 0; wi < nw; ++wi) {
        const double w = grid.w_points[wi];
        std::vector<double> lam_values(n);
        for (std::size_t j = 0; j < n; ++j)
            lam_values[j] = mirrored ? lambda(w - w_hat[j]) : lambda(w_hat[j] - w);
        const auto kappa = kappa_c_hat(data, w_hat, w, gf.h, relevance_tol);
        for (std::size_t i = 0; i < n; ++i) {
            const double e_lam = nw_at_point(data, lam_values, x[i], std::nullopt, gf.h);
            const double e_w = nw_at_point(data, w_hat, x[i], std::nullopt, gf.h);
            const double s = data.z[i] ? -gf.q0[i] : gf.q1[i];
            const double psi = (lam_values[i] - e_lam) * s;
            const double phi = (mirrored ? -1.0 : 1.0) * kappa[i] * (w_hat[i] - e_w) * s;
            im.field[i * nw + wi] = psi + phi;
        }
    }
    return im;
}

double simulate_sup_serial(const InfluenceMatrix& im, const std::vector<double>& u) {
    if (u.size() != im.n)
        fail(ErrorCode::DimensionMismatch, "multiplier length " + std::to_string(u.size()) +
                                               " vs n = " + std::to_string(im.n));
    double best = 0.0;
    for (std::size_t g = 0; g < im.column_count(); ++g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < im.n; ++i) acc += u[i] * im.entry(i, g);
        const std::size_t xi = g / im.w_count();
        const std::size_t wi = g % im.w_count();
        if (im.column_live(xi, wi)) best = std::max(best, std::fabs(acc));
    }
    return best / std::sqrt(static_cast<double>(im.n));
}

}  // namespace hetfx::reference
