#include "hetfx/ks_continuous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/kernel.hpp"

namespace hetfx {

namespace {

constexpr std::size_t kExactSupLimit = 5000;  // kink evaluation cutoff

std::vector<std::uint32_t> sort_indices(const std::vector<double>& v) {
    std::vector<std::uint32_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    return idx;
}

double quantile_sorted(const std::vector<double>& sorted, std::size_t len, double p) {
    if (len == 1) return sorted[0];
    const double pos = p * static_cast<double>(len - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, len - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Engagement cut positions: per x grid point, the count of records with
// X <= x in ascending-X order.
std::vector<std::uint32_t> engagement_cuts(const std::vector<double>& x_sorted_values,
                                           const std::vector<double>& x_points) {
    std::vector<std::uint32_t> cuts(x_points.size());
    for (std::size_t k = 0; k < x_points.size(); ++k) {
        const auto it = std::upper_bound(x_sorted_values.begin(), x_sorted_values.end(),
                                         x_points[k]);
        cuts[k] = static_cast<std::uint32_t>(it - x_sorted_values.begin());
    }
    return cuts;
}

}  // namespace

Grid make_grid_continuous(const Dataset& data, const std::vector<double>& w_hat,
                          std::uint32_t w_count, std::uint32_t x_count) {
    Grid grid;
    GridAxis w_axis = make_grid(w_hat, w_count);
    grid.w_points = std::move(w_axis.points);
    grid.degenerate_w = w_axis.degenerate;
    GridAxis x_axis = make_grid(data.x[0], x_count);
    grid.x_points = std::move(x_axis.points);
    return grid;
}

GFunctional build_g_functional(const Dataset& data, const std::vector<double>& w_hat,
                               double h, double h_q, double q_floor) {
    const std::size_t n = data.n();
    if (n < 2) fail(ErrorCode::EmptyInput, "need n >= 2");
    const auto& x = data.x[0];
    GFunctional gf;
    gf.h = h;
    gf.h_q = h_q > 0.0 ? h_q : h;
    gf.w_hat = w_hat;
    gf.q0.assign(n, 0.0);
    gf.q1.assign(n, 0.0);
    const double norm = 1.0 / (static_cast<double>(n - 1) * gf.h_q);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double s[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            s[data.z[j]] += kernel_weight((x[j] - x[i]) / gf.h_q);
        }
        gf.q0[i] = s[0] * norm;
        gf.q1[i] = s[1] * norm;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (gf.q0[i] <= q_floor)
            fail(ErrorCode::DensityFloor, "q(X_" + std::to_string(i) + ", 0) underflow");
        if (gf.q1[i] <= q_floor)
            fail(ErrorCode::DensityFloor, "q(X_" + std::to_string(i) + ", 1) underflow");
    }
    return gf;
}

double g_hat(const GFunctional& gf, const Dataset& data, double w, double x, int z) {
    const std::size_t n = data.n();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (data.z[i] != z || data.x[0][i] > x) continue;
        const double q_opp = z == 0 ? gf.q1[i] : gf.q0[i];
        sum += q_opp * lambda(gf.w_hat[i] - w);
    }
    return sum / static_cast<double>(n);
}

std::vector<double> support_caps(const Dataset& data, const std::vector<double>& w_hat,
                                 const Grid& grid, double quantile) {
    const std::size_t nx = grid.x_points.size();
    std::vector<double> caps(nx);
    if (quantile <= 0.0) {
        std::fill(caps.begin(), caps.end(), std::numeric_limits<double>::infinity());
        return caps;
    }
    const auto order = sort_indices(data.x[0]);
    std::vector<double> x_sorted(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) x_sorted[k] = data.x[0][order[k]];
    const auto cuts = engagement_cuts(x_sorted, grid.x_points);

    // Engaged W values kept sorted incrementally as the x threshold grows.
    std::vector<double> engaged;
    engaged.reserve(order.size());
    std::size_t consumed = 0;
    for (std::size_t k = 0; k < nx; ++k) {
        while (consumed < cuts[k]) {
            const double v = w_hat[order[consumed]];
            engaged.insert(std::upper_bound(engaged.begin(), engaged.end(), v), v);
            ++consumed;
        }
        if (engaged.empty()) {
            caps[k] = -std::numeric_limits<double>::infinity();
        } else if (quantile >= 1.0) {
            caps[k] = engaged.back();
        } else {
            caps[k] = quantile_sorted(engaged, engaged.size(), quantile);
        }
    }
    return caps;
}

double ks_statistic_continuous(const Dataset& data, const std::vector<double>& w_hat,
                               const GFunctional& gf, const Grid& grid,
                               double cap_quantile) {
    const std::size_t n = data.n();
    const auto order = sort_indices(data.x[0]);
    std::vector<double> x_sorted(n);
    for (std::size_t k = 0; k < n; ++k) x_sorted[k] = data.x[0][order[k]];
    const auto cuts = engagement_cuts(x_sorted, grid.x_points);
    const auto caps = support_caps(data, w_hat, grid, cap_quantile);

    // Signed per-record weight: arm 0 contributes +q(X,1), arm 1
    // contributes -q(X,0), so the running sum is G(.,.;0) - G(.,.;1).
    std::vector<double> signed_w(n);
    for (std::size_t i = 0; i < n; ++i)
        signed_w[i] = data.z[i] ? -gf.q0[i] : gf.q1[i];

    const bool exact = n <= kExactSupLimit;
    double best = 0.0;

#pragma omp parallel for schedule(dynamic) reduction(max : best)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(grid.x_points.size());
         ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        const std::uint32_t cut = cuts[k];
        if (cut == 0 || caps[k] == -std::numeric_limits<double>::infinity()) continue;

        // Engaged records sorted by W; prefix sums of a_i and a_i W_i give
        // the arm difference at any w as  w * A(k) - B(k)  with
        // k = #engaged W <= w (each engaged lambda is linear below w).
        std::vector<std::pair<double, double>> ws;  // (W, signed weight)
        ws.reserve(cut);
        for (std::uint32_t r = 0; r < cut; ++r)
            ws.emplace_back(w_hat[order[r]], signed_w[order[r]]);
        std::sort(ws.begin(), ws.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<double> A(cut + 1, 0.0), B(cut + 1, 0.0);
        for (std::uint32_t r = 0; r < cut; ++r) {
            A[r + 1] = A[r] + ws[r].second;
            B[r + 1] = B[r] + ws[r].second * ws[r].first;
        }
        const auto eval = [&](double w) {
            const auto it = std::upper_bound(
                ws.begin(), ws.end(), w,
                [](double lhs, const auto& rhs) { return lhs < rhs.first; });
            const auto m = static_cast<std::size_t>(it - ws.begin());
            return std::fabs(w * A[m] - B[m]);
        };

        double col_best = 0.0;
        if (exact) {
            for (std::uint32_t r = 0; r < cut; ++r) {
                const double w = ws[r].first;
                if (w > caps[k]) break;
                col_best = std::max(col_best, std::fabs(w * A[r + 1] - B[r + 1]));
            }
            if (std::isfinite(caps[k])) col_best = std::max(col_best, eval(caps[k]));
        }
        for (double w : grid.w_points) {
            if (w > caps[k]) break;
            col_best = std::max(col_best, eval(w));
        }
        best = std::max(best, col_best);
    }
    return best * std::sqrt(static_cast<double>(n)) / static_cast<double>(n);
}

std::vector<double> kappa_c_hat(const Dataset& data, const std::vector<double>& w_hat,
                                double w, double h, double relevance_tol) {
    const std::size_t n = data.n();
    const auto& x = data.x[0];
    std::vector<double> out(n);
    bool weak = false;
    std::size_t weak_i = 0;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double mass[2] = {0.0, 0.0}, untreated_leq[2] = {0.0, 0.0}, treated[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double kw = kernel_weight((x[j] - x[i]) / h);
            const int arm = data.z[j];
            mass[arm] += kw;
            treated[arm] += kw * data.d[j];
            if (!data.d[j] && w_hat[j] <= w) untreated_leq[arm] += kw;
        }
        const double p0 = treated[0] / mass[0];
        const double p1 = treated[1] / mass[1];
        if (std::fabs(p1 - p0) <= relevance_tol) {
#pragma omp critical
            {
                weak = true;
                weak_i = i;
            }
            continue;
        }
        const double f0 = untreated_leq[0] / mass[0];
        const double f1 = untreated_leq[1] / mass[1];
        out[i] = -(f1 - f0) / (p1 - p0);
    }
    if (weak)
        fail(ErrorCode::WeakInstrument,
             "local propensity gap below tolerance at record " + std::to_string(weak_i));
    return out;
}

InfluenceMatrix influence_continuous(const Dataset& data, const std::vector<double>& w_hat,
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
        im.x_cut = engagement_cuts(x_sorted, grid.x_points);
    }
    const auto caps = support_caps(data, w_hat, grid, cap_quantile);
    im.live.assign(grid.x_points.size() * nw, 0);
    for (std::size_t xi = 0; xi < grid.x_points.size(); ++xi)
        for (std::size_t wi = 0; wi < nw; ++wi)
            im.live[xi * nw + wi] = grid.w_points[wi] <= caps[xi] ? 1 : 0;

    // Records in ascending-W order drive the per-record prefix snapshots.
    const auto w_order = sort_indices(w_hat);
    const bool mirrored = phi_sign == PhiSign::paper_estimator;
    bool weak = false;
    std::size_t weak_i = 0;

#pragma omp parallel
    {
        std::vector<double> mass_leq(nw), mass_w_leq(nw), untr0_leq(nw), untr1_leq(nw);
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            // Single pass over records in ascending-W order, snapshotting
            // running kernel sums at every grid w. Yields, all at once:
            // E(lambda | X_i), E(W | X_i), F(w,0 | X_i, z), p(X_i, z).
            double run_mass = 0.0, run_mass_w = 0.0;
            double run_untr[2] = {0.0, 0.0};
            double arm_mass[2] = {0.0, 0.0}, arm_treated[2] = {0.0, 0.0};
            std::size_t wi = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const std::uint32_t j = w_order[r];
                const double wj = w_hat[j];
                while (wi < nw && grid.w_points[wi] < wj) {
                    mass_leq[wi] = run_mass;
                    mass_w_leq[wi] = run_mass_w;
                    untr0_leq[wi] = run_untr[0];
                    untr1_leq[wi] = run_untr[1];
                    ++wi;
                }
                const double kw = kernel_weight((x[j] - x[i]) / gf.h);
                const int arm = data.z[j];
                run_mass += kw;
                run_mass_w += kw * wj;
                arm_mass[arm] += kw;
                arm_treated[arm] += kw * data.d[j];
                if (!data.d[j]) run_untr[arm] += kw;
            }
            for (; wi < nw; ++wi) {
                mass_leq[wi] = run_mass;
                mass_w_leq[wi] = run_mass_w;
                untr0_leq[wi] = run_untr[0];
                untr1_leq[wi] = run_untr[1];
            }

            const double total_mass = run_mass;
            const double total_mass_w = run_mass_w;
            const double p0 = arm_treated[0] / arm_mass[0];
            const double p1 = arm_treated[1] / arm_mass[1];
            if (std::fabs(p1 - p0) <= relevance_tol) {
#pragma omp critical
                {
                    weak = true;
                    weak_i = i;
                }
                continue;
            }
            const double inv_gap = 1.0 / (p1 - p0);
            const double ew = total_mass_w / total_mass;
            const double s = data.z[i] ? -gf.q0[i] : gf.q1[i];
            const double w_dev_s = (w_hat[i] - ew) * s;
            double* row = im.field.data() + i * nw;
            for (std::size_t k = 0; k < nw; ++k) {
                const double w = grid.w_points[k];
                // E[lambda(W - w) | X_i]: engaged summands are linear below w.
                const double lam_below = w * mass_leq[k] - mass_w_leq[k];
                const double kappa =
                    -((untr1_leq[k] / arm_mass[1]) - (untr0_leq[k] / arm_mass[0])) * inv_gap;
                double psi, phi;
                if (!mirrored) {
                    psi = (lambda(w_hat[i] - w) - lam_below / total_mass) * s;
                    phi = kappa * w_dev_s;
                } else {
                    // lambda(w - W) = lambda(W - w) + (W - w) pointwise.
                    const double lam_above =
                        (total_mass_w - mass_w_leq[k]) - w * (total_mass - mass_leq[k]);
                    psi = (lambda(w - w_hat[i]) - lam_above / total_mass) * s;
                    phi = -kappa * w_dev_s;
                }
                row[k] = psi + phi;
            }
        }
    }
    if (weak)
        fail(ErrorCode::WeakInstrument,
             "local propensity gap below tolerance at record " + std::to_string(weak_i));
    return im;
}

}  // namespace hetfx
