#include "hetfx/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "hetfx/errors.hpp"

namespace hetfx {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

// Linear-interpolation sample quantile (type 7) on sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double kernel_weight(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

double silverman_factor(const std::vector<double>& sample) {
    const std::size_t n = sample.size();
    if (n < 2) fail(ErrorCode::DegenerateBandwidth, "need at least 2 points");
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) fail(ErrorCode::DegenerateBandwidth, "constant sample");
    std::vector<double> sorted(sample);
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 1.06 * spread;
}

double silverman_bandwidth(const std::vector<double>& sample, double exponent, double scale) {
    const double h = silverman_factor(sample) *
                     std::pow(static_cast<double>(sample.size()), exponent) * scale;
    if (!(h > 0.0)) fail(ErrorCode::DegenerateBandwidth, "nonpositive bandwidth");
    return h;
}

double resolve_bandwidth(const KernelSpec& spec, const std::vector<double>& sample) {
    if (spec.bandwidth_rule == KernelSpec::Rule::fixed) {
        if (!(spec.fixed_bandwidth > 0.0))
            fail(ErrorCode::DegenerateBandwidth, "fixed bandwidth must be positive");
        return spec.fixed_bandwidth * spec.bandwidth_scale;
    }
    return silverman_bandwidth(sample, spec.exponent, spec.bandwidth_scale);
}

double loo_nw_mean(const Dataset& data, const std::vector<double>& values, std::size_t i,
                   int z, double h) {
    const auto& x = data.x[0];
    const std::size_t n = data.n();
    double wsum = 0.0, vsum = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i || data.z[j] != z) continue;
        any = true;
        const double w = kernel_weight((x[j] - x[i]) / h);
        wsum += w;
        vsum += w * values[j];
    }
    if (!any) fail(ErrorCode::EmptyArm, "no j != i with z = " + std::to_string(z));
    if (wsum < kWeightFloor)
        fail(ErrorCode::EmptyArm, "kernel weights underflow at record " + std::to_string(i));
    return vsum / wsum;
}

double loo_density(const Dataset& data, std::size_t i, int z, double h) {
    const auto& x = data.x[0];
    const std::size_t n = data.n();
    double wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i || data.z[j] != z) continue;
        wsum += kernel_weight((x[j] - x[i]) / h);
    }
    return wsum / (static_cast<double>(n - 1) * h);
}

double nw_at_point(const Dataset& data, const std::vector<double>& values, double x,
                   std::optional<int> z, double h) {
    const auto& xs = data.x[0];
    const std::size_t n = data.n();
    double wsum = 0.0, vsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (z && data.z[j] != *z) continue;
        const double w = kernel_weight((xs[j] - x) / h);
        wsum += w;
        vsum += w * values[j];
    }
    if (wsum < kWeightFloor) fail(ErrorCode::ZeroWeightSum, "no kernel mass at point");
    return vsum / wsum;
}

}  // namespace hetfx
