#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "hetfx/kernel.hpp"

using namespace hetfx;
using testutil::code_of;

namespace {

// All-records-one-value covariate helper: rows are (y, d, z, x).
Dataset cont_data(const std::vector<std::vector<double>>& rows) {
    return testutil::make_data(rows, CovariateKind::continuous);
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("kernel_weight matches the Gaussian density") {
    // exp(-u^2/2)/sqrt(2 pi) evaluated independently.
    CHECK(kernel_weight(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(kernel_weight(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
    CHECK(kernel_weight(2.0) == doctest::Approx(0.05399096651318806).epsilon(1e-14));
    CHECK(kernel_weight(1.7) == kernel_weight(-1.7));  // even function, bitwise
    CHECK(kernel_weight(40.0) == 0.0);                 // far tail underflows cleanly
}

TEST_CASE("kernel_weight integrates to one") {
    // Simpson's rule on [-8, 8]; the omitted tails are ~1e-15.
    const int m = 4000;
    const double a = -8.0, b = 8.0, step = (b - a) / m;
    double integral = kernel_weight(a) + kernel_weight(b);
    for (int k = 1; k < m; ++k)
        integral += kernel_weight(a + k * step) * (k % 2 ? 4.0 : 2.0);
    integral *= step / 3.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("silverman bandwidth on a two-spike sample with known spread") {
    // 50 copies each of -1 and +1: mean 0, sample sd sqrt(100/99),
    // IQR = 2 so IQR/1.34 ~ 1.49 exceeds the sd and the sd is chosen.
    std::vector<double> sample;
    for (int k = 0; k < 50; ++k) {
        sample.push_back(-1.0);
        sample.push_back(1.0);
    }
    const double sd = std::sqrt(100.0 / 99.0);
    CHECK(silverman_factor(sample) == doctest::Approx(1.06 * sd).epsilon(1e-14));
    // h = 1.06 * sd * 100^(-1/5), frozen from an independent evaluation.
    CHECK(silverman_bandwidth(sample) == doctest::Approx(0.4241195265880402).epsilon(1e-13));
}

TEST_CASE("silverman factor is scale equivariant") {
    Rng rng(31);
    std::vector<double> sample(60), doubled(60);
    for (std::size_t k = 0; k < sample.size(); ++k) {
        sample[k] = rng.normal() + 0.3 * rng.uniform();
        doubled[k] = 2.0 * sample[k];
    }
    CHECK(silverman_factor(doubled) ==
          doctest::Approx(2.0 * silverman_factor(sample)).epsilon(1e-13));
}

TEST_CASE("silverman factor falls back to the sd when the IQR is zero") {
    // Middle half is all ties; the sample still has positive spread.
    const std::vector<double> sample = {1.0, 7.0, 7.0, 7.0, 7.0, 7.0, 9.0};
    const double mean = 45.0 / 7.0;
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / 6.0);
    CHECK(silverman_factor(sample) == doctest::Approx(1.06 * sd).epsilon(1e-13));
}

TEST_CASE("silverman bandwidth honours exponent and scale") {
    std::vector<double> sample;
    for (int k = 0; k < 30; ++k) sample.push_back(0.1 * k);
    const double factor = silverman_factor(sample);
    CHECK(silverman_bandwidth(sample, -1.0 / 3.0, 2.0) ==
          doctest::Approx(factor * std::pow(30.0, -1.0 / 3.0) * 2.0).epsilon(1e-13));
}

TEST_CASE("degenerate samples are rejected") {
    CHECK(code_of([] { silverman_factor({5.0, 5.0, 5.0, 5.0}); }) ==
          ErrorCode::DegenerateBandwidth);
    CHECK(code_of([] { silverman_factor({1.0}); }) == ErrorCode::DegenerateBandwidth);
}

TEST_CASE("resolve_bandwidth dispatches on the rule") {
    KernelSpec spec;
    spec.bandwidth_rule = KernelSpec::Rule::fixed;
    spec.fixed_bandwidth = 0.7;
    spec.bandwidth_scale = 2.0;
    CHECK(resolve_bandwidth(spec, {}) == 1.4);

    spec.fixed_bandwidth = 0.0;
    CHECK(code_of([&] { resolve_bandwidth(spec, {}); }) == ErrorCode::DegenerateBandwidth);

    KernelSpec silver;  // default silverman rule
    std::vector<double> sample;
    for (int k = 0; k < 25; ++k) sample.push_back(std::sin(0.7 * k));
    CHECK(resolve_bandwidth(silver, sample) == silverman_bandwidth(sample, -0.2, 1.0));
}

TEST_CASE("loo_nw_mean with identical covariates is the leave-one-out arm mean") {
    const Dataset data = cont_data({
        {3, 0, 0, 0.4}, {5, 1, 1, 0.4}, {7, 0, 1, 0.4}, {9, 1, 0, 0.4},
    });
    const std::vector<double> values = {3, 5, 7, 9};
    // Equal weights cancel: arm-1 mean excluding record 0 is (5+7)/2.
    CHECK(loo_nw_mean(data, values, 0, 1, 1.0) == doctest::Approx(6.0).epsilon(1e-14));
    // Arm-0 mean excluding record 0 is just record 3.
    CHECK(loo_nw_mean(data, values, 0, 0, 1.0) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("loo_nw_mean of an all-ones column is exactly one") {
    const Dataset data = cont_data({
        {1, 1, 0, 0.1}, {2, 1, 1, 0.5}, {3, 1, 1, 0.9}, {4, 1, 0, 0.3},
    });
    const std::vector<double> ones(4, 1.0);
    // Numerator and denominator are the same accumulation, so the ratio
    // is bitwise 1 regardless of bandwidth.
    CHECK(loo_nw_mean(data, ones, 2, 1, 0.3) == 1.0);
    CHECK(loo_nw_mean(data, ones, 0, 0, 0.05) == 1.0);
}

TEST_CASE("loo_nw_mean at a symmetric midpoint averages the neighbours exactly") {
    // Record 1 sits midway between records 0 and 2; weights match, and the
    // surrounding values 0 and 2 average to exactly 1.
    const std::vector<double> values = {0.0, 1.0, 2.0, 5.0};
    const Dataset sym =
        cont_data({{0, 0, 0, 0.0}, {0, 0, 0, 0.5}, {0, 0, 0, 1.0}, {0, 0, 1, 9.0}});
    CHECK(loo_nw_mean(sym, values, 1, 0, 1.0) == 1.0);
}

TEST_CASE("loo_nw_mean three-point oracle") {
    // X = (0, 0.5, 1), values (0, 1, 2), h = 1; records 1 and 2 share the
    // evaluation arm. At i = 0:
    // (K(0.5) * 1 + K(1) * 2) / (K(0.5) + K(1)); frozen independently.
    const Dataset arranged =
        cont_data({{0, 0, 1, 0.0}, {1, 0, 0, 0.5}, {2, 0, 0, 1.0}});
    const std::vector<double> values = {0.0, 1.0, 2.0};
    CHECK(loo_nw_mean(arranged, values, 0, 0, 1.0) ==
          doctest::Approx(1.4073334000459303).epsilon(1e-13));
}

TEST_CASE("loo_nw_mean throws EmptyArm when no usable neighbour exists") {
    const Dataset data = cont_data({{1, 0, 0, 0.2}, {2, 1, 1, 0.8}});
    // Record 1 is the only arm-1 member, so its own arm has no neighbour.
    CHECK(code_of([&] {
              loo_nw_mean(data, {1.0, 2.0}, 1, 1, 1.0);
          }) == ErrorCode::EmptyArm);

    // The only neighbour is so remote that every weight underflows.
    const Dataset far = cont_data({{1, 0, 0, 0.0}, {2, 1, 1, 1e9}, {3, 0, 0, 0.0}});
    CHECK(code_of([&] {
              loo_nw_mean(far, {1.0, 2.0, 3.0}, 0, 1, 1.0);
          }) == ErrorCode::EmptyArm);
}

TEST_CASE("loo_nw_mean stays inside the arm value range") {
    const Dataset data = testutil::random_data(80, CovariateKind::continuous, 303);
    std::vector<double> values(data.n());
    Rng rng(404);
    for (auto& v : values) v = rng.normal();
    for (int z = 0; z <= 1; ++z) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t j = 0; j < data.n(); ++j) {
            if (data.z[j] != z) continue;
            lo = std::min(lo, values[j]);
            hi = std::max(hi, values[j]);
        }
        for (std::size_t i = 0; i < data.n(); ++i) {
            const double m = loo_nw_mean(data, values, i, z, 0.2);
            CHECK(m >= lo - 1e-12);
            CHECK(m <= hi + 1e-12);
        }
    }
}

TEST_CASE("loo_density matches direct kernel sums") {
    SUBCASE("two identical points give K(0)/((n-1)h)") {
        const Dataset data = cont_data({{1, 0, 0, 0.3}, {2, 0, 1, 0.3}});
        CHECK(loo_density(data, 0, 1, 1.0) == kernel_weight(0.0));
        CHECK(loo_density(data, 0, 1, 2.0) == kernel_weight(0.0) / 2.0);
    }
    SUBCASE("an empty arm contributes zero, not an error") {
        const Dataset data = cont_data({{1, 0, 0, 0.3}, {2, 0, 1, 0.9}});
        CHECK(loo_density(data, 1, 1, 1.0) == 0.0);
    }
    SUBCASE("arm densities add up to the pooled leave-one-out sum") {
        const Dataset data = testutil::random_data(60, CovariateKind::continuous, 505);
        const double h = 0.25;
        for (std::size_t i = 0; i < data.n(); ++i) {
            double pooled = 0.0;
            for (std::size_t j = 0; j < data.n(); ++j) {
                if (j == i) continue;
                pooled += kernel_weight((data.x[0][j] - data.x[0][i]) / h);
            }
            pooled /= (data.n() - 1) * h;
            CHECK(loo_density(data, i, 0, h) + loo_density(data, i, 1, h) ==
                  doctest::Approx(pooled).epsilon(1e-12));
        }
    }
}

TEST_CASE("nw_at_point interpolates plug-in means") {
    const Dataset data = cont_data({{0, 0, 1, 0.0}, {1, 0, 0, 0.5}, {2, 0, 0, 1.0}});

    SUBCASE("constant columns are reproduced exactly") {
        const std::vector<double> twos(3, 2.0);
        CHECK(nw_at_point(data, twos, 0.37, std::nullopt, 0.4) == 2.0);
        CHECK(nw_at_point(data, twos, 0.9, 0, 0.4) == 2.0);
    }
    SUBCASE("a tiny bandwidth localizes to the nearest sample point") {
        const std::vector<double> values = {0.0, 1.0, 2.0};
        CHECK(nw_at_point(data, values, 0.5, std::nullopt, 1e-3) == 1.0);
        CHECK(nw_at_point(data, values, 1.0, std::nullopt, 1e-3) == 2.0);
    }
    SUBCASE("three-point oracle at the left edge") {
        // (K(0)*0 + K(0.5)*1 + K(1)*2) / (K(0)+K(0.5)+K(1)), frozen.
        const std::vector<double> values = {0.0, 1.0, 2.0};
        CHECK(nw_at_point(data, values, 0.0, std::nullopt, 1.0) ==
              doctest::Approx(0.8419184478920687).epsilon(1e-13));
    }
    SUBCASE("arm restriction drops the other arm entirely") {
        const std::vector<double> values = {100.0, 1.0, 2.0};
        // Record 0 is arm 1; restricting to arm 0 must ignore its value.
        const double m = nw_at_point(data, values, 0.0, 0, 1.0);
        CHECK(m > 1.0);
        CHECK(m < 2.0);
    }
    SUBCASE("vanishing weight mass is an error") {
        const std::vector<double> values = {0.0, 1.0, 2.0};
        CHECK(code_of([&] { nw_at_point(data, values, 1e9, std::nullopt, 1.0); }) ==
              ErrorCode::ZeroWeightSum);
    }
}

}  // TEST_SUITE
