#include "hetfx/dgp.hpp"

#include <cmath>
#include <cstddef>

#include "hetfx/bootstrap.hpp"
#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"
#include "hetfx/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hetfx {

namespace {

// Stream tags keep generator substreams for distinct purposes disjoint
// even when the same master seed feeds several of them.
constexpr std::uint64_t kDgpStreamTag = 0x6467ULL << 32;   // "dg"
constexpr std::uint64_t kRepStreamTag = 0x7265ULL << 32;   // "re"
constexpr std::uint64_t kBootStreamTag = 0x6262ULL << 32;  // "bb"

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master, std::uint32_t r) {
    return Rng(master, kRepStreamTag + r).next_u64();
}

Dataset gen_dgp(const DgpSpec& spec) {
    if (spec.id < 1 || spec.id > 4)
        fail(ErrorCode::Internal, "unknown synthetic design id " + std::to_string(spec.id));
    if (spec.n == 0) fail(ErrorCode::EmptyInput, "requested sample of size 0");
    if (!(spec.pz > 0.0) || !(spec.pz < 1.0))
        fail(ErrorCode::DegenerateInstrument,
             "instrument probability must lie strictly inside (0, 1)");
    if (!(spec.rho >= 0.0) || !(spec.rho <= 1.0))
        fail(ErrorCode::Internal, "selection correlation must lie in [0, 1]");

    const bool discrete_x = spec.id <= 2;
    const bool scaled_noise = spec.id == 2 || spec.id == 4;
    const double rho_c = std::sqrt(1.0 - spec.rho * spec.rho);

    std::vector<Observation> rows(spec.n);
    Rng rng(spec.seed, kDgpStreamTag);
    for (std::size_t i = 0; i < spec.n; ++i) {
        // Per-record draw order is fixed (X, eps, u, Z) so that designs
        // sharing a seed stay aligned draw-for-draw.
        const double ux = rng.uniform();
        const double x = discrete_x ? std::floor(ux * 5.0) + 1.0 : ux;
        const double eps = rng.uniform();
        const double u = rng.uniform();
        const double z = rng.uniform() < spec.pz ? 1.0 : 0.0;

        const double eta = spec.rho * eps + rho_c * u;
        const std::uint8_t d = (z - eta > 0.0) ? 1 : 0;
        const double noise = scaled_noise ? (1.0 + spec.gamma * d) * x * eps : x * eps;

        rows[i].y = d * x + noise;
        rows[i].d = d;
        rows[i].z = static_cast<std::uint8_t>(z);
        rows[i].x = {x};
    }

    const CovariateKind kind =
        discrete_x ? CovariateKind::discrete : CovariateKind::continuous;
    return validate_dataset(rows, {kind});
}

RejectionTable monte_carlo(const DgpSpec& spec_template, std::uint32_t reps,
                           const RunConfig& config) {
    if (reps == 0) fail(ErrorCode::EmptyInput, "monte carlo needs at least one replicate");
    for (double a : config.alphas)
        if (!(a > 0.0) || !(a < 1.0))
            fail(ErrorCode::InvalidAlpha, "alpha " + std::to_string(a));

    configure_threads(config.threads);

    const std::size_t n_alpha = config.alphas.size();
    std::vector<std::uint8_t> reject(static_cast<std::size_t>(reps) * n_alpha, 0);
    std::vector<std::uint8_t> failed(reps, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(reps); ++r) {
        DgpSpec spec = spec_template;
        spec.seed = replicate_seed(spec_template.seed, static_cast<std::uint32_t>(r));

        RunConfig rep_config = config;
        rep_config.multiplier.seed =
            Rng(spec_template.seed, kBootStreamTag + static_cast<std::uint32_t>(r)).next_u64();
        rep_config.threads = 1;  // replicates are the parallel unit here

        try {
            const Dataset data = gen_dgp(spec);
            const TestReport report = run_test(data, rep_config);
            for (std::size_t a = 0; a < n_alpha; ++a) {
                const double alpha = config.alphas[a];
                const bool hit =
                    config.reject_rule == RejectRule::p_value
                        ? report.p_value < alpha
                        : report.statistic > report.critical_values.at(alpha);
                reject[static_cast<std::size_t>(r) * n_alpha + a] = hit ? 1 : 0;
            }
        } catch (const Error&) {
            failed[r] = 1;
        }
    }

    std::uint32_t errors = 0;
    for (std::uint32_t r = 0; r < reps; ++r) errors += failed[r];
    const std::uint32_t good = reps - errors;

    RejectionTable table;
    table.reps = reps;
    table.bootstrap_reps = config.multiplier.reps;
    for (std::size_t a = 0; a < n_alpha; ++a) {
        std::uint32_t hits = 0;
        for (std::uint32_t r = 0; r < reps; ++r)
            if (!failed[r]) hits += reject[static_cast<std::size_t>(r) * n_alpha + a];
        RejectionRow row;
        row.spec = spec_template;
        row.alpha = config.alphas[a];
        row.rate = good == 0 ? 0.0 : static_cast<double>(hits) / good;
        row.reps = good;
        row.errors = errors;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace hetfx
