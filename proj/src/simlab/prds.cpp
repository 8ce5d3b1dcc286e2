#include "confsel/simlab.hpp"

#include "confsel/pvalues.hpp"
#include "confsel/parallel.hpp"
#include "confsel/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace confsel::simlab {

namespace {

// Draws are split into fixed-size chunks, each with its own keyed stream, so
// the counts do not depend on how chunks are spread over threads.
constexpr std::uint64_t kChunk = 1u << 16;

} // namespace

double q_density_inverse_cdf(double u) { return std::sqrt(2.0 * u + 0.25); }

std::vector<ConditionalTail> prds_conditional_tails(std::uint64_t n_draws, std::uint64_t seed,
                                                    std::span<const std::pair<double, double>> st) {
    if (n_draws == 0) throw std::invalid_argument("n_draws must be >= 1");
    const std::size_t k = st.size();
    const std::uint64_t chunks = (n_draws + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> hits(chunks * k, 0), conditioned(chunks * k, 0);

    const auto n_chunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long c = 0; c < n_chunks; ++c) {
        const auto chunk = static_cast<std::uint64_t>(c);
        rng::KeyedStream stream(seed, rng::Stream::prds, chunk);
        const std::uint64_t begin = chunk * kChunk;
        const std::uint64_t end = std::min(n_draws, begin + kChunk);
        for (std::uint64_t d = begin; d < end; ++d) {
            // Calibration from P = Unif[1/2, 3/2], test from Q; w(x) = x and
            // V(x, y) = -w(x).
            const std::array<double, 2> xc{0.5 + stream.uniform(), 0.5 + stream.uniform()};
            const std::array<double, 2> xt{q_density_inverse_cdf(stream.uniform()),
                                           q_density_inverse_cdf(stream.uniform())};
            const double u1 = stream.uniform();
            const double u2 = stream.uniform();
            const std::array<double, 2> vc{-xc[0], -xc[1]};
            const double p1 = weighted_pvalue(vc, xc, -xt[0], xt[0], u1);
            const double p2 = weighted_pvalue(vc, xc, -xt[1], xt[1], u2);
            for (std::size_t i = 0; i < k; ++i) {
                if (p2 >= st[i].second) {
                    ++conditioned[chunk * k + i];
                    if (p1 <= st[i].first) ++hits[chunk * k + i];
                }
            }
        }
    }

    std::vector<ConditionalTail> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        ConditionalTail& f = out[i];
        f.s = st[i].first;
        f.t = st[i].second;
        for (std::uint64_t c = 0; c < chunks; ++c) {
            f.hits += hits[c * k + i];
            f.conditioned += conditioned[c * k + i];
        }
        if (f.conditioned == 0) {
            f.estimate = std::numeric_limits<double>::quiet_NaN();
            f.se = std::numeric_limits<double>::infinity();
            continue;
        }
        const auto n = static_cast<double>(f.conditioned);
        f.estimate = static_cast<double>(f.hits) / n;
        f.se = std::sqrt(f.estimate * (1.0 - f.estimate) / n);
    }
    return out;
}

PrdsEstimate prds_counterexample_mc(std::uint64_t n_draws, std::uint64_t seed) {
    const std::array<std::pair<double, double>, 2> st{{{0.1, 0.6}, {0.1, 0.9}}};
    const auto tails = prds_conditional_tails(n_draws, seed, st);
    PrdsEstimate out;
    out.draws = n_draws;
    out.seed = seed;
    out.f_35 = tails[0];
    out.f_910 = tails[1];
    const double diff = out.f_910.estimate - out.f_35.estimate;
    const double se = std::sqrt(out.f_35.se * out.f_35.se + out.f_910.se * out.f_910.se);
    // A zero SE (e.g. a single draw) carries no evidence either way.
    out.ordering_confirmed = std::isfinite(diff) && se > 0.0 && diff > 3.0 * se;
    return out;
}

} // namespace confsel::simlab
