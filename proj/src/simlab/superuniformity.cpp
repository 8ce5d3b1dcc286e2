#include "confsel/simlab.hpp"

#include "confsel/pvalues.hpp"
#include "confsel/parallel.hpp"
#include "confsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confsel::simlab {

std::vector<double> null_tail_frequencies(std::span<const double> pvalues,
                                          const std::vector<bool>& null_flags,
                                          std::span<const double> grid) {
    if (pvalues.size() != null_flags.size()) {
        throw std::invalid_argument("null_tail_frequencies: lengths differ");
    }
    std::vector<double> out(grid.size(), 0.0);
    if (pvalues.empty()) return out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < pvalues.size(); ++i) {
            if (null_flags[i] && pvalues[i] <= grid[g]) ++count;
        }
        out[g] = static_cast<double>(count) / static_cast<double>(pvalues.size());
    }
    return out;
}

double ks_distance_uniform(std::span<const double> pvalues) {
    std::vector<double> p(pvalues.begin(), pvalues.end());
    std::sort(p.begin(), p.end());
    const auto n = static_cast<double>(p.size());
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = std::clamp(p[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

double dkw_halfwidth(std::size_t n, double alpha) {
    if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("dkw_halfwidth needs n >= 1 and alpha in (0, 1)");
    }
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

SuperUniformityReport superuniformity_mc(std::size_t replicates, std::size_t n_calib,
                                         std::uint64_t seed, double dkw_alpha) {
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    std::vector<double> observed(replicates), oracle(replicates);
    std::vector<bool> nulls(replicates);
    std::vector<char> null_bytes(replicates);

    const auto n = static_cast<long long>(replicates);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long r = 0; r < n; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        rng::KeyedStream stream(seed, rng::Stream::superuniformity, idx);
        // Y = X + eps with the fixed predictor mu(x) = x, so V(x, y) = y - x.
        std::vector<double> scores(n_calib), weights(n_calib, 1.0);
        for (double& v : scores) {
            const double x = stream.normal();
            v = (x + stream.normal()) - x;
        }
        const double x = stream.normal();
        const double y = x + stream.normal();
        const double c = stream.normal();
        const double u = stream.uniform();
        const double u_oracle = stream.uniform();
        observed[idx] = weighted_pvalue(scores, weights, c - x, 1.0, u);
        oracle[idx] = weighted_pvalue(scores, weights, y - x, 1.0, u_oracle);
        null_bytes[idx] = y <= c;
    }
    for (std::size_t i = 0; i < replicates; ++i) nulls[i] = null_bytes[i] != 0;

    SuperUniformityReport out;
    out.replicates = replicates;
    for (int g = 1; g <= 19; ++g) out.grid.push_back(0.05 * g);
    out.tail_frequency = null_tail_frequencies(observed, nulls, out.grid);
    out.tails_ok = true;
    const auto total = static_cast<double>(replicates);
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
        const double f = out.tail_frequency[g];
        out.tail_se.push_back(std::sqrt(f * (1.0 - f) / total));
        if (f > out.grid[g] + 3.0 * out.tail_se.back()) out.tails_ok = false;
    }
    out.ks_distance = ks_distance_uniform(oracle);
    out.dkw_band = dkw_halfwidth(replicates, dkw_alpha);
    out.dkw_ok = out.ks_distance <= out.dkw_band;
    return out;
}

} // namespace confsel::simlab
