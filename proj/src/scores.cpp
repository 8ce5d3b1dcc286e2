#include "confsel/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace confsel {

namespace {

void require_finite(std::initializer_list<double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite input");
    }
}

} // namespace

double score_res(double y, double mu_hat) {
    require_finite({y, mu_hat}, "score_res");
    return y - mu_hat;
}

double score_clip(double y, double c, double m, double mu_hat) {
    require_finite({y, c, m, mu_hat}, "score_clip");
    return (y > c ? m : c) - mu_hat;
}

double score_cqr(double y, double q_beta_hat) {
    require_finite({y, q_beta_hat}, "score_cqr");
    return y - q_beta_hat;
}

double score_cdf(double cdf_value) {
    require_finite({cdf_value}, "score_cdf");
    if (cdf_value < 0.0 || cdf_value > 1.0) {
        throw std::invalid_argument("score_cdf: value outside [0, 1]");
    }
    return cdf_value;
}

double default_clip_m(std::span<const double> mu_hat, std::span<const double> thresholds) {
    double bound = 0.0;
    for (double v : mu_hat) bound = std::max(bound, std::fabs(v));
    for (double v : thresholds) bound = std::max(bound, std::fabs(v));
    return 2.0 * bound + 1.0;
}

MonotoneReport validate_monotone(std::span<const std::vector<ScoreRow>> groups) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& rows = groups[g];
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rows[a].y < rows[b].y; });
        // Rows sharing a y value are compared only against rows with strictly
        // smaller y, through the running maximum of earlier blocks.
        std::optional<std::size_t> argmax;
        std::size_t block = 0;
        while (block < order.size()) {
            std::size_t end = block;
            while (end < order.size() && rows[order[end]].y == rows[order[block]].y) ++end;
            for (std::size_t k = block; k < end; ++k) {
                if (argmax && rows[*argmax].score > rows[order[k]].score) {
                    return {false, MonotoneViolation{g, *argmax, order[k]}};
                }
            }
            for (std::size_t k = block; k < end; ++k) {
                if (!argmax || rows[order[k]].score > rows[*argmax].score) argmax = order[k];
            }
            block = end;
        }
    }
    return {};
}

} // namespace confsel
