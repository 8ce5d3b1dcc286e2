#include "confsel/metrics.hpp"

#include "confsel/exact_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace confsel {

namespace {

void check_indices(std::span<const std::size_t> selected, std::size_t m) {
    for (std::size_t j : selected) {
        if (j >= m) {
            throw std::invalid_argument("selected index " + std::to_string(j) +
                                        " has no null flag (m = " + std::to_string(m) + ")");
        }
    }
}

double denominator(std::span<const std::size_t> selected) {
    return static_cast<double>(std::max<std::size_t>(1, selected.size()));
}

} // namespace

double fdp(std::span<const std::size_t> selected, const std::vector<bool>& null_flags) {
    check_indices(selected, null_flags.size());
    const auto false_hits = std::count_if(selected.begin(), selected.end(),
                                          [&](std::size_t j) { return null_flags[j]; });
    return static_cast<double>(false_hits) / denominator(selected);
}

double power(std::span<const std::size_t> selected, const std::vector<bool>& null_flags) {
    check_indices(selected, null_flags.size());
    const auto non_nulls = std::count(null_flags.begin(), null_flags.end(), false);
    if (non_nulls == 0) return 0.0;
    const auto hits = std::count_if(selected.begin(), selected.end(),
                                    [&](std::size_t j) { return !null_flags[j]; });
    return static_cast<double>(hits) / static_cast<double>(non_nulls);
}

double weighted_fdp(std::span<const std::size_t> selected, const std::vector<bool>& null_flags,
                    std::span<const double> test_weights) {
    check_indices(selected, null_flags.size());
    if (test_weights.size() != null_flags.size()) {
        throw std::invalid_argument("weighted_fdp: weights and flags differ in length");
    }
    ExactSum acc;
    for (std::size_t j : selected) {
        if (!(test_weights[j] > 0.0)) {
            throw std::invalid_argument("weighted_fdp: nonpositive weight at index " +
                                        std::to_string(j));
        }
        if (null_flags[j]) acc.add(1.0 / test_weights[j]);
    }
    return acc.value() / denominator(selected);
}

double selection_discrepancy(std::span<const std::size_t> selected,
                             std::span<const std::size_t> reference) {
    std::vector<std::size_t> a(selected.begin(), selected.end());
    std::vector<std::size_t> b(reference.begin(), reference.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> diff;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(diff));
    if (b.empty()) return diff.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(diff.size()) / static_cast<double>(b.size());
}

double estimated_weight_bound(double q, double gamma_hat, std::size_t m) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(gamma_hat >= 1.0) || !std::isfinite(gamma_hat)) {
        throw std::invalid_argument("gamma_hat must be finite and >= 1");
    }
    if (m == 0) throw std::invalid_argument("m must be >= 1");
    const double g2 = gamma_hat * gamma_hat;
    return q * g2 / (1.0 + q * (g2 - 1.0) / static_cast<double>(m));
}

double gamma_hat(std::span<const double> true_weights, std::span<const double> estimated_weights) {
    if (true_weights.size() != estimated_weights.size()) {
        throw std::invalid_argument("gamma_hat: arrays differ in length");
    }
    double worst = 1.0;
    for (std::size_t i = 0; i < true_weights.size(); ++i) {
        const double w = true_weights[i];
        const double w_hat = estimated_weights[i];
        if (!(w > 0.0) || !(w_hat > 0.0)) {
            throw std::invalid_argument("gamma_hat: nonpositive weight at index " +
                                        std::to_string(i));
        }
        worst = std::max({worst, w_hat / w, w / w_hat});
    }
    return worst;
}

double weight_normalizer_plugin(std::span<const double> calib_weights,
                                std::span<const double> test_weights) {
    if (test_weights.empty()) return 0.0;
    const double total = exact_sum(calib_weights);
    const double n_plus_1 = static_cast<double>(calib_weights.size()) + 1.0;
    ExactSum acc;
    for (double w : test_weights) acc.add(n_plus_1 / (total + w));
    return acc.value() / static_cast<double>(test_weights.size());
}

TrialMetrics evaluate_selection(std::span<const std::size_t> selected,
                                const std::vector<bool>& null_flags,
                                std::span<const double> test_weights,
                                std::optional<std::span<const std::size_t>> reference) {
    TrialMetrics out;
    out.fdp = fdp(selected, null_flags);
    out.power = power(selected, null_flags);
    out.weighted_fdp = weighted_fdp(selected, null_flags, test_weights);
    out.n_selected = selected.size();
    if (reference) out.discrepancy = selection_discrepancy(selected, *reference);
    return out;
}

} // namespace confsel
