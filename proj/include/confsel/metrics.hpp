#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace confsel {

struct TrialMetrics {
    double fdp = 0.0;
    double power = 0.0;
    double weighted_fdp = 0.0;
    std::size_t n_selected = 0;
    std::optional<double> discrepancy;
};

/// Sum over selected of 1{null} / max{1, |R|}.
double fdp(std::span<const std::size_t> selected, const std::vector<bool>& null_flags);

/// Fraction of non-nulls selected; 0 when there are no non-nulls.
double power(std::span<const std::size_t> selected, const std::vector<bool>& null_flags);

/// Sum over selected nulls of 1 / w_j, divided by max{1, |R|}.
double weighted_fdp(std::span<const std::size_t> selected, const std::vector<bool>& null_flags,
                    std::span<const double> test_weights);

/// |R symmetric-difference R_ref| / |R_ref|. Returns 0 when both are empty and
/// +infinity when only R_ref is empty.
double selection_discrepancy(std::span<const std::size_t> selected,
                             std::span<const std::size_t> reference);

/// q * gamma^2 / (1 + q (gamma^2 - 1) / m): FDR bound when estimated weights
/// are off by at most a factor gamma.
double estimated_weight_bound(double q, double gamma_hat, std::size_t m);

/// max over entries of max(w_hat / w, w / w_hat). Only the supplied points are
/// inspected, so this never exceeds the supremum over the covariate space.
double gamma_hat(std::span<const double> true_weights, std::span<const double> estimated_weights);

/// Plug-in of E[(n + 1) / (sum_i w_i + w_j)] averaged over test units; the
/// factor relating weighted FDR to the nominal level.
double weight_normalizer_plugin(std::span<const double> calib_weights,
                                std::span<const double> test_weights);

TrialMetrics evaluate_selection(std::span<const std::size_t> selected,
                                const std::vector<bool>& null_flags,
                                std::span<const double> test_weights,
                                std::optional<std::span<const std::size_t>> reference = std::nullopt);

} // namespace confsel
