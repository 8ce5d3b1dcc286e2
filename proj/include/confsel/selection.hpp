#pragma once

#include "confsel/core_types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace confsel {

/// BH threshold q k / m. Every comparison against a step-up threshold goes
/// through this one expression so the fast and reference paths agree bitwise.
inline double bh_threshold(double q, std::size_t k, std::size_t m) {
    return q * static_cast<double>(k) / static_cast<double>(m);
}

struct SelectionResult {
    /// Sorted, 0-based test indices.
    std::vector<std::size_t> selected;
    /// R^(1) = {j : p_j <= s_j}; for WBH this equals `selected`.
    std::vector<std::size_t> first_step;
    /// p-values the procedure thresholded.
    std::vector<double> pvalues;
    /// s_j = q |R_{j->0}| / m (WCS only).
    std::vector<double> s;
    /// |R_{j->0}| (WCS only).
    std::vector<std::size_t> rhat_sizes;
    /// Pruning cutoff; equals |selected| for the WCS methods.
    std::size_t r_star = 0;
    /// BH step-up count (BH / WBH only).
    std::size_t bh_kstar = 0;
    Method method = Method::wbh;
    std::optional<Pruning> pruning;
    std::optional<std::uint64_t> seed;
};

struct EValueVector {
    std::vector<double> values;
};

/// BH step-up: rejects {j : p_j <= q k* / m}, k* = max{k : #{p_j <= q k / m} >= k}.
SelectionResult bh(std::span<const double> pvalues, double q);

/// Step-up count k* alone.
std::size_t bh_step_up_count(std::span<const double> pvalues, double q);

/// First stage of WCS shared by every pruning rule.
struct FirstStep {
    std::vector<double> pvalues;
    std::vector<std::size_t> rhat_sizes;
    std::vector<double> s;
    std::vector<std::size_t> first_step;
};

/// Computes p_j, |R_{j->0}| via the per-anchor BH on auxiliary p-values, s_j
/// and R^(1). O(n log n + m log n) for the p-values, O(m) per anchor after
/// that; anchors run in parallel.
FirstStep wcs_first_step(const WeightedCalibration& calib, const WeightedTest& test, double q,
                         double tie_tolerance = 0.0);

/// Pruning draws xi: per-unit keyed uniforms (hete), one shared uniform
/// (homo) or all ones (dtm).
std::vector<double> pruning_draws(Pruning pruning, std::uint64_t seed, std::size_t m);

struct PruneOutcome {
    std::vector<std::size_t> selected;
    std::size_t r_star = 0;
};

/// r* = max{r >= 0 : #{j in R^(1) : xi_j |R_{j->0}| <= r} >= r}; keeps the
/// units of R^(1) with xi_j |R_{j->0}| <= r*.
PruneOutcome prune(std::span<const std::size_t> first_step,
                   std::span<const std::size_t> rhat_sizes, std::span<const double> xi);

/// Weighted Conformalized Selection (method must be one of the wcs_* values).
SelectionResult wcs(const WeightedCalibration& calib, const WeightedTest& test,
                    const SelectionConfig& config);

/// Hypothesis-conditional WCS. Numerically identical to `wcs`; the test scores
/// are expected to be evaluated on the full observations. Pruning comes from
/// config.hc_pruning.
SelectionResult hc_wcs(const WeightedCalibration& calib, const WeightedTest& test,
                       const SelectionConfig& config);

/// Dispatches on config.method, including WBH.
SelectionResult run_selection(const WeightedCalibration& calib, const WeightedTest& test,
                              const SelectionConfig& config);

/// e_j = 1{p_j <= q |R_j| / m} * m / (q |R_j|).
EValueVector evalues_from_wcs(std::span<const double> pvalues,
                              std::span<const std::size_t> rhat_sizes, double q, std::size_t m);

/// eBH: {j : e_j >= m / (q k)} with k = max{k : #{e_j >= m / (q k)} >= k}.
std::vector<std::size_t> ebh(const EValueVector& evalues, double q);

} // namespace confsel
