#pragma once

#include "confsel/core_types.hpp"
#include "confsel/selection.hpp"

#include <cstddef>
#include <span>
#include <vector>

// Serial reference implementations written straight from the defining
// formulas: O(n m) p-values, O(n m^2) auxiliary p-values, BH by direct
// counting over every k, and pruning by scanning every r. Kept for testing
// and benchmarking the optimized kernels; never used on a production path.
namespace confsel::reference {

std::vector<double> pvalues_nonrandomized(const WeightedCalibration& calib,
                                          const WeightedTest& test, double tie_tolerance = 0.0);

std::vector<double> pvalues_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                                       std::span<const double> u, double tie_tolerance = 0.0);

/// Row `anchor`: p_l^(j) for every l, with 0 at l == anchor.
std::vector<double> aux_row(const WeightedCalibration& calib, const WeightedTest& test,
                            std::size_t anchor, double tie_tolerance = 0.0);

/// k* = max{k : #{p <= q k / m} >= k} by trying every k.
std::size_t bh_kstar(std::span<const double> pvalues, double q);

std::vector<std::size_t> bh_rejections(std::span<const double> pvalues, double q);

/// BH through the threshold t = sup{t : m t / #{p <= t} <= q}, searched over
/// the observed p-values; returns {j : p_j <= t}.
std::vector<std::size_t> bh_by_fdp_threshold(std::span<const double> pvalues, double q);

FirstStep first_step(const WeightedCalibration& calib, const WeightedTest& test, double q,
                     double tie_tolerance = 0.0);

PruneOutcome prune(std::span<const std::size_t> first_step,
                   std::span<const std::size_t> rhat_sizes, std::span<const double> xi);

SelectionResult wcs(const WeightedCalibration& calib, const WeightedTest& test,
                    const SelectionConfig& config);

} // namespace confsel::reference
