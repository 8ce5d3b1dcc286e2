#pragma once

#include "confsel/core_types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace confsel {

/// a < b once scores within `tol` of each other count as ties.
inline bool strictly_below(double a, double b, double tol) { return a < b - tol; }
inline bool tied(double a, double b, double tol) { return !(a < b - tol) && !(a > b + tol); }

enum class PValueKind { randomized, nonrandomized, auxiliary, oracle, unweighted };

std::string_view to_string(PValueKind kind);

struct PValueVector {
    std::vector<double> values;
    PValueKind kind = PValueKind::nonrandomized;
    std::optional<std::uint64_t> seed_used;
};

/// Calibration scores sorted once with exact prefix sums of their weights.
///
/// weight_below(v) is a binary search plus a lookup; every returned sum is the
/// correctly rounded exact sum of the selected weights.
class CalibrationIndex {
public:
    explicit CalibrationIndex(const WeightedCalibration& calib, double tie_tolerance = 0.0);

    /// Sum of w_i over V_i < v.
    double weight_below(double v) const;
    /// Sum of w_i over V_i tied with v.
    double weight_tied(double v) const;
    double total_weight() const { return prefix_.back(); }
    std::size_t size() const { return scores_.size(); }
    double tie_tolerance() const { return tol_; }

private:
    std::vector<double> scores_;
    std::vector<double> weights_;
    std::vector<double> prefix_;
    double tol_;
};

/// p_j = [sum_i w_i 1{V_i < V_j} + w_j] / [sum_i w_i + w_j]. With no
/// calibration data every p_j is 1.
PValueVector wcp_nonrandomized(const WeightedCalibration& calib, const WeightedTest& test,
                               double tie_tolerance = 0.0);

/// Randomized p-values with caller-supplied tie-breakers u_j in [0, 1].
PValueVector wcp_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                            std::span<const double> u, double tie_tolerance = 0.0);

/// Randomized p-values with u_j drawn from the stream keyed by (seed, j).
PValueVector wcp_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                            std::uint64_t seed, double tie_tolerance = 0.0);

/// The u_j used by the seeded overload.
std::vector<double> tie_break_uniforms(std::uint64_t seed, std::size_t m);

/// Auxiliary p-values p_l^(j) for l != j, in increasing l.
///
/// `anchor_score`, when set, replaces the anchor's observed score in the
/// indicator 1{V_j < V_l}; passing the true-outcome score gives the
/// leave-one-out oracle counterpart used in the FDR argument.
std::vector<double> aux_pvalues(const WeightedCalibration& calib, const WeightedTest& test,
                                std::size_t anchor, double tie_tolerance = 0.0,
                                std::optional<double> anchor_score = std::nullopt);

/// All auxiliary p-values, row = anchor. The diagonal holds 0, the value the
/// per-anchor BH pass sees at the anchor's own position.
struct AuxPValueMatrix {
    std::size_t m = 0;
    std::vector<double> values;

    double operator()(std::size_t anchor, std::size_t l) const { return values[anchor * m + l]; }
    std::span<const double> row(std::size_t anchor) const {
        return std::span<const double>(values).subspan(anchor * m, m);
    }
};

AuxPValueMatrix aux_pvalue_matrix(const WeightedCalibration& calib, const WeightedTest& test,
                                  double tie_tolerance = 0.0);

/// Unweighted conformal p-values:
/// [sum_i 1{V_i < V_j} + u_j (1 + sum_i 1{V_i = V_j})] / (n + 1).
PValueVector unweighted_pvalues(std::span<const double> calib_scores,
                                std::span<const double> test_scores, std::span<const double> u,
                                double tie_tolerance = 0.0);

/// p-values computed from true-outcome test scores (simulation only). Without
/// `u` the non-randomized formula is used; with it, the randomized one.
PValueVector oracle_pvalues(const WeightedCalibration& calib, std::span<const double> oracle_scores,
                            std::span<const double> test_weights,
                            std::optional<std::span<const double>> u = std::nullopt,
                            double tie_tolerance = 0.0);

/// Single randomized p-value by direct summation. Used by Monte-Carlo loops
/// that would otherwise allocate a calibration object per draw.
double weighted_pvalue(std::span<const double> calib_scores, std::span<const double> calib_weights,
                       double test_score, double test_weight, double u);

} // namespace confsel
