#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace confsel {

// Monotone nonconformity scores. All are nondecreasing in y for fixed
// remaining arguments; non-finite inputs throw std::invalid_argument.

double score_res(double y, double mu_hat);

/// M * 1{y > c} + c * 1{y <= c} - mu_hat.
double score_clip(double y, double c, double m, double mu_hat);

double score_cqr(double y, double q_beta_hat);

/// Pass-through for a caller-fitted conditional CDF value F_hat(x, y) in [0, 1].
double score_cdf(double cdf_value);

/// 2 * max over rows of (|mu_hat| v |c|) + 1.
double default_clip_m(std::span<const double> mu_hat, std::span<const double> thresholds);

struct ScoreRow {
    double y;
    double score;
};

struct MonotoneViolation {
    std::size_t group;
    std::size_t first_row;
    std::size_t second_row;
};

struct MonotoneReport {
    bool ok = true;
    std::optional<MonotoneViolation> violation;
};

/// Checks that within each group the score is nondecreasing in y.
///
/// Rows need not be sorted. The first violating pair (in y order) is reported
/// using the rows' original positions within their group.
MonotoneReport validate_monotone(std::span<const std::vector<ScoreRow>> groups);

} // namespace confsel
