#include "confsel/pvalues.hpp"

#include "confsel/exact_sum.hpp"
#include "confsel/parallel.hpp"
#include "confsel/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace confsel {

std::string_view to_string(PValueKind kind) {
    switch (kind) {
    case PValueKind::randomized: return "randomized";
    case PValueKind::nonrandomized: return "nonrandomized";
    case PValueKind::auxiliary: return "auxiliary";
    case PValueKind::oracle: return "oracle";
    case PValueKind::unweighted: return "unweighted";
    }
    return "unknown";
}

CalibrationIndex::CalibrationIndex(const WeightedCalibration& calib, double tie_tolerance)
    : tol_(tie_tolerance) {
    const auto scores = calib.scores();
    const auto weights = calib.weights();
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    scores_.reserve(order.size());
    weights_.reserve(order.size());
    prefix_.reserve(order.size() + 1);
    prefix_.push_back(0.0);
    ExactSum acc;
    for (std::size_t i : order) {
        scores_.push_back(scores[i]);
        weights_.push_back(weights[i]);
        acc.add(weights[i]);
        prefix_.push_back(acc.value());
    }
}

double CalibrationIndex::weight_below(double v) const {
    const auto it = std::lower_bound(scores_.begin(), scores_.end(), v - tol_);
    return prefix_[static_cast<std::size_t>(it - scores_.begin())];
}

double CalibrationIndex::weight_tied(double v) const {
    const auto lo = std::lower_bound(scores_.begin(), scores_.end(), v - tol_);
    const auto hi = std::upper_bound(lo, scores_.end(), v + tol_);
    if (lo == hi) return 0.0;
    const auto first = static_cast<std::size_t>(lo - scores_.begin());
    const auto count = static_cast<std::size_t>(hi - lo);
    return exact_sum(std::span<const double>(weights_).subspan(first, count));
}

namespace {

void check_u(std::span<const double> u, std::size_t m) {
    if (u.size() != m) {
        throw std::invalid_argument("expected " + std::to_string(m) + " tie-breakers, got " +
                                    std::to_string(u.size()));
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!(u[j] >= 0.0 && u[j] <= 1.0)) {
            throw std::invalid_argument("tie-breaker u[" + std::to_string(j) + "] outside [0, 1]");
        }
    }
}

double randomized_value(const CalibrationIndex& idx, double score, double weight, double u) {
    const double below = idx.weight_below(score);
    const double ties = idx.weight_tied(score);
    const double p = (below + (weight + ties) * u) / (idx.total_weight() + weight);
    return std::min(p, 1.0);
}

double nonrandomized_value(const CalibrationIndex& idx, double score, double weight) {
    const double p = (idx.weight_below(score) + weight) / (idx.total_weight() + weight);
    return std::min(p, 1.0);
}

PValueVector randomized_impl(const WeightedCalibration& calib, std::span<const double> scores,
                             std::span<const double> weights, std::span<const double> u,
                             double tol, PValueKind kind) {
    check_u(u, scores.size());
    const CalibrationIndex idx(calib, tol);
    PValueVector out;
    out.kind = kind;
    out.values.resize(scores.size());
    const auto m = static_cast<std::ptrdiff_t>(scores.size());
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::ptrdiff_t j = 0; j < m; ++j) {
        out.values[j] = randomized_value(idx, scores[j], weights[j], u[j]);
    }
    return out;
}

PValueVector nonrandomized_impl(const WeightedCalibration& calib, std::span<const double> scores,
                                std::span<const double> weights, double tol, PValueKind kind) {
    const CalibrationIndex idx(calib, tol);
    PValueVector out;
    out.kind = kind;
    out.values.resize(scores.size());
    const auto m = static_cast<std::ptrdiff_t>(scores.size());
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::ptrdiff_t j = 0; j < m; ++j) {
        out.values[j] = nonrandomized_value(idx, scores[j], weights[j]);
    }
    return out;
}

} // namespace

PValueVector wcp_nonrandomized(const WeightedCalibration& calib, const WeightedTest& test,
                               double tie_tolerance) {
    return nonrandomized_impl(calib, test.scores(), test.weights(), tie_tolerance,
                              PValueKind::nonrandomized);
}

PValueVector wcp_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                            std::span<const double> u, double tie_tolerance) {
    return randomized_impl(calib, test.scores(), test.weights(), u, tie_tolerance,
                           PValueKind::randomized);
}

std::vector<double> tie_break_uniforms(std::uint64_t seed, std::size_t m) {
    std::vector<double> u(m);
    for (std::size_t j = 0; j < m; ++j) u[j] = rng::keyed_uniform(seed, rng::Stream::tie_break, j);
    return u;
}

PValueVector wcp_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                            std::uint64_t seed, double tie_tolerance) {
    const auto u = tie_break_uniforms(seed, test.size());
    auto out = wcp_randomized(calib, test, u, tie_tolerance);
    out.seed_used = seed;
    return out;
}

std::vector<double> aux_pvalues(const WeightedCalibration& calib, const WeightedTest& test,
                                std::size_t anchor, double tie_tolerance,
                                std::optional<double> anchor_score) {
    const std::size_t m = test.size();
    if (anchor >= m) {
        throw std::out_of_range("anchor " + std::to_string(anchor) + " out of range for " +
                                std::to_string(m) + " test units");
    }
    const CalibrationIndex idx(calib, tie_tolerance);
    const auto scores = test.scores();
    const double w_anchor = test.weights()[anchor];
    const double v_anchor = anchor_score.value_or(scores[anchor]);
    const double denom = idx.total_weight() + w_anchor;
    std::vector<double> out;
    out.reserve(m - 1);
    for (std::size_t l = 0; l < m; ++l) {
        if (l == anchor) continue;
        double num = idx.weight_below(scores[l]);
        if (strictly_below(v_anchor, scores[l], tie_tolerance)) num = num + w_anchor;
        out.push_back(std::min(num / denom, 1.0));
    }
    return out;
}

AuxPValueMatrix aux_pvalue_matrix(const WeightedCalibration& calib, const WeightedTest& test,
                                  double tie_tolerance) {
    const std::size_t m = test.size();
    const CalibrationIndex idx(calib, tie_tolerance);
    const auto scores = test.scores();
    const auto weights = test.weights();
    std::vector<double> below(m);
    for (std::size_t l = 0; l < m; ++l) below[l] = idx.weight_below(scores[l]);

    AuxPValueMatrix out;
    out.m = m;
    out.values.assign(m * m, 0.0);
    const auto mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::ptrdiff_t j = 0; j < mm; ++j) {
        const double denom = idx.total_weight() + weights[j];
        for (std::size_t l = 0; l < m; ++l) {
            if (l == static_cast<std::size_t>(j)) continue;
            double num = below[l];
            if (strictly_below(scores[j], scores[l], tie_tolerance)) num = num + weights[j];
            out.values[static_cast<std::size_t>(j) * m + l] = std::min(num / denom, 1.0);
        }
    }
    return out;
}

PValueVector unweighted_pvalues(std::span<const double> calib_scores,
                                std::span<const double> test_scores, std::span<const double> u,
                                double tie_tolerance) {
    check_u(u, test_scores.size());
    std::vector<double> sorted(calib_scores.begin(), calib_scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double denom = static_cast<double>(sorted.size()) + 1.0;
    PValueVector out;
    out.kind = PValueKind::unweighted;
    out.values.resize(test_scores.size());
    for (std::size_t j = 0; j < test_scores.size(); ++j) {
        const double v = test_scores[j];
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v - tie_tolerance);
        const auto hi = std::upper_bound(lo, sorted.end(), v + tie_tolerance);
        const auto below = static_cast<double>(lo - sorted.begin());
        const auto ties = static_cast<double>(hi - lo);
        out.values[j] = std::min((below + (1.0 + ties) * u[j]) / denom, 1.0);
    }
    return out;
}

PValueVector oracle_pvalues(const WeightedCalibration& calib, std::span<const double> oracle_scores,
                            std::span<const double> test_weights,
                            std::optional<std::span<const double>> u, double tie_tolerance) {
    // Reuse the test-side validation.
    const WeightedTest oracle(std::vector<double>(oracle_scores.begin(), oracle_scores.end()),
                              std::vector<double>(test_weights.begin(), test_weights.end()));
    if (u) {
        return randomized_impl(calib, oracle.scores(), oracle.weights(), *u, tie_tolerance,
                               PValueKind::oracle);
    }
    return nonrandomized_impl(calib, oracle.scores(), oracle.weights(), tie_tolerance,
                              PValueKind::oracle);
}

double weighted_pvalue(std::span<const double> calib_scores, std::span<const double> calib_weights,
                       double test_score, double test_weight, double u) {
    double below = 0.0, ties = 0.0, total = 0.0;
    for (std::size_t i = 0; i < calib_scores.size(); ++i) {
        total += calib_weights[i];
        if (calib_scores[i] < test_score) {
            below += calib_weights[i];
        } else if (calib_scores[i] == test_score) {
            ties += calib_weights[i];
        }
    }
    return (below + (test_weight + ties) * u) / (total + test_weight);
}

} // namespace confsel
