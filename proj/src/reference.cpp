#include "confsel/reference.hpp"

#include "confsel/exact_sum.hpp"
#include "confsel/pvalues.hpp"

#include <algorithm>
#include <stdexcept>

namespace confsel::reference {

namespace {

struct Sums {
    double below;
    double ties;
    double total;
};

Sums calibration_sums(const WeightedCalibration& calib, double v, double tol) {
    ExactSum below, ties, total;
    const auto scores = calib.scores();
    const auto weights = calib.weights();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        total.add(weights[i]);
        if (strictly_below(scores[i], v, tol)) below.add(weights[i]);
        if (tied(scores[i], v, tol)) ties.add(weights[i]);
    }
    return {below.value(), ties.value(), total.value()};
}

} // namespace

std::vector<double> pvalues_nonrandomized(const WeightedCalibration& calib,
                                          const WeightedTest& test, double tie_tolerance) {
    std::vector<double> out(test.size());
    for (std::size_t j = 0; j < test.size(); ++j) {
        const double w = test.weights()[j];
        const Sums s = calibration_sums(calib, test.scores()[j], tie_tolerance);
        out[j] = std::min((s.below + w) / (s.total + w), 1.0);
    }
    return out;
}

std::vector<double> pvalues_randomized(const WeightedCalibration& calib, const WeightedTest& test,
                                       std::span<const double> u, double tie_tolerance) {
    std::vector<double> out(test.size());
    for (std::size_t j = 0; j < test.size(); ++j) {
        const double w = test.weights()[j];
        const Sums s = calibration_sums(calib, test.scores()[j], tie_tolerance);
        out[j] = std::min((s.below + (w + s.ties) * u[j]) / (s.total + w), 1.0);
    }
    return out;
}

std::vector<double> aux_row(const WeightedCalibration& calib, const WeightedTest& test,
                            std::size_t anchor, double tie_tolerance) {
    const auto scores = test.scores();
    const double w_anchor = test.weights()[anchor];
    std::vector<double> row(test.size(), 0.0);
    for (std::size_t l = 0; l < test.size(); ++l) {
        if (l == anchor) continue;
        const Sums s = calibration_sums(calib, scores[l], tie_tolerance);
        double num = s.below;
        if (strictly_below(scores[anchor], scores[l], tie_tolerance)) num = num + w_anchor;
        row[l] = std::min(num / (s.total + w_anchor), 1.0);
    }
    return row;
}

std::size_t bh_kstar(std::span<const double> pvalues, double q) {
    const std::size_t m = pvalues.size();
    for (std::size_t k = m; k >= 1; --k) {
        const double threshold = bh_threshold(q, k, m);
        const auto count = static_cast<std::size_t>(
            std::count_if(pvalues.begin(), pvalues.end(), [&](double p) { return p <= threshold; }));
        if (count >= k) return k;
    }
    return 0;
}

std::vector<std::size_t> bh_rejections(std::span<const double> pvalues, double q) {
    const std::size_t k = bh_kstar(pvalues, q);
    std::vector<std::size_t> out;
    if (k == 0) return out;
    const double threshold = bh_threshold(q, k, pvalues.size());
    for (std::size_t j = 0; j < pvalues.size(); ++j) {
        if (pvalues[j] <= threshold) out.push_back(j);
    }
    return out;
}

std::vector<std::size_t> bh_by_fdp_threshold(std::span<const double> pvalues, double q) {
    const auto m = static_cast<double>(pvalues.size());
    // The estimated FDP m t / #{p <= t} only drops at observed p-values, so the
    // supremum over feasible t is attained at one of them.
    double best = -1.0;
    for (double t : pvalues) {
        const auto count = static_cast<double>(
            std::count_if(pvalues.begin(), pvalues.end(), [&](double p) { return p <= t; }));
        if (m * t / count <= q) best = std::max(best, t);
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < pvalues.size(); ++j) {
        if (pvalues[j] <= best) out.push_back(j);
    }
    return out;
}

FirstStep first_step(const WeightedCalibration& calib, const WeightedTest& test, double q,
                     double tie_tolerance) {
    const std::size_t m = test.size();
    FirstStep fs;
    fs.pvalues = pvalues_nonrandomized(calib, test, tie_tolerance);
    fs.rhat_sizes.resize(m);
    fs.s.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto row = aux_row(calib, test, j, tie_tolerance);
        fs.rhat_sizes[j] = bh_rejections(row, q).size();
        fs.s[j] = bh_threshold(q, fs.rhat_sizes[j], m);
        if (fs.pvalues[j] <= fs.s[j]) fs.first_step.push_back(j);
    }
    return fs;
}

PruneOutcome prune(std::span<const std::size_t> first_step,
                   std::span<const std::size_t> rhat_sizes, std::span<const double> xi) {
    PruneOutcome out;
    const auto passes = [&](std::size_t j, std::size_t r) {
        return xi[j] * static_cast<double>(rhat_sizes[j]) <= static_cast<double>(r);
    };
    for (std::size_t r = 0; r <= rhat_sizes.size(); ++r) {
        const auto count = static_cast<std::size_t>(std::count_if(
            first_step.begin(), first_step.end(), [&](std::size_t j) { return passes(j, r); }));
        if (count >= r) out.r_star = r;
    }
    for (std::size_t j : first_step) {
        if (passes(j, out.r_star)) out.selected.push_back(j);
    }
    return out;
}

SelectionResult wcs(const WeightedCalibration& calib, const WeightedTest& test,
                    const SelectionConfig& config) {
    Pruning pruning;
    switch (config.method) {
    case Method::wcs_hete: pruning = Pruning::hete; break;
    case Method::wcs_homo: pruning = Pruning::homo; break;
    case Method::wcs_dtm: pruning = Pruning::dtm; break;
    case Method::hc_wcs: pruning = config.hc_pruning; break;
    default: throw std::invalid_argument("reference::wcs: not a WCS method");
    }
    FirstStep fs = first_step(calib, test, config.q, config.tie_tolerance);
    const auto xi = pruning_draws(pruning, config.seed, test.size());
    PruneOutcome pruned = prune(fs.first_step, fs.rhat_sizes, xi);

    SelectionResult out;
    out.selected = std::move(pruned.selected);
    out.r_star = pruned.r_star;
    out.first_step = std::move(fs.first_step);
    out.pvalues = std::move(fs.pvalues);
    out.s = std::move(fs.s);
    out.rhat_sizes = std::move(fs.rhat_sizes);
    out.method = config.method;
    out.pruning = pruning;
    out.seed = config.seed;
    return out;
}

} // namespace confsel::reference
