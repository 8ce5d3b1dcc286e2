#include "confsel/selection.hpp"

#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace confsel {

namespace {

void check_q(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("q must lie in (0, 1), got " + std::to_string(q));
    }
}

// Smallest k in [1, m] with p <= q k / m, or m + 1 when none exists.
std::size_t first_passing_k(double p, double q, std::size_t m) {
    if (!(p <= bh_threshold(q, m, m))) return m + 1;
    const double guess = std::ceil(p * static_cast<double>(m) / q);
    std::size_t k = guess < 1.0 ? 1 : (guess > static_cast<double>(m) ? m : static_cast<std::size_t>(guess));
    while (k > 1 && p <= bh_threshold(q, k - 1, m)) --k;
    while (!(p <= bh_threshold(q, k, m))) ++k;
    return k;
}

// k* from a histogram of first-passing levels; `base` values are known to
// pass every level.
std::size_t step_up_from_histogram(std::span<const std::size_t> hist, std::size_t base,
                                   std::size_t m) {
    std::size_t cumulative = base;
    std::size_t kstar = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        cumulative += hist[k];
        if (cumulative >= k) kstar = k;
    }
    return kstar;
}

double ebh_threshold(double q, std::size_t k, std::size_t m) {
    return static_cast<double>(m) / (q * static_cast<double>(k));
}

bool is_wcs_method(Method m) {
    return m == Method::wcs_hete || m == Method::wcs_homo || m == Method::wcs_dtm;
}

Pruning pruning_of(Method m) {
    switch (m) {
    case Method::wcs_hete: return Pruning::hete;
    case Method::wcs_homo: return Pruning::homo;
    case Method::wcs_dtm: return Pruning::dtm;
    default: throw std::invalid_argument("method has no pruning rule");
    }
}

SelectionResult wcs_with_pruning(const WeightedCalibration& calib, const WeightedTest& test,
                                 const SelectionConfig& config, Method method, Pruning pruning) {
    config.validate();
    FirstStep fs = wcs_first_step(calib, test, config.q, config.tie_tolerance);
    const auto xi = pruning_draws(pruning, config.seed, test.size());
    PruneOutcome pruned = prune(fs.first_step, fs.rhat_sizes, xi);

    SelectionResult out;
    out.selected = std::move(pruned.selected);
    out.r_star = pruned.r_star;
    out.first_step = std::move(fs.first_step);
    out.pvalues = std::move(fs.pvalues);
    out.s = std::move(fs.s);
    out.rhat_sizes = std::move(fs.rhat_sizes);
    out.method = method;
    out.pruning = pruning;
    out.seed = config.seed;
    return out;
}

} // namespace

std::size_t bh_step_up_count(std::span<const double> pvalues, double q) {
    check_q(q);
    const std::size_t m = pvalues.size();
    std::vector<std::size_t> hist(m + 2, 0);
    for (std::size_t j = 0; j < m; ++j) {
        const double p = pvalues[j];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("p-value at index " + std::to_string(j) +
                                        " outside [0, 1]");
        }
        const std::size_t k = first_passing_k(p, q, m);
        if (k <= m) ++hist[k];
    }
    return step_up_from_histogram(hist, 0, m);
}

SelectionResult bh(std::span<const double> pvalues, double q) {
    SelectionResult out;
    out.method = Method::wbh;
    out.bh_kstar = bh_step_up_count(pvalues, q);
    out.pvalues.assign(pvalues.begin(), pvalues.end());
    if (out.bh_kstar > 0) {
        const double threshold = bh_threshold(q, out.bh_kstar, pvalues.size());
        for (std::size_t j = 0; j < pvalues.size(); ++j) {
            if (pvalues[j] <= threshold) out.selected.push_back(j);
        }
    }
    out.first_step = out.selected;
    return out;
}

FirstStep wcs_first_step(const WeightedCalibration& calib, const WeightedTest& test, double q,
                         double tie_tolerance) {
    check_q(q);
    const std::size_t m = test.size();
    FirstStep fs;
    if (m == 0) return fs;

    const CalibrationIndex idx(calib, tie_tolerance);
    const auto scores = test.scores();
    const auto weights = test.weights();
    const double total = idx.total_weight();

    // The calibration part of every auxiliary numerator depends only on l.
    std::vector<double> below(m);
    fs.pvalues.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
        below[l] = idx.weight_below(scores[l]);
        fs.pvalues[l] = std::min((below[l] + weights[l]) / (total + weights[l]), 1.0);
    }

    fs.rhat_sizes.assign(m, 0);
    const auto mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel num_threads(worker_count())
    {
        std::vector<std::size_t> hist(m + 2);
#pragma omp for schedule(static)
        for (std::ptrdiff_t jj = 0; jj < mm; ++jj) {
            const auto j = static_cast<std::size_t>(jj);
            std::fill(hist.begin(), hist.end(), std::size_t{0});
            const double w_anchor = weights[j];
            const double v_anchor = scores[j];
            const double denom = total + w_anchor;
            for (std::size_t l = 0; l < m; ++l) {
                if (l == j) continue;
                double num = below[l];
                if (strictly_below(v_anchor, scores[l], tie_tolerance)) num = num + w_anchor;
                const double p = std::min(num / denom, 1.0);
                const std::size_t k = first_passing_k(p, q, m);
                if (k <= m) ++hist[k];
            }
            // The anchor's own entry is 0 and passes every level.
            fs.rhat_sizes[j] = step_up_from_histogram(hist, 1, m);
        }
    }

    fs.s.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        fs.s[j] = bh_threshold(q, fs.rhat_sizes[j], m);
        if (fs.pvalues[j] <= fs.s[j]) fs.first_step.push_back(j);
    }
    return fs;
}

std::vector<double> pruning_draws(Pruning pruning, std::uint64_t seed, std::size_t m) {
    std::vector<double> xi(m, 1.0);
    switch (pruning) {
    case Pruning::hete:
        for (std::size_t j = 0; j < m; ++j) {
            xi[j] = rng::keyed_uniform(seed, rng::Stream::prune_hete, j);
        }
        break;
    case Pruning::homo:
        std::fill(xi.begin(), xi.end(), rng::keyed_uniform(seed, rng::Stream::prune_homo, 0));
        break;
    case Pruning::dtm: break;
    }
    return xi;
}

PruneOutcome prune(std::span<const std::size_t> first_step,
                   std::span<const std::size_t> rhat_sizes, std::span<const double> xi) {
    if (xi.size() != rhat_sizes.size()) {
        throw std::invalid_argument("prune: xi and rhat_sizes differ in length");
    }
    std::vector<double> t;
    t.reserve(first_step.size());
    for (std::size_t j : first_step) t.push_back(xi[j] * static_cast<double>(rhat_sizes[j]));
    std::vector<double> sorted = t;
    std::sort(sorted.begin(), sorted.end());

    PruneOutcome out;
    for (std::size_t r = sorted.size(); r >= 1; --r) {
        const auto count = static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), static_cast<double>(r)) - sorted.begin());
        if (count >= r) {
            out.r_star = r;
            break;
        }
    }
    for (std::size_t k = 0; k < first_step.size(); ++k) {
        if (t[k] <= static_cast<double>(out.r_star)) out.selected.push_back(first_step[k]);
    }
    return out;
}

SelectionResult wcs(const WeightedCalibration& calib, const WeightedTest& test,
                    const SelectionConfig& config) {
    if (!is_wcs_method(config.method)) {
        throw std::invalid_argument("wcs: method must be wcs-hete, wcs-homo or wcs-dtm, got " +
                                    std::string(to_string(config.method)));
    }
    return wcs_with_pruning(calib, test, config, config.method, pruning_of(config.method));
}

SelectionResult hc_wcs(const WeightedCalibration& calib, const WeightedTest& test,
                       const SelectionConfig& config) {
    return wcs_with_pruning(calib, test, config, Method::hc_wcs, config.hc_pruning);
}

SelectionResult run_selection(const WeightedCalibration& calib, const WeightedTest& test,
                              const SelectionConfig& config) {
    config.validate();
    switch (config.method) {
    case Method::wbh: {
        PValueVector p = config.randomized_pvalues
                             ? wcp_randomized(calib, test, config.seed, config.tie_tolerance)
                             : wcp_nonrandomized(calib, test, config.tie_tolerance);
        SelectionResult out = bh(p.values, config.q);
        if (config.randomized_pvalues) out.seed = config.seed;
        return out;
    }
    case Method::hc_wcs: return hc_wcs(calib, test, config);
    default: return wcs(calib, test, config);
    }
}

EValueVector evalues_from_wcs(std::span<const double> pvalues,
                              std::span<const std::size_t> rhat_sizes, double q, std::size_t m) {
    check_q(q);
    if (pvalues.size() != rhat_sizes.size()) {
        throw std::invalid_argument("evalues_from_wcs: pvalues and sizes differ in length");
    }
    EValueVector out;
    out.values.resize(pvalues.size());
    for (std::size_t j = 0; j < pvalues.size(); ++j) {
        if (rhat_sizes[j] == 0) {
            throw std::invalid_argument("evalues_from_wcs: |R_{j->0}| must be >= 1 (index " +
                                        std::to_string(j) + ")");
        }
        const bool pass = pvalues[j] <= bh_threshold(q, rhat_sizes[j], m);
        out.values[j] = pass ? ebh_threshold(q, rhat_sizes[j], m) : 0.0;
    }
    return out;
}

std::vector<std::size_t> ebh(const EValueVector& evalues, double q) {
    check_q(q);
    const auto& e = evalues.values;
    const std::size_t m = e.size();
    for (std::size_t j = 0; j < m; ++j) {
        if (!(e[j] >= 0.0)) {
            throw std::invalid_argument("e-value at index " + std::to_string(j) + " is negative");
        }
    }
    std::vector<double> sorted = e;
    std::sort(sorted.begin(), sorted.end());
    std::size_t khat = 0;
    for (std::size_t k = m; k >= 1; --k) {
        const double threshold = ebh_threshold(q, k, m);
        const auto count = static_cast<std::size_t>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), threshold));
        if (count >= k) {
            khat = k;
            break;
        }
    }
    std::vector<std::size_t> selected;
    if (khat == 0) return selected;
    const double threshold = ebh_threshold(q, khat, m);
    for (std::size_t j = 0; j < m; ++j) {
        if (e[j] >= threshold) selected.push_back(j);
    }
    return selected;
}

} // namespace confsel
