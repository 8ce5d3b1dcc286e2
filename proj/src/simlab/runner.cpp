#include "confsel/simlab.hpp"

#include "confsel/exact_sum.hpp"
#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/rng.hpp"
#include "confsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iterator>

namespace confsel::simlab {

namespace {

bool uses_hc(const SimulationSpec& spec) {
    return spec.scenario == Scenario::outlier ||
           (spec.scenario == Scenario::covshift_binary && spec.negatives_only);
}

double relative_discrepancy(const std::vector<std::size_t>& r, const std::vector<std::size_t>& ref) {
    std::vector<std::size_t> diff;
    std::set_symmetric_difference(r.begin(), r.end(), ref.begin(), ref.end(),
                                  std::back_inserter(diff));
    return static_cast<double>(diff.size()) /
           static_cast<double>(std::max<std::size_t>(1, ref.size()));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& xs) {
    MeanSe out;
    if (xs.empty()) return out;
    const auto n = static_cast<double>(xs.size());
    out.mean = exact_sum(xs) / n;
    if (xs.size() < 2) return out;
    ExactSum sq;
    for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
    out.se = std::sqrt(sq.value() / (n - 1.0) / n);
    return out;
}

} // namespace

std::vector<std::string> method_labels(const SimulationSpec& spec) {
    const std::string prefix = uses_hc(spec) ? "hc-wcs-" : "wcs-";
    return {"wbh", prefix + "hete", prefix + "homo", prefix + "dtm"};
}

TrialSelections select_all(const SimulationSpec& spec, const GeneratedTrial& trial,
                           std::size_t trial_index) {
    const std::uint64_t seed =
        rng::derive_seed(spec.master_seed, rng::Stream::selection, trial_index);
    const std::size_t m = trial.test.size();
    const auto labels = method_labels(spec);

    TrialSelections out;
    const PValueVector p = wcp_randomized(trial.calibration, trial.test, seed);
    out.sets.emplace_back(labels[0], bh(p.values, spec.q).selected);

    FirstStep fs = wcs_first_step(trial.calibration, trial.test, spec.q);
    const Pruning rules[] = {Pruning::hete, Pruning::homo, Pruning::dtm};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto xi = pruning_draws(rules[k], seed, m);
        out.sets.emplace_back(labels[k + 1], prune(fs.first_step, fs.rhat_sizes, xi).selected);
    }
    out.first_step = std::move(fs.first_step);
    return out;
}

const MethodSummary* SimulationReport::find(std::string_view method) const {
    for (const auto& s : summaries) {
        if (s.method == method) return &s;
    }
    return nullptr;
}

SimulationReport run_trials(const SimulationSpec& spec) {
    spec.validate();
    SimulationReport report;
    report.spec = spec;
    const auto labels = method_labels(spec);
    const std::size_t n_methods = labels.size();
    const std::size_t trials = spec.trials;

    std::vector<TrialRecord> records(trials * n_methods);
    std::vector<double> normalizers(trials, 0.0);
    std::exception_ptr failure;

    const auto n = static_cast<long long>(trials);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long long t = 0; t < n; ++t) {
        try {
            const auto idx = static_cast<std::size_t>(t);
            const GeneratedTrial trial = generate(spec, idx);
            const TrialSelections sel = select_all(spec, trial, idx);
            const auto& nulls = *trial.test.null_flags();
            const auto& reference = sel.sets.front().second;
            for (std::size_t k = 0; k < n_methods; ++k) {
                TrialRecord& rec = records[idx * n_methods + k];
                rec.trial = idx;
                rec.method = sel.sets[k].first;
                rec.metrics = evaluate_selection(sel.sets[k].second, nulls, trial.test_true_weights);
                rec.metrics.discrepancy = relative_discrepancy(sel.sets[k].second, reference);
            }
            normalizers[idx] =
                weight_normalizer_plugin(trial.calib_true_weights, trial.test_true_weights);
        } catch (...) {
#pragma omp critical(confsel_run_trials_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t k = 0; k < n_methods; ++k) {
        std::vector<double> fdps, powers, wfdps, sizes, discrepancies;
        for (std::size_t t = 0; t < trials; ++t) {
            const TrialMetrics& tm = records[t * n_methods + k].metrics;
            fdps.push_back(tm.fdp);
            powers.push_back(tm.power);
            wfdps.push_back(tm.weighted_fdp);
            sizes.push_back(static_cast<double>(tm.n_selected));
            discrepancies.push_back(tm.discrepancy.value_or(0.0));
        }
        MethodSummary s;
        s.method = labels[k];
        s.trials = trials;
        const MeanSe f = mean_and_se(fdps), p = mean_and_se(powers), w = mean_and_se(wfdps);
        s.fdr = f.mean;
        s.fdr_se = f.se;
        s.power = p.mean;
        s.power_se = p.se;
        s.weighted_fdr = w.mean;
        s.weighted_fdr_se = w.se;
        s.mean_selected = mean_and_se(sizes).mean;
        s.mean_discrepancy = mean_and_se(discrepancies).mean;
        report.summaries.push_back(std::move(s));
    }
    report.weight_normalizer = mean_and_se(normalizers).mean;
    report.records = std::move(records);
    return report;
}

} // namespace confsel::simlab
