#include "confsel/cli.hpp"

#include "confsel/metrics.hpp"
#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/selection.hpp"
#include "confsel/simlab.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace confsel::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + out_path);
    f << text;
}

template <typename T>
json array_of(const std::vector<T>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(x);
    return a;
}

// pvalues ----------------------------------------------------------------------

struct PValuesArgs {
    std::string calib, test, out;
    bool randomized = false;
    std::uint64_t seed = 0;
    double tie_tolerance = 0.0;
};

int cmd_pvalues(const PValuesArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    const WeightedCalibration calib = read_calibration_csv(a.calib);
    const WeightedTest test = read_test_csv(a.test);
    const PValueVector p = a.randomized ? wcp_randomized(calib, test, a.seed, a.tie_tolerance)
                                        : wcp_nonrandomized(calib, test, a.tie_tolerance);
    std::ostringstream csv;
    csv << "index,pvalue,kind\n";
    for (std::size_t j = 0; j < p.values.size(); ++j) {
        csv << j << ',' << format_double(p.values[j]) << ',' << to_string(p.kind) << '\n';
    }
    write_text(csv.str(), a.out, out);
    if (!a.out.empty()) {
        RunManifest m;
        m.command = "pvalues";
        m.config = {{"randomized", a.randomized}, {"tie_tolerance", a.tie_tolerance}};
        if (a.randomized) m.seed = a.seed;
        m.input_digests = {{a.calib, sha256_file(a.calib)}, {a.test, sha256_file(a.test)}};
        m.duration_seconds = seconds_since(start);
        write_manifest(m, a.out);
    }
    return kExitOk;
}

// select -----------------------------------------------------------------------

struct SelectArgs {
    std::string calib, test, out;
    double q = 0.1;
    std::string method = "wcs-hete";
    std::string pruning = "hete";
    bool nonrandomized = false;
    std::uint64_t seed = 0;
    double tie_tolerance = 0.0;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    SelectionConfig config;
    config.q = a.q;
    const auto method = parse_method(a.method);
    if (!method) throw UsageError("unknown method '" + a.method + "'");
    config.method = *method;
    const auto pruning = parse_pruning(a.pruning);
    if (!pruning) throw UsageError("unknown pruning '" + a.pruning + "'");
    config.hc_pruning = *pruning;
    config.randomized_pvalues = !a.nonrandomized;
    config.seed = a.seed;
    config.tie_tolerance = a.tie_tolerance;
    config.validate();

    const WeightedCalibration calib = read_calibration_csv(a.calib);
    const WeightedTest test = read_test_csv(a.test);
    const SelectionResult r = run_selection(calib, test, config);

    RunManifest m;
    m.command = "select";
    m.config = {{"q", config.q},
                {"method", std::string(to_string(config.method))},
                {"randomized_pvalues", config.randomized_pvalues},
                {"tie_tolerance", config.tie_tolerance}};
    if (config.method == Method::hc_wcs) m.config["pruning"] = std::string(to_string(config.hc_pruning));
    m.seed = config.seed;
    m.input_digests = {{a.calib, sha256_file(a.calib)}, {a.test, sha256_file(a.test)}};

    json j;
    j["command"] = "select";
    j["config"] = m.config;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    j["method"] = std::string(to_string(r.method));
    j["pruning"] = r.pruning ? json(std::string(to_string(*r.pruning))) : json(nullptr);
    j["selected"] = array_of(r.selected);
    j["first_step"] = array_of(r.first_step);
    j["s"] = array_of(r.s);
    j["rhat_sizes"] = array_of(r.rhat_sizes);
    j["r_star"] = r.r_star;
    j["bh_kstar"] = r.bh_kstar;
    j["pvalues"] = array_of(r.pvalues);
    j["manifest"] = m.reproducible_json();
    write_text(j.dump(2) + "\n", a.out, out);
    if (!a.out.empty()) {
        m.duration_seconds = seconds_since(start);
        write_manifest(m, a.out);
    }
    return kExitOk;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario = "ite1", coupling = "independent", corr = "ind", score = "oracle";
    std::string out;
    simlab::SimulationSpec spec;
};

json spec_json(const simlab::SimulationSpec& s) {
    return {{"scenario", std::string(to_string(s.scenario))},
            {"coupling", std::string(to_string(s.coupling))},
            {"covariance", std::string(to_string(s.covariance))},
            {"n_train", s.n_train},
            {"n_calib", s.n_calib},
            {"m", s.m},
            {"signal_a", s.signal_a},
            {"rho", s.rho},
            {"q", s.q},
            {"trials", s.trials},
            {"score", std::string(to_string(s.score))},
            {"cqr_beta", s.cqr_beta},
            {"sigma1_scale", s.sigma1_scale},
            {"weight_gamma", s.weight_gamma},
            {"negatives_only", s.negatives_only},
            {"centers_per_study", s.centers_per_study}};
}

int cmd_simulate(SimulateArgs a, std::ostream& out) {
    const auto start = Clock::now();
    simlab::SimulationSpec& spec = a.spec;
    const auto scenario = simlab::parse_scenario(a.scenario);
    const auto coupling = simlab::parse_coupling(a.coupling);
    const auto cov = simlab::parse_covariance(a.corr);
    const auto score = simlab::parse_sim_score(a.score);
    if (!scenario) throw UsageError("unknown scenario '" + a.scenario + "'");
    if (!coupling) throw UsageError("unknown coupling '" + a.coupling + "'");
    if (!cov) throw UsageError("unknown covariance '" + a.corr + "'");
    if (!score) throw UsageError("unknown score '" + a.score + "'");
    spec.scenario = *scenario;
    spec.coupling = *coupling;
    spec.covariance = *cov;
    spec.score = *score;
    spec.validate();

    const simlab::SimulationReport report = simlab::run_trials(spec);

    RunManifest m;
    m.command = "simulate";
    m.config = spec_json(spec);
    m.seed = spec.master_seed;

    json methods = json::array();
    for (const auto& s : report.summaries) {
        methods.push_back({{"method", s.method},
                           {"trials", s.trials},
                           {"fdr", s.fdr},
                           {"fdr_se", s.fdr_se},
                           {"power", s.power},
                           {"power_se", s.power_se},
                           {"weighted_fdr", s.weighted_fdr},
                           {"weighted_fdr_se", s.weighted_fdr_se},
                           {"mean_selected", s.mean_selected},
                           {"mean_discrepancy", s.mean_discrepancy}});
    }
    json j;
    j["command"] = "simulate";
    j["config"] = m.config;
    j["seed"] = spec.master_seed;
    j["methods"] = std::move(methods);
    j["weight_normalizer"] = report.weight_normalizer;
    j["manifest"] = m.reproducible_json();
    const std::string summary = j.dump(2) + "\n";

    if (a.out.empty()) {
        out << summary;
        return kExitOk;
    }
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "trial,method,fdp,power,weighted_fdp,n_selected,discrepancy\n";
    for (const auto& r : report.records) {
        csv << r.trial << ',' << r.method << ',' << format_double(r.metrics.fdp) << ','
            << format_double(r.metrics.power) << ',' << format_double(r.metrics.weighted_fdp) << ','
            << r.metrics.n_selected << ',' << format_double(r.metrics.discrepancy.value_or(0.0))
            << '\n';
    }
    write_text(summary, (dir / "summary.json").string(), out);
    write_text(csv.str(), (dir / "trials.csv").string(), out);
    m.duration_seconds = seconds_since(start);
    write_manifest(m, dir / "summary.json");
    write_manifest(m, dir / "trials.csv");
    return kExitOk;
}

// prds-check -------------------------------------------------------------------

struct PrdsArgs {
    std::uint64_t draws = 10'000'000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_prds_check(const PrdsArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    if (a.draws == 0) throw UsageError("--draws must be >= 1");
    const simlab::PrdsEstimate e = simlab::prds_counterexample_mc(a.draws, a.seed);

    RunManifest m;
    m.command = "prds-check";
    m.config = {{"draws", a.draws}};
    m.seed = a.seed;

    const auto tail = [](const simlab::ConditionalTail& f) {
        return json{{"s", f.s},
                    {"t", f.t},
                    {"estimate", f.estimate},
                    {"se", f.se},
                    {"hits", f.hits},
                    {"conditioned", f.conditioned}};
    };
    json j;
    j["command"] = "prds-check";
    j["config"] = m.config;
    j["seed"] = a.seed;
    j["F_35"] = e.f_35.estimate;
    j["F_910"] = e.f_910.estimate;
    j["ses"] = {{"F_35", e.f_35.se}, {"F_910", e.f_910.se}};
    j["exact_refs"] = {{"F_35", e.exact_35}, {"F_910", e.exact_910}};
    j["detail"] = {{"F_35", tail(e.f_35)}, {"F_910", tail(e.f_910)}};
    j["ordering_confirmed"] = e.ordering_confirmed;
    j["manifest"] = m.reproducible_json();
    write_text(j.dump(2) + "\n", a.out, out);
    if (!a.out.empty()) {
        m.duration_seconds = seconds_since(start);
        write_manifest(m, a.out);
    }
    return kExitOk;
}

// evaluate ---------------------------------------------------------------------

struct EvaluateArgs {
    std::string test, selection, reference, out;
};

std::vector<std::size_t> read_selected(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open " + path);
    json j;
    try {
        j = json::parse(f);
        return j.at("selected").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw UsageError(path + ": expected a JSON object with a 'selected' index array (" +
                         e.what() + ")");
    }
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    const WeightedTest test = read_test_csv(a.test);
    if (!test.null_flags()) throw UsageError(a.test + ": evaluate needs a null_flag column");
    const auto selected = read_selected(a.selection);
    std::optional<std::vector<std::size_t>> reference;
    if (!a.reference.empty()) reference = read_selected(a.reference);
    for (std::size_t j : selected) {
        if (j >= test.size()) throw UsageError("selected index " + std::to_string(j) + " out of range");
    }

    std::optional<std::span<const std::size_t>> ref_span;
    if (reference) ref_span = std::span<const std::size_t>(*reference);
    const TrialMetrics tm = evaluate_selection(selected, *test.null_flags(), test.weights(), ref_span);

    RunManifest m;
    m.command = "evaluate";
    m.input_digests = {{a.test, sha256_file(a.test)}, {a.selection, sha256_file(a.selection)}};
    if (reference) m.input_digests.emplace_back(a.reference, sha256_file(a.reference));

    json j;
    j["command"] = "evaluate";
    j["fdp"] = tm.fdp;
    j["power"] = tm.power;
    j["weighted_fdp"] = tm.weighted_fdp;
    j["n_selected"] = tm.n_selected;
    // An infinite discrepancy (empty reference) has no JSON number; it is
    // written as the string "inf".
    if (!tm.discrepancy) {
        j["discrepancy"] = nullptr;
    } else if (std::isinf(*tm.discrepancy)) {
        j["discrepancy"] = "inf";
    } else {
        j["discrepancy"] = *tm.discrepancy;
    }
    j["manifest"] = m.reproducible_json();
    write_text(j.dump(2) + "\n", a.out, out);
    if (!a.out.empty()) {
        m.duration_seconds = seconds_since(start);
        write_manifest(m, a.out);
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted conformal p-values and selection with FDR control", "confsel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(CONFSEL_VERSION));
    int threads = 0;
    app.add_option("--threads", threads, "Worker limit (0 = CONFSEL_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    PValuesArgs pv;
    auto* pvalues = app.add_subcommand("pvalues", "Weighted conformal p-values, one row per test unit");
    pvalues->add_option("--calib", pv.calib, "Calibration CSV (score,weight)")->required();
    pvalues->add_option("--test", pv.test, "Test CSV (score,weight[,null_flag])")->required();
    pvalues->add_option("--randomized", pv.randomized, "Randomized tie-breaking (true/false)");
    pvalues->add_option("--seed", pv.seed, "Seed for the tie-breaking uniforms");
    pvalues->add_option("--tie-tol", pv.tie_tolerance, "Tie tolerance")->check(CLI::NonNegativeNumber);
    pvalues->add_option("--out", pv.out, "Output CSV (default stdout)");

    SelectArgs sa;
    auto* select = app.add_subcommand("select", "Run WBH or a WCS variant");
    select->add_option("--calib", sa.calib, "Calibration CSV")->required();
    select->add_option("--test", sa.test, "Test CSV")->required();
    select->add_option("--q", sa.q, "Target FDR level in (0, 1)");
    select->add_option("--method", sa.method, "wbh, wcs-hete, wcs-homo, wcs-dtm or hc-wcs");
    select->add_option("--pruning", sa.pruning, "Pruning for hc-wcs: hete, homo or dtm");
    select->add_flag("--nonrandomized", sa.nonrandomized, "WBH on non-randomized p-values");
    select->add_option("--seed", sa.seed, "Seed for tie-breaking and pruning draws");
    select->add_option("--tie-tol", sa.tie_tolerance, "Tie tolerance")->check(CLI::NonNegativeNumber);
    select->add_option("--out", sa.out, "Output JSON (default stdout)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic FDR/power study");
    simulate->add_option("--scenario", sim.scenario, "ite1, ite2, ite3, outlier or covshift_binary");
    simulate->add_option("--coupling", sim.coupling, "independent, positive or negative");
    simulate->add_option("--corr", sim.corr, "Covariate covariance: ind or corr");
    simulate->add_option("--score", sim.score, "oracle, res, cqr or clip");
    simulate->add_option("--n", sim.spec.n_calib, "Calibration size");
    simulate->add_option("--m", sim.spec.m, "Test size");
    simulate->add_option("--n-train", sim.spec.n_train, "Training draws (covshift_binary)");
    simulate->add_option("--q", sim.spec.q, "Target FDR level");
    simulate->add_option("--trials", sim.spec.trials, "Number of trials");
    simulate->add_option("--seed", sim.spec.master_seed, "Master seed");
    simulate->add_option("--rho", sim.spec.rho, "Outlier fraction");
    simulate->add_option("--a", sim.spec.signal_a, "Outlier signal strength");
    simulate->add_option("--cqr-beta", sim.spec.cqr_beta, "Quantile level for the cqr score");
    simulate->add_option("--sigma1-scale", sim.spec.sigma1_scale, "Multiplier on sigma_1(x)");
    simulate->add_option("--gamma", sim.spec.weight_gamma, "Weight perturbation factor (>= 1)");
    simulate->add_flag("--negatives-only", sim.spec.negatives_only,
                       "covshift_binary: calibrate on negatives only");
    bool per_trial_centers = false;
    simulate->add_flag("--per-trial-centers", per_trial_centers,
                       "outlier: redraw the 50 centres in every trial");
    simulate->add_option("--out", sim.out, "Output directory (default: summary to stdout)");

    PrdsArgs pa;
    auto* prds = app.add_subcommand("prds-check", "Monte-Carlo check of the non-PRDS construction");
    prds->add_option("--draws", pa.draws, "Monte-Carlo draws");
    prds->add_option("--seed", pa.seed, "Seed");
    prds->add_option("--out", pa.out, "Output JSON (default stdout)");

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "FDP, power and weighted FDP of a selection");
    evaluate->add_option("--test", ea.test, "Test CSV with a null_flag column")->required();
    evaluate->add_option("--selection", ea.selection, "Selection JSON (from select)")->required();
    evaluate->add_option("--reference", ea.reference, "Reference selection JSON for the discrepancy");
    evaluate->add_option("--out", ea.out, "Output JSON (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        ScopedWorkerLimit limit(threads);
        if (pvalues->parsed()) return cmd_pvalues(pv, out);
        if (select->parsed()) return cmd_select(sa, out);
        if (simulate->parsed()) {
            sim.spec.centers_per_study = !per_trial_centers;
            return cmd_simulate(sim, out);
        }
        if (prds->parsed()) return cmd_prds_check(pa, out);
        if (evaluate->parsed()) return cmd_evaluate(ea, out);
        err << "no subcommand given\n";
        return kExitUsage;
    } catch (const CsvError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

} // namespace confsel::cli
