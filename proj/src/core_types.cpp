#include "confsel/core_types.hpp"

#include "confsel/scores.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace confsel {

namespace {

void check_pair(std::span<const double> scores, std::span<const double> weights,
                const char* what) {
    if (scores.size() != weights.size()) {
        throw std::invalid_argument(std::string(what) + ": scores and weights differ in length (" +
                                    std::to_string(scores.size()) + " vs " +
                                    std::to_string(weights.size()) + ")");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw std::invalid_argument(std::string(what) + ": non-finite score at index " +
                                        std::to_string(i));
        }
        if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
            throw std::invalid_argument(std::string(what) +
                                        ": weight must be finite and > 0 at index " +
                                        std::to_string(i));
        }
    }
}

} // namespace

WeightedCalibration::WeightedCalibration(std::vector<double> scores, std::vector<double> weights)
    : scores_(std::move(scores)), weights_(std::move(weights)) {
    check_pair(scores_, weights_, "WeightedCalibration");
}

WeightedTest::WeightedTest(std::vector<double> scores, std::vector<double> weights,
                           std::optional<std::vector<bool>> null_flags)
    : scores_(std::move(scores)), weights_(std::move(weights)), null_flags_(std::move(null_flags)) {
    check_pair(scores_, weights_, "WeightedTest");
    if (null_flags_ && null_flags_->size() != scores_.size()) {
        throw std::invalid_argument("WeightedTest: null_flags length " +
                                    std::to_string(null_flags_->size()) + " != " +
                                    std::to_string(scores_.size()));
    }
}

ScoreSpec ScoreSpec::clip(std::span<const double> mu_hat, std::span<const double> thresholds,
                          std::optional<double> m) {
    ScoreSpec spec;
    spec.kind = ScoreKind::clip;
    double bound = 0.0;
    for (double v : mu_hat) bound = std::max(bound, std::fabs(v));
    if (m) {
        if (!std::isfinite(*m) || !(*m > 2.0 * bound)) {
            throw std::invalid_argument("clip score: M must exceed 2 * max|mu_hat| = " +
                                        std::to_string(2.0 * bound));
        }
        spec.clip_m = *m;
    } else {
        spec.clip_m = default_clip_m(mu_hat, thresholds);
    }
    return spec;
}

double ScoreSpec::evaluate(double y, double prediction, double threshold) const {
    switch (kind) {
    case ScoreKind::res: return score_res(y, prediction);
    case ScoreKind::clip: return score_clip(y, threshold, clip_m, prediction);
    case ScoreKind::cqr: return score_cqr(y, prediction);
    case ScoreKind::cdf_passthrough: return score_cdf(prediction);
    }
    throw std::logic_error("unknown score kind");
}

std::string_view to_string(Method method) {
    switch (method) {
    case Method::wbh: return "wbh";
    case Method::wcs_hete: return "wcs-hete";
    case Method::wcs_homo: return "wcs-homo";
    case Method::wcs_dtm: return "wcs-dtm";
    case Method::hc_wcs: return "hc-wcs";
    }
    return "unknown";
}

std::string_view to_string(Pruning pruning) {
    switch (pruning) {
    case Pruning::hete: return "hete";
    case Pruning::homo: return "homo";
    case Pruning::dtm: return "dtm";
    }
    return "unknown";
}

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
    case ScoreKind::res: return "res";
    case ScoreKind::clip: return "clip";
    case ScoreKind::cqr: return "cqr";
    case ScoreKind::cdf_passthrough: return "cdf";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
    std::string s(text);
    for (char& c : s) {
        if (c == '_') c = '-';
    }
    for (Method m : {Method::wbh, Method::wcs_hete, Method::wcs_homo, Method::wcs_dtm,
                     Method::hc_wcs}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

std::optional<Pruning> parse_pruning(std::string_view text) {
    for (Pruning p : {Pruning::hete, Pruning::homo, Pruning::dtm}) {
        if (text == to_string(p)) return p;
    }
    return std::nullopt;
}

std::optional<ScoreKind> parse_score_kind(std::string_view text) {
    for (ScoreKind k : {ScoreKind::res, ScoreKind::clip, ScoreKind::cqr,
                        ScoreKind::cdf_passthrough}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

void SelectionConfig::validate() const {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("q must lie in (0, 1), got " + std::to_string(q));
    }
    if (!(tie_tolerance >= 0.0) || !std::isfinite(tie_tolerance)) {
        throw std::invalid_argument("tie_tolerance must be a finite nonnegative number");
    }
}

} // namespace confsel
