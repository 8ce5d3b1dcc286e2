#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace confsel {

/// Calibration units: score V_i = V(X_i, Y_i) paired with covariate-shift weight w(X_i).
///
/// Weights must be finite and strictly positive; scores must be finite. A zero
/// weight is rejected instead of dropped, since it would hide the unit from the
/// calibration distribution.
class WeightedCalibration {
public:
    WeightedCalibration() = default;
    WeightedCalibration(std::vector<double> scores, std::vector<double> weights);

    std::span<const double> scores() const { return scores_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return scores_.size(); }
    bool empty() const { return scores_.empty(); }

private:
    std::vector<double> scores_;
    std::vector<double> weights_;
};

/// Test units: observed score V(X_{n+j}, c_{n+j}) and weight w(X_{n+j}).
///
/// `null_flags` (true iff Y_{n+j} <= c_{n+j}) are carried for evaluation only
/// and never consulted by the selection procedures.
class WeightedTest {
public:
    WeightedTest() = default;
    WeightedTest(std::vector<double> scores, std::vector<double> weights,
                 std::optional<std::vector<bool>> null_flags = std::nullopt);

    std::span<const double> scores() const { return scores_; }
    std::span<const double> weights() const { return weights_; }
    const std::optional<std::vector<bool>>& null_flags() const { return null_flags_; }
    std::size_t size() const { return scores_.size(); }
    bool empty() const { return scores_.empty(); }

private:
    std::vector<double> scores_;
    std::vector<double> weights_;
    std::optional<std::vector<bool>> null_flags_;
};

enum class ScoreKind { res, clip, cqr, cdf_passthrough };

/// Describes which monotone nonconformity score a pipeline uses.
struct ScoreSpec {
    ScoreKind kind = ScoreKind::res;
    /// Separation constant for `clip`.
    double clip_m = 0.0;
    /// Quantile level the `cqr` prediction column was fitted at (tag only).
    double cqr_beta = 0.5;

    /// Clip spec with M validated against the supplied prediction/threshold
    /// rows. When `m` is empty the default 2 * max(|mu_hat| v |c|) + 1 is used.
    static ScoreSpec clip(std::span<const double> mu_hat, std::span<const double> thresholds,
                          std::optional<double> m = std::nullopt);

    /// Evaluate V(x, y) given the per-row prediction column. `threshold` is
    /// only read by `clip`.
    double evaluate(double y, double prediction, double threshold = 0.0) const;
};

enum class Method { wbh, wcs_hete, wcs_homo, wcs_dtm, hc_wcs };
enum class Pruning { hete, homo, dtm };

std::string_view to_string(Method method);
std::string_view to_string(Pruning pruning);
std::string_view to_string(ScoreKind kind);
/// Accepts both `wcs-hete` and `wcs_hete` spellings.
std::optional<Method> parse_method(std::string_view text);
std::optional<Pruning> parse_pruning(std::string_view text);
std::optional<ScoreKind> parse_score_kind(std::string_view text);

struct SelectionConfig {
    double q = 0.1;
    Method method = Method::wcs_hete;
    /// Pruning rule used by `hc_wcs`; the `wcs_*` methods carry their own.
    Pruning hc_pruning = Pruning::hete;
    /// WBH only: tie-randomized p-values when true.
    bool randomized_pvalues = true;
    std::uint64_t seed = 0;
    double tie_tolerance = 0.0;

    /// Throws std::invalid_argument unless 0 < q < 1 and tie_tolerance >= 0.
    void validate() const;
};

} // namespace confsel
