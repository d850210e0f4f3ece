#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewroute/error.hpp"

namespace skewroute {

/// What to do with negative retriever scores. Shifting changes entropy and
/// Gini values, so it is never applied unless asked for.
enum class NegativePolicy {
    Reject,
    ShiftToZero,  ///< subtract the minimum score from every score
};

/// A query's retrieval scores, sorted non-increasing. Immutable; obtain one
/// through validate_distribution().
class ScoreDistribution {
public:
    std::span<const double> scores() const noexcept { return scores_; }
    std::size_t size() const noexcept { return scores_.size(); }
    double sum() const noexcept { return sum_; }
    double max() const noexcept { return scores_.front(); }
    double min() const noexcept { return scores_.back(); }

    /// All scores are zero; probability-based metrics are undefined.
    bool degenerate() const noexcept { return degenerate_; }
    /// Negative input was shifted to zero under NegativePolicy::ShiftToZero.
    bool shifted() const noexcept { return shifted_; }

    bool operator==(const ScoreDistribution& other) const noexcept {
        return scores_ == other.scores_;
    }

private:
    ScoreDistribution(std::vector<double> scores, bool shifted);

    friend ScoreDistribution validate_distribution(std::span<const double>, NegativePolicy);

    std::vector<double> scores_;
    double sum_ = 0.0;
    bool degenerate_ = false;
    bool shifted_ = false;
};

/// Sorts `raw_scores` descending and checks them.
///
/// Throws EmptyScores, NonFiniteScore, or NegativeScore (only under
/// NegativePolicy::Reject). An all-zero vector is accepted and flagged
/// degenerate.
ScoreDistribution validate_distribution(std::span<const double> raw_scores,
                                        NegativePolicy policy = NegativePolicy::Reject);

inline ScoreDistribution validate_distribution(std::initializer_list<double> raw_scores,
                                               NegativePolicy policy = NegativePolicy::Reject) {
    return validate_distribution(std::span<const double>(raw_scores.begin(), raw_scores.size()),
                                 policy);
}

enum class MetricKind { Area, CumulativeK, Entropy, Gini, PowerLawSlope };

/// CLI/JSON name: area, cumulative, entropy, gini, slope.
std::string_view metric_name(MetricKind kind) noexcept;
std::optional<MetricKind> parse_metric_kind(std::string_view name) noexcept;

/// Which skewness statistic to route on. `cumulative_probability` is only read
/// by MetricKind::CumulativeK but is always validated to lie in (0, 1).
class MetricSpec {
public:
    static constexpr double kDefaultCumulativeProbability = 0.95;

    explicit MetricSpec(MetricKind kind = MetricKind::Gini,
                        double cumulative_probability = kDefaultCumulativeProbability);

    MetricKind kind() const noexcept { return kind_; }
    double cumulative_probability() const noexcept { return cumulative_probability_; }

    bool operator==(const MetricSpec&) const = default;

private:
    MetricKind kind_;
    double cumulative_probability_;
};

/// Oriented statistic: larger always means harder.
struct DifficultyScore {
    double value = 0.0;
    MetricKind kind = MetricKind::Gini;
};

struct Arm {
    std::string name;
    double cost_per_million_tokens = 0.0;
    int rank = 0;

    bool operator==(const Arm&) const = default;
};

/// Builds arms from (name, cost) pairs listed cheap to expensive.
std::vector<Arm> make_arms(std::span<const std::pair<std::string, double>> named_costs);

struct QueryRecord {
    std::string id;
    ScoreDistribution distribution;
    std::map<std::string, bool> correct;
    std::optional<int> answer_rank;
    std::map<std::string, std::string> meta;

    bool operator==(const QueryRecord&) const = default;
};

/// N arms (cheap to expensive) separated by N-1 non-decreasing difficulty
/// thresholds. Throws InvalidConfig on construction if any invariant fails.
class RouterConfig {
public:
    RouterConfig(MetricSpec metric, std::vector<double> thresholds, std::vector<Arm> arms);

    const MetricSpec& metric() const noexcept { return metric_; }
    std::span<const double> thresholds() const noexcept { return thresholds_; }
    std::span<const Arm> arms() const noexcept { return arms_; }

    const Arm* find_arm(std::string_view name) const noexcept;

    bool operator==(const RouterConfig&) const = default;

private:
    MetricSpec metric_;
    std::vector<double> thresholds_;
    std::vector<Arm> arms_;
};

}  // namespace skewroute
