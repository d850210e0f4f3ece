#include "skewroute/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace skewroute {

ScoreDistribution::ScoreDistribution(std::vector<double> scores, bool shifted)
    : scores_(std::move(scores)), shifted_(shifted) {
    for (double s : scores_) {
        sum_ += s;
    }
    degenerate_ = !(sum_ > 0.0);
}

ScoreDistribution validate_distribution(std::span<const double> raw_scores, NegativePolicy policy) {
    if (raw_scores.empty()) {
        throw Error(Errc::EmptyScores, "score vector is empty");
    }
    std::vector<double> scores(raw_scores.begin(), raw_scores.end());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw Error(Errc::NonFiniteScore, "score at index " + std::to_string(i) + " is not finite");
        }
    }
    std::sort(scores.begin(), scores.end(), std::greater<>());

    bool shifted = false;
    const double lowest = scores.back();
    if (lowest < 0.0) {
        if (policy == NegativePolicy::Reject) {
            throw Error(Errc::NegativeScore,
                        "negative score " + std::to_string(lowest) + " (enable shift-to-zero to accept)");
        }
        for (double& s : scores) {
            s -= lowest;
        }
        shifted = true;
    }
    return ScoreDistribution(std::move(scores), shifted);
}

std::string_view metric_name(MetricKind kind) noexcept {
    switch (kind) {
        case MetricKind::Area: return "area";
        case MetricKind::CumulativeK: return "cumulative";
        case MetricKind::Entropy: return "entropy";
        case MetricKind::Gini: return "gini";
        case MetricKind::PowerLawSlope: return "slope";
    }
    return "unknown";
}

std::optional<MetricKind> parse_metric_kind(std::string_view name) noexcept {
    for (MetricKind kind : {MetricKind::Area, MetricKind::CumulativeK, MetricKind::Entropy,
                            MetricKind::Gini, MetricKind::PowerLawSlope}) {
        if (metric_name(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

MetricSpec::MetricSpec(MetricKind kind, double cumulative_probability)
    : kind_(kind), cumulative_probability_(cumulative_probability) {
    if (!(cumulative_probability > 0.0 && cumulative_probability < 1.0)) {
        throw Error(Errc::InvalidProbability,
                    "cumulative probability must lie in (0, 1), got " + std::to_string(cumulative_probability));
    }
}

std::vector<Arm> make_arms(std::span<const std::pair<std::string, double>> named_costs) {
    std::vector<Arm> arms;
    arms.reserve(named_costs.size());
    for (const auto& [name, cost] : named_costs) {
        arms.push_back(Arm{name, cost, static_cast<int>(arms.size())});
    }
    return arms;
}

RouterConfig::RouterConfig(MetricSpec metric, std::vector<double> thresholds, std::vector<Arm> arms)
    : metric_(metric), thresholds_(std::move(thresholds)), arms_(std::move(arms)) {
    if (arms_.empty()) {
        throw Error(Errc::InvalidConfig, "at least one arm is required");
    }
    if (thresholds_.size() + 1 != arms_.size()) {
        throw Error(Errc::InvalidConfig, std::to_string(arms_.size()) + " arms need " +
                                             std::to_string(arms_.size() - 1) + " thresholds, got " +
                                             std::to_string(thresholds_.size()));
    }
    std::set<std::string, std::less<>> names;
    for (std::size_t i = 0; i < arms_.size(); ++i) {
        const Arm& arm = arms_[i];
        if (arm.name.empty() || !names.insert(arm.name).second) {
            throw Error(Errc::InvalidConfig, "arm names must be non-empty and unique");
        }
        if (arm.rank != static_cast<int>(i)) {
            throw Error(Errc::InvalidConfig, "arm '" + arm.name + "' has rank " + std::to_string(arm.rank) +
                                                 ", expected " + std::to_string(i));
        }
        if (!std::isfinite(arm.cost_per_million_tokens) || arm.cost_per_million_tokens < 0.0) {
            throw Error(Errc::InvalidConfig, "arm '" + arm.name + "' has an invalid cost");
        }
        if (i > 0 && arm.cost_per_million_tokens < arms_[i - 1].cost_per_million_tokens) {
            throw Error(Errc::InvalidConfig, "arm costs must be non-decreasing in rank");
        }
    }
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        if (std::isnan(thresholds_[i])) {
            throw Error(Errc::InvalidConfig, "threshold is NaN");
        }
        if (i > 0 && thresholds_[i] < thresholds_[i - 1]) {
            throw Error(Errc::InvalidConfig, "thresholds must be non-decreasing");
        }
    }
}

const Arm* RouterConfig::find_arm(std::string_view name) const noexcept {
    for (const Arm& arm : arms_) {
        if (arm.name == name) {
            return &arm;
        }
    }
    return nullptr;
}

}  // namespace skewroute
