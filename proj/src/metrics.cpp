#include "skewroute/metrics.hpp"

#include <cmath>
#include <string>

namespace skewroute {

namespace {

void require_mass(const ScoreDistribution& d) {
    if (d.degenerate()) {
        throw Error(Errc::DegenerateDistribution, "scores sum to zero");
    }
}

}  // namespace

ProbabilityVector normalize_probability(const ScoreDistribution& d) {
    require_mass(d);
    const double total = d.sum();
    ProbabilityVector out;
    out.probs.reserve(d.size());
    for (double s : d.scores()) {
        out.probs.push_back(s / total);
    }
    return out;
}

double entropy(const ScoreDistribution& d) {
    require_mass(d);
    const double total = d.sum();
    double h = 0.0;
    for (double s : d.scores()) {
        if (s > 0.0) {
            const double p = s / total;
            h -= p * std::log2(p);
        }
    }
    return h == 0.0 ? 0.0 : h;
}

double gini(const ScoreDistribution& d) {
    require_mass(d);
    // Walking the descending scores with weight j is the ascending sum with
    // weight (K - i + 1).
    const auto scores = d.scores();
    const double k = static_cast<double>(scores.size());
    double weighted = 0.0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        weighted += static_cast<double>(j + 1) * scores[j];
    }
    return (k + 1.0 - 2.0 * weighted / d.sum()) / k;
}

std::size_t cumulative_k(const ScoreDistribution& d, double cumulative_probability) {
    if (!(cumulative_probability > 0.0 && cumulative_probability < 1.0)) {
        throw Error(Errc::InvalidProbability,
                    "cumulative probability must lie in (0, 1), got " + std::to_string(cumulative_probability));
    }
    require_mass(d);
    // C_k is evaluated as prefix/total: one rounding instead of k accumulated ones.
    const auto scores = d.scores();
    const double total = d.sum();
    double prefix = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        prefix += scores[k];
        if (prefix / total >= cumulative_probability) {
            return k + 1;
        }
    }
    return scores.size();
}

double minmax_area(const ScoreDistribution& d) {
    if (d.size() < 2) {
        throw Error(Errc::TooFewScores, "area needs at least 2 scores");
    }
    const double hi = d.max();
    const double lo = d.min();
    if (hi == lo) {
        return static_cast<double>(d.size());
    }
    const double span = hi - lo;
    double area = 0.0;
    for (double s : d.scores()) {
        area += (s - lo) / span;
    }
    return area;
}

double powerlaw_slope(const ScoreDistribution& d) {
    if (d.size() < 2) {
        throw Error(Errc::TooFewScores, "slope fit needs at least 2 scores");
    }
    if (d.min() <= 0.0) {
        throw Error(Errc::NonPositiveScore, "log-log fit needs strictly positive scores");
    }
    const auto scores = d.scores();
    const double n = static_cast<double>(scores.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        mean_x += std::log(static_cast<double>(i + 1));
        mean_y += std::log(scores[i]);
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double dx = std::log(static_cast<double>(i + 1)) - mean_x;
        sxy += dx * (std::log(scores[i]) - mean_y);
        sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    return slope == 0.0 ? 0.0 : -slope;
}

DifficultyScore difficulty_score(const ScoreDistribution& d, const MetricSpec& metric) {
    double value = 0.0;
    switch (metric.kind()) {
        case MetricKind::Area:
            value = minmax_area(d);
            break;
        case MetricKind::CumulativeK:
            value = static_cast<double>(cumulative_k(d, metric.cumulative_probability()));
            break;
        case MetricKind::Entropy:
            value = entropy(d);
            break;
        case MetricKind::Gini:
            value = -gini(d);
            break;
        case MetricKind::PowerLawSlope:
            value = -powerlaw_slope(d);
            break;
    }
    // Negating a zero Gini or slope gives -0.0; keep serialized scores unsigned.
    return DifficultyScore{value + 0.0, metric.kind()};
}

}  // namespace skewroute
