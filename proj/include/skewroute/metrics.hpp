#pragma once

#include <cstddef>
#include <vector>

#include "skewroute/core.hpp"

namespace skewroute {

/// p_i = s_i / sum(s), in the same (descending) order as the scores.
struct ProbabilityVector {
    std::vector<double> probs;
};

/// Throws DegenerateDistribution when the scores sum to zero.
ProbabilityVector normalize_probability(const ScoreDistribution& d);

/// Shannon entropy of the normalized scores in bits; 0 log 0 is taken as 0.
double entropy(const ScoreDistribution& d);

/// Gini coefficient of the scores, in [0, (K-1)/K].
///
/// With the scores in ascending order s'_1 <= ... <= s'_K:
///   Gini = (K + 1 - 2 * sum_i (K - i + 1) s'_i / sum_j s'_j) / K
double gini(const ScoreDistribution& d);

/// Smallest k such that the top-k scores carry at least `cumulative_probability`
/// of the total mass. The comparison is an exact >= with no epsilon.
std::size_t cumulative_k(const ScoreDistribution& d, double cumulative_probability);

/// Sum of min-max normalized scores (unit spacing). A flat vector, where
/// min-max normalization is undefined, is defined to have area K.
/// Throws TooFewScores when K < 2.
double minmax_area(const ScoreDistribution& d);

/// Power-law exponent alpha from an OLS fit of log(s_i) against log(i).
/// Throws TooFewScores when K < 2 and NonPositiveScore when any s_i <= 0.
double powerlaw_slope(const ScoreDistribution& d);

/// Dispatches to the chosen statistic and orients it so larger means harder:
/// entropy -> H, cumulative -> k, area -> A, gini -> -Gini, slope -> -alpha.
DifficultyScore difficulty_score(const ScoreDistribution& d, const MetricSpec& metric);

}  // namespace skewroute
