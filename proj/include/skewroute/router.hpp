#pragma once

#include <span>
#include <string>
#include <vector>

#include "skewroute/core.hpp"

namespace skewroute {

struct Decision {
    std::string arm_name;
    int arm_rank = 0;
    DifficultyScore difficulty;
    MetricKind metric_kind = MetricKind::Gini;

    bool operator==(const Decision& other) const noexcept {
        return arm_name == other.arm_name && arm_rank == other.arm_rank &&
               difficulty.value == other.difficulty.value && metric_kind == other.metric_kind;
    }
};

/// Arm rank for a difficulty value: the number of thresholds strictly below it.
/// A value equal to a threshold goes to the cheaper side.
int route_rank(double difficulty, std::span<const double> thresholds) noexcept;

/// Routes an already computed difficulty score.
Decision decide(const DifficultyScore& difficulty, const RouterConfig& cfg);

/// Computes the configured metric on `d` and routes it.
Decision decide(const ScoreDistribution& d, const RouterConfig& cfg);

struct CalibrationReport {
    std::vector<double> thresholds;
    std::vector<double> achieved_ratios;  ///< per arm, cheap to expensive
    std::vector<double> target_ratios;
    /// Set when ties at a threshold pushed the cheap side past its target.
    std::vector<std::string> notes;
};

/// Picks one threshold per boundary as the empirical quantile of
/// `difficulties` at the given cumulative cheap-side mass. The quantile is
/// the m-th smallest value with m = floor(q * n) (at least 1), so with
/// distinct values exactly m of them route to the cheap side.
///
/// `cheap_side_masses` must be strictly increasing inside (0, 1).
CalibrationReport calibrate_boundaries(std::span<const double> difficulties,
                                       std::span<const double> cheap_side_masses);

/// Same as calibrate_boundaries() but takes per-arm target ratios (N values,
/// all positive, summing to 1) instead of cumulative masses.
CalibrationReport calibrate(std::span<const double> difficulties, std::span<const double> target_ratios);

}  // namespace skewroute
