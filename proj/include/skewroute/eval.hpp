#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "skewroute/core.hpp"
#include "skewroute/router.hpp"

namespace skewroute {

struct BudgetPoint {
    double large_fraction = 0.0;  ///< target share of queries sent to the costly arm
    double hit_at_1 = 0.0;
    double avg_cost = 0.0;        ///< currency units per query
    /// Share actually routed to the costly arm. Within 1/n of large_fraction
    /// for distinct difficulties; ties on the threshold pull it lower. Not part
    /// of the CSV output.
    double routed_large_fraction = 0.0;
};

/// Hit@1 against the budget ratio; large_fraction is strictly increasing.
struct BudgetCurve {
    std::vector<BudgetPoint> points;
};

inline constexpr std::array<double, 4> kInteriorFractions{0.2, 0.4, 0.6, 0.8};
inline constexpr double kDefaultTokensPerQuery = 1873.0;

/// Fraction of records whose chosen arm answers correctly. Records and
/// decisions are aligned by index.
double hit_at_1(std::span<const QueryRecord> records, std::span<const Decision> decisions);

/// Hit@1 when every record goes to `arm`.
double arm_hit_at_1(std::span<const QueryRecord> records, const std::string& arm);

/// Expected Hit@1 of sending a random `rho` share of queries to the large arm:
/// (1 - rho) * hit_small + rho * hit_large. Hit values may be fractions or
/// percentages (anything in [0, 100]); the result is in the same unit.
double random_baseline(double hit_small, double hit_large, double rho);

/// Mean of (hit - random_baseline) over the interior budget points.
/// Throws MissingSweepPoint if the curve lacks one of `interior`.
double average_effectiveness(const BudgetCurve& curve, double hit_small, double hit_large,
                             std::span<const double> interior = kInteriorFractions);

/// Average per-query spend: tokens_per_query * cost_per_million(arm) / 1e6.
double mean_cost(std::span<const QueryRecord> records, std::span<const Decision> decisions,
                 std::span<const Arm> arms, double tokens_per_query);

struct SweepOptions {
    double tokens_per_query = kDefaultTokensPerQuery;
    /// Share of the corpus held out for calibration; 0 calibrates on the
    /// evaluated records themselves.
    double calibration_split = 0.0;
    std::uint64_t seed = 42;
};

/// For each budget ratio rho: calibrate a threshold that keeps 1 - rho of the
/// calibration difficulties on the cheap arm, route, and score. rho = 0 and
/// rho = 1 skip calibration and send everything to one arm.
BudgetCurve budget_sweep(std::span<const QueryRecord> records, const MetricSpec& metric,
                         std::span<const double> fractions, std::span<const Arm> arms,
                         const SweepOptions& options = {});

struct CorrelationGroup {
    int group_index = 0;
    std::size_t count = 0;
    double difficulty_min = 0.0;
    double difficulty_max = 0.0;
    double answer_rank_mean = 0.0;
    /// 25th, 50th and 75th percentile, linear interpolation between closest ranks.
    std::array<double, 3> answer_rank_quartiles{};
};

struct CorrelationReport {
    std::vector<CorrelationGroup> groups;
};

/// Sorts records carrying an answer_rank by difficulty (ascending, stable) and
/// splits them into `n_groups` equal groups; the remainder goes one per group
/// starting from the first.
CorrelationReport correlation_report(std::span<const QueryRecord> records, const MetricSpec& metric,
                                     int n_groups);

/// Linear-interpolation quantile of an ascending sample.
double interpolated_quantile(std::span<const double> sorted, double q);

}  // namespace skewroute
