#include "skewroute/router.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "skewroute/metrics.hpp"

namespace skewroute {

int route_rank(double difficulty, std::span<const double> thresholds) noexcept {
    const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), difficulty);
    return static_cast<int>(it - thresholds.begin());
}

Decision decide(const DifficultyScore& difficulty, const RouterConfig& cfg) {
    if (difficulty.kind != cfg.metric().kind()) {
        throw Error(Errc::InvalidConfig, "difficulty computed with '" +
                                             std::string(metric_name(difficulty.kind)) +
                                             "' but router is configured for '" +
                                             std::string(metric_name(cfg.metric().kind())) + "'");
    }
    const int rank = route_rank(difficulty.value, cfg.thresholds());
    const Arm& arm = cfg.arms()[static_cast<std::size_t>(rank)];
    return Decision{arm.name, rank, difficulty, difficulty.kind};
}

Decision decide(const ScoreDistribution& d, const RouterConfig& cfg) {
    return decide(difficulty_score(d, cfg.metric()), cfg);
}

namespace {

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

CalibrationReport calibrate_boundaries(std::span<const double> difficulties,
                                       std::span<const double> cheap_side_masses) {
    if (difficulties.empty()) {
        throw Error(Errc::EmptyCalibrationSet, "no difficulty values to calibrate on");
    }
    if (cheap_side_masses.empty()) {
        throw Error(Errc::InvalidTargets, "at least one boundary is required");
    }
    for (std::size_t j = 0; j < cheap_side_masses.size(); ++j) {
        const double q = cheap_side_masses[j];
        if (!(q > 0.0 && q < 1.0)) {
            throw Error(Errc::InvalidTargets, "cheap-side mass " + format_ratio(q) + " is outside (0, 1)");
        }
        if (j > 0 && !(q > cheap_side_masses[j - 1])) {
            throw Error(Errc::InvalidTargets, "cheap-side masses must be strictly increasing");
        }
    }
    for (double v : difficulties) {
        if (std::isnan(v)) {
            throw Error(Errc::InvalidConfig, "difficulty value is NaN");
        }
    }

    std::vector<double> sorted(difficulties.begin(), difficulties.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    CalibrationReport report;
    for (double q : cheap_side_masses) {
        // The small slack keeps products such as 0.29 * 100 from flooring to 28.
        auto m = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9));
        m = std::clamp<std::size_t>(m, 1, n);
        report.thresholds.push_back(sorted[m - 1]);
    }

    const std::size_t arms = cheap_side_masses.size() + 1;
    std::vector<std::size_t> counts(arms, 0);
    for (double v : sorted) {
        ++counts[static_cast<std::size_t>(route_rank(v, report.thresholds))];
    }
    double previous = 0.0;
    for (std::size_t a = 0; a < arms; ++a) {
        const double upper = a + 1 < arms ? cheap_side_masses[a] : 1.0;
        report.target_ratios.push_back(upper - previous);
        previous = upper;
        report.achieved_ratios.push_back(static_cast<double>(counts[a]) / static_cast<double>(n));
    }

    double cumulative = 0.0;
    for (std::size_t j = 0; j + 1 < arms; ++j) {
        cumulative += report.achieved_ratios[j];
        const double slack = 1.0 / static_cast<double>(n);
        if (cumulative > cheap_side_masses[j] + slack) {
            report.notes.push_back("boundary " + std::to_string(j) + ": ties at threshold " +
                                   format_ratio(report.thresholds[j]) + " put " + format_ratio(cumulative) +
                                   " on the cheap side (target " + format_ratio(cheap_side_masses[j]) + ")");
        }
    }
    return report;
}

CalibrationReport calibrate(std::span<const double> difficulties, std::span<const double> target_ratios) {
    if (target_ratios.size() < 2) {
        throw Error(Errc::InvalidTargets, "need a target ratio for each of at least 2 arms");
    }
    double total = 0.0;
    for (double r : target_ratios) {
        if (!(r > 0.0 && r < 1.0)) {
            throw Error(Errc::InvalidTargets, "target ratio " + format_ratio(r) + " is outside (0, 1)");
        }
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(Errc::InvalidTargets, "target ratios sum to " + format_ratio(total) + ", expected 1");
    }
    std::vector<double> masses;
    double cumulative = 0.0;
    for (std::size_t j = 0; j + 1 < target_ratios.size(); ++j) {
        cumulative += target_ratios[j];
        masses.push_back(cumulative);
    }
    CalibrationReport report = calibrate_boundaries(difficulties, masses);
    report.target_ratios.assign(target_ratios.begin(), target_ratios.end());
    return report;
}

}  // namespace skewroute
