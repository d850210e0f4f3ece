#include "skewroute/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "skewroute/metrics.hpp"
#include "skewroute/rng.hpp"

namespace skewroute {

namespace {

bool label_for(const QueryRecord& record, const std::string& arm) {
    const auto it = record.correct.find(arm);
    if (it == record.correct.end()) {
        throw Error(Errc::MissingLabel, "record '" + record.id + "' has no label for arm '" + arm + "'");
    }
    return it->second;
}

std::vector<double> difficulties_of(std::span<const QueryRecord> records, const MetricSpec& metric) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const QueryRecord& r : records) {
        try {
            out.push_back(difficulty_score(r.distribution, metric).value);
        } catch (const Error& e) {
            throw Error(e.code(), "record '" + r.id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace

double hit_at_1(std::span<const QueryRecord> records, std::span<const Decision> decisions) {
    if (records.empty()) {
        throw Error(Errc::EmptyCorpus, "no records to score");
    }
    if (records.size() != decisions.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(records.size()) + " records but " +
                                              std::to_string(decisions.size()) + " decisions");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        hits += label_for(records[i], decisions[i].arm_name) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double arm_hit_at_1(std::span<const QueryRecord> records, const std::string& arm) {
    if (records.empty()) {
        throw Error(Errc::EmptyCorpus, "no records to score");
    }
    std::size_t hits = 0;
    for (const QueryRecord& r : records) {
        hits += label_for(r, arm) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double random_baseline(double hit_small, double hit_large, double rho) {
    const auto in_range = [](double v, double hi) { return v >= 0.0 && v <= hi; };
    if (!in_range(rho, 1.0)) {
        throw Error(Errc::OutOfRange, "budget ratio must lie in [0, 1]");
    }
    if (!in_range(hit_small, 100.0) || !in_range(hit_large, 100.0)) {
        throw Error(Errc::OutOfRange, "hit rates must lie in [0, 100]");
    }
    return (1.0 - rho) * hit_small + rho * hit_large;
}

double average_effectiveness(const BudgetCurve& curve, double hit_small, double hit_large,
                             std::span<const double> interior) {
    if (interior.empty()) {
        throw Error(Errc::MissingSweepPoint, "no interior budget points requested");
    }
    double total = 0.0;
    for (double rho : interior) {
        const auto it = std::find_if(curve.points.begin(), curve.points.end(), [rho](const BudgetPoint& p) {
            return std::abs(p.large_fraction - rho) <= 1e-9;
        });
        if (it == curve.points.end()) {
            throw Error(Errc::MissingSweepPoint, "curve has no point at budget ratio " + std::to_string(rho));
        }
        total += it->hit_at_1 - random_baseline(hit_small, hit_large, rho);
    }
    return total / static_cast<double>(interior.size());
}

double mean_cost(std::span<const QueryRecord> records, std::span<const Decision> decisions,
                 std::span<const Arm> arms, double tokens_per_query) {
    if (!(tokens_per_query >= 0.0) || !std::isfinite(tokens_per_query)) {
        throw Error(Errc::OutOfRange, "token count must be finite and >= 0");
    }
    if (records.size() != decisions.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(records.size()) + " records but " +
                                              std::to_string(decisions.size()) + " decisions");
    }
    if (decisions.empty()) {
        throw Error(Errc::EmptyCorpus, "no decisions to cost");
    }
    // Per-arm counts keep the reduction independent of record order.
    std::vector<std::size_t> counts(arms.size(), 0);
    for (const Decision& d : decisions) {
        const auto it = std::find_if(arms.begin(), arms.end(), [&](const Arm& a) { return a.name == d.arm_name; });
        if (it == arms.end()) {
            throw Error(Errc::MissingArm, "no cost for arm '" + d.arm_name + "'");
        }
        ++counts[static_cast<std::size_t>(it - arms.begin())];
    }
    double total = 0.0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        total += static_cast<double>(counts[a]) * arms[a].cost_per_million_tokens;
    }
    return total * tokens_per_query / 1e6 / static_cast<double>(decisions.size());
}

BudgetCurve budget_sweep(std::span<const QueryRecord> records, const MetricSpec& metric,
                         std::span<const double> fractions, std::span<const Arm> arms,
                         const SweepOptions& options) {
    if (arms.size() != 2) {
        throw Error(Errc::InvalidConfig, "budget sweep routes between exactly two arms");
    }
    if (records.empty()) {
        throw Error(Errc::EmptyCorpus, "no records to sweep");
    }
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) {
            throw Error(Errc::OutOfRange, "budget ratio " + std::to_string(fractions[i]) + " is outside [0, 1]");
        }
        if (i > 0 && !(fractions[i] > fractions[i - 1])) {
            throw Error(Errc::OutOfRange, "budget ratios must be strictly increasing");
        }
    }
    if (!(options.calibration_split >= 0.0 && options.calibration_split < 1.0)) {
        throw Error(Errc::OutOfRange, "calibration split must lie in [0, 1)");
    }
    for (const QueryRecord& r : records) {
        label_for(r, arms[0].name);
        label_for(r, arms[1].name);
    }
    const std::vector<double> all_difficulties = difficulties_of(records, metric);

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> calibration;
    std::vector<std::size_t> evaluated;
    if (options.calibration_split > 0.0) {
        Rng rng(options.seed);
        rng.shuffle(std::span<std::size_t>(order));
        const auto n_cal = static_cast<std::size_t>(
            std::llround(options.calibration_split * static_cast<double>(records.size())));
        if (n_cal == 0 || n_cal >= records.size()) {
            throw Error(Errc::OutOfRange, "calibration split leaves an empty calibration or evaluation set");
        }
        for (std::size_t i = 0; i < n_cal; ++i) {
            calibration.push_back(all_difficulties[order[i]]);
        }
        evaluated.assign(order.begin() + static_cast<std::ptrdiff_t>(n_cal), order.end());
        std::sort(evaluated.begin(), evaluated.end());
    } else {
        calibration = all_difficulties;
        evaluated = order;
    }

    std::vector<QueryRecord> eval_records;
    eval_records.reserve(evaluated.size());
    for (std::size_t i : evaluated) {
        eval_records.push_back(records[i]);
    }

    BudgetCurve curve;
    std::vector<Decision> decisions(evaluated.size());
    for (double rho : fractions) {
        double threshold = 0.0;
        if (rho == 0.0) {
            threshold = std::numeric_limits<double>::infinity();
        } else if (rho == 1.0) {
            threshold = -std::numeric_limits<double>::infinity();
        } else {
            const double cheap_mass = 1.0 - rho;
            threshold = calibrate_boundaries(calibration, std::span<const double>(&cheap_mass, 1)).thresholds[0];
        }
        const RouterConfig cfg(metric, {threshold}, {arms.begin(), arms.end()});
        std::size_t routed_large = 0;
        for (std::size_t i = 0; i < evaluated.size(); ++i) {
            decisions[i] = decide(DifficultyScore{all_difficulties[evaluated[i]], metric.kind()}, cfg);
            routed_large += decisions[i].arm_rank == 1 ? 1 : 0;
        }
        BudgetPoint point;
        point.large_fraction = rho;
        point.hit_at_1 = hit_at_1(eval_records, decisions);
        point.avg_cost = mean_cost(eval_records, decisions, arms, options.tokens_per_query);
        point.routed_large_fraction = static_cast<double>(routed_large) / static_cast<double>(evaluated.size());
        curve.points.push_back(point);
    }
    return curve;
}

double interpolated_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw Error(Errc::TooFewRecords, "quantile of an empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CorrelationReport correlation_report(std::span<const QueryRecord> records, const MetricSpec& metric,
                                     int n_groups) {
    if (n_groups < 2) {
        throw Error(Errc::TooFewRecords, "need at least 2 groups");
    }
    struct Row {
        double difficulty;
        int rank;
    };
    std::vector<Row> rows;
    for (const QueryRecord& r : records) {
        if (!r.answer_rank) {
            continue;
        }
        try {
            rows.push_back(Row{difficulty_score(r.distribution, metric).value, *r.answer_rank});
        } catch (const Error& e) {
            throw Error(e.code(), "record '" + r.id + "': " + e.what());
        }
    }
    const auto groups = static_cast<std::size_t>(n_groups);
    if (rows.size() < groups) {
        throw Error(Errc::TooFewRecords, std::to_string(rows.size()) + " records with an answer rank, need at least " +
                                             std::to_string(groups));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.difficulty < b.difficulty; });

    CorrelationReport report;
    const std::size_t base = rows.size() / groups;
    const std::size_t extra = rows.size() % groups;
    std::size_t begin = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        std::vector<double> ranks;
        ranks.reserve(size);
        double sum = 0.0;
        for (std::size_t i = begin; i < begin + size; ++i) {
            ranks.push_back(static_cast<double>(rows[i].rank));
            sum += rows[i].rank;
        }
        std::sort(ranks.begin(), ranks.end());
        CorrelationGroup group;
        group.group_index = static_cast<int>(g);
        group.count = size;
        group.difficulty_min = rows[begin].difficulty;
        group.difficulty_max = rows[begin + size - 1].difficulty;
        group.answer_rank_mean = sum / static_cast<double>(size);
        group.answer_rank_quartiles = {interpolated_quantile(ranks, 0.25), interpolated_quantile(ranks, 0.5),
                                       interpolated_quantile(ranks, 0.75)};
        report.groups.push_back(group);
        begin += size;
    }
    return report;
}

}  // namespace skewroute
