#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "skewroute/eval.hpp"
#include "skewroute/io.hpp"
#include "skewroute/metrics.hpp"

using namespace skewroute;
using doctest::Approx;

namespace {

const std::pair<std::string, double> kTwo[] = {{"small", 0.0485}, {"large", 0.5724}};

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected skewroute::Error");
    return Errc::IoError;
}

QueryRecord record(std::string id, std::vector<double> scores, bool small_ok, bool large_ok,
                   std::optional<int> rank = std::nullopt) {
    QueryRecord r{std::move(id), validate_distribution(scores), {{"small", small_ok}, {"large", large_ok}}, rank, {}};
    return r;
}

Decision to(const std::string& arm) { return Decision{arm, arm == "small" ? 0 : 1, {}, MetricKind::Gini}; }

/// Random corpus with independent labels and random score shapes.
std::vector<QueryRecord> random_corpus(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<QueryRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> s(8);
        for (auto& x : s) x = 0.01 + unit(rng);
        out.push_back(record("q" + std::to_string(i), s, unit(rng) < 0.5, unit(rng) < 0.7));
    }
    return out;
}

/// Best achievable Hit@1 when exactly `n_large` records go to the large arm.
double oracle_hit(const std::vector<QueryRecord>& rs, std::size_t n_large) {
    double base = 0;
    std::vector<int> gain;
    for (const auto& r : rs) {
        base += r.correct.at("small");
        gain.push_back(int(r.correct.at("large")) - int(r.correct.at("small")));
    }
    std::sort(gain.rbegin(), gain.rend());
    for (std::size_t i = 0; i < n_large; ++i) base += gain[i];
    return base / static_cast<double>(rs.size());
}

}  // namespace

TEST_CASE("hit_at_1 examples") {
    std::vector<QueryRecord> rs;
    std::vector<Decision> ds;
    for (int i = 0; i < 10; ++i) {
        rs.push_back(record("q" + std::to_string(i), {1.0}, i % 2 == 0, true));
        ds.push_back(to("small"));
    }
    CHECK(hit_at_1(rs, ds) == 0.5);
    std::vector<Decision> large(10, to("large"));
    CHECK(hit_at_1(rs, large) == 1.0);
    CHECK(code_of([] { hit_at_1({}, {}); }) == Errc::EmptyCorpus);
    CHECK(code_of([&] { hit_at_1(rs, std::span(ds).first(3)); }) == Errc::LengthMismatch);
    std::vector<Decision> unknown(10, to("medium"));
    CHECK(code_of([&] { hit_at_1(rs, unknown); }) == Errc::MissingLabel);
}

TEST_CASE("random_baseline") {
    CHECK(random_baseline(77.52, 80.84, 0.40) == Approx(78.848));
    CHECK(random_baseline(45.68, 55.25, 0.80) == Approx(53.336));
    CHECK(random_baseline(0.6, 0.6, 0.37) == Approx(0.6));
    CHECK(random_baseline(0.31, 0.87, 0.0) == 0.31);
    CHECK(random_baseline(0.31, 0.87, 1.0) == 0.87);
    // Affine in rho: equal steps give equal increments.
    const double a = random_baseline(0.31, 0.87, 0.1), b = random_baseline(0.31, 0.87, 0.4),
                 c = random_baseline(0.31, 0.87, 0.7);
    CHECK(b - a == Approx(c - b).epsilon(1e-12));
    CHECK(code_of([] { random_baseline(0.5, 0.5, 1.2); }) == Errc::OutOfRange);
}

TEST_CASE("average_effectiveness") {
    auto curve_from_deltas = [](double hs, double hl, std::array<double, 4> deltas) {
        BudgetCurve c;
        c.points.push_back({0.0, hs, 0, 0});
        for (std::size_t i = 0; i < 4; ++i) {
            const double rho = kInteriorFractions[i];
            c.points.push_back({rho, random_baseline(hs, hl, rho) + deltas[i], 0, rho});
        }
        c.points.push_back({1.0, hl, 0, 1});
        return c;
    };
    CHECK(average_effectiveness(curve_from_deltas(77.52, 80.84, {1.30, 1.13, 1.69, 0.78}), 77.52, 80.84) ==
          Approx(1.225));
    CHECK(average_effectiveness(curve_from_deltas(77.52, 80.84, {0.38, 0.33, 0.04, -0.20}), 77.52, 80.84) ==
          Approx(0.1375));
    CHECK(average_effectiveness(curve_from_deltas(50, 60, {0, 0, 0, 0}), 50, 60) == Approx(0.0));

    BudgetCurve endpoints_only{{{0.0, 0.5, 0, 0}, {1.0, 0.7, 0, 1}}};
    CHECK(code_of([&] { average_effectiveness(endpoints_only, 0.5, 0.7); }) == Errc::MissingSweepPoint);
}

TEST_CASE("reference table arithmetic") {
    std::ifstream in(SKEWROUTE_FIXTURE_DIR "/routing_tables.json");
    REQUIRE(in);
    const auto fx = nlohmann::json::parse(in);
    int cells = 0;
    for (const auto& s : fx["settings"]) {
        const double hs = s["hit_small"], hl = s["hit_large"];
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::fabs(random_baseline(hs, hl, kInteriorFractions[i]) - s["random_cells"][i].get<double>()) <=
                  0.01 + 1e-9);
            ++cells;
        }
        for (const auto& m : s["methods"]) {
            BudgetCurve c;
            for (std::size_t i = 0; i < 4; ++i) {
                const double rho = kInteriorFractions[i];
                c.points.push_back({rho, random_baseline(hs, hl, rho) + m["deltas"][i].get<double>(), 0, rho});
            }
            CAPTURE(s["setting"].get<std::string>());
            CAPTURE(m["method"].get<std::string>());
            CHECK(std::fabs(average_effectiveness(c, hs, hl) - m["average_effectiveness"].get<double>()) <=
                  0.01 + 1e-9);
            ++cells;
        }
    }
    CHECK(cells == 10 * (4 + 5));
}

TEST_CASE("mean_cost") {
    const auto arms = make_arms(kTwo);
    std::vector<QueryRecord> rs{record("a", {1}, true, true), record("b", {1}, true, true)};
    std::vector<Decision> small(2, to("small")), large(2, to("large"));
    CHECK(mean_cost(rs, small, arms, 1873) == Approx(9.08405e-5).epsilon(1e-12));
    CHECK(mean_cost(rs, large, arms, 1873) == Approx(1.0721052e-3).epsilon(1e-12));
    CHECK(mean_cost(rs, large, arms, 0) == 0.0);
    std::vector<Decision> mixed{to("small"), to("large")};
    CHECK(mean_cost(rs, mixed, arms, 1873) == Approx((9.08405e-5 + 1.0721052e-3) / 2));
    std::vector<Decision> unknown(2, to("medium"));
    CHECK(code_of([&] { mean_cost(rs, unknown, arms, 1873); }) == Errc::MissingArm);
}

TEST_CASE("label permutation leaves hit_at_1 unchanged") {
    std::mt19937_64 rng(21);
    auto rs = random_corpus(rng, 50);
    std::vector<Decision> ds;
    for (std::size_t i = 0; i < rs.size(); ++i) ds.push_back(to(i % 3 == 0 ? "large" : "small"));
    const double before = hit_at_1(rs, ds);
    // Swap which arm owns each record's labels, and flip the decision with it.
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (i % 2 == 0) continue;
        std::swap(rs[i].correct["small"], rs[i].correct["large"]);
        ds[i] = to(ds[i].arm_name == "small" ? "large" : "small");
    }
    CHECK(hit_at_1(rs, ds) == before);
}

TEST_CASE("budget sweep endpoints and oracle bound") {
    std::mt19937_64 rng(22);
    const auto arms = make_arms(kTwo);
    const double fractions[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    for (int trial = 0; trial < 20; ++trial) {
        const auto rs = random_corpus(rng, 37 + 40 * trial);
        for (auto kind : {MetricKind::Entropy, MetricKind::Gini, MetricKind::Area, MetricKind::CumulativeK}) {
            const auto curve = budget_sweep(rs, MetricSpec(kind), fractions, arms);
            REQUIRE(curve.points.size() == 6);
            CHECK(curve.points.front().hit_at_1 == arm_hit_at_1(rs, "small"));
            CHECK(curve.points.back().hit_at_1 == arm_hit_at_1(rs, "large"));
            for (const auto& p : curve.points) {
                const auto n_large = static_cast<std::size_t>(std::llround(p.routed_large_fraction * rs.size()));
                CHECK(p.hit_at_1 <= oracle_hit(rs, n_large) + 1e-12);
                CHECK(p.routed_large_fraction <= p.large_fraction + 1.0 / rs.size() + 1e-12);
            }
        }
    }
}

TEST_CASE("budget sweep routes by the calibrated threshold") {
    std::mt19937_64 rng(23);
    const auto rs = random_corpus(rng, 200);
    const auto arms = make_arms(kTwo);
    const double fractions[] = {0.4};
    const MetricSpec metric(MetricKind::Entropy);
    const auto curve = budget_sweep(rs, metric, fractions, arms);

    std::vector<double> diffs;
    for (const auto& r : rs) diffs.push_back(difficulty_score(r.distribution, metric).value);
    const double mass[] = {0.6};
    const double t = calibrate_boundaries(diffs, mass).thresholds[0];
    std::size_t hits = 0, large = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const bool up = diffs[i] > t;
        large += up;
        hits += rs[i].correct.at(up ? "large" : "small");
    }
    CHECK(curve.points[0].hit_at_1 == Approx(hits / 200.0).epsilon(1e-15));
    CHECK(curve.points[0].routed_large_fraction == Approx(large / 200.0));
    CHECK(large == 80);
    const double cost = (large * 0.5724 + (200 - large) * 0.0485) * 1873 / 1e6 / 200;
    CHECK(curve.points[0].avg_cost == Approx(cost).epsilon(1e-12));
}

TEST_CASE("budget sweep with a held-out calibration split is deterministic") {
    std::mt19937_64 rng(24);
    const auto rs = random_corpus(rng, 300);
    const auto arms = make_arms(kTwo);
    const double fractions[] = {0.0, 0.5, 1.0};
    SweepOptions opt;
    opt.calibration_split = 0.3;
    const auto a = budget_sweep(rs, MetricSpec(MetricKind::Gini), fractions, arms, opt);
    const auto b = budget_sweep(rs, MetricSpec(MetricKind::Gini), fractions, arms, opt);
    REQUIRE(a.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.points[i].hit_at_1 == b.points[i].hit_at_1);
    CHECK(a.points[0].routed_large_fraction == 0.0);
    CHECK(a.points[2].routed_large_fraction == 1.0);
}

TEST_CASE("budget sweep rejects bad input") {
    std::mt19937_64 rng(25);
    const auto rs = random_corpus(rng, 10);
    const auto arms = make_arms(kTwo);
    const double unsorted[] = {0.4, 0.2};
    CHECK_THROWS_AS(budget_sweep(rs, MetricSpec(), unsorted, arms), Error);
    const double outside[] = {1.5};
    CHECK_THROWS_AS(budget_sweep(rs, MetricSpec(), outside, arms), Error);
}

TEST_CASE("correlation report grouping") {
    auto ranked = [](std::size_t n) {
        std::vector<QueryRecord> rs;
        for (std::size_t i = 0; i < n; ++i) {
            // Flatter vectors (harder) for larger i.
            std::vector<double> s{1.0, 0.1 + 0.08 * static_cast<double>(i)};
            rs.push_back(record("q" + std::to_string(i), s, true, true, static_cast<int>(i + 1)));
        }
        return rs;
    };
    auto sizes = [](const CorrelationReport& r) {
        std::vector<std::size_t> v;
        for (const auto& g : r.groups) v.push_back(g.count);
        return v;
    };
    CHECK(sizes(correlation_report(ranked(9), MetricSpec(), 3)) == std::vector<std::size_t>{3, 3, 3});
    CHECK(sizes(correlation_report(ranked(10), MetricSpec(), 3)) == std::vector<std::size_t>{4, 3, 3});

    const auto rep = correlation_report(ranked(10), MetricSpec(), 3);
    CHECK(rep.groups[0].answer_rank_mean == Approx(2.5));
    CHECK(rep.groups[0].answer_rank_quartiles[1] == Approx(2.5));
    CHECK(rep.groups[2].answer_rank_mean == Approx(9.0));
    CHECK(rep.groups[0].difficulty_max <= rep.groups[1].difficulty_min);

    // Records without an answer rank are ignored.
    auto rs = ranked(9);
    rs.push_back(record("unranked", {1.0, 1.0}, true, true));
    CHECK(sizes(correlation_report(rs, MetricSpec(), 3)) == std::vector<std::size_t>{3, 3, 3});
    CHECK(code_of([&] { correlation_report(ranked(2), MetricSpec(), 3); }) == Errc::TooFewRecords);
}

TEST_CASE("easiest group of a constructed corpus has rank 1") {
    SyntheticSpec spec;
    spec.n_queries = 300;
    spec.noise = 0.0;
    auto rs = generate_synthetic(spec);
    // Easy queries get rank 1 by construction here.
    for (auto& r : rs) {
        if (r.meta.at("class") == "easy") r.answer_rank = 1;
    }
    const auto rep = correlation_report(rs, MetricSpec(MetricKind::Gini), 3);
    CHECK(rep.groups[0].answer_rank_mean == 1.0);
    CHECK(rep.groups[2].answer_rank_mean > 50.0);
}

TEST_CASE("interpolated quantile") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(interpolated_quantile(v, 0.0) == 1.0);
    CHECK(interpolated_quantile(v, 0.25) == Approx(1.75));
    CHECK(interpolated_quantile(v, 0.5) == Approx(2.5));
    CHECK(interpolated_quantile(v, 1.0) == 4.0);
    const std::vector<double> one{7};
    CHECK(interpolated_quantile(one, 0.75) == 7.0);
}
