#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skewroute/cli.hpp"

namespace fs = std::filesystem;
using skewroute::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("skewroute_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

const std::string kTwoRecords =
    R"({"id":"q1","scores":[0.9,0.1],"correct":{"small":true,"large":true}})"
    "\n"
    R"({"id":"q2","scores":[0.5,0.5,0.5],"correct":{"small":false,"large":true}})"
    "\n";

}  // namespace

TEST_CASE("route writes one decision per record") {
    TempDir dir("route");
    spit(dir / "c.jsonl", kTwoRecords);
    const auto r = call({"route", "--corpus", dir / "c.jsonl", "--metric", "gini", "--thresholds", "-0.5", "--out",
                         dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "{\"id\":\"q1\",\"arm\":\"large\",\"difficulty\":-0.3999999999999999,\"metric\":\"gini\"}\n"
          "{\"id\":\"q2\",\"arm\":\"large\",\"difficulty\":0.0,\"metric\":\"gini\"}\n");
    CHECK(slurp(dir / "o/decisions.jsonl") == r.out);
    const auto manifest = nlohmann::json::parse(slurp(dir / "o/manifest.json"));
    CHECK(manifest["command"] == "route");
    CHECK(manifest["negative_policy"] == "reject");
}

TEST_CASE("a bad corpus line is named") {
    TempDir dir("badline");
    spit(dir / "c.jsonl", kTwoRecords + R"({"id":"q3","scores":[],"correct":{"small":true,"large":true}})" "\n");
    const auto r = call({"route", "--corpus", dir / "c.jsonl", "--thresholds", "0", "--out", dir / "o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("usage errors") {
    TempDir dir("usage");
    spit(dir / "c.jsonl", kTwoRecords);
    CHECK(call({"route", "--corpus", dir / "c.jsonl", "--thresholds", "0", "--bogus"}).code == 1);
    CHECK(call({"route", "--corpus", dir / "c.jsonl", "--metric", "xyz", "--thresholds", "0"}).code == 1);
    CHECK(call({"route", "--corpus", dir / "c.jsonl", "--metric", "cumulative", "--P", "1.5", "--thresholds", "0"})
              .code == 1);
    CHECK(call({"route", "--corpus", dir / "c.jsonl", "--thresholds", "0,1", "--out", dir / "o"}).code == 1);
    CHECK(call({"bench", "--iterations", "0", "--out", dir / "o"}).code == 1);
    CHECK(call({"nonsense"}).code == 1);
    CHECK(call({}).code == 1);
}

TEST_CASE("help lists every flag") {
    const auto r = call({"evaluate", "--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--corpus", "--metric", "--P", "--ratios", "--seed", "--out", "--calibration-split"}) {
        CHECK(r.out.find(flag) != std::string::npos);
    }
    const auto g = call({"analyze", "--help"});
    CHECK(g.out.find("--groups") != std::string::npos);
}

TEST_CASE("calibrate picks the quantile threshold") {
    TempDir dir("calibrate");
    std::string corpus;
    // Ten records whose entropy grows with i.
    for (int i = 1; i <= 10; ++i) {
        corpus += "{\"id\":\"q" + std::to_string(i) + "\",\"scores\":[1," + std::to_string(i / 10.0) +
                  "],\"correct\":{\"small\":true,\"large\":true}}\n";
    }
    spit(dir / "c.jsonl", corpus);
    const auto r = call({"calibrate", "--corpus", dir / "c.jsonl", "--metric", "entropy", "--ratios", "0.6,0.4",
                         "--out", dir / "o"});
    REQUIRE(r.code == 0);
    const auto cal = nlohmann::json::parse(slurp(dir / "o/calibration.json"));
    const double sixth = -(1 / 1.6) * std::log2(1 / 1.6) - (0.6 / 1.6) * std::log2(0.6 / 1.6);
    CHECK(cal["thresholds"][0].get<double>() == doctest::Approx(sixth).epsilon(1e-12));
    CHECK(cal["report"]["achieved_ratios"][0].get<double>() == doctest::Approx(0.6));

    const auto bad = call({"calibrate", "--corpus", dir / "c.jsonl", "--ratios", "1.2,-0.2", "--out", dir / "o"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("InvalidTargets") != std::string::npos);
    spit(dir / "empty.jsonl", "");
    const auto empty = call({"calibrate", "--corpus", dir / "empty.jsonl", "--ratios", "0.6,0.4", "--out", dir / "o"});
    CHECK(empty.code == 2);
    CHECK(empty.err.find("EmptyCalibrationSet") != std::string::npos);

    // The calibrated config routes the same corpus.
    const auto routed = call({"route", "--corpus", dir / "c.jsonl", "--config", dir / "o/calibration.json", "--out",
                              dir / "r"});
    REQUIRE(routed.code == 0);
    std::size_t small = 0;
    for (std::size_t pos = 0; (pos = routed.out.find("\"small\"", pos)) != std::string::npos; ++pos) ++small;
    CHECK(small == 6);
}

TEST_CASE("generate, evaluate and analyze") {
    TempDir dir("pipeline");
    REQUIRE(call({"generate", "--n", "500", "--seed", "7", "--out", dir / "g"}).code == 0);
    const auto corpus = dir / "g/corpus.jsonl";

    const auto ev = call({"evaluate", "--corpus", corpus, "--metric", "gini", "--out", dir / "e"});
    REQUIRE(ev.code == 0);
    const auto summary = nlohmann::json::parse(ev.out);
    CHECK(summary["points"].size() == 6);
    CHECK(summary["average_effectiveness"].get<double>() > 0.0);
    const auto csv = slurp(dir / "e/curve.csv");
    CHECK(csv.rfind("large_fraction,hit_at_1,avg_cost\n0.000000,", 0) == 0);

    const auto ends = call({"evaluate", "--corpus", corpus, "--ratios", "0,1", "--out", dir / "e2"});
    REQUIRE(ends.code == 0);
    CHECK(nlohmann::json::parse(ends.out)["average_effectiveness"].is_null());
    const auto ends_csv = slurp(dir / "e2/curve.csv");
    CHECK(std::count(ends_csv.begin(), ends_csv.end(), '\n') == 3);

    const auto an = call({"analyze", "--corpus", corpus, "--groups", "3", "--out", dir / "a"});
    REQUIRE(an.code == 0);
    const auto corr = slurp(dir / "a/correlation.csv");
    CHECK(std::count(corr.begin(), corr.end(), '\n') == 4);
}

TEST_CASE("replaying a manifest reproduces outputs byte for byte") {
    TempDir dir("replay");
    REQUIRE(call({"generate", "--n", "300", "--out", dir / "g"}).code == 0);
    REQUIRE(call({"replay", dir / "g/manifest.json", "--out", dir / "g2"}).code == 0);
    CHECK(slurp(dir / "g/corpus.jsonl") == slurp(dir / "g2/corpus.jsonl"));

    const auto corpus = dir / "g/corpus.jsonl";
    REQUIRE(call({"evaluate", "--corpus", corpus, "--metric", "entropy", "--calibration-split", "0.3", "--out",
                  dir / "e"})
                .code == 0);
    REQUIRE(call({"replay", dir / "e/manifest.json", "--out", dir / "e2"}).code == 0);
    CHECK(slurp(dir / "e/curve.csv") == slurp(dir / "e2/curve.csv"));

    REQUIRE(call({"calibrate", "--corpus", corpus, "--metric", "area", "--ratios", "0.5,0.5", "--out", dir / "c"})
                .code == 0);
    REQUIRE(call({"replay", dir / "c/manifest.json", "--out", dir / "c2"}).code == 0);
    CHECK(slurp(dir / "c/calibration.json") == slurp(dir / "c2/calibration.json"));

    REQUIRE(call({"route", "--corpus", corpus, "--config", dir / "c/calibration.json", "--out", dir / "r"}).code == 0);
    REQUIRE(call({"replay", dir / "r/manifest.json", "--out", dir / "r2"}).code == 0);
    CHECK(slurp(dir / "r/decisions.jsonl") == slurp(dir / "r2/decisions.jsonl"));

    REQUIRE(call({"analyze", "--corpus", corpus, "--out", dir / "a"}).code == 0);
    REQUIRE(call({"replay", dir / "a/manifest.json", "--out", dir / "a2"}).code == 0);
    CHECK(slurp(dir / "a/correlation.csv") == slurp(dir / "a2/correlation.csv"));
}

TEST_CASE("bench reports latency") {
    TempDir dir("bench");
    const auto r = call({"bench", "--K", "100", "--iterations", "5000", "--metric", "gini", "--out", dir / "b"});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["median_ms_per_query"].get<double>() > 0.0);
    CHECK(report["iterations"] == 5000);
    CHECK(call({"bench", "--K", "1", "--iterations", "100", "--out", dir / "b"}).code == 0);
}

TEST_CASE("shift-to-zero is opt-in and recorded") {
    TempDir dir("shift");
    spit(dir / "c.jsonl", R"({"id":"q1","scores":[0.5,-0.5],"correct":{"small":true,"large":true}})" "\n");
    CHECK(call({"route", "--corpus", dir / "c.jsonl", "--thresholds", "0", "--out", dir / "o"}).code == 2);
    REQUIRE(call({"route", "--corpus", dir / "c.jsonl", "--thresholds", "0", "--shift-to-zero", "--out", dir / "o"})
                .code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "o/manifest.json"))["negative_policy"] == "shift_to_zero");
}
