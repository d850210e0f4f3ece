#include "skewroute/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skewroute/eval.hpp"
#include "skewroute/io.hpp"
#include "skewroute/metrics.hpp"
#include "skewroute/rng.hpp"
#include "skewroute/service.hpp"

namespace skewroute::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

/// Bad flag values; exits with kExitUsage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string metric = "gini";
    double p = MetricSpec::kDefaultCumulativeProbability;
    std::string out_dir = ".";
    bool shift_to_zero = false;
};

struct RunContext {
    const std::vector<std::string>& args;
    std::ostream& out;
    std::ostream& err;
};

const CLI::Validator kOpenUnit = CLI::Validator(
    [](std::string& text) -> std::string {
        try {
            const double v = std::stod(text);
            if (v > 0.0 && v < 1.0) {
                return {};
            }
        } catch (const std::exception&) {
        }
        return "value must lie strictly between 0 and 1, got " + text;
    },
    "(0,1)");

void add_metric_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--metric", flags.metric, "Skewness statistic")
        ->check(CLI::IsMember({"area", "cumulative", "entropy", "gini", "slope"}))
        ->capture_default_str();
    cmd->add_option("--P", flags.p, "Cumulative probability for --metric cumulative")
        ->check(kOpenUnit)
        ->capture_default_str();
    cmd->add_flag("--shift-to-zero", flags.shift_to_zero, "Shift negative scores up by the minimum instead of rejecting");
}

void add_out_flag(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--out", flags.out_dir, "Output directory")->capture_default_str();
}

MetricSpec metric_from(const CommonFlags& flags) {
    return MetricSpec(*parse_metric_kind(flags.metric), flags.p);
}

NegativePolicy policy_from(const CommonFlags& flags) {
    return flags.shift_to_zero ? NegativePolicy::ShiftToZero : NegativePolicy::Reject;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        items.push_back(item);
    }
    return items;
}

double parse_real(const std::string& text, std::string_view what) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && !std::isnan(v)) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw UsageError("invalid number '" + text + "' in " + std::string(what));
}

std::vector<double> parse_reals(const std::string& text, std::string_view what) {
    std::vector<double> values;
    for (const std::string& item : split_list(text)) {
        values.push_back(parse_real(item, what));
    }
    if (values.empty()) {
        throw UsageError(std::string(what) + " is empty");
    }
    return values;
}

std::vector<Arm> parse_arms(const std::string& text) {
    std::vector<std::pair<std::string, double>> named;
    for (const std::string& item : split_list(text)) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos || colon == 0) {
            throw UsageError("arm '" + item + "' must look like name:cost_per_million_tokens");
        }
        named.emplace_back(item.substr(0, colon), parse_real(item.substr(colon + 1), "--arms"));
    }
    return make_arms(named);
}

/// Builds a RouterConfig from flags; config errors become usage errors.
RouterConfig config_from_flags(const MetricSpec& metric, std::vector<double> thresholds, std::vector<Arm> arms) {
    try {
        return RouterConfig(metric, std::move(thresholds), std::move(arms));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) {
        throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
    }
}

ordered_json metric_json(const MetricSpec& metric) {
    return {{"kind", std::string(metric_name(metric.kind()))},
            {"cumulative_probability", metric.cumulative_probability()}};
}

ordered_json reals_json(std::span<const double> values) {
    ordered_json arr = ordered_json::array();
    for (double v : values) {
        if (std::isfinite(v)) {
            arr.push_back(v);
        } else {
            arr.push_back(v > 0 ? "inf" : "-inf");
        }
    }
    return arr;
}

/// Manifest shared by every subcommand: enough to re-run it byte for byte.
ordered_json base_manifest(const RunContext& ctx, std::string_view command) {
    ordered_json m;
    m["tool"] = "skewroute";
    m["version"] = std::string(kToolVersion);
    m["command"] = std::string(command);
    m["argv"] = ctx.args;
    return m;
}

void write_manifest(const fs::path& dir, const ordered_json& manifest) {
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<QueryRecord> load_corpus(const std::string& path, NegativePolicy policy) {
    return load_records(fs::path(path), policy);
}

std::vector<double> corpus_difficulties(const std::vector<QueryRecord>& records, const MetricSpec& metric) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const QueryRecord& r : records) {
        try {
            values.push_back(difficulty_score(r.distribution, metric).value);
        } catch (const Error& e) {
            throw Error(e.code(), "record '" + r.id + "': " + e.what());
        }
    }
    return values;
}

// route ----------------------------------------------------------------------

struct RouteFlags {
    CommonFlags common;
    std::string corpus;
    std::string thresholds;
    std::string config;
    std::string arms = "small:0.0485,large:0.5724";
};

int cmd_route(const RunContext& ctx, const RouteFlags& flags) {
    std::optional<RouterConfig> cfg;
    if (!flags.config.empty()) {
        if (!flags.thresholds.empty()) {
            throw UsageError("--thresholds and --config are mutually exclusive");
        }
        cfg = read_router_config(flags.config);
    } else {
        if (flags.thresholds.empty()) {
            throw UsageError("one of --thresholds or --config is required");
        }
        cfg = config_from_flags(metric_from(flags.common), parse_reals(flags.thresholds, "--thresholds"),
                                parse_arms(flags.arms));
    }

    const auto records = load_corpus(flags.corpus, policy_from(flags.common));
    const fs::path dir = prepare_out_dir(flags.common.out_dir);

    std::string lines;
    for (const QueryRecord& r : records) {
        Decision d;
        try {
            d = decide(r.distribution, *cfg);
        } catch (const Error& e) {
            throw Error(e.code(), "record '" + r.id + "': " + e.what());
        }
        lines += decision_line(r.id, d.arm_name, d.difficulty.value, metric_name(d.metric_kind));
        lines += '\n';
    }
    write_text(dir / "decisions.jsonl", lines);
    ctx.out << lines;

    ordered_json manifest = base_manifest(ctx, "route");
    manifest["metric"] = metric_json(cfg->metric());
    manifest["thresholds"] = reals_json(cfg->thresholds());
    manifest["config_digest"] = config_digest(*cfg);
    manifest["corpus"] = flags.corpus;
    manifest["negative_policy"] = flags.common.shift_to_zero ? "shift_to_zero" : "reject";
    manifest["outputs"] = {"decisions.jsonl"};
    write_manifest(dir, manifest);
    return kExitOk;
}

// calibrate ------------------------------------------------------------------

struct CalibrateFlags {
    CommonFlags common;
    std::string corpus;
    std::string ratios;
    std::string arms = "small:0.0485,large:0.5724";
};

int cmd_calibrate(const RunContext& ctx, const CalibrateFlags& flags) {
    const MetricSpec metric = metric_from(flags.common);
    std::vector<Arm> arms = parse_arms(flags.arms);
    const std::vector<double> ratios = parse_reals(flags.ratios, "--ratios");
    if (ratios.size() != arms.size()) {
        throw UsageError("--ratios needs one value per arm (" + std::to_string(arms.size()) + ")");
    }
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) {
            throw UsageError(std::string(to_string(Errc::InvalidTargets)) + ": target ratio outside (0, 1)");
        }
    }

    const auto records = load_corpus(flags.corpus, policy_from(flags.common));
    const std::vector<double> difficulties = corpus_difficulties(records, metric);
    CalibrationReport report;
    try {
        report = calibrate(difficulties, ratios);
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidTargets) {
            throw UsageError(e.what());
        }
        throw;
    }
    const RouterConfig cfg(metric, report.thresholds, std::move(arms));
    const std::string text = calibration_json(cfg, &report);

    const fs::path dir = prepare_out_dir(flags.common.out_dir);
    write_text(dir / "calibration.json", text);
    ctx.out << text;

    ordered_json manifest = base_manifest(ctx, "calibrate");
    manifest["metric"] = metric_json(metric);
    manifest["thresholds"] = reals_json(report.thresholds);
    manifest["corpus"] = flags.corpus;
    manifest["negative_policy"] = flags.common.shift_to_zero ? "shift_to_zero" : "reject";
    manifest["outputs"] = {"calibration.json"};
    write_manifest(dir, manifest);
    return kExitOk;
}

// evaluate -------------------------------------------------------------------

struct EvaluateFlags {
    CommonFlags common;
    std::string corpus;
    std::string ratios = "0,0.2,0.4,0.6,0.8,1";
    std::string arms = "small:0.0485,large:0.5724";
    double tokens = kDefaultTokensPerQuery;
    double calibration_split = 0.0;
    std::uint64_t seed = 42;
};

int cmd_evaluate(const RunContext& ctx, const EvaluateFlags& flags) {
    const MetricSpec metric = metric_from(flags.common);
    const std::vector<Arm> arms = parse_arms(flags.arms);
    if (arms.size() != 2) {
        throw UsageError("evaluate routes between exactly two arms");
    }
    config_from_flags(metric, {0.0}, arms);
    std::vector<double> fractions = parse_reals(flags.ratios, "--ratios");
    std::sort(fractions.begin(), fractions.end());
    fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw UsageError("budget ratios must lie in [0, 1]");
        }
    }
    if (!(flags.calibration_split >= 0.0 && flags.calibration_split < 1.0)) {
        throw UsageError("--calibration-split must lie in [0, 1)");
    }
    if (!(flags.tokens >= 0.0)) {
        throw UsageError("--tokens must be >= 0");
    }

    const auto records = load_corpus(flags.corpus, policy_from(flags.common));
    SweepOptions options;
    options.tokens_per_query = flags.tokens;
    options.calibration_split = flags.calibration_split;
    options.seed = flags.seed;
    const BudgetCurve curve = budget_sweep(records, metric, fractions, arms, options);

    // Endpoints on the evaluated set: the rho = 0 / 1 routes of a one-point sweep.
    const std::array<double, 2> ends{0.0, 1.0};
    const BudgetCurve endpoints = budget_sweep(records, metric, ends, arms, options);
    const double hit_small = endpoints.points[0].hit_at_1;
    const double hit_large = endpoints.points[1].hit_at_1;

    const fs::path dir = prepare_out_dir(flags.common.out_dir);
    write_curve_csv(curve, dir / "curve.csv");

    ordered_json summary;
    summary["metric"] = metric_json(metric);
    summary["hit_small"] = hit_small;
    summary["hit_large"] = hit_large;
    ordered_json points = ordered_json::array();
    for (const BudgetPoint& p : curve.points) {
        points.push_back({{"large_fraction", p.large_fraction},
                          {"routed_large_fraction", p.routed_large_fraction},
                          {"hit_at_1", p.hit_at_1},
                          {"random_baseline", random_baseline(hit_small, hit_large, p.large_fraction)},
                          {"avg_cost", p.avg_cost}});
    }
    summary["points"] = points;
    try {
        summary["average_effectiveness"] = average_effectiveness(curve, hit_small, hit_large);
    } catch (const Error& e) {
        if (e.code() != Errc::MissingSweepPoint) {
            throw;
        }
        summary["average_effectiveness"] = nullptr;
    }
    ctx.out << summary.dump(2) << '\n';

    ordered_json manifest = base_manifest(ctx, "evaluate");
    manifest["metric"] = metric_json(metric);
    manifest["ratios"] = reals_json(fractions);
    manifest["corpus"] = flags.corpus;
    manifest["seed"] = flags.seed;
    manifest["calibration_split"] = flags.calibration_split;
    manifest["tokens_per_query"] = flags.tokens;
    manifest["negative_policy"] = flags.common.shift_to_zero ? "shift_to_zero" : "reject";
    manifest["outputs"] = {"curve.csv"};
    write_manifest(dir, manifest);
    return kExitOk;
}

// analyze --------------------------------------------------------------------

struct AnalyzeFlags {
    CommonFlags common;
    std::string corpus;
    int groups = 3;
};

int cmd_analyze(const RunContext& ctx, const AnalyzeFlags& flags) {
    const MetricSpec metric = metric_from(flags.common);
    if (flags.groups < 2) {
        throw UsageError("--groups must be at least 2");
    }
    const auto records = load_corpus(flags.corpus, policy_from(flags.common));
    const CorrelationReport report = correlation_report(records, metric, flags.groups);

    const fs::path dir = prepare_out_dir(flags.common.out_dir);
    write_correlation_csv(report, dir / "correlation.csv");
    write_correlation_csv(report, ctx.out);

    ordered_json manifest = base_manifest(ctx, "analyze");
    manifest["metric"] = metric_json(metric);
    manifest["groups"] = flags.groups;
    manifest["corpus"] = flags.corpus;
    manifest["negative_policy"] = flags.common.shift_to_zero ? "shift_to_zero" : "reject";
    manifest["outputs"] = {"correlation.csv"};
    write_manifest(dir, manifest);
    return kExitOk;
}

// generate -------------------------------------------------------------------

struct GenerateFlags {
    CommonFlags common;
    SyntheticSpec spec;
};

int cmd_generate(const RunContext& ctx, const GenerateFlags& flags) {
    std::vector<QueryRecord> records;
    try {
        records = generate_synthetic(flags.spec);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const fs::path dir = prepare_out_dir(flags.common.out_dir);
    write_records(records, dir / "corpus.jsonl");
    ctx.out << "wrote " << records.size() << " records to " << (dir / "corpus.jsonl").string() << '\n';

    const SyntheticSpec& s = flags.spec;
    ordered_json manifest = base_manifest(ctx, "generate");
    manifest["seed"] = s.seed;
    manifest["generator"] = std::string(Rng::kAlgorithm);
    manifest["spec"] = {{"n_queries", s.n_queries},       {"easy_fraction", s.easy_fraction},
                        {"K", s.k},                       {"alpha_easy", s.alpha_easy},
                        {"noise", s.noise},               {"p_small_easy", s.p_small_easy},
                        {"p_small_hard", s.p_small_hard}, {"p_large_easy", s.p_large_easy},
                        {"p_large_hard", s.p_large_hard}};
    manifest["outputs"] = {"corpus.jsonl"};
    write_manifest(dir, manifest);
    return kExitOk;
}

// bench ----------------------------------------------------------------------

struct BenchFlags {
    CommonFlags common;
    std::size_t k = 100;
    std::uint64_t iterations = 1000000;
    std::uint64_t seed = 42;
};

int cmd_bench(const RunContext& ctx, const BenchFlags& flags) {
    if (flags.iterations == 0) {
        throw UsageError("--iterations must be positive");
    }
    if (flags.k == 0) {
        throw UsageError("--K must be positive");
    }
    const MetricSpec metric = metric_from(flags.common);
    const RouterConfig cfg = config_from_flags(metric, {0.0}, parse_arms("small:0.0485,large:0.5724"));

    // A small pool of jittered power-law vectors, as a retriever would emit them.
    Rng rng(flags.seed);
    constexpr std::size_t kPool = 64;
    std::vector<std::vector<double>> pool(kPool, std::vector<double>(flags.k));
    for (auto& scores : pool) {
        const double alpha = 0.2 + 1.8 * rng.uniform();
        for (std::size_t i = 0; i < flags.k; ++i) {
            scores[i] = std::pow(static_cast<double>(i + 1), -alpha) * std::exp(0.05 * rng.normal());
        }
        std::sort(scores.begin(), scores.end(), std::greater<>());
    }
    // Surface metric precondition failures (e.g. area with K = 1) before timing.
    decide(validate_distribution(pool.front()), cfg);

    const std::uint64_t block = std::min<std::uint64_t>(1000, flags.iterations);
    std::vector<double> per_query_ms;
    std::uint64_t done = 0;
    std::size_t large = 0;
    while (done < flags.iterations) {
        const std::uint64_t n = std::min(block, flags.iterations - done);
        const auto start = std::chrono::steady_clock::now();
        for (std::uint64_t i = 0; i < n; ++i) {
            const Decision d = decide(validate_distribution(pool[(done + i) % kPool]), cfg);
            large += static_cast<std::size_t>(d.arm_rank);
        }
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        per_query_ms.push_back(elapsed.count() / static_cast<double>(n));
        done += n;
    }
    std::vector<double> sorted = per_query_ms;
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (double v : per_query_ms) {
        total += v;
    }

    ordered_json report;
    report["metric"] = std::string(metric_name(metric.kind()));
    report["K"] = flags.k;
    report["iterations"] = flags.iterations;
    report["block_size"] = block;
    report["median_ms_per_query"] = interpolated_quantile(sorted, 0.5);
    report["p99_ms_per_query"] = interpolated_quantile(sorted, 0.99);
    report["mean_ms_per_query"] = total / static_cast<double>(per_query_ms.size());
    report["routed_large"] = large;
    ctx.out << report.dump() << '\n';

    const fs::path dir = prepare_out_dir(flags.common.out_dir);
    ordered_json manifest = base_manifest(ctx, "bench");
    manifest["metric"] = metric_json(metric);
    manifest["seed"] = flags.seed;
    manifest["outputs"] = ordered_json::array();
    write_manifest(dir, manifest);
    return kExitOk;
}

// serve ----------------------------------------------------------------------

struct ServeFlags {
    std::vector<std::string> configs;
    std::optional<std::string> listen;
    bool shift_to_zero = false;
};

int cmd_serve(const RunContext& ctx, const ServeFlags& flags) {
    std::vector<RouterConfig> configs;
    for (const std::string& path : flags.configs) {
        configs.push_back(read_router_config(path));
    }
    ListenAddress address;
    try {
        address = resolve_listen_address(flags.listen);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    auto service = std::make_shared<const RouteService>(
        std::move(configs), flags.shift_to_zero ? NegativePolicy::ShiftToZero : NegativePolicy::Reject);
    HttpServer server(service);
    const int port = server.bind(address);
    if (port < 0) {
        throw Error(Errc::IoError, "cannot listen on " + address.host + ":" + std::to_string(address.port));
    }
    ctx.out << "listening on " << address.host << ':' << port << std::endl;
    return server.listen_after_bind() ? kExitOk : kExitInternal;
}

// replay ---------------------------------------------------------------------

int cmd_replay(const RunContext& ctx, const std::string& manifest_path, const std::string& out_override) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open '" + manifest_path + "'");
    }
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
        throw Error(Errc::ValidationError, "manifest has no argv");
    }
    if (manifest.value("version", "") != kToolVersion) {
        ctx.err << "warning: manifest written by version " << manifest.value("version", "?") << ", running "
                << kToolVersion << '\n';
    }
    auto args = manifest["argv"].get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "replay") {
        throw UsageError("refusing to replay a replay manifest");
    }
    if (!out_override.empty()) {
        bool replaced = false;
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--out") {
                args[i + 1] = out_override;
                replaced = true;
            }
        }
        if (!replaced) {
            args.push_back("--out");
            args.push_back(out_override);
        }
    }
    return run(args, ctx.out, ctx.err);
}

}  // namespace

std::string decision_line(std::string_view id, std::string_view arm, double difficulty, std::string_view metric) {
    ordered_json line;
    line["id"] = std::string(id);
    line["arm"] = std::string(arm);
    line["difficulty"] = difficulty;
    line["metric"] = std::string(metric);
    return line.dump();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Training-free skewness router for retrieval-augmented generation", "skewroute"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    RouteFlags route;
    auto* route_cmd = app.add_subcommand("route", "Route every corpus record and emit one decision per line");
    route_cmd->add_option("--corpus", route.corpus, "JSONL corpus")->required();
    route_cmd->add_option("--thresholds", route.thresholds, "Comma-separated difficulty thresholds (N-1 for N arms)");
    route_cmd->add_option("--config", route.config, "calibration.json from the calibrate subcommand");
    route_cmd->add_option("--arms", route.arms, "Comma-separated name:cost_per_million_tokens, cheap first")
        ->capture_default_str();
    add_metric_flags(route_cmd, route.common);
    add_out_flag(route_cmd, route.common);

    CalibrateFlags calibrate_flags;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Pick thresholds that split the corpus by target ratios");
    calibrate_cmd->add_option("--corpus", calibrate_flags.corpus, "JSONL corpus")->required();
    calibrate_cmd->add_option("--ratios", calibrate_flags.ratios, "Target share per arm, cheap first (e.g. 0.6,0.4)")
        ->required();
    calibrate_cmd->add_option("--arms", calibrate_flags.arms, "Comma-separated name:cost_per_million_tokens")
        ->capture_default_str();
    add_metric_flags(calibrate_cmd, calibrate_flags.common);
    add_out_flag(calibrate_cmd, calibrate_flags.common);

    EvaluateFlags evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Budget sweep: Hit@1 and cost per large-arm ratio");
    evaluate_cmd->add_option("--corpus", evaluate.corpus, "JSONL corpus")->required();
    evaluate_cmd->add_option("--ratios", evaluate.ratios, "Budget ratios (share routed to the large arm)")
        ->capture_default_str();
    evaluate_cmd->add_option("--arms", evaluate.arms, "small:cost,large:cost")->capture_default_str();
    evaluate_cmd->add_option("--tokens", evaluate.tokens, "Input tokens per query")->capture_default_str();
    evaluate_cmd->add_option("--calibration-split", evaluate.calibration_split,
                             "Held-out share used only for calibration (0 = calibrate in-corpus)")
        ->capture_default_str();
    evaluate_cmd->add_option("--seed", evaluate.seed, "Seed for the calibration split")->capture_default_str();
    add_metric_flags(evaluate_cmd, evaluate.common);
    add_out_flag(evaluate_cmd, evaluate.common);

    AnalyzeFlags analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Answer-rank statistics per difficulty group");
    analyze_cmd->add_option("--corpus", analyze.corpus, "JSONL corpus")->required();
    analyze_cmd->add_option("--groups", analyze.groups, "Number of equal-size groups")->capture_default_str();
    add_metric_flags(analyze_cmd, analyze.common);
    add_out_flag(analyze_cmd, analyze.common);

    GenerateFlags generate;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic two-class corpus");
    SyntheticSpec& spec = generate.spec;
    generate_cmd->add_option("--n", spec.n_queries, "Number of queries")->capture_default_str();
    generate_cmd->add_option("--easy-fraction", spec.easy_fraction, "Share of easy queries")->capture_default_str();
    generate_cmd->add_option("--K", spec.k, "Scores per query")->capture_default_str();
    generate_cmd->add_option("--alpha", spec.alpha_easy, "Power-law exponent of easy queries")->capture_default_str();
    generate_cmd->add_option("--noise", spec.noise, "Log-normal jitter magnitude")->capture_default_str();
    generate_cmd->add_option("--p-small-easy", spec.p_small_easy)->capture_default_str();
    generate_cmd->add_option("--p-small-hard", spec.p_small_hard)->capture_default_str();
    generate_cmd->add_option("--p-large-easy", spec.p_large_easy)->capture_default_str();
    generate_cmd->add_option("--p-large-hard", spec.p_large_hard)->capture_default_str();
    generate_cmd->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    add_out_flag(generate_cmd, generate.common);

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Per-decision latency");
    bench_cmd->add_option("--K", bench.k, "Scores per query")->capture_default_str();
    bench_cmd->add_option("--iterations", bench.iterations, "Decisions to time")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Seed for the score pool")->capture_default_str();
    add_metric_flags(bench_cmd, bench.common);
    add_out_flag(bench_cmd, bench.common);

    ServeFlags serve;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP sidecar: POST /route, GET /healthz");
    serve_cmd->add_option("--config", serve.configs, "calibration.json; repeat for per-metric overrides")->required();
    serve_cmd->add_option("--listen", serve.listen, "host:port (default $SKEWROUTE_LISTEN or 127.0.0.1:8080)");
    serve_cmd->add_flag("--shift-to-zero", serve.shift_to_zero, "Shift negative scores instead of rejecting");

    std::string manifest_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
    replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required();
    replay_cmd->add_option("--out", replay_out, "Write outputs here instead of the recorded --out");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const RunContext ctx{args, out, err};
    try {
        if (*route_cmd) return cmd_route(ctx, route);
        if (*calibrate_cmd) return cmd_calibrate(ctx, calibrate_flags);
        if (*evaluate_cmd) return cmd_evaluate(ctx, evaluate);
        if (*analyze_cmd) return cmd_analyze(ctx, analyze);
        if (*generate_cmd) return cmd_generate(ctx, generate);
        if (*bench_cmd) return cmd_bench(ctx, bench);
        if (*serve_cmd) return cmd_serve(ctx, serve);
        if (*replay_cmd) return cmd_replay(ctx, manifest_path, replay_out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace skewroute::cli
