#include "skewroute/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skewroute/rng.hpp"

namespace skewroute {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish(std::ostream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
    }
}

QueryRecord parse_record(const std::string& text, std::size_t line, NegativePolicy policy) {
    json row;
    try {
        row = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, e.what(), line);
    }
    const auto invalid = [line](const std::string& why) { return Error(Errc::ValidationError, why, line); };
    if (!row.is_object()) {
        throw invalid("record must be a JSON object");
    }
    if (!row.contains("id") || !row["id"].is_string()) {
        throw invalid("field 'id' must be a string");
    }
    if (!row.contains("scores") || !row["scores"].is_array()) {
        throw invalid("field 'scores' must be an array of numbers");
    }
    if (!row.contains("correct") || !row["correct"].is_object()) {
        throw invalid("field 'correct' must be an object of arm name -> bool");
    }

    std::vector<double> raw;
    raw.reserve(row["scores"].size());
    for (const json& v : row["scores"]) {
        if (!v.is_number()) {
            throw invalid("field 'scores' must contain only numbers");
        }
        raw.push_back(v.get<double>());
    }

    std::map<std::string, bool> correct;
    for (const auto& [arm, label] : row["correct"].items()) {
        if (!label.is_boolean()) {
            throw invalid("label for arm '" + arm + "' must be a boolean");
        }
        correct.emplace(arm, label.get<bool>());
    }

    std::optional<int> answer_rank;
    if (row.contains("answer_rank") && !row["answer_rank"].is_null()) {
        const json& rank = row["answer_rank"];
        if (!rank.is_number_integer() || rank.get<long long>() < 1 || rank.get<long long>() > INT32_MAX) {
            throw invalid("field 'answer_rank' must be a positive integer");
        }
        answer_rank = rank.get<int>();
    }

    std::map<std::string, std::string> meta;
    if (row.contains("meta") && !row["meta"].is_null()) {
        if (!row["meta"].is_object()) {
            throw invalid("field 'meta' must be an object");
        }
        for (const auto& [key, value] : row["meta"].items()) {
            meta.emplace(key, value.is_string() ? value.get<std::string>() : value.dump());
        }
    }

    try {
        return QueryRecord{row["id"].get<std::string>(), validate_distribution(raw, policy), std::move(correct),
                           answer_rank, std::move(meta)};
    } catch (const Error& e) {
        throw invalid(e.what());
    }
}

ordered_json number_or_infinity(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return v > 0 ? "inf" : "-inf";
}

double read_threshold(const json& v) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        if (v == "inf") return std::numeric_limits<double>::infinity();
        if (v == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw Error(Errc::InvalidConfig, "threshold must be a number, \"inf\" or \"-inf\"");
}

ordered_json config_object(const RouterConfig& cfg) {
    ordered_json out;
    out["metric"] = {{"kind", std::string(metric_name(cfg.metric().kind()))},
                     {"cumulative_probability", cfg.metric().cumulative_probability()}};
    ordered_json thresholds = ordered_json::array();
    for (double t : cfg.thresholds()) {
        thresholds.push_back(number_or_infinity(t));
    }
    out["thresholds"] = thresholds;
    ordered_json arms = ordered_json::array();
    for (const Arm& arm : cfg.arms()) {
        arms.push_back({{"name", arm.name}, {"cost_per_million_tokens", arm.cost_per_million_tokens}, {"rank", arm.rank}});
    }
    out["arms"] = arms;
    return out;
}

}  // namespace

std::vector<QueryRecord> load_records(std::istream& in, NegativePolicy policy) {
    std::vector<QueryRecord> records;
    std::string text;
    std::size_t line = 0;
    std::set<std::string> arm_names;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        QueryRecord record = parse_record(text, line, policy);
        std::set<std::string> names;
        for (const auto& [arm, label] : record.correct) {
            names.insert(arm);
        }
        if (records.empty()) {
            arm_names = std::move(names);
        } else if (names != arm_names) {
            throw Error(Errc::InconsistentArms, "arm names differ from the first record's", line);
        }
        records.push_back(std::move(record));
    }
    if (in.bad()) {
        throw Error(Errc::IoError, "read failure");
    }
    return records;
}

std::vector<QueryRecord> load_records(const std::filesystem::path& path, NegativePolicy policy) {
    auto in = open_input(path);
    return load_records(in, policy);
}

void write_records(const std::vector<QueryRecord>& records, std::ostream& out) {
    for (const QueryRecord& r : records) {
        ordered_json row;
        row["id"] = r.id;
        row["scores"] = std::vector<double>(r.distribution.scores().begin(), r.distribution.scores().end());
        ordered_json correct = ordered_json::object();
        for (const auto& [arm, label] : r.correct) {
            correct[arm] = label;
        }
        row["correct"] = correct;
        if (r.answer_rank) {
            row["answer_rank"] = *r.answer_rank;
        }
        if (!r.meta.empty()) {
            ordered_json meta = ordered_json::object();
            for (const auto& [k, v] : r.meta) {
                meta[k] = v;
            }
            row["meta"] = meta;
        }
        out << row.dump() << '\n';
    }
}

void write_records(const std::vector<QueryRecord>& records, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_records(records, out);
    finish(out, path);
}

std::vector<QueryRecord> generate_synthetic(const SyntheticSpec& spec) {
    const auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (spec.n_queries == 0 || spec.k == 0) {
        throw Error(Errc::InvalidSpec, "n_queries and K must be positive");
    }
    if (!probability(spec.easy_fraction)) {
        throw Error(Errc::InvalidSpec, "easy_fraction must lie in [0, 1]");
    }
    if (!(spec.alpha_easy > 0.0) || !std::isfinite(spec.alpha_easy)) {
        throw Error(Errc::InvalidSpec, "alpha_easy must be positive");
    }
    if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
        throw Error(Errc::InvalidSpec, "noise must be finite and >= 0");
    }
    if (!probability(spec.p_small_easy) || !probability(spec.p_small_hard) || !probability(spec.p_large_easy) ||
        !probability(spec.p_large_hard)) {
        throw Error(Errc::InvalidSpec, "correctness probabilities must lie in [0, 1]");
    }
    if (spec.p_small_easy < spec.p_small_hard || spec.p_large_easy < spec.p_large_hard) {
        throw Error(Errc::InvalidSpec, "easy queries must be at least as easy as hard ones for both arms");
    }

    Rng rng(spec.seed);
    const std::string seed_text = std::to_string(spec.seed);
    const int width = static_cast<int>(std::to_string(spec.n_queries - 1).size());
    const std::uint64_t upper_half = spec.k - spec.k / 2;

    std::vector<double> scores(spec.k);
    std::vector<QueryRecord> records;
    records.reserve(spec.n_queries);
    for (std::size_t q = 0; q < spec.n_queries; ++q) {
        const bool easy = rng.uniform() < spec.easy_fraction;
        for (std::size_t i = 0; i < spec.k; ++i) {
            const double base = easy ? std::pow(static_cast<double>(i + 1), -spec.alpha_easy) : 1.0;
            const double z = rng.normal();
            scores[i] = spec.noise == 0.0 ? base : base * std::exp(spec.noise * z);
        }
        const bool small_ok = rng.bernoulli(easy ? spec.p_small_easy : spec.p_small_hard);
        const bool large_ok = rng.bernoulli(easy ? spec.p_large_easy : spec.p_large_hard);
        const std::uint64_t rank_draw = easy ? rng.below(std::min<std::uint64_t>(3, spec.k))
                                             : spec.k / 2 + rng.below(upper_half);

        char id[32];
        std::snprintf(id, sizeof id, "syn-%0*zu", width, q);
        records.push_back(QueryRecord{
            id,
            validate_distribution(scores),
            {{kSmallArm, small_ok}, {kLargeArm, large_ok}},
            static_cast<int>(rank_draw + 1),
            {{"class", easy ? "easy" : "hard"}, {"generator", std::string(Rng::kAlgorithm)}, {"seed", seed_text}},
        });
    }
    return records;
}

std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_curve_csv(const BudgetCurve& curve, std::ostream& out) {
    out << "large_fraction,hit_at_1,avg_cost\n";
    for (const BudgetPoint& p : curve.points) {
        out << format_fixed6(p.large_fraction) << ',' << format_fixed6(p.hit_at_1) << ',' << format_fixed6(p.avg_cost)
            << '\n';
    }
}

void write_curve_csv(const BudgetCurve& curve, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_curve_csv(curve, out);
    finish(out, path);
}

void write_correlation_csv(const CorrelationReport& report, std::ostream& out) {
    out << "group,count,difficulty_min,difficulty_max,answer_rank_mean,answer_rank_q1,answer_rank_median,"
           "answer_rank_q3\n";
    for (const CorrelationGroup& g : report.groups) {
        out << g.group_index << ',' << g.count << ',' << format_fixed6(g.difficulty_min) << ','
            << format_fixed6(g.difficulty_max) << ',' << format_fixed6(g.answer_rank_mean) << ','
            << format_fixed6(g.answer_rank_quartiles[0]) << ',' << format_fixed6(g.answer_rank_quartiles[1]) << ','
            << format_fixed6(g.answer_rank_quartiles[2]) << '\n';
    }
}

void write_correlation_csv(const CorrelationReport& report, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_correlation_csv(report, out);
    finish(out, path);
}

std::string calibration_json(const RouterConfig& cfg, const CalibrationReport* report) {
    ordered_json out = config_object(cfg);
    out["digest"] = config_digest(cfg);
    if (report != nullptr) {
        ordered_json r;
        r["target_ratios"] = report->target_ratios;
        r["achieved_ratios"] = report->achieved_ratios;
        r["notes"] = report->notes;
        out["report"] = r;
    }
    return out.dump(2) + "\n";
}

RouterConfig parse_router_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    try {
        const json& metric = doc.at("metric");
        const std::string kind_name = metric.at("kind").get<std::string>();
        const auto kind = parse_metric_kind(kind_name);
        if (!kind) {
            throw Error(Errc::InvalidMetric, "unknown metric '" + kind_name + "'");
        }
        const double p = metric.value("cumulative_probability", MetricSpec::kDefaultCumulativeProbability);
        std::vector<double> thresholds;
        for (const json& t : doc.at("thresholds")) {
            thresholds.push_back(read_threshold(t));
        }
        std::vector<Arm> arms;
        for (const json& a : doc.at("arms")) {
            arms.push_back(Arm{a.at("name").get<std::string>(), a.at("cost_per_million_tokens").get<double>(),
                               a.at("rank").get<int>()});
        }
        return RouterConfig(MetricSpec(*kind, p), std::move(thresholds), std::move(arms));
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
}

RouterConfig read_router_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_router_config(buffer.str());
}

std::string config_digest(const RouterConfig& cfg) {
    const std::string canonical = config_object(cfg).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace skewroute
