#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "skewroute/core.hpp"
#include "skewroute/eval.hpp"
#include "skewroute/router.hpp"

namespace skewroute {

// JSONL corpus, one object per line:
//   {"id": "q1", "scores": [0.9, 0.1], "correct": {"small": true, "large": true},
//    "answer_rank": 1, "meta": {"source": "dev"}}
// answer_rank and meta are optional. Scores need not be sorted on disk.

/// Throws ParseError / ValidationError carrying the 1-based line number, and
/// InconsistentArms when a line's arm names differ from the first record's.
std::vector<QueryRecord> load_records(std::istream& in, NegativePolicy policy = NegativePolicy::Reject);
std::vector<QueryRecord> load_records(const std::filesystem::path& path,
                                      NegativePolicy policy = NegativePolicy::Reject);

void write_records(const std::vector<QueryRecord>& records, std::ostream& out);
void write_records(const std::vector<QueryRecord>& records, const std::filesystem::path& path);

/// Two-class synthetic corpus. Easy queries get s_i = i^-alpha_easy, hard ones a
/// flat vector; both are jittered multiplicatively by exp(noise * z_i).
struct SyntheticSpec {
    std::size_t n_queries = 10000;
    double easy_fraction = 0.5;
    std::size_t k = 100;
    double alpha_easy = 1.0;
    double noise = 0.1;
    double p_small_easy = 0.9;
    double p_small_hard = 0.2;
    double p_large_easy = 0.92;
    double p_large_hard = 0.7;
    std::uint64_t seed = 42;
};

/// Arm names used by the generator.
inline constexpr const char* kSmallArm = "small";
inline constexpr const char* kLargeArm = "large";

/// Deterministic for a given spec. Per query the stream is consumed as:
/// one uniform for the class (easy iff u < easy_fraction), K normals for the
/// jitter, one uniform per arm label (small then large), one uniform for the
/// answer rank (easy: 1..3, hard: floor(K/2)+1..K).
std::vector<QueryRecord> generate_synthetic(const SyntheticSpec& spec);

/// CSV with header "large_fraction,hit_at_1,avg_cost"; reals use 6 decimals.
void write_curve_csv(const BudgetCurve& curve, std::ostream& out);
void write_curve_csv(const BudgetCurve& curve, const std::filesystem::path& path);

void write_correlation_csv(const CorrelationReport& report, std::ostream& out);
void write_correlation_csv(const CorrelationReport& report, const std::filesystem::path& path);

/// calibration.json: the router config (metric, thresholds, arms) plus the
/// calibration report. The service loads the config part back.
std::string calibration_json(const RouterConfig& cfg, const CalibrationReport* report);
RouterConfig parse_router_config(const std::string& json_text);
RouterConfig read_router_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical config serialization, as 16 hex digits.
std::string config_digest(const RouterConfig& cfg);

/// Formats a real with 6 decimals, the precision of every CSV output.
std::string format_fixed6(double v);

}  // namespace skewroute
