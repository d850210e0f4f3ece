#include "skewroute/error.hpp"

namespace skewroute {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyScores: return "EmptyScores";
        case Errc::NonFiniteScore: return "NonFiniteScore";
        case Errc::NegativeScore: return "NegativeScore";
        case Errc::DegenerateDistribution: return "DegenerateDistribution";
        case Errc::InvalidProbability: return "InvalidProbability";
        case Errc::TooFewScores: return "TooFewScores";
        case Errc::NonPositiveScore: return "NonPositiveScore";
        case Errc::InvalidMetric: return "InvalidMetric";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::EmptyCalibrationSet: return "EmptyCalibrationSet";
        case Errc::InvalidTargets: return "InvalidTargets";
        case Errc::MissingLabel: return "MissingLabel";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::MissingSweepPoint: return "MissingSweepPoint";
        case Errc::MissingArm: return "MissingArm";
        case Errc::TooFewRecords: return "TooFewRecords";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::InconsistentArms: return "InconsistentArms";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

std::string format_message(Errc code, const std::string& message, std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) {
        out += " (line " + std::to_string(*line) + ")";
    }
    if (!message.empty()) {
        out += ": " + message;
    }
    return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)), code_(code), line_(line) {}

}  // namespace skewroute
