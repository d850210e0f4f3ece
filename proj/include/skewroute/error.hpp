#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skewroute {

enum class Errc {
    EmptyScores,
    NonFiniteScore,
    NegativeScore,
    DegenerateDistribution,
    InvalidProbability,
    TooFewScores,
    NonPositiveScore,
    InvalidMetric,
    InvalidConfig,
    EmptyCalibrationSet,
    InvalidTargets,
    MissingLabel,
    LengthMismatch,
    EmptyCorpus,
    OutOfRange,
    MissingSweepPoint,
    MissingArm,
    TooFewRecords,
    ParseError,
    ValidationError,
    InconsistentArms,
    InvalidSpec,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library. `line()` is set for corpus errors
/// (1-based line number in the source file).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    Errc code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    Errc code_;
    std::optional<std::size_t> line_;
};

}  // namespace skewroute
