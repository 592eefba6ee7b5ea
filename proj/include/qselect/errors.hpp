#pragma once

#include <stdexcept>
#include <string>

namespace qselect {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// textcore
struct EmptyTextError : Error { using Error::Error; };
struct SpanOutOfRangeError : Error { using Error::Error; };
struct IndexOutOfRangeError : Error { using Error::Error; };
struct InvalidReplacementError : Error { using Error::Error; };

// oracle
struct OracleUnavailableError : Error { using Error::Error; };
struct MalformedResponseError : Error { using Error::Error; };
struct ProbabilityInvalidError : Error { using Error::Error; };
struct EmptyCorpusError : Error { using Error::Error; };
struct SingleClassCorpusError : Error { using Error::Error; };

// selector
struct AllPositionsExcludedError : Error { using Error::Error; };
struct TreeExhaustedError : Error { using Error::Error; };

// attack
struct EmptyCandidatesError : Error { using Error::Error; };

// metrics
struct ZeroOriginalAccuracyError : Error { using Error::Error; };
struct DivisionByZeroError : Error { using Error::Error; };
struct EmptyRunError : Error { using Error::Error; };
struct DegenerateSamplesError : Error { using Error::Error; };

// combiner
struct UnknownBinError : Error { using Error::Error; };

// harness
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};
struct SparseLabelsError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace qselect
