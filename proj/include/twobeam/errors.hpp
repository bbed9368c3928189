#ifndef TWOBEAM_ERRORS_HPP
#define TWOBEAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace twobeam {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector/operator dimensions or basis labels disagree.
struct DimensionMismatch : Error {
    using Error::Error;
};

// A state that must be normalized is not.
struct NotNormalized : Error {
    using Error::Error;
};

// A history references a time label not present in the model.
struct TimeLabelUnknown : Error {
    using Error::Error;
};

// A per-time projector set is not mutually orthogonal.
struct NonOrthogonalSet : Error {
    using Error::Error;
};

// Conditional probabilities were requested for a family that fails the
// consistency condition; no probabilities may be assigned.
struct InconsistentFamily : Error {
    using Error::Error;
};

// The conditioning event has (numerically) zero probability.
struct ZeroProbabilityCondition : Error {
    using Error::Error;
};

// Field evaluation requested inside a node region (density below floor).
struct NodeRegion : Error {
    using Error::Error;
};

// Scenario file could not be parsed; carries line/column.
struct ScenarioParseError : Error {
    int line = 0;
    int column = 0;
    ScenarioParseError(const std::string& msg, int line_, int column_)
        : Error(msg + " (line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ")"),
          line(line_), column(column_) {}
};

} // namespace twobeam

#endif
