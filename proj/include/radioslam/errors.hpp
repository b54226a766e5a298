#pragma once

#include <stdexcept>
#include <string>

namespace radioslam {

struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidKind : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InfeasibleBirth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularPrior : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No finite-cost assignment exists for a cost matrix.
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoFeasibleDA : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace radioslam
