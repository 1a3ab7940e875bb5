#pragma once

#include <stdexcept>
#include <string>

namespace hjlab {

// Exit codes of the CLI map 1:1 onto these exception types.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 1;
};

struct HypothesisViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 2;
};

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 3;
};

// Cross-pipeline disagreement or statistics inconsistent with a proven
// identity; always indicates a bug or a broken configuration upstream.
struct InconsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 4;
};

}  // namespace hjlab
