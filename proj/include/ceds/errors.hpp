#ifndef CEDS_ERRORS_HPP
#define CEDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ceds {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ill-sorted term construction (operand widths, bool/bitvec confusion, width caps).
struct SortError : Error {
    using Error::Error;
};

// Evaluation failures: unassigned variable, out-of-range assignment value.
struct EvalError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(int line_, int col_, const std::string& what_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + what_),
          line(line_), col(col_) {}
    int line;
    int col;
};

// Equality machinery applied to states with different explicit parts.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Per-slice query built from states that were not matched first.
struct NotMatched : Error {
    using Error::Error;
};

// Enumeration backend refused a query over its assignment-space cap.
struct DomainTooLarge : Error {
    using Error::Error;
};

// External solver could not be spawned.
struct SpawnFailure : Error {
    using Error::Error;
};

// A backend returned Unknown or an error where a verdict was required; aborts the run.
struct SolverFailure : Error {
    using Error::Error;
};

// Broken internal contract (cache fed an Unknown verdict, forall inside a clause, ...).
struct InvariantError : Error {
    using Error::Error;
};

} // namespace ceds

#endif
