#pragma once

#include <stdexcept>
#include <string>

namespace wk {

/// Evaluation outside a function's domain (division by zero, log/sqrt of a
/// non-positive value). The message names the offending operation; the
/// expression layer re-annotates it with the offending subexpression.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A derivative of higher order than the jet carries was requested.
struct order_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Frame matrix singular (or numerically unusable) at an evaluation point.
struct degenerate_frame_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid input to a structure builder (e.g. H depending on phi).
struct construction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A check's stated precondition failed (reported, not silently skipped).
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate data fed to a solver (e.g. constant profile where a gradient
/// normalization is required).
struct degenerate_input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadrature / root-finding failed to converge, or a normalization defect
/// exceeded tolerance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Condition asserted by a closed-form construction found violated.
struct condition_violated_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unsupported base preset for an operation restricted to specific bases.
struct unsupported_base_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
    int position = -1;  // byte offset into the source text, -1 if unknown
    parse_error(const std::string& msg, int pos)
        : std::runtime_error(msg), position(pos) {}
};

}  // namespace wk
