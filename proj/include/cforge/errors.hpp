#ifndef CFORGE_ERRORS_HPP
#define CFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cforge {

// Bad argument: dimension mismatch, out-of-range index, malformed input.
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A precondition on the mathematical state of the input fails
// (complex spectrum where real is required, spectrum off the unit circle, ...).
struct precondition_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Majorization order violated between source and target graphs.
struct order_error : precondition_error {
    using precondition_error::precondition_error;
};

// Graph index mismatch in an index-preserving request.
struct index_error : precondition_error {
    using precondition_error::precondition_error;
};

// A coordinate pinned by a dominated splitting was asked to move.
struct pinning_error : precondition_error {
    using precondition_error::precondition_error;
};

// A dominated splitting obstructs the requested exponent move.
struct domination_error : precondition_error {
    using precondition_error::precondition_error;
};

// A supplied subbundle is not invariant within tolerance.
struct invariance_error : precondition_error {
    using precondition_error::precondition_error;
};

// The engine ran out of perturbation budget or failed to certify a
// construction step; carries diagnostics in the message.
struct capability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical breakdown (eigensolver failure, conditioning blow-up).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cforge

#endif
