#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pforge {

// A construction whose inputs admit no geometric solution (parallel lines,
// disjoint line/circle, non-positive radius, ...).
struct NoSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scalar or point outside the quantizer domain.
struct OutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooManyParameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the detokenizer. `position` is the index of the first offending
// token (equal to the stream length when the stream ends early).
struct SyntaxError : std::runtime_error {
    SyntaxError(std::size_t pos, const std::string& what)
        : std::runtime_error("token " + std::to_string(pos) + ": " + what), position(pos)
    {
    }
    std::size_t position;
};

// Malformed program: undefined register, wrong operand type, bad arity.
struct InvalidReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateProfile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreachableGroup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnbreakableCycle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteConstruction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pforge
