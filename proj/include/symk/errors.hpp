#ifndef SYMK_ERRORS_HPP
#define SYMK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace symk {

struct SymkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FieldMismatch : SymkError { using SymkError::SymkError; };
struct DivisionByZero : SymkError { using SymkError::SymkError; };
struct NoPBasis : SymkError { using SymkError::SymkError; };
struct Unsupported : SymkError { using SymkError::SymkError; };

struct PrecisionExhausted : SymkError { using SymkError::SymkError; };
struct DivisionByUncertifiedZero : SymkError { using SymkError::SymkError; };
struct EqualCharacteristic : SymkError { using SymkError::SymkError; };
struct ZetaAbsent : SymkError { using SymkError::SymkError; };
struct WildKummer : SymkError { using SymkError::SymkError; };

struct FrameMismatch : SymkError { using SymkError::SymkError; };
struct WrongLevel : SymkError { using SymkError::SymkError; };
struct UnsupportedShape : SymkError { using SymkError::SymkError; };
struct UnsupportedResidue : SymkError { using SymkError::SymkError; };

struct NoOracle : SymkError { using SymkError::SymkError; };
struct PoleCollision : SymkError { using SymkError::SymkError; };

struct NotBasisAligned : SymkError { using SymkError::SymkError; };
struct WrongBasisSize : SymkError { using SymkError::SymkError; };
struct IterationCapExceeded : SymkError { using SymkError::SymkError; };

struct ParseError : SymkError {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : SymkError(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};
struct UnknownGenerator : ParseError { using ParseError::ParseError; };
struct ConfigError : SymkError { using SymkError::SymkError; };

} // namespace symk

#endif
