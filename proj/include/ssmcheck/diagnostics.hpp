#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmcheck {

// Position in a source file, 1-based. line == 0 means "no position".
struct SourcePos {
    uint32_t line = 0;
    uint32_t column = 0;
};

// All failures the toolkit raises deliberately carry one of these kinds, so
// callers (the CLI in particular) can map them to stable exit codes.
enum class ErrorKind {
    Parse,       // malformed model text
    Validation,  // well-formed text but an ill-formed model or query
    Capacity,    // state-space or branch cap exceeded
    Usage,       // bad command-line arguments or I/O problems
    Internal,    // invariant broken inside the library -- always a bug
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, SourcePos pos = {})
        : std::runtime_error(std::move(message)), kind_(kind), pos_(pos) {}

    ErrorKind kind() const { return kind_; }
    SourcePos pos() const { return pos_; }

private:
    ErrorKind kind_;
    SourcePos pos_;
};

[[noreturn]] void throwError(ErrorKind kind, const std::string& message, SourcePos pos = {});

// Non-fatal findings produced by validation.
struct Diagnostic {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    std::string message;
    SourcePos pos;
};

std::string formatDiagnostic(const Diagnostic& d);

} // namespace ssmcheck
