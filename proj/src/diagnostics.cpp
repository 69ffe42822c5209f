#include "ssmcheck/diagnostics.hpp"

namespace ssmcheck {

[[noreturn]] void throwError(ErrorKind kind, const std::string& message, SourcePos pos) {
    throw Error(kind, message, pos);
}

std::string formatDiagnostic(const Diagnostic& d) {
    std::string out;
    if (d.pos.line != 0) {
        out += "line " + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": ";
    }
    out += (d.severity == Diagnostic::Severity::Warning) ? "warning: " : "error: ";
    out += d.message;
    return out;
}

} // namespace ssmcheck
