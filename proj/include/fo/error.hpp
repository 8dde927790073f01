#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fo {

enum class ErrorKind {
    parameter,
    data,
    shape,
    range,
    fit,
    singular,
    alignment,
    numeric,
    coverage,
    partition,
    degenerate,
    oracle_unavailable,
    domain,
    lookahead,
    io,
    config,
};

inline std::string_view to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::data: return "data";
        case ErrorKind::shape: return "shape";
        case ErrorKind::range: return "range";
        case ErrorKind::fit: return "fit";
        case ErrorKind::singular: return "singular";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::coverage: return "coverage";
        case ErrorKind::partition: return "partition";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::oracle_unavailable: return "oracle_unavailable";
        case ErrorKind::domain: return "domain";
        case ErrorKind::lookahead: return "lookahead";
        case ErrorKind::io: return "io";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Library-wide exception. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures caused by bad input rather than by the numerics.
    bool is_validation() const noexcept {
        switch (kind_) {
            case ErrorKind::numeric:
            case ErrorKind::singular:
            case ErrorKind::degenerate:
            case ErrorKind::fit:
            case ErrorKind::lookahead:
                return false;
            default:
                return true;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace fo
