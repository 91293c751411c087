#pragma once

#include <stdexcept>
#include <string>

namespace rxbar {

/// Error categories, used by the CLI to pick an exit code and by tests to
/// assert that the right class of failure was reported.
enum class ErrorKind {
    config,      // bad configuration / invalid parameter values
    parse,       // malformed input file (netlist, serialized state, ...)
    capacity,    // resource exhaustion (placement does not fit, keystream too short)
    runtime,     // invalid operation against an otherwise valid object
    calibration, // an iterative calibration failed to converge
    io,          // file could not be read or written
};

/// All errors thrown by the library derive from this.  The `kind()` tag is
/// stable; the message text is meant for humans and may change.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void throw_parse(const std::string& msg) { throw Error(ErrorKind::parse, msg); }
[[noreturn]] inline void throw_capacity(const std::string& msg) { throw Error(ErrorKind::capacity, msg); }
[[noreturn]] inline void throw_runtime(const std::string& msg) { throw Error(ErrorKind::runtime, msg); }
[[noreturn]] inline void throw_calibration(const std::string& msg) { throw Error(ErrorKind::calibration, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }

} // namespace rxbar
