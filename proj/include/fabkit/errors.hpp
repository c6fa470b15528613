#ifndef FABKIT_ERRORS_HPP
#define FABKIT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace fabkit {

// Failure category, mapped onto process exit codes by the CLI:
// user/config error -> 1, remote/transport error -> 2, scheduler error -> 3.
enum class ErrorKind { user = 1, transport = 2, scheduler = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const { return kind_; }
    // Stable machine-parseable class name, e.g. "unresolved-placeholder".
    const std::string& code() const { return code_; }
    int exit_code() const { return static_cast<int>(kind_); }

    // One-line form used on stderr: "fab: <code>: <message>".
    std::string one_line() const { return "fab: " + code_ + ": " + what(); }

private:
    ErrorKind kind_;
    std::string code_;
};

// ---- user / configuration errors (exit 1) ----

struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(ErrorKind::user, "usage", m) {}
};

struct MissingFileError : Error {
    explicit MissingFileError(const std::string& m) : Error(ErrorKind::user, "missing-file", m) {}
};

struct ParseError : Error {
    ParseError(const std::string& m, int line)
        : Error(ErrorKind::user, "parse-error", m + " (line " + std::to_string(line) + ")"),
          line_(line) {}
    explicit ParseError(const std::string& m) : Error(ErrorKind::user, "parse-error", m), line_(-1) {}
    int line() const { return line_; }

private:
    int line_;
};

struct UnknownMachineError : Error {
    explicit UnknownMachineError(const std::string& m)
        : Error(ErrorKind::user, "unknown-machine", m) {}
};

struct MissingKeyError : Error {
    MissingKeyError(const std::string& key, const std::string& layers_searched)
        : Error(ErrorKind::user, "missing-key",
                "no variable named '" + key + "' (layers searched: " + layers_searched + ")"),
          key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct UnresolvedPlaceholderError : Error {
    explicit UnresolvedPlaceholderError(std::vector<std::string> names, const std::string& where)
        : Error(ErrorKind::user, "unresolved-placeholder", join(names, where)),
          names_(std::move(names)) {}
    const std::vector<std::string>& names() const { return names_; }

private:
    static std::string join(const std::vector<std::string>& names, const std::string& where) {
        std::string s = "unresolved placeholder(s) in " + where + ":";
        for (const auto& n : names) s += " $" + n;
        return s;
    }
    std::vector<std::string> names_;
};

struct CyclicReferenceError : Error {
    explicit CyclicReferenceError(const std::string& m)
        : Error(ErrorKind::user, "cyclic-reference", m) {}
};

struct MissingContextKeyError : Error {
    explicit MissingContextKeyError(const std::string& m)
        : Error(ErrorKind::user, "missing-context-key", m) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorKind::user, "invalid-input", m) {}
};

struct HeterogeneousSpecsError : Error {
    explicit HeterogeneousSpecsError(const std::string& m)
        : Error(ErrorKind::user, "heterogeneous-specs", m) {}
};

struct SourceMissingError : Error {
    explicit SourceMissingError(const std::string& m)
        : Error(ErrorKind::user, "source-missing", m) {}
};

// ---- transport errors (exit 2) ----

struct TransportError : Error {
    TransportError(std::string code, const std::string& m)
        : Error(ErrorKind::transport, std::move(code), m) {}
};

struct AuthFailedError : TransportError {
    explicit AuthFailedError(const std::string& m) : TransportError("auth-failed", m) {}
};

struct HostKeyMismatchError : TransportError {
    explicit HostKeyMismatchError(const std::string& m)
        : TransportError("host-key-mismatch", m) {}
};

struct UnreachableError : TransportError {
    explicit UnreachableError(const std::string& m) : TransportError("unreachable", m) {}
};

struct SessionClosedError : TransportError {
    explicit SessionClosedError(const std::string& m) : TransportError("session-closed", m) {}
};

struct TransportDroppedError : TransportError {
    explicit TransportDroppedError(const std::string& m)
        : TransportError("transport-dropped", m) {}
};

struct PermissionDeniedError : TransportError {
    explicit PermissionDeniedError(const std::string& m)
        : TransportError("permission-denied", m) {}
};

struct RemoteMissingError : TransportError {
    explicit RemoteMissingError(const std::string& m) : TransportError("remote-missing", m) {}
};

// ---- scheduler errors (exit 3) ----

struct SchedulerError : Error {
    SchedulerError(std::string code, const std::string& m)
        : Error(ErrorKind::scheduler, std::move(code), m) {}
};

struct SubmitRejectedError : SchedulerError {
    explicit SubmitRejectedError(const std::string& m) : SchedulerError("submit-rejected", m) {}
};

struct JobIdParseFailedError : SchedulerError {
    explicit JobIdParseFailedError(const std::string& m)
        : SchedulerError("jobid-parse-failed", m) {}
};

struct NoSuchJobError : SchedulerError {
    explicit NoSuchJobError(const std::string& m) : SchedulerError("no-such-job", m) {}
};

} // namespace fabkit

#endif
