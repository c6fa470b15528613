#ifndef FABKIT_TRANSPORT_HPP
#define FABKIT_TRANSPORT_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fabkit/config.hpp"
#include "fabkit/errors.hpp"

namespace fabkit::transport {

// A reachable host: real SSH target, the local shell ("localhost"), or an
// in-memory fake ("fake:<name>") that never opens network connections.
struct Endpoint {
    std::string host;
    std::string username;
    int port = 22;
    std::optional<std::filesystem::path> key_path;

    bool is_fake() const { return host.rfind("fake:", 0) == 0; }
    bool is_local() const { return host == "localhost" || host == "local"; }
    std::string fake_name() const { return is_fake() ? host.substr(5) : std::string{}; }

    // Reads remote / username / port / key_path from a resolved context.
    static Endpoint from_context(const config::ResolvedContext& ctx);
};

struct ExecResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    std::chrono::milliseconds duration{0};
    bool ok() const { return exit_code == 0; }
};

struct TransferItem {
    std::string rel_path;
    std::uint64_t bytes = 0;
};

struct TransferSummary {
    std::vector<TransferItem> files;
    bool complete = true;
    std::uint64_t total_bytes() const {
        std::uint64_t n = 0;
        for (const auto& f : files) n += f.bytes;
        return n;
    }
};

// Raised when a tree copy stopped partway; carries what did transfer so the
// destination is never silently half-written.
class PartialTransferError : public TransportError {
public:
    PartialTransferError(const std::string& m, TransferSummary done)
        : TransportError("partial-transfer", m), summary_(std::move(done)) {
        summary_.complete = false;
    }
    const TransferSummary& summary() const { return summary_; }

private:
    TransferSummary summary_;
};

// One transcript entry. Transfers are recorded alongside executed commands so
// an invocation's remote actions can be replayed against a fresh fake host.
struct TranscriptOp {
    enum class Kind { exec, put_tree, get_tree, put_file, get_file, make_dirs };
    Kind kind = Kind::exec;
    std::string command;      // display form, e.g. the command line or transfer summary
    int exit_code = 0;
    std::string arg1, arg2;   // operation paths (local/remote as applicable)
    std::string payload;      // put_file content, kept for replay
};

// An open channel to one endpoint. Confined to one logical task at a time;
// concurrent jobs use separate sessions.
class Session {
public:
    virtual ~Session() = default;

    ExecResult exec(const std::string& command);
    TransferSummary put_tree(const std::filesystem::path& local_dir,
                             const std::string& remote_dir);
    TransferSummary get_tree(const std::string& remote_dir,
                             const std::filesystem::path& local_dir);
    void put_file(const std::string& content, const std::string& remote_path);
    std::string get_file(const std::string& remote_path);
    virtual bool exists(const std::string& remote_path) = 0;
    virtual std::vector<std::string> list_dir(const std::string& remote_path) = 0;
    void make_dirs(const std::string& remote_path);

    void close() { open_ = false; }
    bool is_open() const { return open_; }
    const Endpoint& endpoint() const { return endpoint_; }

    const std::vector<TranscriptOp>& transcript() const { return transcript_; }
    // The spec-level view: (command, exit_code) in execution order.
    std::vector<std::pair<std::string, int>> transcript_pairs() const;

protected:
    explicit Session(Endpoint ep) : endpoint_(std::move(ep)) {}

    virtual ExecResult do_exec(const std::string& command) = 0;
    virtual TransferSummary do_put_tree(const std::filesystem::path& local_dir,
                                        const std::string& remote_dir) = 0;
    virtual TransferSummary do_get_tree(const std::string& remote_dir,
                                        const std::filesystem::path& local_dir) = 0;
    virtual void do_put_file(const std::string& content, const std::string& remote_path) = 0;
    virtual std::string do_get_file(const std::string& remote_path) = 0;
    virtual void do_make_dirs(const std::string& remote_path) = 0;

    void require_open() const;
    void record(TranscriptOp op) { transcript_.push_back(std::move(op)); }

    Endpoint endpoint_;

private:
    bool open_ = true;
    std::vector<TranscriptOp> transcript_;
};

// Opens a session for the endpoint's backend. SSH endpoints authenticate with
// keys only (no password prompts); host-key verification follows the user's
// known-hosts policy and a mismatch is always fatal.
std::unique_ptr<Session> connect(const Endpoint& endpoint);

// Re-applies a recorded transcript onto another session. With a fresh fake
// host this reproduces the original queue and filesystem state.
void replay(const std::vector<TranscriptOp>& ops, Session& onto);

} // namespace fabkit::transport

#endif
