#include "fabkit/transport.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fabkit/fake_host.hpp"
#include "subprocess.hpp"

namespace fabkit::transport {

namespace fs = std::filesystem;
using detail::run_process;
using detail::run_shell;

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += '\'';
    return out;
}

// Sorted relative file paths under a local directory, for deterministic
// transfer order and summaries.
std::vector<fs::path> walk_files(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<fs::path> walk_dirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(fs::relative(entry.path(), root));
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::string read_local_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw TransportError("read-failed", "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_local_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw TransportError("write-failed", "cannot write " + p.string());
    out << content;
}

} // namespace

Endpoint Endpoint::from_context(const config::ResolvedContext& ctx) {
    Endpoint ep;
    ep.host = ctx.get_string("remote");
    if (const auto* u = ctx.find("username")) ep.username = to_display(*u);
    if (const auto* p = ctx.find("port")) {
        try {
            ep.port = std::stoi(to_display(*p));
        } catch (const std::exception&) {
            throw ValidationError("port must be an integer, got '" + to_display(*p) + "'");
        }
    }
    if (const auto* k = ctx.find("key_path")) ep.key_path = to_display(*k);
    return ep;
}

void Session::require_open() const {
    if (!open_)
        throw SessionClosedError("session to " + endpoint_.host + " is closed");
}

ExecResult Session::exec(const std::string& command) {
    require_open();
    try {
        ExecResult r = do_exec(command);
        record({TranscriptOp::Kind::exec, command, r.exit_code, {}, {}, {}});
        return r;
    } catch (const Error&) {
        record({TranscriptOp::Kind::exec, command, -1, {}, {}, {}});
        throw;
    }
}

TransferSummary Session::put_tree(const fs::path& local_dir, const std::string& remote_dir) {
    require_open();
    if (!fs::is_directory(local_dir))
        throw SourceMissingError("local directory does not exist: " + local_dir.string());
    TransferSummary s = do_put_tree(local_dir, remote_dir);
    record({TranscriptOp::Kind::put_tree,
            "put_tree " + local_dir.string() + " -> " + remote_dir + " (" +
                std::to_string(s.files.size()) + " files)",
            0, local_dir.string(), remote_dir, {}});
    return s;
}

TransferSummary Session::get_tree(const std::string& remote_dir, const fs::path& local_dir) {
    require_open();
    TransferSummary s = do_get_tree(remote_dir, local_dir);
    record({TranscriptOp::Kind::get_tree,
            "get_tree " + remote_dir + " -> " + local_dir.string() + " (" +
                std::to_string(s.files.size()) + " files)",
            0, remote_dir, local_dir.string(), {}});
    return s;
}

void Session::put_file(const std::string& content, const std::string& remote_path) {
    require_open();
    do_put_file(content, remote_path);
    record({TranscriptOp::Kind::put_file,
            "put_file " + remote_path + " (" + std::to_string(content.size()) + " bytes)", 0,
            remote_path, {}, content});
}

std::string Session::get_file(const std::string& remote_path) {
    require_open();
    std::string content = do_get_file(remote_path);
    record({TranscriptOp::Kind::get_file, "get_file " + remote_path, 0, remote_path, {}, {}});
    return content;
}

void Session::make_dirs(const std::string& remote_path) {
    require_open();
    do_make_dirs(remote_path);
    record({TranscriptOp::Kind::make_dirs, "make_dirs " + remote_path, 0, remote_path, {}, {}});
}

std::vector<std::pair<std::string, int>> Session::transcript_pairs() const {
    std::vector<std::pair<std::string, int>> out;
    out.reserve(transcript_.size());
    for (const auto& op : transcript_) out.emplace_back(op.command, op.exit_code);
    return out;
}

// ---------------------------------------------------------------- fake

class FakeSession final : public Session {
public:
    FakeSession(Endpoint ep, std::shared_ptr<FakeHost> host)
        : Session(std::move(ep)), host_(std::move(host)) {}

    bool exists(const std::string& p) override {
        require_open();
        return host_->exists(p);
    }

    std::vector<std::string> list_dir(const std::string& p) override {
        require_open();
        if (!host_->is_dir(p))
            throw RemoteMissingError("no such remote directory: " + p);
        return host_->list_dir(p);
    }

protected:
    ExecResult do_exec(const std::string& command) override { return host_->exec(command); }

    TransferSummary do_put_tree(const fs::path& local_dir,
                                const std::string& remote_dir) override {
        TransferSummary s;
        host_->make_dirs(remote_dir);
        for (const auto& d : walk_dirs(local_dir))
            host_->make_dirs(remote_dir + "/" + d.generic_string());
        for (const auto& rel : walk_files(local_dir)) {
            if (!host_->transfer_tick())
                throw PartialTransferError("injected failure while sending " +
                                               rel.generic_string(),
                                           s);
            std::string content = read_local_file(local_dir / rel);
            host_->write_file(remote_dir + "/" + rel.generic_string(), content);
            s.files.push_back({rel.generic_string(), content.size()});
        }
        return s;
    }

    TransferSummary do_get_tree(const std::string& remote_dir,
                                const fs::path& local_dir) override {
        if (!host_->is_dir(remote_dir))
            throw RemoteMissingError("no such remote directory: " + remote_dir);
        TransferSummary s;
        fs::create_directories(local_dir);
        auto rels = host_->files_under(remote_dir);
        std::sort(rels.begin(), rels.end());
        for (const auto& rel : rels) {
            if (!host_->transfer_tick())
                throw PartialTransferError("injected failure while fetching " + rel, s);
            auto content = host_->read_file(remote_dir + "/" + rel);
            write_local_file(local_dir / rel, *content);
            s.files.push_back({rel, content->size()});
        }
        return s;
    }

    void do_put_file(const std::string& content, const std::string& remote_path) override {
        host_->write_file(remote_path, content);
    }

    std::string do_get_file(const std::string& remote_path) override {
        auto content = host_->read_file(remote_path);
        if (!content) throw RemoteMissingError("no such remote file: " + remote_path);
        return *content;
    }

    void do_make_dirs(const std::string& remote_path) override {
        host_->make_dirs(remote_path);
    }

private:
    std::shared_ptr<FakeHost> host_;
};

// ---------------------------------------------------------------- local

class LocalSession final : public Session {
public:
    explicit LocalSession(Endpoint ep) : Session(std::move(ep)) {}

    bool exists(const std::string& p) override {
        require_open();
        return fs::exists(p);
    }

    std::vector<std::string> list_dir(const std::string& p) override {
        require_open();
        if (!fs::is_directory(p))
            throw RemoteMissingError("no such directory: " + p);
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(p))
            names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
        return names;
    }

protected:
    ExecResult do_exec(const std::string& command) override {
        auto start = std::chrono::steady_clock::now();
        auto r = run_shell(command);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        return {r.exit_code, r.out, r.err, ms};
    }

    TransferSummary do_put_tree(const fs::path& local_dir,
                                const std::string& remote_dir) override {
        return copy_tree(local_dir, remote_dir);
    }

    TransferSummary do_get_tree(const std::string& remote_dir,
                                const fs::path& local_dir) override {
        if (!fs::is_directory(remote_dir))
            throw RemoteMissingError("no such directory: " + remote_dir);
        return copy_tree(remote_dir, local_dir);
    }

    void do_put_file(const std::string& content, const std::string& remote_path) override {
        write_local_file(remote_path, content);
    }

    std::string do_get_file(const std::string& remote_path) override {
        if (!fs::is_regular_file(remote_path))
            throw RemoteMissingError("no such file: " + remote_path);
        return read_local_file(remote_path);
    }

    void do_make_dirs(const std::string& remote_path) override {
        fs::create_directories(remote_path);
    }

private:
    // Non-deleting recursive copy: changed files overwritten, stale extras
    // at the destination retained.
    static TransferSummary copy_tree(const fs::path& from, const fs::path& to) {
        TransferSummary s;
        try {
            fs::create_directories(to);
            for (const auto& d : walk_dirs(from)) fs::create_directories(to / d);
            for (const auto& rel : walk_files(from)) {
                fs::copy_file(from / rel, to / rel, fs::copy_options::overwrite_existing);
                s.files.push_back({rel.generic_string(), fs::file_size(from / rel)});
            }
        } catch (const fs::filesystem_error& e) {
            if (e.code() == std::errc::permission_denied)
                throw PermissionDeniedError(e.what());
            throw PartialTransferError(e.what(), s);
        }
        return s;
    }
};

// ---------------------------------------------------------------- ssh

namespace {

// Maps OpenSSH client failures onto the transport error contract. Host-key
// trouble is fatal and never auto-accepted.
[[noreturn]] void classify_ssh_failure(const std::string& host, int exit_code,
                                       const std::string& stderr_text) {
    auto has = [&](const char* needle) {
        return stderr_text.find(needle) != std::string::npos;
    };
    if (has("REMOTE HOST IDENTIFICATION HAS CHANGED") || has("Host key verification failed"))
        throw HostKeyMismatchError("host key verification failed for " + host +
                                   "; refusing to connect");
    if (has("Permission denied") || has("Too many authentication failures"))
        throw AuthFailedError("authentication to " + host +
                              " failed (keys only, no password prompts)");
    if (has("Could not resolve hostname") || has("Connection refused") ||
        has("Connection timed out") || has("No route to host") ||
        has("Network is unreachable"))
        throw UnreachableError("cannot reach " + host + ": " + stderr_text);
    throw TransportDroppedError("ssh to " + host + " failed (exit " +
                                std::to_string(exit_code) + "): " + stderr_text);
}

} // namespace

class SshSession final : public Session {
public:
    explicit SshSession(Endpoint ep) : Session(std::move(ep)) {
        target_ = endpoint_.username.empty() ? endpoint_.host
                                             : endpoint_.username + "@" + endpoint_.host;
    }

    // Key-based auth only; strict host-key checking per the user's
    // known-hosts file. BatchMode guarantees no interactive prompts.
    std::vector<std::string> base_ssh_args() const {
        std::vector<std::string> args{"ssh",
                                      "-o", "BatchMode=yes",
                                      "-o", "PasswordAuthentication=no",
                                      "-o", "KbdInteractiveAuthentication=no",
                                      "-o", "StrictHostKeyChecking=yes"};
        append_common(args);
        return args;
    }

    std::vector<std::string> base_scp_args() const {
        std::vector<std::string> args{"scp",
                                      "-o", "BatchMode=yes",
                                      "-o", "PasswordAuthentication=no",
                                      "-o", "StrictHostKeyChecking=yes",
                                      "-q", "-r"};
        append_common(args, /*scp=*/true);
        return args;
    }

    void probe() {
        auto args = base_ssh_args();
        args.push_back(target_);
        args.push_back("true");
        auto r = run_process(args);
        if (r.exit_code == 255) classify_ssh_failure(endpoint_.host, r.exit_code, r.err);
        if (r.exit_code != 0)
            throw TransportDroppedError("ssh probe of " + endpoint_.host +
                                        " exited " + std::to_string(r.exit_code));
    }

    bool exists(const std::string& p) override {
        require_open();
        return do_exec("test -e " + shell_quote(p)).exit_code == 0;
    }

    std::vector<std::string> list_dir(const std::string& p) override {
        require_open();
        auto r = do_exec("ls -1 " + shell_quote(p));
        if (r.exit_code != 0) throw RemoteMissingError("cannot list " + p + ": " + r.err);
        std::vector<std::string> names;
        std::istringstream in(r.out);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) names.push_back(line);
        return names;
    }

protected:
    ExecResult do_exec(const std::string& command) override {
        auto args = base_ssh_args();
        args.push_back(target_);
        args.push_back("--");
        args.push_back(command);
        auto start = std::chrono::steady_clock::now();
        auto r = run_process(args);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        // 255 is the ssh client's own failure code, distinct from a remote
        // command exiting nonzero.
        if (r.exit_code == 255) classify_ssh_failure(endpoint_.host, r.exit_code, r.err);
        return {r.exit_code, r.out, r.err, ms};
    }

    TransferSummary do_put_tree(const fs::path& local_dir,
                                const std::string& remote_dir) override {
        do_exec("mkdir -p " + shell_quote(remote_dir));
        auto args = base_scp_args();
        args.push_back(local_dir.string() + "/.");
        args.push_back(target_ + ":" + remote_dir + "/");
        run_scp(args, {});
        TransferSummary s;
        for (const auto& rel : walk_files(local_dir))
            s.files.push_back({rel.generic_string(), fs::file_size(local_dir / rel)});
        return s;
    }

    TransferSummary do_get_tree(const std::string& remote_dir,
                                const fs::path& local_dir) override {
        fs::create_directories(local_dir);
        auto args = base_scp_args();
        args.push_back(target_ + ":" + remote_dir + "/.");
        args.push_back(local_dir.string() + "/");
        run_scp(args, remote_dir);
        TransferSummary s;
        for (const auto& rel : walk_files(local_dir))
            s.files.push_back({rel.generic_string(), fs::file_size(local_dir / rel)});
        return s;
    }

    void do_put_file(const std::string& content, const std::string& remote_path) override {
        auto tmp = fs::temp_directory_path() /
                   ("fabkit-put-" + std::to_string(::getpid()) + ".tmp");
        write_local_file(tmp, content);
        auto args = base_scp_args();
        args.push_back(tmp.string());
        args.push_back(target_ + ":" + remote_path);
        run_scp(args, remote_path);
        fs::remove(tmp);
    }

    std::string do_get_file(const std::string& remote_path) override {
        auto tmp = fs::temp_directory_path() /
                   ("fabkit-get-" + std::to_string(::getpid()) + ".tmp");
        auto args = base_scp_args();
        args.push_back(target_ + ":" + remote_path);
        args.push_back(tmp.string());
        run_scp(args, remote_path);
        std::string content = read_local_file(tmp);
        fs::remove(tmp);
        return content;
    }

    void do_make_dirs(const std::string& remote_path) override {
        auto r = do_exec("mkdir -p " + shell_quote(remote_path));
        if (r.exit_code != 0)
            throw TransportError("mkdir-failed", "mkdir on " + endpoint_.host +
                                                     " failed: " + r.err);
    }

private:
    void append_common(std::vector<std::string>& args, bool scp = false) const {
        if (endpoint_.port != 22) {
            args.push_back(scp ? "-P" : "-p");
            args.push_back(std::to_string(endpoint_.port));
        }
        if (endpoint_.key_path) {
            args.push_back("-i");
            args.push_back(endpoint_.key_path->string());
        }
    }

    void run_scp(const std::vector<std::string>& args, const std::string& what) {
        auto r = run_process(args);
        if (r.exit_code == 0) return;
        if (r.err.find("Permission denied") != std::string::npos &&
            r.err.find("publickey") == std::string::npos)
            throw PermissionDeniedError("transfer failed: " + r.err);
        if (r.err.find("No such file or directory") != std::string::npos)
            throw RemoteMissingError("remote path missing" +
                                     (what.empty() ? "" : ": " + what));
        classify_ssh_failure(endpoint_.host, r.exit_code, r.err);
    }

    std::string target_;
};

std::unique_ptr<Session> connect(const Endpoint& endpoint) {
    if (endpoint.is_fake())
        return std::make_unique<FakeSession>(endpoint, FakeHost::get(endpoint.fake_name()));
    if (endpoint.is_local())
        return std::make_unique<LocalSession>(endpoint);
    auto session = std::make_unique<SshSession>(endpoint);
    session->probe();
    return session;
}

void replay(const std::vector<TranscriptOp>& ops, Session& onto) {
    for (const auto& op : ops) {
        switch (op.kind) {
            case TranscriptOp::Kind::exec:
                onto.exec(op.command);
                break;
            case TranscriptOp::Kind::put_tree:
                onto.put_tree(op.arg1, op.arg2);
                break;
            case TranscriptOp::Kind::get_tree:
                onto.get_tree(op.arg1, op.arg2);
                break;
            case TranscriptOp::Kind::put_file:
                onto.put_file(op.payload, op.arg1);
                break;
            case TranscriptOp::Kind::get_file:
                onto.get_file(op.arg1);
                break;
            case TranscriptOp::Kind::make_dirs:
                onto.make_dirs(op.arg1);
                break;
        }
    }
}

} // namespace fabkit::transport
