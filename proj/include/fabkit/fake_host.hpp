#ifndef FABKIT_FAKE_HOST_HPP
#define FABKIT_FAKE_HOST_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fabkit/transport.hpp"

namespace fabkit::transport {

// In-memory host used by tests and demos: a scripted command table, a fake
// filesystem, a printenv environment, and a small batch queue. State is
// shared by every session opened against the same "fake:<name>" endpoint in
// this process, and internally synchronized so concurrent sessions see a
// consistent queue.
class FakeHost {
public:
    enum class JobState { queued, running, completed, cancelled };

    struct Job {
        std::string id;
        JobState state = JobState::queued;
        std::string script_path;
        std::string workdir;
    };

    using CompletionHook = std::function<void(FakeHost&, const Job&)>;
    using CommandHandler = std::function<std::optional<ExecResult>(const std::string&)>;

    // Process-global registry keyed by the name after "fake:".
    static std::shared_ptr<FakeHost> get(const std::string& name);
    static void reset(const std::string& name);
    static void reset_all();

    explicit FakeHost(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    // -- scripting --
    void script_command(const std::string& exact_command, ExecResult result);
    void add_handler(CommandHandler handler);
    void set_env(std::vector<std::pair<std::string, std::string>> env);
    void set_env_var(const std::string& key, const std::string& value);

    // Runs when a job leaves the running state normally; the default does
    // nothing. Use it to emulate what the job's script would have produced.
    void set_completion_hook(CompletionHook hook);

    // Every call to the status command reports the current queue, then
    // advances each job one lifecycle step (queued -> running -> completed).
    // Set to false to drive the lifecycle manually with advance().
    void set_auto_advance(bool enabled);
    void advance();

    // Fails the Nth next transferred file (1-based) to exercise the
    // partial-transfer contract; resets after firing.
    void fail_transfer_after(int files);

    // -- command execution (used by FakeSession) --
    ExecResult exec(const std::string& command);

    // -- fake filesystem --
    void write_file(const std::string& path, const std::string& content);
    std::optional<std::string> read_file(const std::string& path) const;
    void make_dirs(const std::string& path);
    bool exists(const std::string& path) const;
    bool is_dir(const std::string& path) const;
    std::vector<std::string> list_dir(const std::string& path) const;
    // All file paths under a directory, relative to it.
    std::vector<std::string> files_under(const std::string& dir) const;
    std::map<std::string, std::string> all_files() const;

    // Consumes one transfer-failure token; returns false when the injected
    // failure should fire.
    bool transfer_tick();

    // -- queue inspection --
    std::vector<Job> jobs() const;
    std::size_t queue_length() const;
    std::string normalize(const std::string& path) const;

private:
    ExecResult exec_locked(const std::string& command, const std::string& workdir);
    ExecResult builtin(const std::string& command, const std::string& workdir);
    ExecResult queue_status_locked();
    void advance_locked();
    void complete_job_locked(Job& job);

    mutable std::recursive_mutex mu_;
    std::string name_;
    std::map<std::string, ExecResult> scripted_;
    std::vector<CommandHandler> handlers_;
    std::vector<std::pair<std::string, std::string>> env_{
        {"PATH", "/usr/bin:/bin"}, {"HOME", "/home/fake"}};
    std::map<std::string, std::string> files_;
    std::set<std::string> dirs_{"/"};
    std::vector<Job> queue_;
    int next_job_ = 1;
    bool auto_advance_ = true;
    CompletionHook completion_hook_;
    int fail_transfer_countdown_ = 0;
};

} // namespace fabkit::transport

#endif
