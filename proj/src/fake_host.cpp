#include "fabkit/fake_host.hpp"

#include <algorithm>
#include <sstream>

namespace fabkit::transport {

namespace {

std::mutex g_registry_mu;
std::map<std::string, std::shared_ptr<FakeHost>>& registry() {
    static std::map<std::string, std::shared_ptr<FakeHost>> r;
    return r;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

const char* state_code(FakeHost::JobState s) {
    switch (s) {
        case FakeHost::JobState::queued: return "Q";
        case FakeHost::JobState::running: return "R";
        case FakeHost::JobState::completed: return "C";
        case FakeHost::JobState::cancelled: return "CA";
    }
    return "?";
}

} // namespace

std::shared_ptr<FakeHost> FakeHost::get(const std::string& name) {
    std::lock_guard lock(g_registry_mu);
    auto& r = registry();
    auto it = r.find(name);
    if (it == r.end()) it = r.emplace(name, std::make_shared<FakeHost>(name)).first;
    return it->second;
}

void FakeHost::reset(const std::string& name) {
    std::lock_guard lock(g_registry_mu);
    registry().erase(name);
}

void FakeHost::reset_all() {
    std::lock_guard lock(g_registry_mu);
    registry().clear();
}

void FakeHost::script_command(const std::string& exact_command, ExecResult result) {
    std::lock_guard lock(mu_);
    scripted_[exact_command] = std::move(result);
}

void FakeHost::add_handler(CommandHandler handler) {
    std::lock_guard lock(mu_);
    handlers_.push_back(std::move(handler));
}

void FakeHost::set_env(std::vector<std::pair<std::string, std::string>> env) {
    std::lock_guard lock(mu_);
    env_ = std::move(env);
}

void FakeHost::set_env_var(const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    for (auto& [k, v] : env_)
        if (k == key) { v = value; return; }
    env_.emplace_back(key, value);
}

void FakeHost::set_completion_hook(CompletionHook hook) {
    std::lock_guard lock(mu_);
    completion_hook_ = std::move(hook);
}

void FakeHost::set_auto_advance(bool enabled) {
    std::lock_guard lock(mu_);
    auto_advance_ = enabled;
}

void FakeHost::fail_transfer_after(int files) {
    std::lock_guard lock(mu_);
    fail_transfer_countdown_ = files;
}

bool FakeHost::transfer_tick() {
    std::lock_guard lock(mu_);
    if (fail_transfer_countdown_ <= 0) return true;
    if (--fail_transfer_countdown_ == 0) return false;
    return true;
}

std::string FakeHost::normalize(const std::string& path) const {
    std::string p = std::filesystem::path(path).lexically_normal().generic_string();
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    return p;
}

ExecResult FakeHost::exec(const std::string& command) {
    std::lock_guard lock(mu_);
    return exec_locked(trim(command), "/");
}

ExecResult FakeHost::exec_locked(const std::string& command, const std::string& workdir) {
    if (auto it = scripted_.find(command); it != scripted_.end()) return it->second;
    for (const auto& h : handlers_)
        if (auto r = h(command)) return *r;

    // "cd DIR && REST" runs REST with DIR as the working directory.
    if (command.rfind("cd ", 0) == 0) {
        auto amp = command.find("&&");
        if (amp != std::string::npos) {
            std::string dir = trim(command.substr(3, amp - 3));
            std::string rest = trim(command.substr(amp + 2));
            if (!is_dir(normalize(dir)))
                return {1, "", "cd: no such directory: " + dir + "\n", {}};
            return exec_locked(rest, normalize(dir));
        }
    }
    return builtin(command, workdir);
}

ExecResult FakeHost::builtin(const std::string& command, const std::string& workdir) {
    std::istringstream in(command);
    std::string word;
    in >> word;

    if (word == "echo") {
        std::string rest = trim(command.substr(4 < command.size() ? 5 : command.size()));
        return {0, rest + "\n", "", {}};
    }
    if (word == "printenv" || word == "env") {
        std::string out;
        for (const auto& [k, v] : env_) out += k + "=" + v + "\n";
        return {0, out, "", {}};
    }
    if (word == "true") return {0, "", "", {}};
    if (word == "false") return {1, "", "", {}};
    if (word == "test") {
        std::string flag, path;
        in >> flag >> path;
        std::string p = normalize(path.empty() || path[0] != '/' ? workdir + "/" + path : path);
        bool ok = flag == "-d" ? is_dir(p) : exists(p);
        return {ok ? 0 : 1, "", "", {}};
    }
    if (word == "mkdir") {
        std::string flag, path;
        in >> flag;
        if (flag == "-p") in >> path; else path = flag;
        make_dirs(normalize(path[0] != '/' ? workdir + "/" + path : path));
        return {0, "", "", {}};
    }
    if (word == "cat") {
        std::string path;
        in >> path;
        std::string p = normalize(path.empty() || path[0] != '/' ? workdir + "/" + path : path);
        if (auto content = read_file(p)) return {0, *content, "", {}};
        return {1, "", "cat: " + path + ": No such file\n", {}};
    }

    // fake batch scheduler: fsubmit / fqueue / fcancel
    if (word == "fsubmit") {
        std::string script;
        in >> script;
        std::string p = normalize(script.empty() || script[0] != '/' ? workdir + "/" + script
                                                                     : script);
        if (!files_.count(p))
            return {1, "", "fsubmit: script not found: " + script + "\n", {}};
        Job job;
        job.id = "fake-" + std::to_string(next_job_++);
        job.script_path = p;
        job.workdir = normalize(std::filesystem::path(p).parent_path().generic_string());
        queue_.push_back(job);
        return {0, "Submitted fake job " + job.id + "\n", "", {}};
    }
    if (word == "fqueue") return queue_status_locked();
    if (word == "fcancel") {
        std::string id;
        in >> id;
        for (auto& job : queue_) {
            if (job.id != id) continue;
            if (job.state == JobState::completed || job.state == JobState::cancelled) break;
            job.state = JobState::cancelled;
            return {0, "cancelled " + id + "\n", "", {}};
        }
        return {1, "", "fcancel: no such job: " + id + "\n", {}};
    }

    return {127, "", "fake:" + name_ + ": command not found: " + command + "\n", {}};
}

ExecResult FakeHost::queue_status_locked() {
    std::string out;
    for (const auto& job : queue_) {
        if (job.state == JobState::completed) continue; // finished jobs leave the queue
        out += job.id;
        out += ' ';
        out += state_code(job.state);
        out += ' ';
        out += job.script_path;
        out += '\n';
    }
    if (auto_advance_) advance_locked();
    return {0, out, "", {}};
}

void FakeHost::advance() {
    std::lock_guard lock(mu_);
    advance_locked();
}

void FakeHost::advance_locked() {
    for (auto& job : queue_) {
        switch (job.state) {
            case JobState::queued:
                job.state = JobState::running;
                break;
            case JobState::running:
                job.state = JobState::completed;
                complete_job_locked(job);
                break;
            default:
                break;
        }
    }
}

void FakeHost::complete_job_locked(Job& job) {
    if (completion_hook_) completion_hook_(*this, job);
}

void FakeHost::write_file(const std::string& path, const std::string& content) {
    std::lock_guard lock(mu_);
    std::string p = normalize(path);
    make_dirs(std::filesystem::path(p).parent_path().generic_string());
    files_[p] = content;
}

std::optional<std::string> FakeHost::read_file(const std::string& path) const {
    std::lock_guard lock(mu_);
    auto it = files_.find(normalize(path));
    if (it == files_.end()) return std::nullopt;
    return it->second;
}

void FakeHost::make_dirs(const std::string& path) {
    std::lock_guard lock(mu_);
    std::filesystem::path p(normalize(path));
    std::filesystem::path acc;
    for (const auto& part : p) {
        acc /= part;
        dirs_.insert(acc.generic_string());
    }
}

bool FakeHost::exists(const std::string& path) const {
    std::lock_guard lock(mu_);
    std::string p = normalize(path);
    return files_.count(p) || dirs_.count(p);
}

bool FakeHost::is_dir(const std::string& path) const {
    std::lock_guard lock(mu_);
    return dirs_.count(normalize(path)) > 0;
}

std::vector<std::string> FakeHost::list_dir(const std::string& path) const {
    std::lock_guard lock(mu_);
    std::string base = normalize(path);
    std::set<std::string> names;
    auto collect = [&](const std::string& p) {
        if (p.size() <= base.size() + 1 || p.rfind(base + "/", 0) != 0) return;
        std::string rest = p.substr(base.size() + 1);
        names.insert(rest.substr(0, rest.find('/')));
    };
    for (const auto& [p, _] : files_) collect(p);
    for (const auto& d : dirs_) collect(d);
    return {names.begin(), names.end()};
}

std::vector<std::string> FakeHost::files_under(const std::string& dir) const {
    std::lock_guard lock(mu_);
    std::string base = normalize(dir);
    std::vector<std::string> out;
    for (const auto& [p, _] : files_)
        if (p.rfind(base + "/", 0) == 0) out.push_back(p.substr(base.size() + 1));
    return out;
}

std::map<std::string, std::string> FakeHost::all_files() const {
    std::lock_guard lock(mu_);
    return files_;
}

std::vector<FakeHost::Job> FakeHost::jobs() const {
    std::lock_guard lock(mu_);
    return queue_;
}

std::size_t FakeHost::queue_length() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& job : queue_)
        if (job.state == JobState::queued || job.state == JobState::running) ++n;
    return n;
}

} // namespace fabkit::transport
