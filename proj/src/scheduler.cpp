#include "fabkit/scheduler.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fabkit/errors.hpp"

namespace fabkit::scheduler {

namespace {

// Command patterns share the template placeholder grammar.
std::string render_pattern(const std::string& pattern, const std::string& what,
                           const std::map<std::string, Value>& vars) {
    auto layer = config::layer_from_map(vars, config::Scope::general, what);
    auto ctx = config::resolve(std::span(&layer, 1), "", {});
    return templates::render({what, pattern, templates::TemplateKind::generic}, ctx).text;
}

std::regex compile_pattern(const std::string& pattern, const std::string& what) {
    try {
        return std::regex(pattern);
    } catch (const std::regex_error& e) {
        throw ParseError("bad " + what + " pattern '" + pattern + "': " + e.what());
    }
}

int parse_positive_int(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(text, &pos);
        if (pos != text.size() || v <= 0) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(what + " must be a positive integer, got '" + text + "'");
    }
}

} // namespace

void JobSpec::validate() const {
    if (config_name.empty()) throw ValidationError("job spec needs a config name");
    if (application.empty()) throw ValidationError("job spec needs an application");
    if (cores < 1) throw ValidationError("cores must be >= 1");
    if (replica_count < 1) throw ValidationError("replica_count must be >= 1");
    if (wall_time <= std::chrono::seconds::zero())
        throw ValidationError("wall_time must be positive");
}

std::chrono::seconds parse_wall_time(const std::string& text) {
    if (text.empty()) throw ValidationError("empty wall time");
    if (text.find(':') == std::string::npos)
        return std::chrono::seconds(parse_positive_int(text, "wall time"));
    std::istringstream in(text);
    std::string part;
    std::vector<long> parts;
    while (std::getline(in, part, ':')) {
        try {
            parts.push_back(std::stol(part));
        } catch (const std::exception&) {
            throw ValidationError("bad wall time '" + text + "'");
        }
    }
    if (parts.size() > 3 || std::any_of(parts.begin(), parts.end(), [](long v) { return v < 0; }))
        throw ValidationError("bad wall time '" + text + "' (expected [HH:]MM:SS)");
    long seconds = 0;
    for (long v : parts) seconds = seconds * 60 + v;
    if (seconds <= 0) throw ValidationError("wall time must be positive");
    return std::chrono::seconds(seconds);
}

std::string format_hhmmss(std::chrono::seconds d) {
    long total = d.count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld:%02ld:%02ld", total / 3600, (total / 60) % 60,
                  total % 60);
    return buf;
}

const char* job_state_name(JobState s) {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::completed: return "completed";
        case JobState::failed: return "failed";
        case JobState::cancelled: return "cancelled";
        case JobState::unknown: return "unknown";
    }
    return "?";
}

Adapter load_adapter(const std::filesystem::path& file,
                     const std::filesystem::path& fixtures_dir) {
    if (!std::filesystem::exists(file))
        throw MissingFileError("adapter definition not found: " + file.string());
    YAML::Node root;
    try {
        root = YAML::LoadFile(file.string());
    } catch (const YAML::ParserException& e) {
        throw ParseError(file.string() + ": " + e.msg, e.mark.line + 1);
    }

    auto need = [&](const char* key) {
        if (!root[key])
            throw ParseError(file.string() + ": adapter is missing key '" +
                             std::string(key) + "'");
        return root[key].as<std::string>();
    };

    Adapter a;
    a.name = need("name");
    a.header_template = need("header_template");
    a.submit_command = need("submit_command");
    a.status_command = need("status_command");
    a.cancel_command = need("cancel_command");
    a.jobid_pattern = need("jobid_pattern");
    a.status_pattern = need("status_pattern");
    a.supports_packing = root["supports_packing"] && root["supports_packing"].as<bool>();
    if (root["status_skip_pattern"])
        a.status_skip_pattern = root["status_skip_pattern"].as<std::string>();
    if (root["no_such_job_pattern"])
        a.no_such_job_pattern = root["no_such_job_pattern"].as<std::string>();
    if (root["state_map"])
        for (const auto& kv : root["state_map"])
            a.state_map[kv.first.as<std::string>()] = kv.second.as<std::string>();

    compile_pattern(a.jobid_pattern, "jobid");
    compile_pattern(a.status_pattern, "status");
    if (!a.status_skip_pattern.empty()) compile_pattern(a.status_skip_pattern, "status-skip");

    // Self-test: the adapter's own sample submit output must parse.
    if (!fixtures_dir.empty()) {
        auto sample_path = fixtures_dir / (a.name + "_submit.out");
        if (std::filesystem::exists(sample_path)) {
            std::ifstream in(sample_path);
            std::stringstream ss;
            ss << in.rdbuf();
            std::smatch m;
            std::string sample = ss.str();
            if (!std::regex_search(sample, m, std::regex(a.jobid_pattern)) ||
                m.size() < 2 || m[1].str().empty())
                throw ParseError("adapter '" + a.name +
                                 "' fails its own submit-output fixture " +
                                 sample_path.string());
        }
    }
    return a;
}

void AdapterRegistry::load_dir(const std::filesystem::path& adapters_dir,
                               const std::filesystem::path& fixtures_dir) {
    if (!std::filesystem::is_directory(adapters_dir))
        throw MissingFileError("adapters directory not found: " + adapters_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(adapters_dir))
        if (entry.path().extension() == ".yml" || entry.path().extension() == ".yaml")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(load_adapter(f, fixtures_dir));
}

void AdapterRegistry::add(Adapter adapter) {
    adapters_[adapter.name] = std::move(adapter);
}

const Adapter& AdapterRegistry::get(const std::string& name) const {
    auto it = adapters_.find(name);
    if (it == adapters_.end()) {
        std::string known;
        for (const auto& [n, _] : adapters_) known += " " + n;
        throw UsageError("unknown scheduler adapter '" + name + "' (available:" + known + ")");
    }
    return it->second;
}

bool AdapterRegistry::contains(const std::string& name) const {
    return adapters_.count(name) > 0;
}

std::vector<std::string> AdapterRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : adapters_) out.push_back(n);
    return out;
}

int nodes_for(int cores, int corespernode) {
    if (cores < 1) throw ValidationError("cores must be >= 1");
    if (corespernode < 1) throw ValidationError("corespernode must be >= 1");
    return (cores + corespernode - 1) / corespernode;
}

templates::RenderedScript generate_script(const JobSpec& spec, const Adapter& adapter,
                                          const config::ResolvedContext& ctx,
                                          const templates::TemplateStore& store) {
    spec.validate();
    const Value* cpn = ctx.find("corespernode");
    if (!cpn)
        throw MissingContextKeyError(
            "corespernode is undefined for this machine; set it in the machines file");
    int corespernode = parse_positive_int(to_display(*cpn), "corespernode");
    int nodes = nodes_for(spec.cores, corespernode);

    auto render_ctx = ctx.with_all(
        {
            {"cores", std::to_string(spec.cores)},
            {"nodes", std::to_string(nodes)},
            {"wall_time", format_hhmmss(spec.wall_time)},
            {"wall_time_seconds", std::to_string(spec.wall_time.count())},
            {"application", spec.application},
            {"config", spec.config_name},
            {"replicas", std::to_string(spec.replica_count)},
        },
        "job");
    if (!render_ctx.contains("job_name"))
        render_ctx = render_ctx.with("job_name", spec.config_name, "job");
    for (const auto& [k, v] : spec.extra_vars) render_ctx = render_ctx.with(k, v, "job");

    templates::Template header = store.load(adapter.header_template);
    templates::Template body = store.load(spec.application);

    if (spec.replica_count == 1)
        return templates::compose(header, std::span(&body, 1), render_ctx);

    // Packed job: the body is repeated once per replica, each stanza running
    // in its own RUNS/<config>_<i> subdirectory, backgrounded, then a single
    // wait reaps them all.
    std::vector<int> per_cores(spec.replica_count, spec.cores / spec.replica_count);
    if (auto it = spec.extra_vars.find("packed_replica_cores"); it != spec.extra_vars.end()) {
        per_cores.clear();
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ','))
            per_cores.push_back(parse_positive_int(tok, "packed replica cores"));
        if (static_cast<int>(per_cores.size()) != spec.replica_count)
            throw ValidationError("packed replica core list does not match replica count");
    }

    templates::RenderedScript out = templates::render(header, render_ctx);
    out.templates_used.push_back(body.name);
    for (int i = 1; i <= spec.replica_count; ++i) {
        std::string rdir = replica_dir_name(spec.config_name, i);
        auto replica_ctx = render_ctx.with_all(
            {
                {"replica_index", std::to_string(i)},
                {"replica_dir", rdir},
                {"cores", std::to_string(per_cores[i - 1])},
            },
            "replica");
        auto part = templates::render(body, replica_ctx);
        out.inputs_used.insert(part.inputs_used.begin(), part.inputs_used.end());
        out.text += "\n# replica " + std::to_string(i) + "\n(\ncd '" + rdir + "'\n" +
                    part.text + "\n) &\n";
    }
    out.text += "\nwait\n";
    return out;
}

JobHandle submit(transport::Session& session, const Adapter& adapter,
                 const std::string& script_remote_path, const std::string& machine,
                 const std::string& results_dir, Clock& clock) {
    std::string cmd = render_pattern(adapter.submit_command, adapter.name + " submit",
                                     {{"script", script_remote_path}});
    if (!results_dir.empty()) cmd = "cd " + results_dir + " && " + cmd;

    auto r = session.exec(cmd);
    if (r.exit_code != 0)
        throw SubmitRejectedError("submit on " + machine + " exited " +
                                  std::to_string(r.exit_code) + ": " + r.err);

    std::smatch m;
    std::regex re(adapter.jobid_pattern);
    if (!std::regex_search(r.out, m, re) || m.size() < 2 || m[1].str().empty())
        throw JobIdParseFailedError("cannot find a job id in submit output: \"" + r.out +
                                    "\"");
    return JobHandle{m[1].str(), machine, results_dir, clock.now()};
}

std::vector<JobStatus> status(transport::Session& session, const Adapter& adapter,
                              const config::ResolvedContext& ctx,
                              const std::optional<std::string>& filter) {
    std::map<std::string, Value> vars{{"filter", filter.value_or("")}};
    vars["username"] = ctx.contains("username") ? ctx.get_string("username") : "";
    std::string cmd = render_pattern(adapter.status_command, adapter.name + " status", vars);

    auto r = session.exec(cmd);
    if (r.exit_code != 0)
        throw SchedulerError("status-failed",
                             "status command exited " + std::to_string(r.exit_code) + ": " +
                                 r.err);

    std::regex line_re(adapter.status_pattern);
    std::optional<std::regex> skip_re;
    if (!adapter.status_skip_pattern.empty()) skip_re = std::regex(adapter.status_skip_pattern);

    std::vector<JobStatus> out;
    std::istringstream in(r.out);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t") == std::string::npos) continue;
        if (skip_re && std::regex_search(line, *skip_re)) continue;
        JobStatus st;
        st.raw_line = line;
        std::smatch m;
        if (std::regex_search(line, m, line_re) && m.size() >= 3) {
            st.jobid = m[1].str();
            auto it = adapter.state_map.find(m[2].str());
            if (it != adapter.state_map.end()) {
                const std::string& s = it->second;
                if (s == "queued") st.state = JobState::queued;
                else if (s == "running") st.state = JobState::running;
                else if (s == "completed") st.state = JobState::completed;
                else if (s == "failed") st.state = JobState::failed;
                else if (s == "cancelled") st.state = JobState::cancelled;
            }
        }
        if (filter && !filter->empty()) {
            if (st.jobid != *filter && line.find(*filter) == std::string::npos) continue;
        }
        out.push_back(std::move(st));
    }
    return out;
}

void cancel(transport::Session& session, const Adapter& adapter, const std::string& jobid) {
    std::string cmd =
        render_pattern(adapter.cancel_command, adapter.name + " cancel", {{"jobid", jobid}});
    auto r = session.exec(cmd);
    if (r.exit_code == 0) return;
    if (!adapter.no_such_job_pattern.empty() &&
        std::regex_search(r.err, std::regex(adapter.no_such_job_pattern)))
        throw NoSuchJobError("no job '" + jobid + "' on the target machine");
    throw SchedulerError("cancel-failed", "cancel of " + jobid + " exited " +
                                              std::to_string(r.exit_code) + ": " + r.err);
}

std::optional<JobSpec> pack(std::span<const JobSpec> specs, const Adapter& adapter) {
    if (specs.empty()) throw ValidationError("pack requires at least one job spec");
    for (const auto& s : specs) s.validate();
    for (const auto& s : specs) {
        if (s.application != specs.front().application)
            throw HeterogeneousSpecsError("cannot pack different applications: '" +
                                          specs.front().application + "' vs '" +
                                          s.application + "'");
        if (s.wall_time != specs.front().wall_time)
            throw HeterogeneousSpecsError("cannot pack different wall times");
    }
    if (!adapter.supports_packing) return std::nullopt;
    if (specs.size() == 1) return specs.front(); // identity, nothing to pack

    JobSpec packed = specs.front();
    packed.replica_count = static_cast<int>(specs.size());
    packed.cores = 0;
    std::string core_list;
    for (const auto& s : specs) {
        packed.cores += s.cores;
        if (!core_list.empty()) core_list += ',';
        core_list += std::to_string(s.cores);
    }
    packed.extra_vars["packed_replica_cores"] = core_list;
    return packed;
}

std::string replica_dir_name(const std::string& config_name, int replica_index) {
    return "RUNS/" + config_name + "_" + std::to_string(replica_index);
}

} // namespace fabkit::scheduler
