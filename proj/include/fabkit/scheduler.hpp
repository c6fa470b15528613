#ifndef FABKIT_SCHEDULER_HPP
#define FABKIT_SCHEDULER_HPP

#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fabkit/clock.hpp"
#include "fabkit/config.hpp"
#include "fabkit/templates.hpp"
#include "fabkit/transport.hpp"

namespace fabkit::scheduler {

struct JobSpec {
    std::string config_name;  // input-directory name
    std::string application;  // body-template name
    int cores = 1;
    std::chrono::seconds wall_time{3600};
    int replica_count = 1;
    std::map<std::string, std::string> extra_vars;

    void validate() const; // cores >= 1, replica_count >= 1, wall_time > 0
};

std::chrono::seconds parse_wall_time(const std::string& text); // "HH:MM:SS" or seconds
std::string format_hhmmss(std::chrono::seconds d);

// A batch system described as data: a header template, command patterns and
// parse rules. Users add schedulers by dropping a definition file under
// adapters/, no recompilation involved.
struct Adapter {
    std::string name;
    std::string header_template;
    std::string submit_command;   // $script available
    std::string status_command;   // $username / $filter available
    std::string cancel_command;   // $jobid available
    bool supports_packing = false;
    std::string jobid_pattern;        // single capture group over submit stdout
    std::string status_pattern;       // two capture groups: jobid, state code
    std::map<std::string, std::string> state_map; // state code -> canonical state
    std::string status_skip_pattern;  // optional: header/noise lines to drop
    std::string no_such_job_pattern;  // optional: cancel stderr meaning unknown jobid
};

// Loads one adapter definition; validates that the patterns compile and that
// the adapter's shipped sample submit output yields a nonempty jobid.
Adapter load_adapter(const std::filesystem::path& file,
                     const std::filesystem::path& fixtures_dir = {});

class AdapterRegistry {
public:
    void load_dir(const std::filesystem::path& adapters_dir,
                  const std::filesystem::path& fixtures_dir = {});
    void add(Adapter adapter);
    const Adapter& get(const std::string& name) const; // throws UsageError
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Adapter> adapters_;
};

enum class JobState { queued, running, completed, failed, cancelled, unknown };
const char* job_state_name(JobState s);

struct JobHandle {
    std::string jobid;
    std::string machine;
    std::string results_dir; // absolute remote path
    std::chrono::system_clock::time_point submitted_at;
};

struct JobStatus {
    std::string jobid;
    JobState state = JobState::unknown;
    std::string raw_line;
};

// ceil(cores / corespernode); both strictly positive.
int nodes_for(int cores, int corespernode);

// Header + application body composed into one submission script. Node count
// and wall-time variables are derived from the spec and injected before
// rendering; output is deterministic for a given (spec, adapter, context).
templates::RenderedScript generate_script(const JobSpec& spec, const Adapter& adapter,
                                          const config::ResolvedContext& ctx,
                                          const templates::TemplateStore& store);

JobHandle submit(transport::Session& session, const Adapter& adapter,
                 const std::string& script_remote_path, const std::string& machine,
                 const std::string& results_dir, Clock& clock);

std::vector<JobStatus> status(transport::Session& session, const Adapter& adapter,
                              const config::ResolvedContext& ctx,
                              const std::optional<std::string>& filter = std::nullopt);

void cancel(transport::Session& session, const Adapter& adapter, const std::string& jobid);

// Merge replica specs into one submission when the adapter supports packing;
// nullopt means the caller falls back to one submission per replica. Specs
// must share application and wall time. A single spec packs to itself.
std::optional<JobSpec> pack(std::span<const JobSpec> specs, const Adapter& adapter);

// Replica subdirectory convention inside a packed job's results dir.
std::string replica_dir_name(const std::string& config_name, int replica_index);

} // namespace fabkit::scheduler

#endif
