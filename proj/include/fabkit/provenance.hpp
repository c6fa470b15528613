#ifndef FABKIT_PROVENANCE_HPP
#define FABKIT_PROVENANCE_HPP

#include <chrono>
#include <filesystem>
#include <string>

#include "fabkit/config.hpp"
#include "fabkit/transport.hpp"

namespace fabkit::provenance {

// Everything needed to repeat a submission: the resolved variable space, the
// remote environment at submission time, the exact script that was staged,
// and the name the run directory was given.
struct ProvenanceRecord {
    std::string context_snapshot; // env.yml text
    std::string remote_env;       // verbatim remote environment listing
    std::string script_copy;      // staged submission script, byte-identical
    std::string results_dir_name;
    std::chrono::system_clock::time_point created_at;
    std::string tool_version;
};

// File names used inside every results directory.
inline constexpr const char* kContextSnapshotFile = "env.yml";
inline constexpr const char* kRemoteEnvFile = "remote_env.log";
inline constexpr const char* kScriptFile = "job.sh";

// Variables whose names carry credential material are written redacted.
bool is_secret_key(const std::string& key);
inline constexpr const char* kRedacted = "[REDACTED]";

// Deterministic YAML serialization of a context: every variable with its
// winning layer, sorted by key. Two snapshots of one context are
// byte-identical.
std::string serialize_context(const config::ResolvedContext& ctx);
config::ResolvedContext parse_context(const std::string& yaml_text);

// Writes env.yml under dest_dir; returns the file path.
std::filesystem::path snapshot_context(const config::ResolvedContext& ctx,
                                       const std::filesystem::path& dest_dir);
config::ResolvedContext load_snapshot(const std::filesystem::path& file);

// The remote environment, captured verbatim (no sorting, no filtering) so
// that two captures diff line-by-line.
std::string remote_env_listing(transport::Session& session);
std::filesystem::path capture_remote_env(transport::Session& session,
                                         const std::filesystem::path& dest_dir);

// UTC basic-ISO timestamp, "YYYYMMDDThhmmss": sortable and filesystem-safe.
std::string format_timestamp(std::chrono::system_clock::time_point t);

// Renders a results-directory name from a "{variable}" pattern. Builtins
// {timestamp}, {config}, {machine}, {cores}, {code_version} are injected;
// any context variable is available. Variable values are made
// filesystem-safe (path separators and whitespace become underscores).
// Pure: fixed (pattern, context, now) gives a fixed name.
std::string name_results_dir(const std::string& pattern, const config::ResolvedContext& ctx,
                             std::chrono::system_clock::time_point now);

} // namespace fabkit::provenance

#endif
