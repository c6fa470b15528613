#ifndef FABKIT_CONFIG_HPP
#define FABKIT_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fabkit/value.hpp"

namespace fabkit::config {

// Applicability level of a customization. Precedence at resolve time is
// general < machine < machine_user < domain < problem, with command-line
// overrides above everything.
enum class Scope { general, machine, machine_user, domain, problem };

const char* scope_name(Scope s);

struct ConfigLayer {
    Scope scope = Scope::general;
    // Nested maps are flattened to dotted keys at load time, so the machines
    // file entry `exa: {remote: host}` becomes {"exa.remote": "host"}.
    std::map<std::string, Value> entries;
    std::string source; // file path, "cli", or "builtin"
};

// One machine's section of a machine-scoped layer, keys unqualified.
struct MachineConfig {
    std::string name;
    std::map<std::string, Value> entries;
};

// The flattened variable space driving templates and commands for one
// invocation. Immutable after resolve; safe to share across threads.
class ResolvedContext {
public:
    ResolvedContext() = default;

    const Value& get(const std::string& key) const;       // throws MissingKeyError
    std::string get_string(const std::string& key) const; // display form
    const Value* find(const std::string& key) const;
    bool contains(const std::string& key) const { return find(key) != nullptr; }

    // Winning layer for a key, e.g. "machine" or "cli". Throws MissingKeyError.
    const std::string& provenance(const std::string& key) const;

    const std::map<std::string, Value>& variables() const { return variables_; }
    const std::map<std::string, std::string>& provenance_map() const { return provenance_; }

    // Labels of the layers that were consulted, for error messages.
    const std::vector<std::string>& layers_searched() const { return layers_searched_; }

    // Copy with one variable added or replaced; keeps contexts immutable in
    // place while letting callers inject derived variables.
    ResolvedContext with(const std::string& key, Value value,
                         const std::string& source = "derived") const;
    ResolvedContext with_all(const std::map<std::string, Value>& values,
                             const std::string& source = "derived") const;

    bool same_variables(const ResolvedContext& other) const {
        return variables_ == other.variables_;
    }

    // Used by resolve() and snapshot loading.
    void insert(const std::string& key, Value value, const std::string& layer_label);
    void set_layers_searched(std::vector<std::string> labels) {
        layers_searched_ = std::move(labels);
    }

private:
    std::map<std::string, Value> variables_;
    std::map<std::string, std::string> provenance_;
    std::vector<std::string> layers_searched_;
};

// Load one structured key/value file as a layer. Missing file is fatal only
// for the machine-defaults scope; elsewhere it yields an empty layer.
// Unknown keys pass through verbatim.
ConfigLayer load_layer(const std::filesystem::path& path, Scope scope);

ConfigLayer layer_from_map(std::map<std::string, Value> entries, Scope scope,
                           std::string source);

// Built-in lowest-precedence defaults shipped with the tool.
ConfigLayer builtin_general_layer();

// Machine names present in a machine-scoped layer.
std::vector<std::string> machines_in(const ConfigLayer& layer);

// Extract one machine's section (unqualified keys) from machine-scoped layers.
std::optional<MachineConfig> machine_config(std::span<const ConfigLayer> layers,
                                            const std::string& machine);

// Merge layers in precedence order. Machine-scoped layers contribute only the
// selected machine's section, promoted to top-level keys. Later layers
// overwrite same-named keys wholesale (no deep merge). An empty machine name
// skips machine selection entirely.
ResolvedContext resolve(std::span<const ConfigLayer> layers, const std::string& machine,
                        const std::map<std::string, Value>& cli_overrides);

} // namespace fabkit::config

#endif
