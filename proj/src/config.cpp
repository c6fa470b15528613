#include "fabkit/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fabkit/errors.hpp"
#include "fabkit/version.hpp"

namespace fabkit::config {

namespace {

bool key_is_valid(const std::string& key) {
    if (key.empty()) return false;
    return std::none_of(key.begin(), key.end(),
                        [](unsigned char c) { return std::isspace(c); });
}

std::string scalar_of(const YAML::Node& node) {
    return node.Scalar();
}

// Non-scalar list elements are preserved verbatim as single-line flow YAML.
std::string flow_string(const YAML::Node& node) {
    YAML::Emitter em;
    em.SetMapFormat(YAML::Flow);
    em.SetSeqFormat(YAML::Flow);
    em << node;
    return em.c_str();
}

void flatten(const YAML::Node& node, const std::string& prefix,
             std::map<std::string, Value>& out, const std::string& source) {
    for (const auto& kv : node) {
        std::string key = kv.first.Scalar();
        if (!key_is_valid(key))
            throw ParseError("invalid key '" + key + "' in " + source +
                             " (keys must be non-empty, no whitespace)");
        std::string full = prefix.empty() ? key : prefix + "." + key;
        const YAML::Node& v = kv.second;
        if (v.IsMap()) {
            flatten(v, full, out, source);
        } else if (v.IsSequence()) {
            std::vector<std::string> items;
            items.reserve(v.size());
            for (const auto& item : v)
                items.push_back(item.IsScalar() ? scalar_of(item) : flow_string(item));
            out[full] = std::move(items);
        } else if (v.IsNull()) {
            out[full] = std::string{};
        } else {
            out[full] = scalar_of(v);
        }
    }
}

} // namespace

const char* scope_name(Scope s) {
    switch (s) {
        case Scope::general: return "general";
        case Scope::machine: return "machine";
        case Scope::machine_user: return "machine_user";
        case Scope::domain: return "domain";
        case Scope::problem: return "problem";
    }
    return "?";
}

ConfigLayer load_layer(const std::filesystem::path& path, Scope scope) {
    ConfigLayer layer;
    layer.scope = scope;
    layer.source = path.string();

    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        if (scope == Scope::machine)
            throw MissingFileError("machine defaults file not found: " + path.string());
        return layer; // absent user/domain/problem file is an empty layer
    }

    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::ParserException& e) {
        throw ParseError(path.string() + ": " + e.msg, e.mark.line + 1);
    } catch (const YAML::Exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    if (root.IsNull() || !root.IsDefined()) return layer;
    if (!root.IsMap())
        throw ParseError(path.string() + ": top level must be a key/value map");

    flatten(root, "", layer.entries, path.string());
    return layer;
}

ConfigLayer layer_from_map(std::map<std::string, Value> entries, Scope scope,
                           std::string source) {
    for (const auto& [k, _] : entries)
        if (!key_is_valid(k))
            throw ParseError("invalid key '" + k + "' in " + source +
                             " (keys must be non-empty, no whitespace)");
    return ConfigLayer{scope, std::move(entries), std::move(source)};
}

ConfigLayer builtin_general_layer() {
    ConfigLayer layer;
    layer.scope = Scope::general;
    layer.source = "builtin";
    layer.entries = {
        {"cores", std::string("1")},
        {"replicas", std::string("1")},
        {"job_wall_time", std::string("1:00:00")},
        {"results_pattern", std::string("{config}_{machine}_{cores}_{timestamp}")},
        {"tool_version", std::string(FABKIT_VERSION)},
        {"local_workdir", std::string(".")},
    };
    return layer;
}

std::vector<std::string> machines_in(const ConfigLayer& layer) {
    std::vector<std::string> names;
    for (const auto& [key, _] : layer.entries) {
        auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        std::string name = key.substr(0, dot);
        if (names.empty() || names.back() != name) names.push_back(name);
    }
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

std::optional<MachineConfig> machine_config(std::span<const ConfigLayer> layers,
                                            const std::string& machine) {
    MachineConfig mc;
    mc.name = machine;
    bool found = false;
    const std::string prefix = machine + ".";
    for (const auto& layer : layers) {
        if (layer.scope != Scope::machine && layer.scope != Scope::machine_user) continue;
        for (const auto& [key, value] : layer.entries) {
            if (key.rfind(prefix, 0) == 0) {
                mc.entries[key.substr(prefix.size())] = value;
                found = true;
            }
        }
    }
    if (!found) return std::nullopt;
    return mc;
}

const Value& ResolvedContext::get(const std::string& key) const {
    if (const Value* v = find(key)) return *v;
    std::string searched;
    for (std::size_t i = 0; i < layers_searched_.size(); ++i) {
        if (i) searched += ", ";
        searched += layers_searched_[i];
    }
    if (searched.empty()) searched = "none";
    throw MissingKeyError(key, searched);
}

std::string ResolvedContext::get_string(const std::string& key) const {
    return to_display(get(key));
}

const Value* ResolvedContext::find(const std::string& key) const {
    auto it = variables_.find(key);
    return it == variables_.end() ? nullptr : &it->second;
}

const std::string& ResolvedContext::provenance(const std::string& key) const {
    auto it = provenance_.find(key);
    if (it == provenance_.end()) get(key); // throws MissingKeyError
    return it->second;
}

void ResolvedContext::insert(const std::string& key, Value value,
                             const std::string& layer_label) {
    variables_[key] = std::move(value);
    provenance_[key] = layer_label;
}

ResolvedContext ResolvedContext::with(const std::string& key, Value value,
                                      const std::string& source) const {
    ResolvedContext out = *this;
    out.insert(key, std::move(value), source);
    return out;
}

ResolvedContext ResolvedContext::with_all(const std::map<std::string, Value>& values,
                                          const std::string& source) const {
    ResolvedContext out = *this;
    for (const auto& [k, v] : values) out.insert(k, v, source);
    return out;
}

ResolvedContext resolve(std::span<const ConfigLayer> layers, const std::string& machine,
                        const std::map<std::string, Value>& cli_overrides) {
    bool has_general =
        std::any_of(layers.begin(), layers.end(),
                    [](const ConfigLayer& l) { return l.scope == Scope::general; });
    if (!has_general)
        throw ValidationError("resolve requires at least one general-scope layer");

    if (!machine.empty()) {
        bool known = false;
        const std::string prefix = machine + ".";
        for (const auto& layer : layers) {
            if (layer.scope != Scope::machine) continue;
            for (const auto& [key, _] : layer.entries)
                if (key.rfind(prefix, 0) == 0) { known = true; break; }
            if (known) break;
        }
        if (!known)
            throw UnknownMachineError("machine '" + machine +
                                      "' not defined in any machine-defaults layer");
    }

    // Stable sort by scope keeps registration order among equal-scope layers
    // (several domain plugins may each contribute one).
    std::vector<const ConfigLayer*> ordered;
    ordered.reserve(layers.size());
    for (const auto& l : layers) ordered.push_back(&l);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ConfigLayer* a, const ConfigLayer* b) {
                         return static_cast<int>(a->scope) < static_cast<int>(b->scope);
                     });

    ResolvedContext ctx;
    std::vector<std::string> labels;
    for (const ConfigLayer* layer : ordered) {
        const char* label = scope_name(layer->scope);
        labels.emplace_back(label);
        const bool machine_scoped =
            layer->scope == Scope::machine || layer->scope == Scope::machine_user;
        if (machine_scoped) {
            if (machine.empty()) continue;
            const std::string prefix = machine + ".";
            for (const auto& [key, value] : layer->entries)
                if (key.rfind(prefix, 0) == 0)
                    ctx.insert(key.substr(prefix.size()), value, label);
        } else {
            for (const auto& [key, value] : layer->entries)
                ctx.insert(key, value, label);
        }
    }

    for (const auto& [key, value] : cli_overrides)
        ctx.insert(key, value, "cli");
    labels.emplace_back("cli");

    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    ctx.set_layers_searched(std::move(labels));
    return ctx;
}

} // namespace fabkit::config
