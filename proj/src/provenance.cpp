#include "fabkit/provenance.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fabkit/errors.hpp"
#include "fabkit/version.hpp"

namespace fabkit::provenance {

namespace fs = std::filesystem;

bool is_secret_key(const std::string& key) {
    static const char* kDenied[] = {"key", "token", "password", "passwd", "secret"};
    std::string segment;
    auto flush = [&]() {
        std::string low;
        for (char c : segment) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        segment.clear();
        return std::any_of(std::begin(kDenied), std::end(kDenied),
                           [&](const char* d) { return low == d; });
    };
    for (char c : key) {
        if (c == '_' || c == '-' || c == '.') {
            if (flush()) return true;
        } else {
            segment += c;
        }
    }
    return flush();
}

std::string serialize_context(const config::ResolvedContext& ctx) {
    YAML::Emitter em;
    em.SetIndent(2);
    em << YAML::BeginMap;
    em << YAML::Key << "variables" << YAML::Value << YAML::BeginMap;
    for (const auto& [key, value] : ctx.variables()) {
        em << YAML::Key << key << YAML::Value;
        if (is_secret_key(key)) {
            em << kRedacted;
        } else if (const auto* s = std::get_if<std::string>(&value)) {
            em << *s;
        } else {
            em << YAML::Flow << std::get<std::vector<std::string>>(value);
        }
    }
    em << YAML::EndMap;
    em << YAML::Key << "provenance" << YAML::Value << YAML::BeginMap;
    for (const auto& [key, layer] : ctx.provenance_map())
        em << YAML::Key << key << YAML::Value << layer;
    em << YAML::EndMap;
    em << YAML::EndMap;
    std::string out = em.c_str();
    out += '\n';
    return out;
}

config::ResolvedContext parse_context(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(std::string("context snapshot: ") + e.msg, e.mark.line + 1);
    }
    if (!root["variables"])
        throw ParseError("context snapshot has no 'variables' section");

    config::ResolvedContext ctx;
    const YAML::Node& prov = root["provenance"];
    for (const auto& kv : root["variables"]) {
        std::string key = kv.first.as<std::string>();
        std::string layer = prov && prov[key] ? prov[key].as<std::string>() : "snapshot";
        if (kv.second.IsSequence()) {
            std::vector<std::string> items;
            for (const auto& item : kv.second) items.push_back(item.as<std::string>());
            ctx.insert(key, std::move(items), layer);
        } else {
            ctx.insert(key, kv.second.IsNull() ? std::string{} : kv.second.as<std::string>(),
                       layer);
        }
    }
    ctx.set_layers_searched({"snapshot"});
    return ctx;
}

fs::path snapshot_context(const config::ResolvedContext& ctx, const fs::path& dest_dir) {
    std::error_code ec;
    fs::create_directories(dest_dir, ec);
    fs::path file = dest_dir / kContextSnapshotFile;
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write context snapshot: " + file.string());
    out << serialize_context(ctx);
    return file;
}

config::ResolvedContext load_snapshot(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MissingFileError("context snapshot not found: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_context(ss.str());
}

std::string remote_env_listing(transport::Session& session) {
    auto r = session.exec("printenv");
    if (r.exit_code != 0)
        throw TransportError("env-capture-failed",
                             "printenv on " + session.endpoint().host + " exited " +
                                 std::to_string(r.exit_code) + ": " + r.err);
    return r.out;
}

fs::path capture_remote_env(transport::Session& session, const fs::path& dest_dir) {
    std::string listing = remote_env_listing(session);
    std::error_code ec;
    fs::create_directories(dest_dir, ec);
    fs::path file = dest_dir / kRemoteEnvFile;
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write remote env capture: " + file.string());
    out << listing;
    return file;
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
    std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
    return buf;
}

namespace {

std::string sanitize(const std::string& value) {
    std::string out;
    for (char c : value) {
        if (c == '/' || c == '\\' || std::isspace(static_cast<unsigned char>(c)))
            out += '_';
        else
            out += c;
    }
    return out;
}

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace

std::string name_results_dir(const std::string& pattern, const config::ResolvedContext& ctx,
                             std::chrono::system_clock::time_point now) {
    auto lookup = [&](const std::string& name) -> const Value* {
        return ctx.find(name);
    };

    std::string out;
    std::vector<std::string> missing;
    std::size_t i = 0;
    while (i < pattern.size()) {
        char c = pattern[i];
        if (c != '{') {
            out += c;
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        std::string name;
        if (j < pattern.size() && name_start(pattern[j]))
            while (j < pattern.size() && name_char(pattern[j])) name += pattern[j++];
        if (name.empty() || j >= pattern.size() || pattern[j] != '}') {
            out += c; // stray brace stays literal
            ++i;
            continue;
        }
        i = j + 1;

        if (name == "timestamp") {
            out += format_timestamp(now);
        } else if (name == "code_version") {
            if (const Value* v = lookup("code_version")) out += sanitize(to_display(*v));
            else if (const Value* t = lookup("tool_version")) out += sanitize(to_display(*t));
            else out += FABKIT_VERSION;
        } else if (const Value* v = lookup(name)) {
            out += sanitize(to_display(*v));
        } else {
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw UnresolvedPlaceholderError(missing, "results-directory pattern");
    }
    return out;
}

} // namespace fabkit::provenance
