#ifndef FABKIT_TEMPLATES_HPP
#define FABKIT_TEMPLATES_HPP

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fabkit/config.hpp"

namespace fabkit::templates {

enum class TemplateKind { scheduler_header, application_body, env_setup, generic };

// Text with $name / ${name} placeholders; "$$" escapes a literal dollar.
// Placeholder names match [A-Za-z_][A-Za-z0-9_]*.
struct Template {
    std::string name;
    std::string body;
    TemplateKind kind = TemplateKind::generic;
};

struct RenderedScript {
    std::string text;
    std::set<std::string> inputs_used;        // variable names consumed, nested included
    std::vector<std::string> templates_used;  // composition order
};

// Names of placeholders appearing in the template body (static scan, no
// context needed). "$$" is the escape for a literal "$", not a placeholder.
std::set<std::string> scan_placeholders(const Template& t);

// Substitute every placeholder from the context. References inside variable
// values expand recursively up to depth 8; deeper chains or true cycles raise
// CyclicReferenceError. All missing names are reported in one
// UnresolvedPlaceholderError. Output newlines are normalized to LF.
RenderedScript render(const Template& t, const config::ResolvedContext& ctx);

// Scheduler header plus application bodies, joined with single newlines, so
// any (scheduler, application) pair works without a pairwise template.
RenderedScript compose(const Template& header, std::span<const Template> bodies,
                       const config::ResolvedContext& ctx);

// Plain-text template files keyed by filename, first directory wins. Plugins
// append their own directories after the core one.
class TemplateStore {
public:
    TemplateStore() = default;
    explicit TemplateStore(std::vector<std::filesystem::path> dirs) : dirs_(std::move(dirs)) {}

    void add_dir(const std::filesystem::path& dir) { dirs_.push_back(dir); }
    const std::vector<std::filesystem::path>& dirs() const { return dirs_; }

    bool exists(const std::string& name) const;
    Template load(const std::string& name) const; // throws MissingFileError
    std::vector<std::string> names() const;

private:
    std::vector<std::filesystem::path> dirs_;
};

// Kind inferred from the filename convention: "*_header" is a scheduler
// header, "*_env" an environment-setup block, everything else a body.
TemplateKind kind_from_name(const std::string& name);

} // namespace fabkit::templates

#endif
