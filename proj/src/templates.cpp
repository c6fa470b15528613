#include "fabkit/templates.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fabkit/errors.hpp"

namespace fabkit::templates {

namespace {

constexpr int kMaxExpansionDepth = 8;

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string normalize_newlines(std::string s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            if (i + 1 < s.size() && s[i + 1] == '\n') continue;
            out += '\n';
        } else {
            out += s[i];
        }
    }
    return out;
}

struct Segment {
    enum Kind { literal, placeholder } kind;
    std::string text; // literal text or placeholder name
};

// One-pass tokenizer implementing the $name / ${name} / $$ grammar. A "$"
// followed by anything else stays literal.
std::vector<Segment> tokenize(const std::string& body) {
    std::vector<Segment> segs;
    std::string lit;
    std::size_t i = 0;
    while (i < body.size()) {
        char c = body[i];
        if (c != '$') {
            lit += c;
            ++i;
            continue;
        }
        if (i + 1 < body.size() && body[i + 1] == '$') {
            lit += '$';
            i += 2;
            continue;
        }
        if (i + 1 < body.size() && body[i + 1] == '{') {
            std::size_t j = i + 2;
            std::string name;
            if (j < body.size() && name_start(body[j])) {
                while (j < body.size() && name_char(body[j])) name += body[j++];
            }
            if (!name.empty() && j < body.size() && body[j] == '}') {
                if (!lit.empty()) { segs.push_back({Segment::literal, lit}); lit.clear(); }
                segs.push_back({Segment::placeholder, name});
                i = j + 1;
                continue;
            }
            lit += c; // malformed ${...} stays literal
            ++i;
            continue;
        }
        if (i + 1 < body.size() && name_start(body[i + 1])) {
            std::size_t j = i + 1;
            std::string name;
            while (j < body.size() && name_char(body[j])) name += body[j++];
            if (!lit.empty()) { segs.push_back({Segment::literal, lit}); lit.clear(); }
            segs.push_back({Segment::placeholder, name});
            i = j;
            continue;
        }
        lit += c;
        ++i;
    }
    if (!lit.empty()) segs.push_back({Segment::literal, lit});
    return segs;
}

struct Expander {
    const config::ResolvedContext& ctx;
    std::set<std::string> used;
    std::set<std::string> missing;
    std::vector<std::string> stack; // active expansion chain, for cycle reports

    std::string expand(const std::string& text, int depth) {
        std::string out;
        for (const auto& seg : tokenize(text)) {
            if (seg.kind == Segment::literal) {
                out += seg.text;
                continue;
            }
            const auto& name = seg.text;
            const Value* v = ctx.find(name);
            if (!v) {
                missing.insert(name);
                continue;
            }
            if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
                std::string chain;
                for (const auto& n : stack) chain += n + " -> ";
                throw CyclicReferenceError("variable '" + name +
                                           "' references itself: " + chain + name);
            }
            if (depth + 1 > kMaxExpansionDepth)
                throw CyclicReferenceError(
                    "expansion of '" + name + "' exceeds depth " +
                    std::to_string(kMaxExpansionDepth));
            used.insert(name);
            stack.push_back(name);
            out += expand(to_display(*v), depth + 1);
            stack.pop_back();
        }
        return out;
    }
};

} // namespace

std::set<std::string> scan_placeholders(const Template& t) {
    std::set<std::string> names;
    for (const auto& seg : tokenize(t.body))
        if (seg.kind == Segment::placeholder) names.insert(seg.text);
    return names;
}

RenderedScript render(const Template& t, const config::ResolvedContext& ctx) {
    Expander ex{ctx, {}, {}, {}};
    std::string text = ex.expand(normalize_newlines(t.body), 0);
    if (!ex.missing.empty())
        throw UnresolvedPlaceholderError(
            std::vector<std::string>(ex.missing.begin(), ex.missing.end()),
            "template '" + t.name + "'");
    RenderedScript out;
    out.text = std::move(text);
    out.inputs_used = std::move(ex.used);
    out.templates_used = {t.name};
    return out;
}

RenderedScript compose(const Template& header, std::span<const Template> bodies,
                       const config::ResolvedContext& ctx) {
    if (header.kind != TemplateKind::scheduler_header)
        throw ValidationError("compose requires a scheduler_header template, got '" +
                              header.name + "'");
    if (bodies.empty())
        throw ValidationError("compose requires at least one body template");

    // Render errors propagate tagged with the failing template's name.
    auto render_part = [&](const Template& t, const char* role) {
        try {
            return render(t, ctx);
        } catch (const UnresolvedPlaceholderError& e) {
            throw UnresolvedPlaceholderError(e.names(),
                                             std::string(role) + " template '" + t.name + "'");
        } catch (const CyclicReferenceError& e) {
            throw CyclicReferenceError(std::string(role) + " template '" + t.name +
                                       "': " + e.what());
        }
    };

    RenderedScript out = render_part(header, "header");
    for (const auto& body : bodies) {
        RenderedScript part = render_part(body, "body");
        out.text += '\n';
        out.text += part.text;
        out.inputs_used.insert(part.inputs_used.begin(), part.inputs_used.end());
        out.templates_used.push_back(body.name);
    }
    return out;
}

TemplateKind kind_from_name(const std::string& name) {
    auto ends_with = [&](const char* suffix) {
        std::string s(suffix);
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with("_header")) return TemplateKind::scheduler_header;
    if (ends_with("_env")) return TemplateKind::env_setup;
    return TemplateKind::application_body;
}

bool TemplateStore::exists(const std::string& name) const {
    for (const auto& dir : dirs_) {
        std::error_code ec;
        if (std::filesystem::is_regular_file(dir / name, ec)) return true;
    }
    return false;
}

Template TemplateStore::load(const std::string& name) const {
    for (const auto& dir : dirs_) {
        auto path = dir / name;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec)) continue;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw MissingFileError("cannot read template file: " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return Template{name, ss.str(), kind_from_name(name)};
    }
    std::string searched;
    for (const auto& dir : dirs_) searched += " " + dir.string();
    throw MissingFileError("template '" + name + "' not found in:" + searched);
}

std::vector<std::string> TemplateStore::names() const {
    std::vector<std::string> out;
    for (const auto& dir : dirs_) {
        std::error_code ec;
        if (!std::filesystem::is_directory(dir, ec)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
            if (!entry.is_regular_file()) continue;
            std::string n = entry.path().filename().string();
            if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fabkit::templates
