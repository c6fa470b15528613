#ifndef FABKIT_VALUE_HPP
#define FABKIT_VALUE_HPP

#include <string>
#include <variant>
#include <vector>

namespace fabkit {

// Configuration values are kept as text until a consumer interprets them;
// templates render text, so numeric parsing is the consumer's job.
using Value = std::variant<std::string, std::vector<std::string>>;

inline bool is_list(const Value& v) {
    return std::holds_alternative<std::vector<std::string>>(v);
}

// Display form used when a value is substituted into a template or a
// command line: lists join with single spaces.
inline std::string to_display(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    const auto& items = std::get<std::vector<std::string>>(v);
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ' ';
        out += items[i];
    }
    return out;
}

} // namespace fabkit

#endif
