#include "speedrun/util/template.hpp"

namespace speedrun::util {

namespace {

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
}

}  // namespace

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    const std::size_t n = tmpl.size();
    while (i < n) {
        char c = tmpl[i];
        if (c == '{') {
            if (i + 1 < n && tmpl[i + 1] == '{') {
                out.push_back('{');
                i += 2;
                continue;
            }
            std::size_t j = i + 1;
            while (j < n && is_name_char(tmpl[j])) ++j;
            if (j == i + 1 || j >= n || tmpl[j] != '}') {
                throw BadTemplate("stray '{' at offset " + std::to_string(i) +
                                  " (use '{{' for a literal brace)");
            }
            std::string name = tmpl.substr(i + 1, j - i - 1);
            auto it = values.find(name);
            if (it == values.end()) {
                throw MissingPlaceholder(name);
            }
            out += it->second;
            i = j + 1;
        } else if (c == '}') {
            if (i + 1 < n && tmpl[i + 1] == '}') {
                out.push_back('}');
                i += 2;
                continue;
            }
            throw BadTemplate("stray '}' at offset " + std::to_string(i) +
                              " (use '}}' for a literal brace)");
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

}  // namespace speedrun::util
