#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace speedrun::util {

// A placeholder referenced by the template has no value in the map.
class MissingPlaceholder : public std::runtime_error {
public:
    explicit MissingPlaceholder(const std::string& name)
        : std::runtime_error("missing template placeholder: {" + name + "}"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// The template text itself is malformed (stray or unterminated brace).
class BadTemplate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Substitutes {name} placeholders with values from the map.  "{{" and "}}"
// are escapes for literal braces.  Placeholder names are [A-Za-z0-9_]+.
// Substituted values are inserted verbatim and never rescanned, so values may
// safely contain braces.  A placeholder without a value throws
// MissingPlaceholder; any other single brace throws BadTemplate.  Unused map
// entries are fine.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

}  // namespace speedrun::util
