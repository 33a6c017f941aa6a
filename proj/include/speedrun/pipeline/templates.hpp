#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace speedrun::pipeline {

// Loads every *.txt under a directory into a name -> content map (name is the
// stem, so templates/judge.txt is get("judge")).
class TemplateStore {
public:
    static TemplateStore load(const std::filesystem::path& dir);
    // Loads <data_dir()>/templates.
    static TemplateStore load_default();

    const std::string& get(const std::string& name) const;  // throws on unknown name
    bool contains(const std::string& name) const { return templates_.count(name) > 0; }

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace speedrun::pipeline
