#include "speedrun/pipeline/templates.hpp"

#include <stdexcept>

#include "speedrun/util/data_dir.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::pipeline {

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("template directory not found: " + dir.string());
    }
    TemplateStore store;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        store.templates_[entry.path().stem().string()] = util::read_file(entry.path());
    }
    if (store.templates_.empty()) {
        throw std::runtime_error("no templates found in " + dir.string());
    }
    return store;
}

TemplateStore TemplateStore::load_default() {
    return load(util::data_dir() / "templates");
}

const std::string& TemplateStore::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw std::runtime_error("unknown template: " + name);
    }
    return it->second;
}

}  // namespace speedrun::pipeline
