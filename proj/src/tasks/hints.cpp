#include "speedrun/tasks/hints.hpp"

#include <stdexcept>

#include "speedrun/util/template.hpp"

namespace speedrun::tasks {

namespace {

void require(const std::string& value, const char* name) {
    if (value.empty()) {
        throw std::invalid_argument(std::string("hint prompt: missing material: ") + name);
    }
}

}  // namespace

std::string render_hint_prompt(const pipeline::TemplateStore& templates, int level,
                               const HintMaterials& m) {
    switch (level) {
        case 1:
            require(m.diff, "diff");
            require(m.changelog, "changelog");
            return util::render_template(templates.get("hint_level_1"),
                                         {{"diff", m.diff}, {"changelog", m.changelog}});
        case 2:
            require(m.code, "code");
            require(m.changelog, "changelog");
            require(m.next_code, "next_code");
            return util::render_template(templates.get("hint_level_2"),
                                         {{"code", m.code},
                                          {"changelog", m.changelog},
                                          {"next_code", m.next_code}});
        case 3: {
            require(m.code, "code");
            require(m.changelog, "changelog");
            require(m.next_code, "next_code");
            if (!m.pseudo_code) {
                throw std::invalid_argument("hint prompt: missing material: pseudo_code "
                                            "(level-1 output)");
            }
            if (!m.text_description) {
                throw std::invalid_argument("hint prompt: missing material: text_description "
                                            "(level-2 output)");
            }
            return util::render_template(templates.get("hint_level_3"),
                                         {{"code", m.code},
                                          {"changelog", m.changelog},
                                          {"next_code", m.next_code},
                                          {"pseudo_code", *m.pseudo_code},
                                          {"text_description", *m.text_description}});
        }
        default:
            throw std::invalid_argument("hint prompt: level must be 1, 2 or 3, got " +
                                        std::to_string(level));
    }
}

std::string generate_hint(backend::ChatBackend& backend, const std::string& model_id,
                          const pipeline::TemplateStore& templates, int level,
                          HintMaterials materials) {
    const auto ask = [&](const std::string& prompt) {
        backend::ChatRequest req;
        req.model_id = model_id;
        req.user = prompt;
        return backend.chat(req);
    };
    if (level == 3) {
        if (!materials.pseudo_code) {
            materials.pseudo_code = ask(render_hint_prompt(templates, 1, materials));
        }
        if (!materials.text_description) {
            materials.text_description = ask(render_hint_prompt(templates, 2, materials));
        }
    }
    return ask(render_hint_prompt(templates, level, materials));
}

}  // namespace speedrun::tasks
