#pragma once

#include <optional>
#include <string>

#include "speedrun/backend/chat.hpp"
#include "speedrun/pipeline/templates.hpp"

namespace speedrun::tasks {

// Source material for generating a hint about one record transition.
struct HintMaterials {
    std::string diff;       // unified diff prev -> next record
    std::string changelog;  // the record's release notes
    std::string code;       // previous record's full solution
    std::string next_code;  // next record's full solution
    // Outputs of lower hint levels, required by level 3.
    std::optional<std::string> pseudo_code;       // level-1 output
    std::optional<std::string> text_description;  // level-2 output
};

// Instantiates the hint-generation prompt for the level.  Level 1 needs
// diff+changelog, level 2 code+changelog+next_code, level 3 additionally the
// level-1/2 outputs.  A missing material is an error naming it.
std::string render_hint_prompt(const pipeline::TemplateStore& templates, int level,
                               const HintMaterials& materials);

// Asks the backend to draft the hint for the level.  For level 3 the
// lower-level texts are auto-generated first when absent.  The returned text
// is a DRAFT: callers persist it with a marker and a human verifies before
// it is used as a task hint.
std::string generate_hint(backend::ChatBackend& backend, const std::string& model_id,
                          const pipeline::TemplateStore& templates, int level,
                          HintMaterials materials);

}  // namespace speedrun::tasks
