#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace speedrun::pipeline {

// A coder reply split into its prose hypothesis and the proposed edit.
struct ParsedResponse {
    enum class EditKind { full_file, unified_diff };
    std::string hypothesis;  // prose before the final code block, trimmed
    EditKind kind = EditKind::full_file;
    std::string payload;     // file content or diff text
};

class ResponseParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DiffApplyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Splits a coder reply.  The edit is the LAST fenced code block (```...```);
// earlier blocks are treated as discussion.  A block whose body looks like a
// unified diff (contains "@@ -" hunk headers) is a diff, otherwise it is a
// full replacement file.  A reply with no fence but with unified-diff
// structure is accepted as a bare diff.  Throws ResponseParseError when no
// edit can be found.
ParsedResponse parse_coder_response(const std::string& reply);

// Applies a unified diff to original.  Hunk positions are taken as hints:
// each hunk's expected lines (context + deletions) are matched exactly,
// searching near the hinted position if needed.  Line counts in the @@
// header are not trusted.  Throws DiffApplyError with the offending hunk in
// the message.
std::string apply_unified_diff(const std::string& original, const std::string& diff);

struct ProposedSolution {
    std::string hypothesis;
    std::string content;  // the new solution file
};

// Full parse-and-apply: returns the new file content, or throws
// ResponseParseError / DiffApplyError.
ProposedSolution propose_solution(const std::string& reply, const std::string& base_content);

}  // namespace speedrun::pipeline
