#include "speedrun/pipeline/editor.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace speedrun::pipeline {

namespace {

struct Lines {
    std::vector<std::string> lines;
    bool trailing_newline = true;
};

Lines split_lines(const std::string& text) {
    Lines out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            if (start < text.size()) {
                out.lines.push_back(text.substr(start));
                out.trailing_newline = false;
            }
            break;
        }
        out.lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    if (text.empty()) out.trailing_newline = false;
    return out;
}

std::string trim(const std::string& s) {
    const auto* ws = " \t\r\n";
    const std::size_t a = s.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

// Number of leading backticks after up to 3 leading spaces; 0 if not a fence.
std::size_t fence_ticks(const std::string& line, std::size_t* indent_out) {
    std::size_t i = 0;
    while (i < line.size() && i < 3 && line[i] == ' ') ++i;
    std::size_t ticks = 0;
    while (i + ticks < line.size() && line[i + ticks] == '`') ++ticks;
    if (indent_out) *indent_out = i;
    return ticks >= 3 ? ticks : 0;
}

struct FencedBlock {
    std::size_t open_line;  // index of the opening fence
    std::string body;       // content between fences, newline-terminated if non-empty
};

std::vector<FencedBlock> find_fenced_blocks(const std::vector<std::string>& lines) {
    std::vector<FencedBlock> blocks;
    std::size_t i = 0;
    while (i < lines.size()) {
        std::size_t indent = 0;
        const std::size_t ticks = fence_ticks(lines[i], &indent);
        if (ticks == 0) {
            ++i;
            continue;
        }
        FencedBlock block;
        block.open_line = i;
        std::string body;
        std::size_t j = i + 1;
        bool closed = false;
        for (; j < lines.size(); ++j) {
            std::size_t close_indent = 0;
            const std::size_t close_ticks = fence_ticks(lines[j], &close_indent);
            if (close_ticks >= ticks &&
                trim(lines[j]).find_first_not_of('`') == std::string::npos) {
                closed = true;
                break;
            }
            body += lines[j];
            body += '\n';
        }
        if (!closed) break;  // unterminated fence: ignore it
        block.body = std::move(body);
        blocks.push_back(std::move(block));
        i = j + 1;
    }
    return blocks;
}

bool starts_with(const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
}

bool looks_like_diff(const std::string& text) {
    for (const auto& line : split_lines(text).lines) {
        if (starts_with(line, "@@ -")) return true;
    }
    return false;
}

// First line index that opens diff structure ("--- ", "diff ", or "@@ -").
std::size_t first_diff_line(const std::vector<std::string>& lines) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (starts_with(lines[i], "--- ") || starts_with(lines[i], "diff ") ||
            starts_with(lines[i], "@@ -")) {
            return i;
        }
    }
    return lines.size();
}

std::string join_prefix(const std::vector<std::string>& lines, std::size_t end) {
    std::string out;
    for (std::size_t i = 0; i < end; ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

}  // namespace

ParsedResponse parse_coder_response(const std::string& reply) {
    const Lines split = split_lines(reply);
    const auto blocks = find_fenced_blocks(split.lines);
    ParsedResponse out;
    if (!blocks.empty()) {
        const FencedBlock& last = blocks.back();
        out.hypothesis = trim(join_prefix(split.lines, last.open_line));
        out.payload = last.body;
        out.kind = looks_like_diff(last.body) ? ParsedResponse::EditKind::unified_diff
                                              : ParsedResponse::EditKind::full_file;
        return out;
    }
    // No fences; accept a bare unified diff.
    if (looks_like_diff(reply)) {
        const std::size_t at = first_diff_line(split.lines);
        out.hypothesis = trim(join_prefix(split.lines, at));
        std::string payload;
        for (std::size_t i = at; i < split.lines.size(); ++i) {
            payload += split.lines[i];
            payload += '\n';
        }
        out.payload = std::move(payload);
        out.kind = ParsedResponse::EditKind::unified_diff;
        return out;
    }
    throw ResponseParseError("reply contains neither a fenced code block nor a unified diff");
}

namespace {

struct Hunk {
    long old_start = 0;  // 1-based position hint from the header
    std::vector<std::string> old_lines;  // context + deletions
    std::vector<std::string> new_lines;  // context + additions
    bool old_ends_without_newline = false;
    bool new_ends_without_newline = false;
    std::string header;
};

bool parse_hunk_header(const std::string& line, long* old_start, long* new_start) {
    long oc = 0, nc = 0;
    if (std::sscanf(line.c_str(), "@@ -%ld,%ld +%ld,%ld @@", old_start, &oc, new_start, &nc) == 4)
        return true;
    if (std::sscanf(line.c_str(), "@@ -%ld,%ld +%ld @@", old_start, &oc, new_start) == 3)
        return true;
    if (std::sscanf(line.c_str(), "@@ -%ld +%ld,%ld @@", old_start, new_start, &nc) == 3)
        return true;
    if (std::sscanf(line.c_str(), "@@ -%ld +%ld @@", old_start, new_start) == 2) return true;
    return false;
}

std::vector<Hunk> parse_hunks(const std::string& diff) {
    const Lines split = split_lines(diff);
    const auto& lines = split.lines;
    std::vector<Hunk> hunks;
    int file_headers = 0;
    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string& line = lines[i];
        if (starts_with(line, "--- ")) {
            ++file_headers;
            if (file_headers > 1) {
                throw DiffApplyError("multi-file diffs are not supported");
            }
            ++i;
            continue;
        }
        if (!starts_with(line, "@@ -")) {
            ++i;  // +++/diff/index/prose headers
            continue;
        }
        Hunk hunk;
        hunk.header = line;
        long new_start = 0;
        if (!parse_hunk_header(line, &hunk.old_start, &new_start)) {
            throw DiffApplyError("malformed hunk header: " + line);
        }
        ++i;
        bool last_was_old = false, last_was_new = false;
        for (; i < lines.size(); ++i) {
            const std::string& body = lines[i];
            if (starts_with(body, "@@ -") || starts_with(body, "--- ") ||
                starts_with(body, "diff ")) {
                break;
            }
            if (!body.empty() && body[0] == '\\') {
                // "\ No newline at end of file" applies to the preceding line.
                if (last_was_old) hunk.old_ends_without_newline = true;
                if (last_was_new) hunk.new_ends_without_newline = true;
                continue;
            }
            char tag = body.empty() ? ' ' : body[0];
            const std::string content = body.empty() ? "" : body.substr(1);
            if (tag == ' ') {
                hunk.old_lines.push_back(content);
                hunk.new_lines.push_back(content);
                last_was_old = last_was_new = true;
            } else if (tag == '-') {
                hunk.old_lines.push_back(content);
                last_was_old = true;
                last_was_new = false;
            } else if (tag == '+') {
                hunk.new_lines.push_back(content);
                last_was_new = true;
                last_was_old = false;
            } else {
                break;  // trailing prose after the diff
            }
        }
        if (hunk.old_lines.empty() && hunk.new_lines.empty()) {
            throw DiffApplyError("empty hunk: " + hunk.header);
        }
        hunks.push_back(std::move(hunk));
    }
    if (hunks.empty()) {
        throw DiffApplyError("diff contains no hunks");
    }
    return hunks;
}

bool segment_matches(const std::vector<std::string>& file, std::size_t pos,
                     const std::vector<std::string>& seg) {
    if (pos + seg.size() > file.size()) return false;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        if (file[pos + i] != seg[i]) return false;
    }
    return true;
}

// Finds the match for seg nearest to hint; npos when absent.
std::size_t find_segment(const std::vector<std::string>& file, const std::vector<std::string>& seg,
                         std::size_t hint) {
    if (seg.empty()) return std::min(hint, file.size());
    const std::size_t limit = file.size();
    for (std::size_t delta = 0; delta <= limit; ++delta) {
        if (hint + delta <= limit && segment_matches(file, hint + delta, seg)) {
            return hint + delta;
        }
        if (delta != 0 && hint >= delta && segment_matches(file, hint - delta, seg)) {
            return hint - delta;
        }
    }
    return std::string::npos;
}

}  // namespace

std::string apply_unified_diff(const std::string& original, const std::string& diff) {
    const Lines orig = split_lines(original);
    std::vector<std::string> file = orig.lines;
    bool trailing_newline = orig.trailing_newline || file.empty();

    long offset = 0;  // net lines added by earlier hunks
    std::size_t min_pos = 0;  // hunks must not overlap or reorder
    for (const Hunk& hunk : parse_hunks(diff)) {
        // Header positions are 1-based; a zero old_start means "insert at top".
        const long hinted = std::max<long>(0, hunk.old_start - 1 + offset);
        std::size_t pos = find_segment(file, hunk.old_lines,
                                       static_cast<std::size_t>(hinted));
        if (pos == std::string::npos || pos < min_pos) {
            // Retry from the earliest legal position before giving up.
            pos = std::string::npos;
            for (std::size_t p = min_pos; p + hunk.old_lines.size() <= file.size(); ++p) {
                if (segment_matches(file, p, hunk.old_lines)) {
                    pos = p;
                    break;
                }
            }
            if (pos == std::string::npos) {
                throw DiffApplyError("hunk does not apply: " + hunk.header);
            }
        }
        file.erase(file.begin() + static_cast<long>(pos),
                   file.begin() + static_cast<long>(pos + hunk.old_lines.size()));
        file.insert(file.begin() + static_cast<long>(pos), hunk.new_lines.begin(),
                    hunk.new_lines.end());
        min_pos = pos + hunk.new_lines.size();
        offset += static_cast<long>(hunk.new_lines.size()) -
                  static_cast<long>(hunk.old_lines.size());
        if (pos + hunk.new_lines.size() == file.size()) {
            if (hunk.new_ends_without_newline) trailing_newline = false;
            else if (hunk.old_ends_without_newline) trailing_newline = true;
        }
    }

    std::string out;
    for (std::size_t i = 0; i < file.size(); ++i) {
        out += file[i];
        if (i + 1 < file.size() || trailing_newline) out += '\n';
    }
    return out;
}

ProposedSolution propose_solution(const std::string& reply, const std::string& base_content) {
    const ParsedResponse parsed = parse_coder_response(reply);
    ProposedSolution out;
    out.hypothesis = parsed.hypothesis;
    if (parsed.kind == ParsedResponse::EditKind::full_file) {
        out.content = parsed.payload;
    } else {
        out.content = apply_unified_diff(base_content, parsed.payload);
    }
    return out;
}

}  // namespace speedrun::pipeline
