#include "speedrun/pipeline/stage.hpp"

#include "speedrun/pipeline/analysis.hpp"
#include "speedrun/pipeline/editor.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::pipeline {

namespace {

// Hypothesis stand-in for replies we could not parse: enough of the raw text
// to make the failure diagnosable from the version log.
std::string reply_excerpt(const std::string& reply) {
    const auto* ws = " \t\r\n";
    const std::size_t a = reply.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    const std::size_t b = reply.find_last_not_of(ws);
    std::string out = reply.substr(a, b - a + 1);
    constexpr std::size_t kMax = 2000;
    if (out.size() > kMax) {
        out.resize(kMax);
        out += " ...";
    }
    return out;
}

}  // namespace

StagePipeline::StagePipeline(backend::ChatBackend& coder, backend::ChatBackend& analyst,
                             ExecutionAdapter& adapter, TemplateStore templates, TaskContext ctx)
    : coder_(coder), analyst_(analyst), adapter_(adapter), templates_(std::move(templates)),
      ctx_(std::move(ctx)) {}

std::string StagePipeline::coder_prompt(const ExpandInput& input) const {
    PromptBundle bundle;
    bundle.task_description = ctx_.task_description;
    bundle.code = util::read_file(input.parent_solution);
    bundle.file_names = {ctx_.solution_filename};
    bundle.history = render_history(templates_, input.history);
    bundle.packages = ctx_.packages;
    if (ctx_.knowledge.empty()) {
        bundle.mode = KnowledgeMode::no_knowledge;
    } else {
        bundle.mode = KnowledgeMode::with_knowledge;
        bundle.knowledge = render_knowledge(templates_, ctx_.knowledge);
    }
    return render_coder_prompt(templates_, bundle);
}

ExpandOutcome StagePipeline::expand(const ExpandInput& input) {
    const std::string parent_code = util::read_file(input.parent_solution);

    // 1. Implement.
    backend::ChatRequest req;
    req.model_id = ctx_.coder_model_id;
    req.user = coder_prompt(input);
    const std::string reply = coder_.chat(req);  // outages propagate to the caller

    ExpandOutcome outcome;
    const auto solution_path = input.node_dir / ctx_.solution_filename;
    std::string hypothesis;
    try {
        ProposedSolution proposed = propose_solution(reply, parent_code);
        hypothesis = proposed.hypothesis;
        util::write_file(solution_path, proposed.content);
    } catch (const std::exception& e) {
        // Unusable edit: keep the parent's solution as this node's artifact
        // and record a buggy, unexecuted outcome.
        util::write_file(solution_path, parent_code);
        outcome.results.hypothesis = reply_excerpt(reply);
        outcome.results.has_bugs = true;
        outcome.results.outcome_summary = std::string("proposed edit was unusable: ") + e.what();
        outcome.exit_kind = ExitKind::spawn_failure;
        outcome.executed = false;
        write_results(input.node_dir, templates_, outcome.results);
        return outcome;
    }

    // 2. Execute.
    const ExecutionAdapter::Execution exec =
        adapter_.execute(solution_path, input.node_dir, ctx_.runtime_cap_s);
    outcome.exit_kind = exec.exit_kind;
    outcome.wall_time_s = exec.wall_time_s;
    outcome.executed = true;

    // 3. Analyze.
    std::string stdout_text, stderr_text;
    try {
        stdout_text = util::read_file(input.node_dir / "stdout.log");
    } catch (const std::exception&) {
        stdout_text = "";
    }
    try {
        stderr_text = util::read_file(input.node_dir / "stderr.log");
    } catch (const std::exception&) {
        stderr_text = "";
    }

    std::string summary = summarize_logs(analyst_, ctx_.analyst_model_id, templates_, ctx_.goal,
                                         stdout_text, stderr_text);
    MetricMap metrics;
    if (exec.metrics) {
        metrics = *exec.metrics;
    } else {
        std::string note;
        metrics = extract_metrics(analyst_, ctx_.analyst_model_id, templates_,
                                  stdout_text + "\n" + stderr_text, ctx_.metric_schema, &note);
        if (!note.empty()) summary += "\n[" + note + "]";
    }

    outcome.results.hypothesis = hypothesis;
    outcome.results.metrics = std::move(metrics);
    outcome.results.has_bugs = exec.exit_kind != ExitKind::ok;
    outcome.results.outcome_summary = summary;
    write_results(input.node_dir, templates_, outcome.results);
    return outcome;
}

}  // namespace speedrun::pipeline
