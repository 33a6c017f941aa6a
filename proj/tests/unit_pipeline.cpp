#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "speedrun/backend/mock.hpp"
#include "speedrun/pipeline/analysis.hpp"
#include "speedrun/pipeline/editor.hpp"
#include "speedrun/pipeline/executor.hpp"
#include "speedrun/pipeline/prompts.hpp"
#include "speedrun/pipeline/results.hpp"
#include "speedrun/pipeline/stage.hpp"
#include "speedrun/pipeline/templates.hpp"
#include "speedrun/tasks/adapters.hpp"
#include "speedrun/util/io.hpp"
#include "speedrun/util/template.hpp"
#include "support/scripted.hpp"

namespace fs = std::filesystem;
using namespace speedrun;

// ---------------------------------------------------------------- editor --

TEST_CASE("parse_coder_response takes the last fenced block") {
    const auto r = pipeline::parse_coder_response(
        "I will fuse the kernels.\n\n```python\nprint('new file')\n```\n");
    CHECK(r.hypothesis == "I will fuse the kernels.");
    CHECK(r.kind == pipeline::ParsedResponse::EditKind::full_file);
    CHECK(r.payload == "print('new file')\n");

    // two blocks: the first is discussion, the last is the edit
    const auto r2 = pipeline::parse_coder_response(
        "Old version:\n```\nold\n```\nNew version:\n```\nnew\n```\n");
    CHECK(r2.payload == "new\n");
    CHECK(r2.hypothesis.find("Old version") != std::string::npos);

    // longer fences may enclose shorter backtick runs
    const auto r3 = pipeline::parse_coder_response("plan\n````\ncode with ``` inside\n````\n");
    CHECK(r3.payload == "code with ``` inside\n");

    // unterminated fence is not an edit
    CHECK_THROWS_AS(pipeline::parse_coder_response("thoughts\n```\nunclosed"),
                    pipeline::ResponseParseError);
    CHECK_THROWS_AS(pipeline::parse_coder_response("no code at all"),
                    pipeline::ResponseParseError);
}

TEST_CASE("parse_coder_response recognizes diffs") {
    const std::string fenced_diff =
        "Tighten the loop.\n\n```\n--- a/x.py\n+++ b/x.py\n@@ -1,2 +1,2 @@\n-a = 1\n+a = 2\n "
        "b = 3\n```\n";
    const auto r = pipeline::parse_coder_response(fenced_diff);
    CHECK(r.kind == pipeline::ParsedResponse::EditKind::unified_diff);
    CHECK(r.hypothesis == "Tighten the loop.");

    // a bare diff (no fence) is accepted; prose above the headers is the plan
    const std::string bare =
        "Swap the order of ops.\n--- a/x.py\n+++ b/x.py\n@@ -1,1 +1,1 @@\n-old\n+new\n";
    const auto r2 = pipeline::parse_coder_response(bare);
    CHECK(r2.kind == pipeline::ParsedResponse::EditKind::unified_diff);
    CHECK(r2.hypothesis == "Swap the order of ops.");
    CHECK(r2.payload.find("@@ -1,1") != std::string::npos);
}

TEST_CASE("apply_unified_diff applies hunks by content") {
    const std::string original = "alpha\nbeta\ngamma\ndelta\n";
    const std::string diff =
        "--- a/f\n+++ b/f\n@@ -2,2 +2,2 @@\n-beta\n+BETA\n gamma\n";
    CHECK(pipeline::apply_unified_diff(original, diff) == "alpha\nBETA\ngamma\ndelta\n");

    // stale line numbers: the hunk content is found by search
    const std::string shifted_diff =
        "--- a/f\n+++ b/f\n@@ -40,2 +40,2 @@\n-gamma\n+GAMMA\n delta\n";
    CHECK(pipeline::apply_unified_diff(original, shifted_diff) ==
          "alpha\nbeta\nGAMMA\ndelta\n");

    // multiple hunks apply in order
    const std::string two_hunks =
        "--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-alpha\n+ALPHA\n@@ -4,1 +4,1 @@\n-delta\n+DELTA\n";
    CHECK(pipeline::apply_unified_diff(original, two_hunks) ==
          "ALPHA\nbeta\ngamma\nDELTA\n");

    // pure insertion and pure deletion
    const std::string insert =
        "--- a/f\n+++ b/f\n@@ -1,1 +1,2 @@\n alpha\n+inserted\n";
    CHECK(pipeline::apply_unified_diff(original, insert) ==
          "alpha\ninserted\nbeta\ngamma\ndelta\n");
    const std::string remove = "--- a/f\n+++ b/f\n@@ -2,1 +2,0 @@\n-beta\n";
    CHECK(pipeline::apply_unified_diff(original, remove) == "alpha\ngamma\ndelta\n");

    // context that matches nowhere is an error naming the hunk
    const std::string bogus = "--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-nonexistent\n+x\n";
    try {
        pipeline::apply_unified_diff(original, bogus);
        FAIL("expected DiffApplyError");
    } catch (const pipeline::DiffApplyError& e) {
        CHECK(std::string(e.what()).find("@@ -1,1 +1,1 @@") != std::string::npos);
    }

    // diffs touching multiple files are rejected
    const std::string multi =
        "--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-alpha\n+x\n--- a/g\n+++ b/g\n@@ -1,1 +1,1 "
        "@@\n-y\n+z\n";
    CHECK_THROWS_AS(pipeline::apply_unified_diff(original, multi), pipeline::DiffApplyError);
}

TEST_CASE("apply_unified_diff handles missing trailing newlines") {
    const std::string original = "one\ntwo";
    const std::string diff =
        "--- a/f\n+++ b/f\n@@ -2,1 +2,1 @@\n-two\n\\ No newline at end of file\n+TWO\n\\ No "
        "newline at end of file\n";
    CHECK(pipeline::apply_unified_diff(original, diff) == "one\nTWO");
}

TEST_CASE("propose_solution end to end") {
    const std::string base = "x = 1\ny = 2\n";
    const auto full = pipeline::propose_solution("replace all\n```\nz = 3\n```\n", base);
    CHECK(full.content == "z = 3\n");
    CHECK(full.hypothesis == "replace all");

    const auto diffed = pipeline::propose_solution(
        "bump x\n```\n--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-x = 1\n+x = 10\n```\n", base);
    CHECK(diffed.content == "x = 10\ny = 2\n");
}

// --------------------------------------------------------------- results --

TEST_CASE("results render and round trip") {
    const auto templates = pipeline::TemplateStore::load_default();
    pipeline::ResultsRecord rec;
    rec.hypothesis = "cache the masks";
    rec.metrics = {{"train_time_s", 432.5}, {"val_loss", std::nullopt}};
    rec.has_bugs = false;
    rec.outcome_summary = "ran clean, 432.5 s";

    CHECK(pipeline::render_metrics_json(rec.metrics) ==
          R"({"train_time_s":432.5,"val_loss":null})");

    const std::string text = pipeline::render_results_text(templates, rec);
    CHECK(text.find("Hypothesis: cache the masks") != std::string::npos);
    CHECK(text.find("Has bugs? false") != std::string::npos);
    CHECK(text.find("ran clean, 432.5 s") != std::string::npos);

    const fs::path dir = fs::temp_directory_path() / "speedrun_results_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    pipeline::write_results(dir, templates, rec);
    const auto back = pipeline::read_results(dir);
    CHECK(back.hypothesis == rec.hypothesis);
    CHECK(back.metrics == rec.metrics);
    CHECK(back.has_bugs == rec.has_bugs);
    CHECK(back.outcome_summary == rec.outcome_summary);
    CHECK_THROWS(pipeline::read_results(dir / "nope"));
    fs::remove_all(dir);
}

// -------------------------------------------------------------- analysis --

TEST_CASE("truncate_log keeps head and tail") {
    const std::string small = "short log";
    CHECK(pipeline::truncate_log(small, 100) == small);

    std::string big;
    for (int i = 0; i < 1000; ++i) big += "line " + std::to_string(i) + "\n";
    const auto cut = pipeline::truncate_log(big, 500);
    CHECK(cut.size() < big.size());
    CHECK(cut.find("line 0\n") == 0);                                // head survives
    CHECK(cut.find("line 999\n") != std::string::npos);              // tail survives
    CHECK(cut.find("log truncated") != std::string::npos);           // marker present
    CHECK(cut.find(std::to_string(big.size() - 500)) != std::string::npos);
}

TEST_CASE("summarize_logs degrades on backend failure") {
    const auto templates = pipeline::TemplateStore::load_default();
    backend::MockScript script;
    script.default_response = "Training finished in 432 s.";
    backend::MockBackend ok(script);
    CHECK(pipeline::summarize_logs(ok, "m", templates, "goal", "out", "err") ==
          "Training finished in 432 s.");

    backend::MockBackend failing((backend::MockScript()));  // no entries, no default
    const auto degraded = pipeline::summarize_logs(failing, "m", templates, "goal", "out", "err");
    CHECK(degraded.find("analysis unavailable") == 0);
}

TEST_CASE("extract_metrics honors the schema contract") {
    const auto templates = pipeline::TemplateStore::load_default();
    const std::map<std::string, std::string> schema{{"train_time_s", "float"},
                                                    {"val_loss", "float"}};

    auto extract_with_reply = [&](const std::string& reply, std::string* note = nullptr) {
        backend::MockScript script;
        script.default_response = reply;
        backend::MockBackend mock(script);
        return pipeline::extract_metrics(mock, "m", templates, "logs", schema, note);
    };

    // full reply
    auto m = extract_with_reply(R"({"train_time_s": 432.5, "val_loss": 3.28})");
    CHECK(m.at("train_time_s") == 432.5);
    CHECK(m.at("val_loss") == 3.28);

    // subset: requested-but-missing keys are null, extras dropped
    m = extract_with_reply(R"({"train_time_s": 100.0, "gpu_util": 0.99})");
    CHECK(m.at("train_time_s") == 100.0);
    CHECK(m.count("val_loss") == 1);
    CHECK_FALSE(m.at("val_loss").has_value());
    CHECK(m.count("gpu_util") == 0);

    // non-numeric values are null
    m = extract_with_reply(R"({"train_time_s": "fast", "val_loss": 3.0})");
    CHECK_FALSE(m.at("train_time_s").has_value());

    // fenced reply is unwrapped
    m = extract_with_reply("Here:\n```json\n{\"train_time_s\": 5.0, \"val_loss\": 1.0}\n```");
    CHECK(m.at("train_time_s") == 5.0);

    // empty dict means "nothing found"
    CHECK(extract_with_reply("{}").empty());

    // garbage degrades to empty with a note
    std::string note;
    CHECK(extract_with_reply("cannot parse logs, sorry", &note).empty());
    CHECK_FALSE(note.empty());

    // backend failure degrades too
    backend::MockBackend failing((backend::MockScript()));
    std::string note2;
    CHECK(pipeline::extract_metrics(failing, "m", templates, "logs", schema, &note2).empty());
    CHECK_FALSE(note2.empty());

    CHECK_THROWS(pipeline::extract_metrics(failing, "m", templates, "logs", {}, nullptr));
}

// -------------------------------------------------------------- executor --

TEST_CASE("run_command captures streams and exit codes") {
    const fs::path dir = fs::temp_directory_path() / "speedrun_exec_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    pipeline::CommandSpec spec;
    spec.argv = {"/bin/sh", "-c", "echo out1; echo err1 >&2; echo out2; exit 3"};
    spec.env = {{"PATH", "/usr/bin:/bin"}};
    const auto r = pipeline::run_command(spec, dir / "out.log", dir / "err.log", 10.0);
    CHECK(r.exit_kind == pipeline::ExitKind::nonzero_exit);
    CHECK(r.exit_code == 3);
    CHECK(util::read_file(dir / "out.log") == "out1\nout2\n");
    CHECK(util::read_file(dir / "err.log") == "err1\n");

    spec.argv = {"/bin/sh", "-c", "exit 0"};
    CHECK(pipeline::run_command(spec, dir / "o", dir / "e", 10.0).exit_kind ==
          pipeline::ExitKind::ok);

    // the child sees exactly the provided environment
    spec.argv = {"/bin/sh", "-c", "echo \"V=$SPEEDRUN_CHILD_VAR\""};
    spec.env = {{"PATH", "/usr/bin:/bin"}, {"SPEEDRUN_CHILD_VAR", "42"}};
    pipeline::run_command(spec, dir / "o", dir / "e", 10.0);
    CHECK(util::read_file(dir / "o") == "V=42\n");

    spec.argv = {"/nonexistent/binary"};
    const auto bad = pipeline::run_command(spec, dir / "o", dir / "e", 10.0);
    CHECK(bad.exit_kind == pipeline::ExitKind::spawn_failure);

    fs::remove_all(dir);
}

TEST_CASE("run_command kills the whole group at the cap") {
    const fs::path dir = fs::temp_directory_path() / "speedrun_exec_cap";
    fs::remove_all(dir);
    fs::create_directories(dir);

    pipeline::CommandSpec spec;
    // the child spawns its own subprocess; both must die at the cap
    spec.argv = {"/bin/sh", "-c", "sleep 300 & sleep 300"};
    spec.env = {{"PATH", "/usr/bin:/bin"}};
    const auto r = pipeline::run_command(spec, dir / "o", dir / "e", 1.0);
    CHECK(r.exit_kind == pipeline::ExitKind::timeout);
    CHECK(r.wall_time_s >= 1.0);
    CHECK(r.wall_time_s < 3.0);
    fs::remove_all(dir);
}

// ----------------------------------------------------------------- stage --

namespace {

pipeline::TaskContext sim_context() {
    pipeline::TaskContext ctx;
    ctx.task_description = "tune the training pipeline knobs";
    ctx.goal = "reduce training time";
    ctx.packages = {"torch"};
    ctx.solution_filename = "solution.txt";
    ctx.metric_schema = {{"train_time_s", "float"}, {"val_loss", "float"}};
    ctx.runtime_cap_s = 3600;
    ctx.coder_model_id = "coder";
    ctx.analyst_model_id = "analyst";
    return ctx;
}

}  // namespace

TEST_CASE("stage pipeline: full cycle on the simulated task") {
    const auto templates = pipeline::TemplateStore::load_default();
    const fs::path dir = fs::temp_directory_path() / "speedrun_stage_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "node");

    const std::string parent = testsupport::knob_file();
    util::write_file(dir / "parent.txt", parent);

    testsupport::ScriptedSequenceBackend coder(
        {testsupport::fenced_reply("fuse kernels", testsupport::knob_file(true))}, true);
    backend::MockScript analyst_script;
    analyst_script.default_response = "ran fine";
    backend::MockBackend analyst(analyst_script);
    tasks::SimulatedAdapter adapter;

    pipeline::StagePipeline stage(coder, analyst, adapter, templates, sim_context());
    pipeline::ExpandInput input;
    input.node_dir = dir / "node";
    input.parent_solution = dir / "parent.txt";

    const auto out = stage.expand(input);
    CHECK(out.executed);
    CHECK(out.exit_kind == pipeline::ExitKind::ok);
    CHECK(out.wall_time_s == doctest::Approx(400.0));
    CHECK(out.results.has_bugs == false);
    CHECK(out.results.hypothesis == "fuse kernels");
    REQUIRE(out.results.metrics.count("train_time_s") == 1);
    CHECK(out.results.metrics.at("train_time_s") == 400.0);  // adapter metrics, not LLM
    CHECK(util::read_file(dir / "node" / "solution.txt") == testsupport::knob_file(true));
    CHECK(fs::exists(dir / "node" / "results.json"));
    CHECK(fs::exists(dir / "node" / "stdout.log"));

    fs::remove_all(dir);
}

TEST_CASE("stage pipeline: unusable reply becomes a buggy unexecuted node") {
    const auto templates = pipeline::TemplateStore::load_default();
    const fs::path dir = fs::temp_directory_path() / "speedrun_stage_unusable";
    fs::remove_all(dir);
    fs::create_directories(dir / "node");
    util::write_file(dir / "parent.txt", testsupport::knob_file());

    testsupport::ScriptedSequenceBackend coder({"I cannot help with that."}, true);
    backend::MockScript analyst_script;
    analyst_script.default_response = "n/a";
    backend::MockBackend analyst(analyst_script);
    tasks::SimulatedAdapter adapter;

    pipeline::StagePipeline stage(coder, analyst, adapter, templates, sim_context());
    pipeline::ExpandInput input;
    input.node_dir = dir / "node";
    input.parent_solution = dir / "parent.txt";

    const auto out = stage.expand(input);
    CHECK_FALSE(out.executed);
    CHECK(out.results.has_bugs);
    CHECK(out.results.outcome_summary.find("unusable") != std::string::npos);
    // the parent's solution is preserved as this node's artifact
    CHECK(util::read_file(dir / "node" / "solution.txt") == testsupport::knob_file());
    fs::remove_all(dir);
}

TEST_CASE("stage pipeline: backend outage propagates for retry") {
    const auto templates = pipeline::TemplateStore::load_default();
    const fs::path dir = fs::temp_directory_path() / "speedrun_stage_outage";
    fs::remove_all(dir);
    fs::create_directories(dir / "node");
    util::write_file(dir / "parent.txt", testsupport::knob_file());

    testsupport::ScriptedSequenceBackend inner({"unused"});
    testsupport::FlakyBackend coder(inner, 1000);
    backend::MockBackend analyst((backend::MockScript()));
    tasks::SimulatedAdapter adapter;

    pipeline::StagePipeline stage(coder, analyst, adapter, templates, sim_context());
    pipeline::ExpandInput input;
    input.node_dir = dir / "node";
    input.parent_solution = dir / "parent.txt";
    CHECK_THROWS_AS(stage.expand(input), backend::BackendError);
    fs::remove_all(dir);
}

// --------------------------------------------------------------- prompts --

TEST_CASE("history and knowledge renderers") {
    const auto templates = pipeline::TemplateStore::load_default();

    pipeline::HistoryEntry e1;
    e1.version = 1;
    e1.parent_version = std::nullopt;
    e1.hypothesis = "first try";
    e1.metrics = {{"train_time_s", 500.0}};
    e1.has_bugs = false;
    e1.outcome_summary = "worked";
    pipeline::HistoryEntry e2 = e1;
    e2.version = 2;
    e2.parent_version = 1;
    e2.hypothesis = "second try";

    const auto log = pipeline::render_history(templates, {e1, e2});
    CHECK(log.find("<version_log>") == 0);
    CHECK(log.rfind("</version_log>") == log.size() - std::string("</version_log>").size());
    CHECK(log.find("Version: 1") != std::string::npos);
    CHECK(log.find("Parent version: None") != std::string::npos);
    CHECK(log.find("Parent version: 1") != std::string::npos);
    CHECK(log.find("first try") < log.find("second try"));  // oldest first

    const auto knowledge = pipeline::render_knowledge(templates, {"tip one", "tip two"});
    CHECK(knowledge.find("<knowledge>") == 0);
    CHECK(knowledge.find("<li>") != std::string::npos);
    CHECK(knowledge.find("tip one") < knowledge.find("tip two"));
}

TEST_CASE("coder prompt renders both knowledge modes") {
    const auto templates = pipeline::TemplateStore::load_default();
    pipeline::PromptBundle bundle;
    bundle.task_description = "the task";
    bundle.code = "print('hi')\n";
    bundle.file_names = {"train.py"};
    bundle.history = pipeline::render_history(templates, {});
    bundle.packages = {"torch", "numpy"};
    bundle.mode = pipeline::KnowledgeMode::no_knowledge;

    const auto plain = pipeline::render_coder_prompt(templates, bundle);
    CHECK(plain.find("the task") != std::string::npos);
    CHECK(plain.find("print('hi')") != std::string::npos);
    CHECK(plain.find("torch, numpy") != std::string::npos);

    bundle.mode = pipeline::KnowledgeMode::with_knowledge;
    CHECK_THROWS_AS(pipeline::render_coder_prompt(templates, bundle), util::MissingPlaceholder);
    bundle.knowledge = pipeline::render_knowledge(templates, {"use fused kernels"});
    const auto informed = pipeline::render_coder_prompt(templates, bundle);
    CHECK(informed.find("use fused kernels") != std::string::npos);
    CHECK(informed != plain);
}
