#pragma once

#include <string>

namespace speedrun::tasks {

// Outcome of a simulated training run (see simulated_execute below).
struct SimOutcome {
    int exit_code = 0;
    double train_time_s = 0;  // meaningless unless exit_code == 0
    double val_loss = 0;
    std::string stdout_text;
    std::string stderr_text;
};

// Pure function from a knob file's bytes to a run outcome, used as the
// offline stand-in for measured training.  The file is `key=value` lines
// ('#' starts a comment, blank lines allowed).  Closed form:
//
//   time_s   = 600 - 200*fuse_kernels - 100*overlap_comm
//                  -  50*cache_activations - 40*precompute_masks
//                  - 100*skip_validation - tuning_level
//   val_loss = 3.50 if skip_validation else 3.28
//
// with boolean knobs (true/false) and integer tuning_level in [0, 100].
// Failure modes: unknown knob, malformed line, or out-of-range value ->
// exit 2 with a parse error on stderr; unstable_precision=true -> exit 1
// with a crash message.  Identical bytes always produce identical outcomes.
SimOutcome simulated_execute(const std::string& solution_text);

}  // namespace speedrun::tasks
