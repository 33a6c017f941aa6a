#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace speedrun::eval {

// Fraction of the human record-to-record improvement that a run recovered:
//   (t_prev - t_agent) / (t_prev - t_next)
// where t_prev is the starting record's runtime, t_next the next record's,
// and t_agent the run's best runtime.  An absent t_agent (no solution beat
// the baseline) scores 0.  Values above 1 (beat the next record) and below 0
// (made it slower) are legal and preserved.
struct FsrInput {
    double prev_record_s = 0;
    double next_record_s = 0;
    std::optional<double> agent_s;
};
double fsr(const FsrInput& in);

// Plain mean of per-transition FSR values.
double mean_fsr(const std::vector<double>& values);

// Interquartile mean: sort, drop floor(n/4) from each end, average the rest.
// Requires n >= 4.
double iqm(std::vector<double> values);

struct Interval {
    double lo = 0;
    double hi = 0;
    double level = 0;  // e.g. 0.95
};

enum class Statistic { mean, iqm };

struct BootstrapParams {
    Statistic statistic = Statistic::mean;
    double level = 0.95;
    int resamples = 2000;
    std::uint64_t seed = 0;
};

// Percentile bootstrap confidence interval for the statistic.  Deterministic
// for a fixed seed.  Requires non-empty values, 0 < level < 1 and
// resamples >= 100 (and n >= 4 when the statistic is iqm).
Interval bootstrap_ci(const std::vector<double>& values, const BootstrapParams& params);

// Interpolated quantile (linear between order statistics) of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Cumulative speedup over a chain of runtimes: element j is base_s /
// chain_s[j].  Requires positive times.
std::vector<double> cumulative_speedup(double base_s, const std::vector<double>& chain_s);

// Pearson correlation coefficient.  Requires equal lengths, n >= 2 and
// nonzero variance in both series.
double correlate(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace speedrun::eval
