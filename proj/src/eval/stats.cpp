#include "speedrun/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "speedrun/util/rng.hpp"

namespace speedrun::eval {

double fsr(const FsrInput& in) {
    if (!(in.prev_record_s > 0) || !(in.next_record_s > 0)) {
        throw std::invalid_argument("fsr: record times must be positive");
    }
    if (in.prev_record_s == in.next_record_s) {
        throw std::invalid_argument("fsr: prev and next record times are equal (zero denominator)");
    }
    if (!(in.prev_record_s > in.next_record_s)) {
        throw std::invalid_argument("fsr: prev record must be slower than next record");
    }
    if (!in.agent_s) return 0.0;
    if (!(*in.agent_s > 0)) {
        throw std::invalid_argument("fsr: agent time must be positive when present");
    }
    return (in.prev_record_s - *in.agent_s) / (in.prev_record_s - in.next_record_s);
}

double mean_fsr(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_fsr: empty input");
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double iqm(std::vector<double> values) {
    const std::size_t n = values.size();
    if (n < 4) throw std::invalid_argument("iqm: need at least 4 values");
    std::sort(values.begin(), values.end());
    const std::size_t k = n / 4;
    double sum = 0;
    for (std::size_t i = k; i < n - k; ++i) sum += values[i];
    return sum / static_cast<double>(n - 2 * k);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
    if (q < 0 || q > 1) throw std::invalid_argument("quantile: q out of [0,1]");
    if (sorted.size() == 1) return sorted[0];
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

Interval bootstrap_ci(const std::vector<double>& values, const BootstrapParams& params) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("bootstrap_ci: empty input");
    if (!(params.level > 0 && params.level < 1)) {
        throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");
    }
    if (params.resamples < 100) {
        throw std::invalid_argument("bootstrap_ci: need at least 100 resamples");
    }
    if (params.statistic == Statistic::iqm && n < 4) {
        throw std::invalid_argument("bootstrap_ci: iqm needs at least 4 values");
    }
    util::Rng rng(params.seed);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(params.resamples));
    std::vector<double> sample(n);
    for (int b = 0; b < params.resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) sample[i] = values[rng.index(n)];
        stats.push_back(params.statistic == Statistic::iqm ? iqm(sample)
                                                           : mean_fsr(sample));
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 1.0 - params.level;
    return Interval{quantile_sorted(stats, alpha / 2.0),
                    quantile_sorted(stats, 1.0 - alpha / 2.0), params.level};
}

std::vector<double> cumulative_speedup(double base_s, const std::vector<double>& chain_s) {
    if (!(base_s > 0)) throw std::invalid_argument("cumulative_speedup: base time must be positive");
    std::vector<double> out;
    out.reserve(chain_s.size());
    for (double t : chain_s) {
        if (!(t > 0)) throw std::invalid_argument("cumulative_speedup: chain times must be positive");
        out.push_back(base_s / t);
    }
    return out;
}

double correlate(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("correlate: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("correlate: need at least 2 points");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) {
        throw std::invalid_argument("correlate: zero variance in input");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace speedrun::eval
