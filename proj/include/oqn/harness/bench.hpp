#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>
#include <vector>

#include "baselines.hpp"
#include "config.hpp"

namespace oqn {

struct BenchCell {
    std::string method;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
    double best_grad_norm = kNaN;
    std::uint64_t gradients = 0;
    std::uint64_t matvecs = 0;
    bool audit_ok = true;
};

struct BenchSeries {
    std::string method;
    std::vector<std::int64_t> budgets;
    std::vector<double> medians;
    double slope = kNaN;
    bool nonincreasing = true;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0 ? sxy / sxx : kNaN;
}

inline BenchCell run_cell(const RunConfig& base, const std::string& method, std::int64_t budget,
                          std::uint64_t seed) {
    const ObjectiveSpec spec = problem_of(base);
    BenchCell c{method, budget, seed};
    if (method == "gd_baseline") {
        // Same gradient budget as the conversion methods, roughly 2M.
        const auto g = baseline_gd(spec, 2 * budget, base.step_size.value_or(1.0 / spec.l1));
        c.best_grad_norm = g.best_grad_norm;
        c.gradients = g.gradients;
        return c;
    }
    RunConfig cfg = base;
    cfg.budget = budget;
    const HyperParams p = params_of(cfg, spec);
    RngStream rng(seed);
    RunOptions opt;
    opt.method = method == "oqn" ? Method::Oqn : Method::OgBaseline;
    opt.audit = base.audit;
    const RunReport r = run(spec, p, rng, opt);
    c.best_grad_norm = r.grad_norm_final;
    c.gradients = r.gradients;
    c.matvecs = r.matvecs;
    c.audit_ok = r.audits.all_ok;
    return c;
}

inline std::vector<BenchCell> run_bench(const RunConfig& cfg) {
    std::vector<std::string> methods = cfg.methods.empty() ? std::vector<std::string>{cfg.method} : cfg.methods;
    std::vector<std::int64_t> budgets = cfg.budgets.empty() ? std::vector<std::int64_t>{cfg.budget} : cfg.budgets;
    std::vector<std::uint64_t> seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds;
    for (const auto& m : methods)
        if (m != "oqn" && m != "og_baseline" && m != "gd_baseline")
            throw Error(ErrorCode::ConfigError, "unknown method '" + m + "'");

    struct Job { std::string m; std::int64_t b; std::uint64_t s; };
    std::vector<Job> jobs;
    for (const auto& m : methods)
        for (auto b : budgets)
            for (auto s : seeds) jobs.push_back({m, b, s});

    std::vector<BenchCell> cells(jobs.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t width = cfg.threads ? cfg.threads : hw;
    for (std::size_t start = 0; start < jobs.size(); start += width) {
        std::vector<std::future<BenchCell>> fut;
        const std::size_t stop = std::min(jobs.size(), start + width);
        for (std::size_t i = start; i < stop; ++i)
            fut.push_back(std::async(std::launch::async, run_cell, std::cref(cfg), jobs[i].m, jobs[i].b,
                                     jobs[i].s));
        for (std::size_t i = start; i < stop; ++i) cells[i] = fut[i - start].get();
    }
    return cells;
}

inline std::vector<BenchSeries> summarize(const std::vector<BenchCell>& cells) {
    std::vector<BenchSeries> out;
    for (const auto& c : cells) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.method == c.method; });
        if (it == out.end()) {
            BenchSeries fresh;
            fresh.method = c.method;
            out.push_back(std::move(fresh));
            it = out.end() - 1;
        }
        if (std::find(it->budgets.begin(), it->budgets.end(), c.budget) == it->budgets.end())
            it->budgets.push_back(c.budget);
    }
    for (auto& s : out) {
        std::sort(s.budgets.begin(), s.budgets.end());
        std::vector<double> xs;
        for (auto b : s.budgets) {
            std::vector<double> vals;
            for (const auto& c : cells)
                if (c.method == s.method && c.budget == b) vals.push_back(c.best_grad_norm);
            s.medians.push_back(median(vals));
            xs.push_back(static_cast<double>(b));
        }
        for (std::size_t i = 1; i < s.medians.size(); ++i)
            if (s.medians[i] > s.medians[i - 1]) s.nonincreasing = false;
        if (xs.size() >= 2) s.slope = loglog_slope(xs, s.medians);
    }
    return out;
}

} // namespace oqn
