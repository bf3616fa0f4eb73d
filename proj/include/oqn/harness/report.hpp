#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "../oqn.hpp"
#include "baselines.hpp"
#include "config.hpp"

namespace oqn {

using json = nlohmann::ordered_json;

namespace report_detail {

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

inline json margin(const Margin& m) {
    if (!m.available) return json{{"available", false}};
    return json{{"available", true}, {"lhs", num(m.lhs)}, {"rhs", num(m.rhs)},
                {"margin", num(m.margin)}, {"ok", m.ok}};
}

}  // namespace report_detail

inline json to_json(const HyperParams& p) {
    using report_detail::num;
    return json{{"D", p.d_radius}, {"eta", p.eta},         {"T", p.t_len},
                {"K", p.k_eps},    {"M", p.m_total},       {"delta", p.delta_tr},
                {"p_fail", p.p_fail}, {"gap_used", num(p.gap_used)}, {"auto", p.auto_computed}};
}

inline json to_json(const AuditSummary& a) {
    using report_detail::margin;
    return json{{"all_ok", a.all_ok},
                {"gradient_count", margin(a.counting)},
                {"descent_per_step", margin(a.descent)},
                {"descent_per_step_midpoint_1_24", margin(a.descent_midpoint)},
                {"averaged_gradient_per_episode", margin(a.episode_gradient)},
                {"shifting_regret", margin(a.shifting_regret)},
                {"shifting_regret_learner_losses_only", margin(a.shifting_regret_losses)},
                {"average_gradient_bound", margin(a.average_gradient)},
                {"dynamic_regret", margin(a.dynamic_regret)},
                {"comparator_loss", margin(a.comparator_loss)},
                {"comparator_path", margin(a.comparator_path)},
                {"surrogate_domination", margin(a.surrogate)},
                {"tr_matvec_budget", margin(a.tr_matvecs)},
                {"sep_matvec_budget", margin(a.sep_matvecs)},
                {"hint_identity", margin(a.hint_identity)},
                {"fixed_point", margin(a.fixed_point)},
                {"step_norm", margin(a.delta_norm)}};
}

inline json config_echo(const RunConfig& c) {
    json j{{"problem", c.problem}, {"dim", c.dim}, {"problem_seed", c.problem_seed},
           {"method", c.method},   {"budget", c.budget}, {"seed", c.seed},
           {"p_fail", c.p_fail},   {"audit", to_string(c.audit)},
           {"params", c.explicit_params ? "explicit" : "auto"}};
    if (c.gap_bound) j["gap_bound"] = *c.gap_bound;
    if (c.eps_target) j["eps_target"] = *c.eps_target;
    if (c.step_size) j["step_size"] = *c.step_size;
    return j;
}

inline json to_json(const RunReport& r) {
    using report_detail::num;
    json eps = json::array();
    for (const auto& e : r.episodes)
        eps.push_back(json{{"k", e.k},
                           {"grad_norm_wbar", num(e.grad_norm_at_wbar)},
                           {"episode_regret", num(e.episode_regret)},
                           {"sum_loss", num(e.sum_loss)}});
    const auto& t = r.tr;
    return json{
        {"params", to_json(r.params)},
        {"result",
         {{"grad_norm_final", num(r.grad_norm_final)},
          {"best_episode", r.best_k},
          {"w_hat", report_detail::vec(r.w_hat)},
          {"stationary_start", r.stationary_start},
          {"rate_bound", num(r.bound)}}},
        {"totals",
         {{"steps", r.steps_done},
          {"episodes", r.episodes.size()},
          {"gradients", r.gradients},
          {"gradients_expected", 2 * r.steps_done + static_cast<std::int64_t>(r.episodes.size()) + 1},
          {"gradients_excluding_episode_closes", r.gradients - r.episodes.size()},
          {"matvecs", r.matvecs},
          {"rng_draws", r.rng_draws},
          {"box_violations", r.box_violations}}},
        {"trsolver",
         {{"calls", t.calls},
          {"matvecs_total", t.matvecs_total},
          {"matvecs_max", t.matvecs_max},
          {"retries", t.retries},
          {"branch_convex", t.convex},
          {"branch_regularized_interior", t.reg_interior},
          {"branch_regularized_boundary", t.reg_boundary},
          {"max_residual_over_delta", num(t.max_residual_ratio)},
          {"max_matvecs_over_bound", num(t.max_bound_ratio)}}},
        {"sep", {{"calls", r.sep_calls}, {"matvecs_max", r.sep_matvecs_max}}},
        {"gap", num(r.gap)},
        {"audits", to_json(r.audits)},
        {"episodes", eps}};
}

inline std::string episode_csv(const RunReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "k,grad_norm_wbar,episode_regret,sum_loss,cum_gradients,cum_matvecs\n";
    for (const auto& e : r.episodes)
        os << e.k << ',' << e.grad_norm_at_wbar << ',' << e.episode_regret << ',' << e.sum_loss
           << ',' << e.cum_gradients << ',' << e.cum_matvecs << '\n';
    return os.str();
}

inline std::string gd_csv(const GdReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "step,grad_norm,cum_gradients\n";
    for (std::size_t k = 0; k < r.grad_norms.size(); ++k)
        os << k << ',' << r.grad_norms[k] << ',' << (k + 1) << '\n';
    return os.str();
}

// One JSON object per line: trust-region solves and learner updates.
inline std::string event_log(const RunReport& r) {
    using report_detail::num;
    std::ostringstream os;
    os << json{{"event", "run"}, {"seed", r.seed}, {"rng_draws", r.rng_draws}}.dump() << '\n';
    for (const auto& s : r.steps) {
        if (s.tr_called)
            os << json{{"event", "tr_solve"},      {"n", s.n},
                       {"branch", to_string(s.branch)}, {"lambda_hat", num(s.lambda_hat)},
                       {"lanczos_steps", s.lanczos_steps}, {"grad_iters", s.grad_iters},
                       {"matvecs", s.tr_matvecs},  {"matvec_bound", num(s.tr_bound)},
                       {"residual", num(s.tr_residual)}, {"retried", s.tr_retried}}
                      .dump()
               << '\n';
        if (s.learner_updated)
            os << json{{"event", "learner"}, {"n", s.n - 1},       {"gamma", num(s.gamma)},
                       {"loss", num(s.loss_b)}, {"w_frob", num(s.w_norm)},
                       {"sep_matvecs", s.sep_matvecs}}
                      .dump()
               << '\n';
    }
    return os.str();
}

struct ExperimentResult {
    json report;
    std::string csv;
    std::string events;
    bool audit_ok = true;
    double wall_seconds = 0.0;  // kept out of the report for determinism
    std::optional<RunReport> run;
};

inline ExperimentResult run_experiment(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ObjectiveSpec spec = problem_of(cfg);
    ExperimentResult out;
    out.report = json{{"config", config_echo(cfg)}};
    if (cfg.method == "gd_baseline") {
        const double step = cfg.step_size.value_or(1.0 / spec.l1);
        const GdReport g = baseline_gd(spec, cfg.budget, step);
        out.report["result"] = json{{"best_grad_norm", report_detail::num(g.best_grad_norm)},
                                    {"final_x", report_detail::vec(g.x_final)}};
        out.report["totals"] = json{{"steps", cfg.budget}, {"gradients", g.gradients}};
        out.csv = gd_csv(g);
    } else {
        const HyperParams params = params_of(cfg, spec);
        RngStream rng(cfg.seed);
        RunOptions opt;
        opt.method = cfg.method == "oqn" ? Method::Oqn : Method::OgBaseline;
        opt.audit = cfg.audit;
        opt.eps_target = cfg.eps_target;
        RunReport rep = run(spec, params, rng, opt);
        const json body = to_json(rep);
        for (const auto& [k, v] : body.items()) out.report[k] = v;
        out.csv = episode_csv(rep);
        out.events = event_log(rep);
        out.audit_ok = rep.audits.all_ok;
        out.run = std::move(rep);
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

} // namespace oqn
