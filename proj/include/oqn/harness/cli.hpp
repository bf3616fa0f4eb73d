#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <string>

#include "bench.hpp"
#include "config.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace oqn {

namespace cli_detail {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
    f << text;
}

inline int cmd_run(const std::string& path, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(path);
    const ExperimentResult r = run_experiment(cfg);
    const std::string rep = r.report.dump(2) + "\n";
    if (!cfg.report_path.empty()) write_file(cfg.report_path, rep);
    else out << rep;
    if (!cfg.csv_path.empty()) write_file(cfg.csv_path, r.csv);
    if (!cfg.events_path.empty()) write_file(cfg.events_path, r.events);
    err << "wall_time_s=" << std::fixed << std::setprecision(3) << r.wall_seconds
        << " audits=" << (r.audit_ok ? "ok" : "FAILED") << '\n';
    return r.audit_ok ? 0 : 2;
}

inline int cmd_verify(const std::string& level, std::ostream& out) {
    const VerifySummary s = verify_suite(level);
    json checks = json::array();
    for (const auto& c : s.checks)
        checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"value", c.value},
                              {"threshold", c.threshold}, {"detail", c.detail}});
    out << json{{"level", s.level}, {"passed", s.all_passed()}, {"checks", checks}}.dump(2) << '\n';
    return s.all_passed() ? 0 : 2;
}

inline int cmd_bench(const std::string& path, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(path);
    const auto cells = run_bench(cfg);
    std::ostringstream csv;
    csv << std::setprecision(17) << "method,budget,seed,best_grad_norm,gradients,matvecs,audit_ok\n";
    bool ok = true;
    for (const auto& c : cells) {
        csv << c.method << ',' << c.budget << ',' << c.seed << ',' << c.best_grad_norm << ','
            << c.gradients << ',' << c.matvecs << ',' << (c.audit_ok ? 1 : 0) << '\n';
        ok = ok && c.audit_ok;
    }
    json series = json::array();
    for (const auto& s : summarize(cells))
        series.push_back(json{{"method", s.method}, {"budgets", s.budgets}, {"median_best_grad_norm", s.medians},
                              {"loglog_slope", report_detail::num(s.slope)}, {"nonincreasing", s.nonincreasing}});
    const std::string summary = json{{"config", config_echo(cfg)}, {"series", series}}.dump(2) + "\n";
    if (!cfg.csv_path.empty()) write_file(cfg.csv_path, csv.str());
    else out << csv.str();
    if (!cfg.report_path.empty()) write_file(cfg.report_path, summary);
    else err << summary;
    return ok ? 0 : 2;
}

inline int cmd_dump_params(const std::string& problem, std::int64_t m, std::ostream& out) {
    const ObjectiveSpec spec = problem_from_string(problem);
    const HyperParams p = compute_hyperparams(spec, m);
    out << std::setprecision(17) << "D=" << p.d_radius << "\neta=" << p.eta << "\nT=" << p.t_len
        << "\nK=" << p.k_eps << "\ndelta=" << p.delta_tr << "\nM=" << p.m_total
        << "\ngap=" << p.gap_used << '\n';
    return 0;
}

}  // namespace cli_detail

// Exit codes: 0 ok, 1 usage or configuration error, 2 audit or certificate failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Optimistic quasi-Newton nonconvex optimizer", "oqn"};
    app.require_subcommand(1);
    std::string cfg_path, bench_path, level = "quick", problem;
    std::int64_t m_budget = 0;
    auto* run_cmd = app.add_subcommand("run", "run one experiment from a key=value config");
    run_cmd->add_option("config", cfg_path, "config file")->required();
    auto* verify_cmd = app.add_subcommand("verify", "run the property suites");
    verify_cmd->add_option("--level", level, "quick or full");
    auto* bench_cmd = app.add_subcommand("bench", "grid over methods x budgets x seeds");
    bench_cmd->add_option("config", bench_path, "config file")->required();
    auto* dump_cmd = app.add_subcommand("dump-params", "print the automatic hyperparameters");
    dump_cmd->add_option("problem", problem, "name[:d=N][:seed=S]")->required();
    dump_cmd->add_option("M", m_budget, "iteration budget")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (*run_cmd) return cli_detail::cmd_run(cfg_path, out, err);
        if (*verify_cmd) return cli_detail::cmd_verify(level, out);
        if (*bench_cmd) return cli_detail::cmd_bench(bench_path, out, err);
        if (*dump_cmd) return cli_detail::cmd_dump_params(problem, m_budget, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        if (e.code() == ErrorCode::CertificateFailure) return 2;
        return 1;
    }
    err << app.help();
    return 1;
}

} // namespace oqn
