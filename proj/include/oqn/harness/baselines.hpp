#pragma once

#include <vector>

#include "../oqn.hpp"
#include "../problems.hpp"

namespace oqn {

struct GdReport {
    std::vector<double> grad_norms;  // ||grad f(x_k)||, k = 0..steps-1
    Vector x_final;
    std::uint64_t gradients = 0;
    double best_grad_norm = kNaN;
};

// Plain gradient descent, one gradient per step.
inline GdReport baseline_gd(const ObjectiveSpec& spec, std::int64_t steps, double step_size) {
    validate(spec);
    if (!(step_size > 0.0)) throw Error(ErrorCode::InvalidStep, "step size must be positive");
    OracleCounter c;
    GdReport r;
    Vector x = spec.x0;
    for (std::int64_t k = 0; k < steps; ++k) {
        const Vector g = eval_gradient(spec, x, c);
        r.grad_norms.push_back(g.norm());
        x -= step_size * g;
    }
    r.x_final = x;
    r.gradients = c.gradients;
    if (!r.grad_norms.empty())
        r.best_grad_norm = *std::min_element(r.grad_norms.begin(), r.grad_norms.end());
    return r;
}

// Optimistic gradient with the hint grad f(z_{n-1}) and closed-form projection.
inline RunReport baseline_og(const ObjectiveSpec& spec, const HyperParams& params, RngStream& rng,
                             AuditLevel audit = AuditLevel::Episode) {
    RunOptions opt;
    opt.method = Method::OgBaseline;
    opt.audit = audit;
    return run(spec, params, rng, opt);
}

} // namespace oqn
