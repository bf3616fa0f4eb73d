// Minimal library use: catalog problem, automatic parameters, one run.
#include <oqn/oqn.hpp>

#include <cstdio>

int main() {
    const oqn::ObjectiveSpec spec = oqn::catalog("cosine_mixture", 8, 1);
    const oqn::HyperParams params = oqn::compute_hyperparams(spec, 960);
    oqn::RngStream rng(7);
    const oqn::RunReport rep = oqn::run(spec, params, rng);

    std::printf("D=%.5g eta=%.5g T=%lld K=%lld delta=%.5g\n", params.d_radius, params.eta,
                static_cast<long long>(params.t_len), static_cast<long long>(params.k_eps),
                params.delta_tr);
    std::printf("best episode %lld: |grad f(w_hat)| = %.6g\n", static_cast<long long>(rep.best_k),
                rep.grad_norm_final);
    std::printf("gradients %llu, matvecs %llu, audits %s\n",
                static_cast<unsigned long long>(rep.gradients),
                static_cast<unsigned long long>(rep.matvecs), rep.audits.all_ok ? "ok" : "FAILED");
    return rep.audits.all_ok ? 0 : 2;
}
