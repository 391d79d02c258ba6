#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sigabc/error.hpp"
#include "sigabc/experiment.hpp"
#include "sigabc/parallel.hpp"

namespace {

/// Wraps a subcommand so ValidationError exits 1 and anything else exits 2.
int guarded(void (*cmd)(const sigabc::CommandOptions&), const sigabc::CommandOptions& o) {
    try {
        cmd(o);
        return 0;
    } catch (const sigabc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        sigabc::apply_thread_env();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"Likelihood-free inference for time-series simulators with signature kernels"};
    app.require_subcommand(1);
    sigabc::CommandOptions o;
    std::uint64_t seed = 0;
    std::size_t n = 0, m = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--out", o.out, "output path");
        sub->add_option("--n", n, "number of prior-predictive simulations N");
        sub->add_option("--m", m, "number of retained particles M");
    };

    auto* simulate = app.add_subcommand("simulate", "simulate an observation");
    common(simulate);
    simulate->add_option("--theta", o.theta, "generating parameters (defaults to the config's theta)")->delimiter(',');

    auto* infer = app.add_subcommand("infer", "run rejection ABC against an observation");
    common(infer);
    infer->add_option("--observation", o.observation, "observation CSV")->required()->check(CLI::ExistingFile);
    infer->add_option("--method", o.method, "sig, sig-leadlag, skrr, mmd, wass or sa")->required();
    infer->add_flag("--force", o.force, "ignore a model fingerprint mismatch with the observation");

    auto* reference = app.add_subcommand("reference", "sample the reference posterior");
    common(reference);
    reference->add_option("--observation", o.observation, "observation CSV")->required()->check(CLI::ExistingFile);

    auto* evaluate = app.add_subcommand("evaluate", "compare ABC particles with a reference posterior");
    evaluate->add_option("--particles", o.particles, "particle CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--reference", o.reference, "reference sample CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out", o.out, "metrics JSON path");
    evaluate->add_flag("--force", o.force, "evaluate even if fingerprints differ");
    // Accepted for a uniform interface; evaluation is deterministic and config-free.
    evaluate->add_option("--config", o.config_path, "unused");

    auto* sweep = app.add_subcommand("sweep", "infer and evaluate every method for every seed");
    common(sweep);
    sweep->add_option("--method", o.method, "comma-separated subset of the configured methods");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto given = [](CLI::App* sub, const char* flag) { return sub->count(flag) > 0; };
    CLI::App* active = app.get_subcommands().front();
    if (active != evaluate) {
        if (given(active, "--seed")) o.seed = seed;
        if (given(active, "--n")) o.n = n;
        if (given(active, "--m")) o.m = m;
    }

    if (active == simulate) return guarded(sigabc::cmd_simulate, o);
    if (active == infer) return guarded(sigabc::cmd_infer, o);
    if (active == reference) return guarded(sigabc::cmd_reference, o);
    if (active == evaluate) return guarded(sigabc::cmd_evaluate, o);
    return guarded(sigabc::cmd_sweep, o);
}
