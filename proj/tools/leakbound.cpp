#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "leakbound/experiments/commands.hpp"

int main(int argc, char** argv)
{
    using namespace leakbound::experiments;

    CLI::App app{"leakbound: information-theoretic success-rate bounds for masked implementations"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t threads = 0;
    std::string profile_name = "desk";

    const char* commands[][2] = {
        {"mi", "estimate I(X;Y|T) and I(U;Y|T) curves"},
        {"bound", "Fano success-rate ceilings and minimum trace counts"},
        {"attack", "empirical success rate of the ML distinguisher"},
        {"converge", "Monte-Carlo convergence sweep over N_C"},
        {"oracle", "exact quadrature vs Monte-Carlo comparison (ell <= 3, q <= 2)"},
    };
    for (auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--threads", threads, "worker threads (0 = all cores)");
        sub->add_option("--profile", profile_name, "default N_C when the config omits n_draws")
            ->check(CLI::IsMember({"desk", "paper"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const Profile profile = profile_name == "paper" ? Profile::paper : Profile::desk;
    RunContext ctx;
    ctx.threads = threads;
    return run_command(app.get_subcommands().front()->get_name(), config_path, profile, ctx);
}
