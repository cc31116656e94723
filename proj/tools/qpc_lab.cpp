// qpc-lab: command-line front end for the experiment runner.
//
//   qpc-lab <experiment> --config cfg.json [--out dir] [--threads n] [--seed s]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qpcocycle/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Numerical experiments for analytic quasi-periodic SL(2) cocycles"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir = "out";
    unsigned threads = 0;
    std::uint64_t seed = 0;

    for (const auto& name : qpc::cli::subcommands()) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->add_option("--config,-c", config_path, "JSON config file")->required();
        sub->add_option("--out,-o", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads,-t", threads, "worker threads (0 = hardware)");
        sub->add_option("--seed,-s", seed, "override the config seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto* sub = app.get_subcommands().front();
    qpc::cli::RunOptions opt;
    opt.out = out_dir;
    if (sub->count("--threads"))
        opt.threads = threads;
    if (sub->count("--seed"))
        opt.seed = seed;

    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "cannot read config " << config_path << '\n';
            return 2;
        }
        try {
            config = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "config is not valid JSON: " << e.what() << '\n';
            return 2;
        }
    }

    const auto res = qpc::cli::run(sub->get_name(), std::move(config), opt);
    if (res.exit_code == 0)
        for (const auto& f : res.files)
            std::cout << f.string() << '\n';
    return res.exit_code;
}
