// Command-line front end: check-density | sphericalize | verify <which>.
// Exit codes: 0 success, 2 inconclusive classification, 1 error.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sphere/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sphericalization of unbounded metric measure spaces"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "sphere_out";
    std::uint64_t seed = 0;
    bool force = false;
    app.add_option("--config", config_path, "INI configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_flag("--force", force, "sphericalize even when the density fails conditions A/B");

    auto* check = app.add_subcommand("check-density", "classify the configured density");
    auto* sph = app.add_subcommand("sphericalize", "build the sphericalized model and export summaries");
    auto* ver = app.add_subcommand("verify", "run verification sweeps");
    std::string which = "all";
    ver->add_option("which", which, "uniformity | doubling | brackets | poincare | counterexamples | all")
        ->check(CLI::IsMember({"uniformity", "doubling", "brackets", "poincare", "counterexamples", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sphere::exit_error;
    }

    try {
        auto cfg = sphere::load_config(config_path);
        if (*seed_opt) cfg.seed = seed;
        if (force) cfg.force = true;
        const std::filesystem::path out(out_dir);
        sphere::prepare_output(cfg, out);
        if (check->parsed()) return sphere::cmd_check_density(cfg, out, std::cout);
        if (sph->parsed()) return sphere::cmd_sphericalize(cfg, out, std::cout);
        if (ver->parsed()) return sphere::cmd_verify(cfg, which, out, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sphere::exit_error;
    }
    return sphere::exit_error;
}
