// billiard-thermo <subcommand> [--config FILE] [--seed N] [--out DIR] [--replicas K]
//
// Exit codes: 0 ok, 2 configuration error, 3 invariant violation, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "billiard_thermo/cli/config.hpp"
#include "billiard_thermo/cli/experiments.hpp"
#include "billiard_thermo/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct Options {
    std::string config;
    std::optional<std::int64_t> seed;
    std::optional<std::string> out;
    std::optional<std::int64_t> replicas;
    bool echo = false;
};

int report_config_error(const bt::ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return kExitConfig;
}

int run(bt::cli::ExperimentKind kind, const Options& o) {
    bt::cli::ExperimentConfig c =
        o.config.empty() ? bt::cli::default_config(kind) : bt::cli::parse_config(o.config, kind);
    if (o.seed) {
        if (*o.seed < 0) throw bt::ConfigError({"--seed must be non-negative"});
        c.seed = static_cast<std::uint64_t>(*o.seed);
    }
    if (o.out) c.out = *o.out;
    if (o.replicas) c.replicas = *o.replicas;
    if (auto errors = bt::cli::validate(c); !errors.empty()) throw bt::ConfigError(std::move(errors));

    const std::string echoed = bt::cli::echo_config(c);
    if (o.echo) {
        std::cout << echoed;
        return 0;
    }
    std::cout << "# resolved configuration\n" << echoed << '\n';
    const auto result = bt::cli::run_experiment(c, &std::cerr);
    for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << '\n';
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    std::cout << "wrote " << result.manifest.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Billiard thermostats, heat flow and a Brownian engine"};
    app.require_subcommand(1);
    Options opts;
    std::optional<bt::cli::ExperimentKind> chosen;

    for (const auto kind : bt::cli::all_kinds()) {
        const std::string name(bt::cli::kind_name(kind));
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config,-c", opts.config, "TOML configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "override the seed");
        sub->add_option("--out,-o", opts.out, "output directory");
        sub->add_option("--replicas", opts.replicas, "number of replicas");
        sub->add_flag("--echo-config", opts.echo, "print the resolved configuration and exit");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        return run(*chosen, opts);
    } catch (const bt::ConfigError& e) {
        return report_config_error(e);
    } catch (const bt::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
