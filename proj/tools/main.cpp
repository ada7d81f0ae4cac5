// subgauss experiment runner: every check and study behind one reproducible,
// config-driven entry point.
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subgauss/cli.hpp"
#include "subgauss/common.hpp"

namespace {

struct CommandArgs {
    std::string configPath;
    std::vector<std::string> overrides;
};

int execute(const std::string& command, const CommandArgs& args) {
    try {
        auto cfg = subgauss::cli::ExperimentConfig::fromFile(args.configPath);
        if (cfg.command != command) {
            std::cerr << "config names command '" << cfg.command << "' but '" << command
                      << "' was invoked\n";
            return subgauss::cli::kExitInputError;
        }
        for (const auto& kv : args.overrides) cfg.applyOverride(kv);
        return subgauss::cli::run_experiment(cfg);
    } catch (const subgauss::NotTransitive& e) {
        std::cerr << "check failed (NotTransitive): " << e.what() << "\n";
        return subgauss::cli::kExitCheckFailed;
    } catch (const subgauss::NotInvariant& e) {
        std::cerr << "check failed (NotInvariant): " << e.what() << "\n";
        return subgauss::cli::kExitCheckFailed;
    } catch (const subgauss::CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return subgauss::cli::kExitCheckFailed;
    } catch (const subgauss::cli::ConfigParse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return subgauss::cli::kExitInputError;
    } catch (const subgauss::cli::InputMissing& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return subgauss::cli::kExitInputError;
    } catch (const subgauss::IOError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return subgauss::cli::kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return subgauss::cli::kExitInputError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subgauss: couplings, tensorization and chaining experiments"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"fernique", "tensorize", "chaining",
                                               "compare", "strassen", "identity", "sample"};
    std::map<std::string, CommandArgs> args;
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", args[name].configPath, "experiment config JSON")
            ->required();
        sub->add_option("--set", args[name].overrides,
                        "override a config entry, key=value (repeatable)");
    }

    CLI11_PARSE(app, argc, argv);
    for (const auto& name : commands)
        if (app.got_subcommand(name)) return execute(name, args[name]);
    return subgauss::cli::kExitInputError;
}
