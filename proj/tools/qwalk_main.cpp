#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "qwalk/io.hpp"

// Command-line front end: `qwalk run <config>` executes an experiment config,
// `qwalk preset <name>` runs one of the built-in experiment files. The
// QWALK_OUT_DIR environment variable overrides the output directory.

int main(int argc, char** argv) {
    CLI::App app{"two-particle continuous-time quantum walk simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment config file");
    run_cmd->add_option("config", config_path, "path to the config file")->required();

    std::string preset_name;
    bool dump = false;
    auto* preset_cmd = app.add_subcommand("preset", "run a built-in experiment");
    preset_cmd->add_option("name", preset_name, "fig1|fig2|fig3|fig4|fig5|saturation")
        ->required();
    preset_cmd->add_flag("--dump", dump, "print the preset config text and exit");

    CLI11_PARSE(app, argc, argv);

    std::optional<std::string> out_dir;
    if (const char* env = std::getenv("QWALK_OUT_DIR")) out_dir = env;

    if (run_cmd->parsed()) return qwalk::io::run(config_path, std::cerr, out_dir);

    if (dump) {
        const auto& presets = qwalk::io::preset_texts();
        const auto it = presets.find(preset_name);
        if (it == presets.end()) {
            std::cerr << "unknown preset '" << preset_name << "'\n";
            return qwalk::io::kExitConfig;
        }
        std::cout << it->second;
        return 0;
    }
    return qwalk::io::run_preset(preset_name, std::cerr, out_dir);
}
