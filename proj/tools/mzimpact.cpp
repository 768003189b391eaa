#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mzimpact/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Impact simulation with memory-kernel model reduction"};
    app.require_subcommand(1);
    std::string config, out_dir = ".";
    std::vector<std::string> overrides;
    for (const auto& name : mzimpact::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON configuration file")->required();
        sub->add_option("--out-dir", out_dir, "directory for output files");
        sub->add_option("--override", overrides, "key=value override, dotted keys (repeatable)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const mzimpact::RunConfig cfg = mzimpact::parse_config(config, overrides);
        mzimpact::run_subcommand(name, cfg, mzimpact::OutputDir(out_dir));
    } catch (const mzimpact::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mzimpact::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
