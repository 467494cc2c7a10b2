#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cylkam/cli.hpp"
#include "cylkam/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cylkam: simultaneous linearization engine for commuting cylinder maps"};
    app.set_version_flag("--version", cylkam::engine_version);
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::string out;
        bool quiet = false;
    };

    const std::vector<std::string> names = {"cohomology",        "kam",       "standard-map",
                                            "diagnose",          "counterexample-2d",
                                            "constants"};
    std::map<std::string, Options> opts;
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts[name].config, "path to the JSON run config")
            ->required();
        sub->add_option("--out", opts[name].out, "output directory (overrides the config)");
        sub->add_flag("--quiet", opts[name].quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    const Options& o = opts[name];

    try {
        cylkam::cli::RunConfig cfg = cylkam::cli::load_config(o.config, name);
        if (!o.out.empty()) cfg.output_dir = o.out;
        return cylkam::cli::execute(cfg, o.quiet);
    } catch (const cylkam::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return cylkam::cli::exit_config;
    } catch (const cylkam::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return cylkam::cli::exit_numerical;
    }
}
