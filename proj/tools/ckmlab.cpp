// ckmlab: run complexified-Kuramoto experiments from a JSON config or a preset.
//
//   ckmlab <mode> (--config PATH | --preset NAME) [--out DIR] [--seed N] [--workers N]
//   ckmlab presets
//
// Exit status: 0 success, 2 invalid configuration or arguments, 3 runtime failure.
// Errors are reported on stderr as {"error": {"kind": ..., "message": ...}}.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ckm/errors.hpp"
#include "ckm/lab.hpp"

namespace {

int report_error(const char *kind, const std::string &message, int code) {
    const ckm::lab::json err = {{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
    return code;
}

struct Flags {
    std::string config;
    std::string preset;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulation and analysis of the complexified Kuramoto model"};
    app.require_subcommand(1);
    Flags flags;

    const char *modes[] = {"simulate", "period", "equilibria", "flowfield", "blowup-demo", "sweep", "classify"};
    for (const char *mode : modes) {
        auto *sub = app.add_subcommand(mode, std::string("run a ") + mode + " experiment");
        auto *config = sub->add_option("--config", flags.config, "JSON run configuration");
        auto *preset = sub->add_option("--preset", flags.preset, "named preset (see 'ckmlab presets')");
        config->excludes(preset);
        sub->add_option("--out", flags.out, "output directory")->capture_default_str();
        sub->add_option("--seed", flags.seed, "64-bit seed for random initial phases");
        sub->add_option("--workers", flags.workers, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
    }
    app.add_subcommand("presets", "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return report_error("invalid-arguments", e.what(), 2);
    }

    auto *chosen = app.get_subcommands().front();
    if (chosen->get_name() == "presets") {
        for (const auto &name : ckm::lab::preset_names()) {
            std::cout << name << '\n';
        }
        return 0;
    }

    ckm::lab::RunConfig cfg;
    try {
        if (flags.config.empty() == flags.preset.empty()) {
            throw ckm::InvalidInput("give exactly one of --config or --preset");
        }
        cfg = flags.config.empty() ? ckm::lab::preset(flags.preset) : ckm::lab::load_config(flags.config);
        if (ckm::lab::to_string(cfg.mode) != chosen->get_name()) {
            throw ckm::InvalidInput(std::string("configuration is for mode '") + ckm::lab::to_string(cfg.mode) +
                                    "', not '" + chosen->get_name() + "'");
        }
        if (flags.seed) {
            cfg.seed = *flags.seed;
        }
        ckm::lab::validate(cfg);
    } catch (const ckm::Error &e) {
        return report_error(e.kind(), e.what(), 2);
    }

    try {
        const auto result = ckm::lab::run(cfg, {flags.out, flags.workers});
        for (const auto &path : result.artifacts) {
            std::cout << path.string() << '\n';
        }
    } catch (const ckm::InvalidInput &e) {
        return report_error(e.kind(), e.what(), 2);
    } catch (const ckm::Error &e) {
        return report_error(e.kind(), e.what(), 3);
    } catch (const std::exception &e) {
        return report_error("runtime", e.what(), 3);
    }
    return 0;
}
