#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jbmir/errors.hpp"
#include "jbmir/kernels.hpp"
#include "jbmir/pipeline.hpp"

namespace {

enum Exit { ok = 0, usage = 1, config = 2, data = 3, numerical = 4 };

struct Common {
    std::string config_path;
    int example = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string ssim_domain;
    std::vector<std::string> overrides;
    std::string simd;
};

jbmir::RunConfig effective(const Common& c) {
    jbmir::RunConfig cfg;
    if (!c.config_path.empty()) {
        if (c.example != 0) throw jbmir::ConfigError("--config and --example are mutually exclusive");
        cfg = jbmir::load_config(c.config_path);
    } else if (c.example != 0) {
        cfg = jbmir::example_config(c.example);
    }
    for (const auto& o : c.overrides) jbmir::apply_override(cfg, o);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (!c.ssim_domain.empty()) jbmir::apply_override(cfg, "output/ssim_domain=" + c.ssim_domain);
    cfg.validate();
    if (c.simd == "scalar") jbmir::kernels::force(jbmir::kernels::Isa::scalar);
    else if (c.simd == "avx2") jbmir::kernels::force(jbmir::kernels::Isa::avx2);
    else if (!c.simd.empty() && c.simd != "auto") throw jbmir::ConfigError("--simd expects scalar, avx2 or auto");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint XCT/DOT reconstruction with coupled Mumford-Shah edge priors"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--config", common.config_path, "INI configuration file");
    app.add_option("--example", common.example, "Start from the preset of example 1, 2 or 3")
        ->check(CLI::Range(1, 3));
    app.add_option("--seed", common.seed, "Noise seed");
    app.add_option("--out", common.out, "Output directory");
    app.add_option("--ssim-domain", common.ssim_domain, "SSIM statistics over the disk or the full square")
        ->check(CLI::IsMember({"disk", "full"}));
    app.add_option("--set", common.overrides, "Override a key: section/key=value (repeatable)");
    app.add_option("--simd", common.simd, "Kernel variant: auto, scalar or avx2");

    auto* phantom = app.add_subcommand("phantom", "Write the ground-truth coefficient maps");
    auto* simulate = app.add_subcommand("simulate", "Write clean and noisy measurements");
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct from the measurements");
    std::string mode = "jbmir";
    reconstruct->add_option("--mode", mode, "smir-xct, smir-dot or jbmir")
        ->check(CLI::IsMember({"smir-xct", "smir-dot", "jbmir"}));
    auto* evaluate = app.add_subcommand("evaluate", "SSIM and line profiles of a reconstruction");
    std::string rec, truth;
    std::optional<double> profile_x;
    evaluate->add_option("--rec", rec, "Reconstructed field CSV")->required();
    evaluate->add_option("--truth", truth, "Ground-truth field CSV")->required();
    evaluate->add_option("--profile-x", profile_x, "Column position in mm for line profiles");
    auto* run_all = app.add_subcommand("run-all", "phantom, simulate, reconstruct (all modes), evaluate");
    bool reuse = false;
    run_all->add_flag("--reuse-data", reuse, "Keep existing measurement files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    }

    try {
        const jbmir::RunConfig cfg = effective(common);
        if (*phantom) {
            jbmir::echo_config(cfg);
            jbmir::cmd_phantom(cfg);
        } else if (*simulate) {
            jbmir::echo_config(cfg);
            jbmir::cmd_simulate(cfg);
        } else if (*reconstruct) {
            jbmir::echo_config(cfg);
            const auto summary = jbmir::cmd_reconstruct(cfg, jbmir::parse_mode(mode));
            std::cout << summary.dump(2) << '\n';
        } else if (*evaluate) {
            std::cout << jbmir::cmd_evaluate(rec, truth, cfg, profile_x).dump(2) << '\n';
        } else if (*run_all) {
            std::cout << jbmir::cmd_run_all(cfg, reuse).dump(2) << '\n';
        }
    } catch (const jbmir::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config;
    } catch (const jbmir::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return Exit::data;
    } catch (const jbmir::GeometryMismatch& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return Exit::data;
    } catch (const jbmir::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return Exit::numerical;
    }
    return Exit::ok;
}
