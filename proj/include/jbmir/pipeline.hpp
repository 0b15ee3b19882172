#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "jbmir/config.hpp"

namespace jbmir {

enum class ReconMode { smir_xct, smir_dot, jbmir };
const char* to_string(ReconMode m);
/// "smir-xct", "smir-dot" or "jbmir"; throws ConfigError otherwise.
ReconMode parse_mode(const std::string& s);

/// Fixed output layout below one directory.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path truth(Modality m) const;
    std::filesystem::path data(Modality m, bool clean) const;
    std::filesystem::path recon_dir(ReconMode m) const { return root / "recon" / to_string(m); }
    std::filesystem::path log(ReconMode m) const { return root / "logs" / (std::string(to_string(m)) + ".jsonl"); }
    std::filesystem::path report() const { return root / "report.json"; }
    std::filesystem::path config_echo() const { return root / "config.ini"; }
};

/// truth/u1.csv, truth/u2.csv and their graymaps.
void cmd_phantom(const RunConfig& cfg);

/// data/g1*.csv and data/g2*.csv, clean and noisy, with eta and seed in the headers.
void cmd_simulate(const RunConfig& cfg);

/// Reads data/ (and truth/ when present), writes recon/<mode>/, logs/<mode>.jsonl and
/// recon/<mode>/summary.json; returns the summary.
nlohmann::json cmd_reconstruct(const RunConfig& cfg, ReconMode mode);

/// SSIM of two field files (with L, C1, C2) and optional line profiles at x = profile_x.
nlohmann::json cmd_evaluate(const std::filesystem::path& rec, const std::filesystem::path& truth,
                            const RunConfig& cfg, std::optional<double> profile_x = std::nullopt,
                            const std::filesystem::path& profile_dir = {});

/// phantom, simulate, the three reconstructions, then report.json.
/// With reuse_data, simulation is skipped when all data files exist.
nlohmann::json cmd_run_all(const RunConfig& cfg, bool reuse_data);

/// Writes the effective configuration to <out>/config.ini.
void echo_config(const RunConfig& cfg);

}  // namespace jbmir
