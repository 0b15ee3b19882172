#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "jbmir/dot.hpp"
#include "jbmir/functional.hpp"
#include "jbmir/metrics.hpp"
#include "jbmir/phantom.hpp"
#include "jbmir/solver.hpp"
#include "jbmir/xct.hpp"

namespace jbmir {

/// Effective configuration of a run. Defaults reproduce the first example:
/// phantom1, 5 % / 2 % relative noise and the reference regularisation weights.
struct RunConfig {
    GridGeometry grid;
    ScanGeometry scan;
    double xct_weight = 1.0;
    OpticsGeometry optics;
    double diffusion = 0.3;  // mm
    double mu_a_floor = 1e-6;
    double dot_weight = 1.0;

    std::string phantom_name = "phantom1";
    PhantomPair phantom = builtin_phantom("phantom1");
    bool inline_shapes = false;

    double eta1 = 0.05;
    double eta2 = 0.02;
    std::uint64_t seed = 20240601;

    RegParams jbmir = default_jbmir();
    ModalityParams smir_xct{8.8e3, 8e-3, 0.0, 1e-4};
    ModalityParams smir_dot{1e5, 5e-7, 0.0, 1e-4};
    LineSearchParams linesearch;
    ScheduleParams schedule;

    std::filesystem::path out_dir = "out";
    SsimDomain ssim_domain = SsimDomain::disk;

    static RegParams default_jbmir();

    DiffusionModel diffusion_model() const { return DiffusionModel::uniform(grid, diffusion, mu_a_floor); }
    ReconstructionSetup setup() const;
    SsimParams ssim_params() const;
    /// Throws ConfigError on any inconsistent value.
    void validate() const;
};

/// Parse an INI document; unknown sections or keys are errors. Missing keys keep their defaults.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// `section/key=value` override, e.g. "params.jbmir/gamma1=0".
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Every key with its effective value; parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const RunConfig& cfg);

/// Experiment presets: "example1", "example2", "example3".
RunConfig example_config(int example);

}  // namespace jbmir
