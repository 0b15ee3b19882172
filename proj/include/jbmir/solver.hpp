#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jbmir/dot.hpp"
#include "jbmir/functional.hpp"
#include "jbmir/metrics.hpp"
#include "jbmir/xct.hpp"

namespace jbmir {

struct LineSearchParams {
    double c = 1e-4;        // sufficient-decrease constant
    double rho = 0.5;       // shrink factor
    double t0 = 0.0;        // fixed first trial step; <= 0 selects the adaptive rule
    int max_backtracks = 40;

    void validate() const;
};

struct ScheduleParams {
    int outer = 80;
    int inner = 10;
    int dot_warm_start = 50;
    int dot_edge_init = 20;

    void validate() const;
};

struct Bounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

enum class StepStatus { accepted, converged, stalled };
const char* to_string(StepStatus s);

struct StepResult {
    ScalarField x;
    double t = 0.0;
    double value = 0.0;
    StepStatus status = StepStatus::accepted;
    int backtracks = 0;
};

/// One projected gradient step with Armijo backtracking.
/// Trial points are x(t) = clamp(x - t g, bounds) for t = t0, t0 rho, t0 rho^2, ...
/// and x(t) is accepted when f(x(t)) <= f(x) - c <g, x - x(t)>, which equals the
/// classic f(x) - c t |g|^2 whenever no bound is active.
/// Throws NumericalError on a non-finite value or gradient.
StepResult backtracking_step(const std::function<double(const ScalarField&)>& objective, const ScalarField& x,
                             double fx, const ScalarField& grad, double t0, Bounds bounds,
                             const LineSearchParams& ls);

enum class Block { u1, v1, u2, v2, init_u2, init_v2 };
const char* to_string(Block b);

struct StepRecord {
    int outer = 0;  // -1 for initialisation steps
    Block block = Block::u1;
    int step = 0;
    double t = 0.0;
    StepStatus status = StepStatus::accepted;
    TermBreakdown terms;
    std::optional<double> ssim;
};

struct RunLog {
    std::vector<StepRecord> records;

    void write_jsonl(std::ostream& out) const;
};

/// Everything that stays fixed during a reconstruction.
struct ReconstructionSetup {
    GridGeometry grid;
    ScanGeometry scan;
    OpticsGeometry optics;
    DiffusionModel diffusion;
    double xct_weight = 1.0;  // multiplies ||R u1 - g1||^2
    double dot_weight = 1.0;  // multiplies ||G(u2) - g2||^2
    LineSearchParams linesearch;
    ScheduleParams schedule;
};

/// Optional ground truth for logging SSIM alongside each step.
struct TruthMonitor {
    const ScalarField* u1 = nullptr;
    const ScalarField* u2 = nullptr;
    SsimParams ssim;
};

struct JbmirResult {
    JointState state;
    RunLog log;
};

struct SmirResult {
    ScalarField u;
    ScalarField v;
    RunLog log;
};

/// u1 = 0 and v1 = 1 everywhere.
std::pair<ScalarField, ScalarField> init_xct(const GridGeometry& grid);

/// Background start, fidelity-only warm start, then edge-indicator descent with u fixed.
/// `p` supplies alpha, beta and eps for the edge stage; coupling is not used here.
std::pair<ScalarField, ScalarField> init_dot(const ReconstructionSetup& setup, DotOperator& op,
                                             const BoundaryData& g2, const ModalityParams& p,
                                             RunLog* log = nullptr);

/// Alternating minimisation over (u1, v1, u2, v2) in that order.
JbmirResult jbmir(const ReconstructionSetup& setup, const Sinogram& g1, const BoundaryData& g2,
                  const RegParams& params, const TruthMonitor* truth = nullptr);

/// Single-modality Ambrosio-Tortorelli reconstruction (u, v alternation without coupling).
SmirResult smir_xct(const ReconstructionSetup& setup, const Sinogram& g1, const ModalityParams& p,
                    const TruthMonitor* truth = nullptr);
SmirResult smir_dot(const ReconstructionSetup& setup, const BoundaryData& g2, const ModalityParams& p,
                    const TruthMonitor* truth = nullptr);

/// Constant initial absorption for the DOT warm start, mm^-1.
inline constexpr double kDotBackground = 0.01;

}  // namespace jbmir
