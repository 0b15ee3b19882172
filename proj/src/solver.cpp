#include "jbmir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "jbmir/errors.hpp"
#include "jbmir/kernels.hpp"

namespace jbmir {

void LineSearchParams::validate() const {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("linesearch.c must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("linesearch.rho must lie in (0, 1)");
    if (!std::isfinite(t0) || t0 < 0.0) throw ConfigError("linesearch.t0 must be finite and >= 0");
    if (max_backtracks < 0) throw ConfigError("linesearch.max_backtracks must be >= 0");
}

void ScheduleParams::validate() const {
    if (outer < 0 || inner < 0 || dot_warm_start < 0 || dot_edge_init < 0)
        throw ConfigError("schedule counts must be non-negative");
}

const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::accepted: return "accepted";
        case StepStatus::converged: return "converged";
        case StepStatus::stalled: return "stalled";
    }
    return "?";
}

const char* to_string(Block b) {
    switch (b) {
        case Block::u1: return "u1";
        case Block::v1: return "v1";
        case Block::u2: return "u2";
        case Block::v2: return "v2";
        case Block::init_u2: return "init_u2";
        case Block::init_v2: return "init_v2";
    }
    return "?";
}

StepResult backtracking_step(const std::function<double(const ScalarField&)>& objective, const ScalarField& x,
                             double fx, const ScalarField& grad, double t0, Bounds bounds,
                             const LineSearchParams& ls) {
    require_same_geometry(x.geometry(), grad.geometry(), "line search gradient");
    if (!std::isfinite(fx)) throw NumericalError("line search: objective is not finite at the current point");
    if (!grad.all_finite()) throw NumericalError("line search: gradient is not finite");

    const auto& k = kernels::active();
    const std::size_t n = x.size();
    StepResult r{x, 0.0, fx, StepStatus::converged, 0};

    bool zero = true;
    for (std::size_t p = 0; p < n && zero; ++p) zero = grad[p] == 0.0;
    if (zero) return r;
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw NumericalError("line search: initial step must be positive");

    ScalarField trial(x.geometry(), 0.0, x.unit());
    std::vector<double> diff(n);
    double t = t0;
    for (int b = 0; b <= ls.max_backtracks; ++b, t *= ls.rho) {
        k.projected_step(x.data(), grad.data(), t, bounds.lo, bounds.hi, trial.data(), n);
        for (std::size_t p = 0; p < n; ++p) diff[p] = x[p] - trial[p];
        const double decrease = k.dot(grad.data(), diff.data(), n);
        if (!(decrease > 0.0)) {
            // Every coordinate with a nonzero gradient component sits on an active bound.
            r.status = StepStatus::converged;
            r.backtracks = b;
            return r;
        }
        const double ft = objective(trial);
        if (!std::isfinite(ft)) throw NumericalError("line search: objective is not finite at a trial point");
        if (ft <= fx - ls.c * decrease) {
            r.x = std::move(trial);
            r.t = t;
            r.value = ft;
            r.status = StepStatus::accepted;
            r.backtracks = b;
            return r;
        }
    }
    r.status = StepStatus::stalled;
    r.backtracks = ls.max_backtracks;
    return r;
}

void RunLog::write_jsonl(std::ostream& out) const {
    char buf[128];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "{\"outer\":%d,\"block\":\"%s\",\"step\":%d,\"t\":%.17g,\"status\":\"%s\",",
                      r.outer, to_string(r.block), r.step, r.t, to_string(r.status));
        out << buf << "\"terms\":" << r.terms.to_json();
        if (r.ssim) {
            std::snprintf(buf, sizeof buf, ",\"ssim\":%.17g", *r.ssim);
            out << buf;
        }
        out << "}\n";
    }
}

std::pair<ScalarField, ScalarField> init_xct(const GridGeometry& grid) {
    return {ScalarField(grid, 0.0, FieldUnit::per_mm), ScalarField(grid, 1.0, FieldUnit::dimensionless)};
}

namespace {

// Scale of each variable, used to size the first trial step as range / |g|_inf.
constexpr double kRangeU1 = 2.5;
constexpr double kRangeV = 1.0;
constexpr double kRangeU2 = 0.03;

double max_abs(const ScalarField& g) {
    double m = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) m = std::max(m, std::abs(g[p]));
    return m;
}

struct StepSizer {
    double last = 0.0;

    double initial(const ScalarField& g, double range, const LineSearchParams& ls) const {
        if (last > 0.0) return 2.0 * last;
        if (ls.t0 > 0.0) return ls.t0;
        const double m = max_abs(g);
        return m > 0.0 ? range / m : 1.0;
    }
};

// Runs blocks of the alternating scheme on a shared state and keeps the term
// breakdown current without re-evaluating frozen terms.
class Driver {
public:
    Driver(JointObjective& obj, JointState& s, const ReconstructionSetup& setup, const TruthMonitor* truth,
           RunLog& log)
        : obj_(obj), s_(s), setup_(setup), truth_(truth), log_(log), terms_(obj.eval(s)) {}

    const TermBreakdown& terms() const { return terms_; }

    void run_block(Block b, int outer, int steps, Block label) {
        const bool is_v = b == Block::v1 || b == Block::v2;
        const int i = (b == Block::u1 || b == Block::v1) ? 0 : 1;
        const int j = 1 - i;
        const bool coupled = is_v && obj_.has(j) && obj_.params()[j].gamma != 0.0;
        const auto bi = static_cast<std::size_t>(b);

        Bounds bounds;
        double range = kRangeV;
        if (is_v) {
            bounds = {0.0, 1.0};
        } else if (i == 1) {
            bounds.lo = setup_.diffusion.mu_a_floor;
            range = kRangeU2;
        } else {
            range = kRangeU1;
        }

        auto restricted = [&](const TermBreakdown& t) { return coupled ? t.total() : t.slot_total(i); };

        for (int step = 0; step < steps; ++step) {
            TermBreakdown trial_terms = terms_;
            std::function<double(const ScalarField&)> f;
            if (is_v) {
                f = [&](const ScalarField& v) {
                    trial_terms = terms_;
                    trial_terms.smooth[static_cast<std::size_t>(i)] = obj_.smooth(i, s_.u(i), v);
                    trial_terms.edge[static_cast<std::size_t>(i)] = obj_.edge(i, v, s_.v(j));
                    if (coupled) trial_terms.edge[static_cast<std::size_t>(j)] = obj_.edge(j, s_.v(j), v);
                    return restricted(trial_terms);
                };
            } else {
                f = [&](const ScalarField& u) {
                    trial_terms = terms_;
                    trial_terms.fidelity[static_cast<std::size_t>(i)] = obj_.fidelity(i, u);
                    trial_terms.smooth[static_cast<std::size_t>(i)] = obj_.smooth(i, u, s_.v(i));
                    return restricted(trial_terms);
                };
            }

            ScalarField& x = is_v ? s_.v(i) : s_.u(i);
            const ScalarField g = is_v ? obj_.grad_v(i, s_) : obj_.grad_u(i, s_);
            const double t0 = sizer_[bi].initial(g, range, setup_.linesearch);
            StepResult r = backtracking_step(f, x, restricted(terms_), g, t0, bounds, setup_.linesearch);

            StepRecord rec;
            rec.outer = outer;
            rec.block = label;
            rec.step = step;
            rec.status = r.status;
            if (r.status == StepStatus::accepted) {
                x = std::move(r.x);
                terms_ = trial_terms;
                sizer_[bi].last = r.t;
                rec.t = r.t;
            } else {
                sizer_[bi].last = 0.0;
            }
            rec.terms = terms_;
            rec.ssim = monitor(i);
            log_.records.push_back(rec);
            if (r.status != StepStatus::accepted) break;
        }
    }

private:
    std::optional<double> monitor(int i) const {
        if (!truth_) return std::nullopt;
        const ScalarField* t = i == 0 ? truth_->u1 : truth_->u2;
        if (!t) return std::nullopt;
        return ssim_global(s_.u(i), *t, truth_->ssim);
    }

    JointObjective& obj_;
    JointState& s_;
    const ReconstructionSetup& setup_;
    const TruthMonitor* truth_;
    RunLog& log_;
    TermBreakdown terms_;
    std::array<StepSizer, 6> sizer_{};
};

void run_with_context(Block b, int outer, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("block ") + to_string(b) + ", outer iteration " + std::to_string(outer) +
                             ": " + e.what());
    }
}

void alternate(Driver& d, const ScheduleParams& sched, std::initializer_list<Block> blocks) {
    for (int it = 0; it < sched.outer; ++it)
        for (Block b : blocks) run_with_context(b, it, [&] { d.run_block(b, it, sched.inner, b); });
}

void validate_setup(const ReconstructionSetup& s) {
    s.grid.validate();
    s.scan.validate();
    s.optics.validate();
    s.linesearch.validate();
    s.schedule.validate();
    if (!(s.xct_weight > 0.0) || !(s.dot_weight > 0.0)) throw ConfigError("fidelity weights must be positive");
}

RegParams single(const ModalityParams& p) {
    RegParams r;
    r.m = {p, p};
    r.m[0].gamma = 0.0;
    r.m[1].gamma = 0.0;
    return r;
}

}  // namespace

std::pair<ScalarField, ScalarField> init_dot(const ReconstructionSetup& setup, DotOperator& op,
                                             const BoundaryData& g2, const ModalityParams& p, RunLog* log) {
    const GridGeometry& grid = setup.grid;
    require_same_geometry(op.grid(), grid, "init_dot operator");
    RunLog scratch;
    RunLog& out = log ? *log : scratch;

    DotFidelity fid(op, g2, setup.dot_weight);
    ScalarField u(grid, kDotBackground, FieldUnit::per_mm);
    double fu = fid.value(u);
    StepSizer sizer;
    const Bounds bounds{setup.diffusion.mu_a_floor, std::numeric_limits<double>::infinity()};
    run_with_context(Block::init_u2, -1, [&] {
        for (int step = 0; step < setup.schedule.dot_warm_start; ++step) {
            const ScalarField g = fid.gradient(u);
            const double t0 = sizer.initial(g, kRangeU2, setup.linesearch);
            StepResult r = backtracking_step([&](const ScalarField& x) { return fid.value(x); }, u, fu, g, t0,
                                             bounds, setup.linesearch);
            StepRecord rec;
            rec.outer = -1;
            rec.block = Block::init_u2;
            rec.step = step;
            rec.status = r.status;
            if (r.status == StepStatus::accepted) {
                u = std::move(r.x);
                fu = r.value;
                sizer.last = r.t;
                rec.t = r.t;
            }
            rec.terms.fidelity[1] = fu;
            out.records.push_back(rec);
            if (r.status != StepStatus::accepted) break;
        }
    });

    // Edge indicator with u fixed: the v-block of the uncoupled DOT objective.
    JointObjective obj(grid, nullptr, &fid, single(p));
    JointState s{ScalarField(grid, 0.0), ScalarField(grid, 1.0, FieldUnit::dimensionless), std::move(u),
                 ScalarField(grid, 1.0, FieldUnit::dimensionless)};
    Driver d(obj, s, setup, nullptr, out);
    run_with_context(Block::init_v2, -1,
                     [&] { d.run_block(Block::v2, -1, setup.schedule.dot_edge_init, Block::init_v2); });
    return {std::move(s.u2), std::move(s.v2)};
}

JbmirResult jbmir(const ReconstructionSetup& setup, const Sinogram& g1, const BoundaryData& g2,
                  const RegParams& params, const TruthMonitor* truth) {
    validate_setup(setup);
    params.validate();
    RadonOperator radon(setup.grid, setup.scan);
    DotOperator dot(setup.grid, setup.optics, setup.diffusion);
    XctFidelity f1(radon, g1, setup.xct_weight);
    DotFidelity f2(dot, g2, setup.dot_weight);
    JointObjective obj(setup.grid, &f1, &f2, params);

    JbmirResult res;
    auto [u1, v1] = init_xct(setup.grid);
    auto [u2, v2] = init_dot(setup, dot, g2, params[1], &res.log);
    res.state = JointState{std::move(u1), std::move(v1), std::move(u2), std::move(v2)};

    Driver d(obj, res.state, setup, truth, res.log);
    alternate(d, setup.schedule, {Block::u1, Block::v1, Block::u2, Block::v2});
    return res;
}

SmirResult smir_xct(const ReconstructionSetup& setup, const Sinogram& g1, const ModalityParams& p,
                    const TruthMonitor* truth) {
    validate_setup(setup);
    const RegParams params = single(p);
    params.validate();
    RadonOperator radon(setup.grid, setup.scan);
    XctFidelity f1(radon, g1, setup.xct_weight);
    JointObjective obj(setup.grid, &f1, nullptr, params);

    SmirResult res;
    auto [u, v] = init_xct(setup.grid);
    JointState s{std::move(u), std::move(v), ScalarField(setup.grid, 0.0),
                 ScalarField(setup.grid, 1.0, FieldUnit::dimensionless)};
    Driver d(obj, s, setup, truth, res.log);
    alternate(d, setup.schedule, {Block::u1, Block::v1});
    res.u = std::move(s.u1);
    res.v = std::move(s.v1);
    return res;
}

SmirResult smir_dot(const ReconstructionSetup& setup, const BoundaryData& g2, const ModalityParams& p,
                    const TruthMonitor* truth) {
    validate_setup(setup);
    const RegParams params = single(p);
    params.validate();
    DotOperator dot(setup.grid, setup.optics, setup.diffusion);
    DotFidelity f2(dot, g2, setup.dot_weight);
    JointObjective obj(setup.grid, nullptr, &f2, params);

    SmirResult res;
    auto [u2, v2] = init_dot(setup, dot, g2, p, &res.log);
    JointState s{ScalarField(setup.grid, 0.0), ScalarField(setup.grid, 1.0, FieldUnit::dimensionless),
                 std::move(u2), std::move(v2)};
    Driver d(obj, s, setup, truth, res.log);
    alternate(d, setup.schedule, {Block::u2, Block::v2});
    res.u = std::move(s.u2);
    res.v = std::move(s.v2);
    return res;
}

}  // namespace jbmir
