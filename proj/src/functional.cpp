#include "jbmir/functional.hpp"

#include <cmath>
#include <cstdio>

#include "jbmir/errors.hpp"
#include "jbmir/kernels.hpp"

namespace jbmir {

void RegParams::validate() const {
    for (int i = 0; i < 2; ++i) {
        const auto& p = m[static_cast<std::size_t>(i)];
        const std::string slot = i == 0 ? "xct" : "dot";
        if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.eps > 0.0))
            throw ConfigError("params(" + slot + "): alpha, beta and eps must be positive");
        if (!(p.gamma >= 0.0) || p.gamma > gamma_cap)
            throw ConfigError("params(" + slot + "): gamma must lie in [0, gamma_cap]");
    }
}

std::string TermBreakdown::to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"fidelity1\":%.17g,\"smooth1\":%.17g,\"edge1\":%.17g,"
                  "\"fidelity2\":%.17g,\"smooth2\":%.17g,\"edge2\":%.17g,\"total\":%.17g}",
                  fidelity[0], smooth[0], edge[0], fidelity[1], smooth[1], edge[1], total());
    return buf;
}

XctFidelity::XctFidelity(const RadonOperator& op, Sinogram data, double weight)
    : op_(op), data_(std::move(data)), weight_(weight), scratch_(op.scan().size()) {
    if (!(data_.scan == op.scan())) throw GeometryMismatch("XCT data scan geometry differs from the operator");
}

double XctFidelity::value(const ScalarField& u) {
    require_same_geometry(u.geometry(), op_.grid(), "XCT fidelity");
    op_.forward(u.data(), scratch_.data());
    return weight_ * kernels::active().sq_dist(scratch_.data(), data_.values.data(), scratch_.size());
}

ScalarField XctFidelity::gradient(const ScalarField& u) {
    require_same_geometry(u.geometry(), op_.grid(), "XCT fidelity");
    op_.forward(u.data(), scratch_.data());
    const double two_w = 2.0 * weight_;
    for (std::size_t k = 0; k < scratch_.size(); ++k) scratch_[k] = two_w * (scratch_[k] - data_.values[k]);
    ScalarField g(op_.grid());
    op_.adjoint(scratch_.data(), g.data());
    return g;
}

DotFidelity::DotFidelity(DotOperator& op, BoundaryData data, double weight)
    : op_(op), data_(std::move(data)), weight_(weight) {}

double DotFidelity::value(const ScalarField& u) { return weight_ * op_.misfit(u, data_); }

ScalarField DotFidelity::gradient(const ScalarField& u) {
    ScalarField g = op_.misfit_gradient(u, data_);
    if (weight_ != 1.0)
        for (std::size_t k = 0; k < g.size(); ++k) g[k] *= weight_;
    return g;
}

JointObjective::JointObjective(const GridGeometry& grid, Fidelity* xct, Fidelity* dot, const RegParams& params)
    : grid_(grid), fid_{xct, dot}, params_(params) {
    grid_.validate();
    params_.validate();
}

void JointObjective::check(const JointState& s) const {
    require_same_geometry(s.u1.geometry(), grid_, "state u1");
    require_same_geometry(s.v1.geometry(), grid_, "state v1");
    require_same_geometry(s.u2.geometry(), grid_, "state u2");
    require_same_geometry(s.v2.geometry(), grid_, "state v2");
}

double JointObjective::fidelity(int i, const ScalarField& u) {
    auto* f = fid_[static_cast<std::size_t>(i)];
    return f ? f->value(u) : 0.0;
}

double JointObjective::smooth(int i, const ScalarField& u, const ScalarField& v) const {
    VectorField g = forward_gradient(u);
    const double s = kernels::active().smooth_energy(g.x.data(), g.y.data(), v.data(), v.size());
    return params_[i].alpha * grid_.pixel_area() * s;
}

double JointObjective::edge(int i, const ScalarField& v, const ScalarField& v_other) const {
    const auto& p = params_[i];
    VectorField g = forward_gradient(v);
    const double* vo = p.gamma != 0.0 ? v_other.data() : nullptr;
    const double s = kernels::active().edge_energy(g.x.data(), g.y.data(), v.data(), vo, p.eps, p.gamma, v.size());
    return p.beta * grid_.pixel_area() * s;
}

TermBreakdown JointObjective::eval(const JointState& s) {
    check(s);
    TermBreakdown t;
    for (int i = 0; i < 2; ++i) {
        if (!has(i)) continue;
        t.fidelity[static_cast<std::size_t>(i)] = fidelity(i, s.u(i));
        t.smooth[static_cast<std::size_t>(i)] = smooth(i, s.u(i), s.v(i));
        t.edge[static_cast<std::size_t>(i)] = edge(i, s.v(i), s.v(1 - i));
    }
    return t;
}

ScalarField JointObjective::smooth_grad_u(int i, const ScalarField& u, const ScalarField& v) const {
    const auto& k = kernels::active();
    const std::size_t n = u.size();
    VectorField g = forward_gradient(u);
    std::vector<double> v2(n);
    for (std::size_t p = 0; p < n; ++p) v2[p] = v[p] * v[p];
    k.scale_pair(v2.data(), g.x.data(), g.y.data(), g.x.data(), g.y.data(), n);
    ScalarField out(grid_);
    backward_divergence(grid_, g.x.data(), g.y.data(), out.data());
    const double c = -2.0 * params_[i].alpha * grid_.pixel_area();
    for (std::size_t p = 0; p < n; ++p) out[p] *= c;
    return out;
}

ScalarField JointObjective::grad_u(int i, const JointState& s) {
    check(s);
    ScalarField out = smooth_grad_u(i, s.u(i), s.v(i));
    if (auto* f = fid_[static_cast<std::size_t>(i)]) {
        const ScalarField gf = f->gradient(s.u(i));
        for (std::size_t p = 0; p < out.size(); ++p) out[p] = gf[p] + out[p];
    }
    return out;
}

ScalarField JointObjective::grad_v(int i, const JointState& s) const {
    check(s);
    const auto& k = kernels::active();
    const auto& p = params_[i];
    const ScalarField& u = s.u(i);
    const ScalarField& v = s.v(i);
    const ScalarField& vo = s.v(1 - i);
    const std::size_t n = v.size();
    const double area = grid_.pixel_area();

    VectorField gu = forward_gradient(u);
    VectorField gv = forward_gradient(v);
    std::vector<double> w(n), pt(n);
    k.edge_grad_pointwise(gv.x.data(), gv.y.data(), v.data(), p.gamma != 0.0 ? vo.data() : nullptr, p.eps, p.gamma,
                          w.data(), pt.data(), n);

    // -2 eps div(w grad v)
    VectorField flux(grid_);
    k.scale_pair(w.data(), gv.x.data(), gv.y.data(), flux.x.data(), flux.y.data(), n);
    std::vector<double> div(n);
    backward_divergence(grid_, flux.x.data(), flux.y.data(), div.data());

    ScalarField out(grid_, 0.0, FieldUnit::dimensionless);
    const double smooth_c = 2.0 * p.alpha * area;
    const double edge_c = p.beta * area;
    for (std::size_t q = 0; q < n; ++q) {
        const double g2 = gu.x[q] * gu.x[q] + gu.y[q] * gu.y[q];
        out[q] = smooth_c * v[q] * g2 + edge_c * (-2.0 * p.eps * div[q] + pt[q]);
    }

    // Slot j's edge integrand depends on v_i through its coupling weight.
    const int j = 1 - i;
    const auto& pj = params_[j];
    if (has(j) && pj.gamma != 0.0) {
        VectorField gvo = forward_gradient(vo);
        k.edge_cross_grad(gvo.x.data(), gvo.y.data(), vo.data(), v.data(), pj.eps, pj.beta * area * 2.0 * pj.gamma,
                          out.data(), n);
    }
    return out;
}

TermBreakdown eval_joint(const JointState& state, const Sinogram& g1, const BoundaryData& g2,
                         const RegParams& p, const OpticsGeometry& optics, const DiffusionModel& model) {
    const GridGeometry& grid = state.u1.geometry();
    RadonOperator radon(grid, g1.scan);
    DotOperator dot(grid, optics, model);
    XctFidelity f1(radon, g1);
    DotFidelity f2(dot, g2);
    JointObjective obj(grid, &f1, &f2, p);
    return obj.eval(state);
}

}  // namespace jbmir
