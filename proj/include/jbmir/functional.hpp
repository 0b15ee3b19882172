#pragma once

#include <array>
#include <string>

#include "jbmir/dot.hpp"
#include "jbmir/grid.hpp"
#include "jbmir/xct.hpp"

namespace jbmir {

/// Regularisation weights of one modality: smoothness alpha, edge length beta,
/// edge coupling gamma and edge width eps.
struct ModalityParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
    double eps = 1e-4;
};

/// Index 0 is the XCT slot (u1, v1), index 1 the DOT slot (u2, v2).
struct RegParams {
    std::array<ModalityParams, 2> m{};
    double gamma_cap = 10.0;

    ModalityParams& operator[](int i) { return m[static_cast<std::size_t>(i)]; }
    const ModalityParams& operator[](int i) const { return m[static_cast<std::size_t>(i)]; }
    /// alpha, beta, eps > 0 and 0 <= gamma <= gamma_cap; throws ConfigError otherwise.
    void validate() const;
};

struct JointState {
    ScalarField u1, v1, u2, v2;

    ScalarField& u(int i) { return i == 0 ? u1 : u2; }
    const ScalarField& u(int i) const { return i == 0 ? u1 : u2; }
    ScalarField& v(int i) { return i == 0 ? v1 : v2; }
    const ScalarField& v(int i) const { return i == 0 ? v1 : v2; }
};

struct TermBreakdown {
    std::array<double, 2> fidelity{0.0, 0.0};
    std::array<double, 2> smooth{0.0, 0.0};
    std::array<double, 2> edge{0.0, 0.0};

    /// Sum of one modality's three terms, grouped as (fidelity + smooth) + edge.
    double slot_total(int i) const {
        const auto k = static_cast<std::size_t>(i);
        return fidelity[k] + smooth[k] + edge[k];
    }
    double total() const { return slot_total(0) + slot_total(1); }
    /// One JSON object on a single line.
    std::string to_json() const;
};

/// Data misfit of one modality: weight * ||A(u) - g||^2 and its gradient.
class Fidelity {
public:
    virtual ~Fidelity() = default;
    virtual double value(const ScalarField& u) = 0;
    virtual ScalarField gradient(const ScalarField& u) = 0;
};

class XctFidelity final : public Fidelity {
public:
    XctFidelity(const RadonOperator& op, Sinogram data, double weight = 1.0);
    double value(const ScalarField& u) override;
    ScalarField gradient(const ScalarField& u) override;
    const Sinogram& data() const { return data_; }

private:
    const RadonOperator& op_;
    Sinogram data_;
    double weight_;
    std::vector<double> scratch_;
};

class DotFidelity final : public Fidelity {
public:
    DotFidelity(DotOperator& op, BoundaryData data, double weight = 1.0);
    double value(const ScalarField& u) override;
    ScalarField gradient(const ScalarField& u) override;
    const BoundaryData& data() const { return data_; }

private:
    DotOperator& op_;
    BoundaryData data_;
    double weight_;
};

/// Discrete coupled Ambrosio-Tortorelli objective
///   F = sum_i  fid_i(u_i) + alpha_i h^2 sum v_i^2 |grad u_i|^2
///          + beta_i h^2 sum (eps_i |grad v_i|^2 + (1 - v_i)^2 / (4 eps_i)) (1 + gamma_i (v_j - v_i)^2)
/// Either fidelity slot may be null (single-modality use); its terms then read zero.
class JointObjective {
public:
    JointObjective(const GridGeometry& grid, Fidelity* xct, Fidelity* dot, const RegParams& params);

    const GridGeometry& grid() const { return grid_; }
    const RegParams& params() const { return params_; }
    bool has(int i) const { return fid_[static_cast<std::size_t>(i)] != nullptr; }

    TermBreakdown eval(const JointState& s);

    double fidelity(int i, const ScalarField& u);
    double smooth(int i, const ScalarField& u, const ScalarField& v) const;
    /// Edge term of slot i; v_other is ignored when gamma_i is zero.
    double edge(int i, const ScalarField& v, const ScalarField& v_other) const;

    /// Exact gradients of eval(s).total() with respect to each block.
    ScalarField grad_u(int i, const JointState& s);
    ScalarField grad_v(int i, const JointState& s) const;

    /// Smoothness part of grad_u alone: -2 alpha h^2 div(v^2 grad u).
    ScalarField smooth_grad_u(int i, const ScalarField& u, const ScalarField& v) const;

private:
    void check(const JointState& s) const;

    GridGeometry grid_;
    std::array<Fidelity*, 2> fid_;
    RegParams params_;
};

TermBreakdown eval_joint(const JointState& state, const Sinogram& g1, const BoundaryData& g2,
                         const RegParams& p, const OpticsGeometry& optics, const DiffusionModel& model);

}  // namespace jbmir
