#pragma once

#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "jbmir/grid.hpp"

namespace jbmir {

/// Optode layout on the disk boundary. Sources sit at angles first_source_angle + 2*pi*s/n_sources;
/// detectors are shifted by half a source spacing so the two rings interleave.
struct OpticsGeometry {
    int n_sources = 16;
    int n_detectors = 16;
    double source_width = 2.0;        // Gaussian sigma of q along the boundary arc, mm
    double source_amplitude = 1.0;
    double detector_width = 1.0;      // Gaussian sigma of the detector aperture, mm
    double first_source_angle = 0.0;  // degrees
    std::vector<double> source_gain;  // optional per-source multiplier of the amplitude; empty means all 1

    double source_angle(int s) const;    // radians
    double detector_angle(int d) const;  // radians
    double gain(int s) const { return source_gain.empty() ? 1.0 : source_gain.at(static_cast<std::size_t>(s)); }
    void validate() const;
    bool operator==(const OpticsGeometry&) const = default;
};

/// Known diffusion coefficient and the positivity floor for the absorption map.
struct DiffusionModel {
    ScalarField D;  // mm; a uniform field for the default configuration
    double mu_a_floor = 1e-6;

    static DiffusionModel uniform(const GridGeometry& g, double d, double floor = 1e-6);
};

/// Exitance measurements, n_sources rows by n_detectors columns.
struct BoundaryData {
    int n_sources = 0;
    int n_detectors = 0;
    std::vector<double> values;

    BoundaryData() = default;
    BoundaryData(int ns, int nd, double fill = 0.0)
        : n_sources(ns), n_detectors(nd), values(static_cast<std::size_t>(ns) * nd, fill) {}
    double& at(int s, int d) { return values[static_cast<std::size_t>(s) * n_detectors + d]; }
    double at(int s, int d) const { return values[static_cast<std::size_t>(s) * n_detectors + d]; }
};

/// Pixel edge separating an in-disk cell from the exterior.
struct BoundaryFace {
    int cell = 0;        // unknown index of the interior cell
    double x = 0.0;      // face midpoint relative to the grid center, mm
    double y = 0.0;
    double angle = 0.0;  // atan2(y, x)
    double kappa = 0.0;  // Robin transfer coefficient 2D/(4D + h)
};

/// Discretisation of -div(D grad u) + mu_a u = 0 with u + 2D du/dn = q on the
/// staircase boundary of the disk: one unknown per in-disk pixel, 5-point
/// finite volumes, harmonic face diffusivities. Rows are divided by the cell
/// area, so interior rows read (sum D_f)/h^2 + mu_a on the diagonal.
struct DotSystem {
    GridGeometry grid;
    std::vector<int> unknown_of_pixel;  // -1 outside the disk
    std::vector<int> pixel_of_unknown;
    std::vector<BoundaryFace> faces;
    Eigen::SparseMatrix<double> matrix;  // symmetric, both triangles stored
    std::vector<Eigen::VectorXd> rhs;    // one per source
    std::vector<Eigen::VectorXd> source_on_faces;  // q_s evaluated at each face

    int unknowns() const { return static_cast<int>(pixel_of_unknown.size()); }
};

/// Throws ConfigError for non-positive D and DataError for mu_a below the floor inside the disk.
DotSystem assemble_system(const DiffusionModel& model, const ScalarField& mu_a, const OpticsGeometry& optics);

struct PhotonField {
    std::vector<ScalarField> per_source;
};

struct DotForwardResult {
    BoundaryData data;
    PhotonField photons;
};

/// Forward model G(mu_a) with cached factorisation. mu_a is clamped to the floor before assembly.
/// Solves for one mu_a are reused until a different mu_a is requested.
class DotOperator {
public:
    DotOperator(const GridGeometry& grid, const OpticsGeometry& optics, const DiffusionModel& model);
    ~DotOperator();
    DotOperator(DotOperator&&) noexcept;
    DotOperator& operator=(DotOperator&&) noexcept;

    const GridGeometry& grid() const;
    const OpticsGeometry& optics() const;
    const DiffusionModel& model() const;
    const ScalarField& mask() const;

    BoundaryData forward(const ScalarField& mu_a);
    DotForwardResult forward_with_fields(const ScalarField& mu_a);

    /// sum_{s,d} (G(mu_a)[s,d] - measured[s,d])^2
    double misfit(const ScalarField& mu_a, const BoundaryData& measured);
    /// Adjoint-state gradient of misfit with respect to the per-pixel mu_a; zero outside the disk.
    ScalarField misfit_gradient(const ScalarField& mu_a, const BoundaryData& measured);

    /// Number of factorisations performed so far (cache diagnostics).
    long factorizations() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

DotForwardResult dot_forward(const ScalarField& mu_a, const OpticsGeometry& optics, const DiffusionModel& model);
ScalarField dot_fidelity_gradient(const ScalarField& mu_a, const BoundaryData& measured,
                                  const OpticsGeometry& optics, const DiffusionModel& model);

}  // namespace jbmir
