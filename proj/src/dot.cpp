#include "jbmir/dot.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "jbmir/errors.hpp"

namespace jbmir {

using SpMat = Eigen::SparseMatrix<double>;

double OpticsGeometry::source_angle(int s) const {
    return first_source_angle * std::numbers::pi / 180.0 + 2.0 * std::numbers::pi * s / n_sources;
}

double OpticsGeometry::detector_angle(int d) const {
    return first_source_angle * std::numbers::pi / 180.0 + std::numbers::pi / n_sources +
           2.0 * std::numbers::pi * d / n_detectors;
}

void OpticsGeometry::validate() const {
    if (n_sources <= 0 || n_detectors <= 0) throw ConfigError("optics: optode counts must be positive");
    if (!(source_width > 0.0) || !(detector_width > 0.0)) throw ConfigError("optics: widths must be positive");
    if (!std::isfinite(source_amplitude)) throw ConfigError("optics: source_amplitude must be finite");
    if (!source_gain.empty() && source_gain.size() != static_cast<std::size_t>(n_sources))
        throw ConfigError("optics: source_gain must list one value per source");
}

DiffusionModel DiffusionModel::uniform(const GridGeometry& g, double d, double floor) {
    return DiffusionModel{ScalarField(g, d), floor};
}

namespace {

// Truncated Gaussian in boundary arc length; zero beyond four widths.
double arc_gaussian(double angle, double center, double radius, double sigma) {
    const double arc = radius * std::remainder(angle - center, 2.0 * std::numbers::pi);
    if (std::abs(arc) > 4.0 * sigma) return 0.0;
    return std::exp(-(arc * arc) / (2.0 * sigma * sigma));
}

void check_model(const DiffusionModel& model, const GridGeometry& g) {
    require_same_geometry(model.D.geometry(), g, "diffusion model");
    if (!(model.mu_a_floor > 0.0)) throw ConfigError("diffusion model: mu_a floor must be positive");
    for (std::size_t k = 0; k < model.D.size(); ++k)
        if (!(model.D[k] > 0.0) || !std::isfinite(model.D[k]))
            throw ConfigError("diffusion model: D must be positive and finite everywhere");
}

// Everything except the mu_a contribution on the diagonal.
DotSystem build_structure(const DiffusionModel& model, const OpticsGeometry& optics) {
    const GridGeometry& g = model.D.geometry();
    g.validate();
    optics.validate();
    check_model(model, g);

    DotSystem sys;
    sys.grid = g;
    const ScalarField mask = disk_mask(g);
    sys.unknown_of_pixel.assign(g.size(), -1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (mask[k] != 0.0) {
            sys.unknown_of_pixel[k] = static_cast<int>(sys.pixel_of_unknown.size());
            sys.pixel_of_unknown.push_back(static_cast<int>(k));
        }
    }
    const int n = sys.unknowns();
    const double h = g.h;
    const double inv_h2 = 1.0 / (h * h);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);

    // east, west, north (row - 1), south (row + 1)
    constexpr int dr[4] = {0, 0, -1, 1};
    constexpr int dc[4] = {1, -1, 0, 0};
    for (int u = 0; u < n; ++u) {
        const int pix = sys.pixel_of_unknown[u];
        const int r = pix / g.nx;
        const int c = pix % g.nx;
        const double dk = model.D[pix];
        for (int dir = 0; dir < 4; ++dir) {
            const int rr = r + dr[dir];
            const int cc = c + dc[dir];
            const bool inside_grid = rr >= 0 && rr < g.ny && cc >= 0 && cc < g.nx;
            const int nb = inside_grid ? sys.unknown_of_pixel[g.index(rr, cc)] : -1;
            if (nb >= 0) {
                const double dn = model.D[g.index(rr, cc)];
                const double df = 2.0 * dk * dn / (dk + dn);
                diag[u] += df * inv_h2;
                trip.emplace_back(u, nb, -df * inv_h2);
            } else {
                BoundaryFace f;
                f.cell = u;
                f.x = (g.x_of(c) - g.center_x) + 0.5 * h * dc[dir];
                f.y = (g.y_of(r) - g.center_y) - 0.5 * h * dr[dir];
                f.angle = std::atan2(f.y, f.x);
                f.kappa = 2.0 * dk / (4.0 * dk + h);
                diag[u] += f.kappa / h;
                sys.faces.push_back(f);
            }
        }
    }
    for (int u = 0; u < n; ++u) trip.emplace_back(u, u, diag[u]);
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();

    const std::size_t nf = sys.faces.size();
    for (int s = 0; s < optics.n_sources; ++s) {
        Eigen::VectorXd q(static_cast<Eigen::Index>(nf));
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        const double amp = optics.source_amplitude * optics.gain(s);
        for (std::size_t i = 0; i < nf; ++i) {
            const auto& f = sys.faces[i];
            q[static_cast<Eigen::Index>(i)] =
                amp * arc_gaussian(f.angle, optics.source_angle(s), g.disk_radius, optics.source_width);
            b[f.cell] += f.kappa / h * q[static_cast<Eigen::Index>(i)];
        }
        sys.source_on_faces.push_back(std::move(q));
        sys.rhs.push_back(std::move(b));
    }
    return sys;
}

// Detector apertures: normalised Gaussian weights over boundary faces.
Eigen::MatrixXd detector_weights(const DotSystem& sys, const OpticsGeometry& optics) {
    const auto nf = static_cast<Eigen::Index>(sys.faces.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nf, optics.n_detectors);
    for (int d = 0; d < optics.n_detectors; ++d) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < nf; ++i) {
            const auto& f = sys.faces[static_cast<std::size_t>(i)];
            const double wi = arc_gaussian(f.angle, optics.detector_angle(d), sys.grid.disk_radius,
                                           optics.detector_width);
            w(i, d) = wi;
            total += wi;
        }
        if (!(total > 0.0)) throw ConfigError("optics: detector " + std::to_string(d) + " sees no boundary face");
        w.col(d) /= total;
    }
    return w;
}

}  // namespace

DotSystem assemble_system(const DiffusionModel& model, const ScalarField& mu_a, const OpticsGeometry& optics) {
    require_same_geometry(mu_a.geometry(), model.D.geometry(), "assemble_system");
    DotSystem sys = build_structure(model, optics);
    for (int u = 0; u < sys.unknowns(); ++u) {
        const double m = mu_a[static_cast<std::size_t>(sys.pixel_of_unknown[u])];
        if (!std::isfinite(m)) throw NumericalError("assemble_system: non-finite absorption coefficient");
        if (m < model.mu_a_floor)
            throw DataError("assemble_system: absorption coefficient below the floor inside the disk");
        sys.matrix.coeffRef(u, u) += m;
    }
    return sys;
}

struct DotOperator::Impl {
    OpticsGeometry optics;
    DiffusionModel model;
    DotSystem sys;
    ScalarField mask;
    SpMat base;                              // matrix without the absorption term
    std::vector<Eigen::Index> diag_slot;     // position of each diagonal entry in valuePtr()
    Eigen::MatrixXd rhs;                     // unknowns x sources
    Eigen::MatrixXd meas;                    // unknowns x detectors: c_d
    Eigen::MatrixXd meas_offset;             // sources x detectors: sum_f w_df kappa_f q_s(f)
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    bool use_cg = false;
    SpMat current;

    // cache for the last absorption map
    bool have = false;
    Eigen::VectorXd mu;
    Eigen::MatrixXd fields;    // unknowns x sources
    Eigen::MatrixXd adjoints;  // unknowns x detectors, filled lazily
    bool have_adjoints = false;
    BoundaryData data;
    long factor_count = 0;

    Impl(const GridGeometry& g, const OpticsGeometry& o, const DiffusionModel& m) : optics(o), model(m) {
        require_same_geometry(m.D.geometry(), g, "DotOperator");
        sys = build_structure(model, optics);
        mask = disk_mask(g);
        base = sys.matrix;
        const int n = sys.unknowns();
        diag_slot.resize(static_cast<std::size_t>(n));
        for (int col = 0; col < n; ++col) {
            for (SpMat::InnerIterator it(base, col); it; ++it)
                if (it.row() == col) diag_slot[static_cast<std::size_t>(col)] = &it.valueRef() - base.valuePtr();
        }
        rhs.resize(n, optics.n_sources);
        for (int s = 0; s < optics.n_sources; ++s) rhs.col(s) = sys.rhs[static_cast<std::size_t>(s)];

        const Eigen::MatrixXd w = detector_weights(sys, optics);
        meas = Eigen::MatrixXd::Zero(n, optics.n_detectors);
        meas_offset = Eigen::MatrixXd::Zero(optics.n_sources, optics.n_detectors);
        for (std::size_t i = 0; i < sys.faces.size(); ++i) {
            const auto& f = sys.faces[i];
            const auto fi = static_cast<Eigen::Index>(i);
            for (int d = 0; d < optics.n_detectors; ++d) {
                meas(f.cell, d) += w(fi, d) * f.kappa;
                for (int s = 0; s < optics.n_sources; ++s)
                    meas_offset(s, d) += w(fi, d) * f.kappa * sys.source_on_faces[static_cast<std::size_t>(s)][fi];
            }
        }
        current = base;
        ldlt.analyzePattern(current);
    }

    Eigen::VectorXd restrict_clamped(const ScalarField& mu_a) const {
        require_same_geometry(mu_a.geometry(), sys.grid, "DOT forward");
        Eigen::VectorXd out(sys.unknowns());
        for (int u = 0; u < sys.unknowns(); ++u) {
            const double m = mu_a[static_cast<std::size_t>(sys.pixel_of_unknown[u])];
            if (!std::isfinite(m)) throw NumericalError("DOT forward: non-finite absorption coefficient");
            out[u] = m < model.mu_a_floor ? model.mu_a_floor : m;
        }
        return out;
    }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& b, const char* what) {
        if (!use_cg) return ldlt.solve(b);
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-10);
        cg.setMaxIterations(10 * static_cast<int>(current.rows()));
        cg.compute(current);
        Eigen::MatrixXd x(b.rows(), b.cols());
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            x.col(j) = cg.solve(b.col(j));
            if (cg.info() != Eigen::Success)
                throw NumericalError(std::string("DOT linear solve did not converge for ") + what + " " +
                                     std::to_string(j));
        }
        return x;
    }

    void ensure(const ScalarField& mu_a) {
        Eigen::VectorXd m = restrict_clamped(mu_a);
        if (have && m.size() == mu.size() &&
            std::memcmp(m.data(), mu.data(), sizeof(double) * static_cast<std::size_t>(m.size())) == 0)
            return;
        current = base;
        for (Eigen::Index u = 0; u < m.size(); ++u) current.valuePtr()[diag_slot[static_cast<std::size_t>(u)]] += m[u];
        ldlt.factorize(current);
        ++factor_count;
        use_cg = ldlt.info() != Eigen::Success;
        have = false;
        fields = solve(rhs, "source");
        if (!fields.allFinite()) throw NumericalError("DOT forward produced non-finite photon density");
        const Eigen::MatrixXd g = fields.transpose() * meas - meas_offset;
        data = BoundaryData(optics.n_sources, optics.n_detectors);
        for (int s = 0; s < optics.n_sources; ++s)
            for (int d = 0; d < optics.n_detectors; ++d) data.at(s, d) = g(s, d);
        mu = std::move(m);
        have = true;
        have_adjoints = false;
    }

    void ensure_adjoints() {
        if (have_adjoints) return;
        adjoints = solve(meas, "detector");
        have_adjoints = true;
    }

    void check_measured(const BoundaryData& measured) const {
        if (measured.n_sources != optics.n_sources || measured.n_detectors != optics.n_detectors ||
            measured.values.size() != static_cast<std::size_t>(optics.n_sources) * optics.n_detectors)
            throw GeometryMismatch("DOT data shape does not match the optode layout");
    }
};

DotOperator::DotOperator(const GridGeometry& grid, const OpticsGeometry& optics, const DiffusionModel& model)
    : impl_(std::make_unique<Impl>(grid, optics, model)) {}
DotOperator::~DotOperator() = default;
DotOperator::DotOperator(DotOperator&&) noexcept = default;
DotOperator& DotOperator::operator=(DotOperator&&) noexcept = default;

const GridGeometry& DotOperator::grid() const { return impl_->sys.grid; }
const OpticsGeometry& DotOperator::optics() const { return impl_->optics; }
const DiffusionModel& DotOperator::model() const { return impl_->model; }
const ScalarField& DotOperator::mask() const { return impl_->mask; }
long DotOperator::factorizations() const { return impl_->factor_count; }

BoundaryData DotOperator::forward(const ScalarField& mu_a) {
    impl_->ensure(mu_a);
    return impl_->data;
}

DotForwardResult DotOperator::forward_with_fields(const ScalarField& mu_a) {
    impl_->ensure(mu_a);
    DotForwardResult out;
    out.data = impl_->data;
    const auto& sys = impl_->sys;
    for (int s = 0; s < impl_->optics.n_sources; ++s) {
        ScalarField f(sys.grid, 0.0, FieldUnit::dimensionless);
        for (int u = 0; u < sys.unknowns(); ++u)
            f[static_cast<std::size_t>(sys.pixel_of_unknown[u])] = impl_->fields(u, s);
        out.photons.per_source.push_back(std::move(f));
    }
    return out;
}

double DotOperator::misfit(const ScalarField& mu_a, const BoundaryData& measured) {
    impl_->check_measured(measured);
    impl_->ensure(mu_a);
    double s = 0.0;
    for (std::size_t k = 0; k < measured.values.size(); ++k) {
        const double r = impl_->data.values[k] - measured.values[k];
        s += r * r;
    }
    return s;
}

ScalarField DotOperator::misfit_gradient(const ScalarField& mu_a, const BoundaryData& measured) {
    impl_->check_measured(measured);
    impl_->ensure(mu_a);
    impl_->ensure_adjoints();
    const auto& o = impl_->optics;
    Eigen::MatrixXd resid(o.n_sources, o.n_detectors);
    for (int s = 0; s < o.n_sources; ++s)
        for (int d = 0; d < o.n_detectors; ++d) resid(s, d) = impl_->data.at(s, d) - measured.at(s, d);
    // d g[s,d] / d mu_k = -lambda_d[k] u_s[k]
    const Eigen::MatrixXd weighted = impl_->adjoints * resid.transpose();  // unknowns x sources
    const auto& sys = impl_->sys;
    ScalarField grad(sys.grid, 0.0);
    for (int u = 0; u < sys.unknowns(); ++u) {
        double acc = 0.0;
        for (int s = 0; s < o.n_sources; ++s) acc += impl_->fields(u, s) * weighted(u, s);
        grad[static_cast<std::size_t>(sys.pixel_of_unknown[u])] = -2.0 * acc;
    }
    return grad;
}

DotForwardResult dot_forward(const ScalarField& mu_a, const OpticsGeometry& optics, const DiffusionModel& model) {
    DotOperator op(mu_a.geometry(), optics, model);
    return op.forward_with_fields(mu_a);
}

ScalarField dot_fidelity_gradient(const ScalarField& mu_a, const BoundaryData& measured,
                                  const OpticsGeometry& optics, const DiffusionModel& model) {
    DotOperator op(mu_a.geometry(), optics, model);
    return op.misfit_gradient(mu_a, measured);
}

}  // namespace jbmir
