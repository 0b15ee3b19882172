#include "jbmir/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "jbmir/errors.hpp"
#include "jbmir/field_io.hpp"
#include "jbmir/noise.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace jbmir {

namespace {

constexpr DisplayWindow kXctWindow{0.0, 2.5};
constexpr DisplayWindow kDotWindow{0.0, 0.03};
constexpr DisplayWindow kEdgeWindow{0.0, 1.0};

constexpr std::uint64_t kXctNoiseStream = 1;
constexpr std::uint64_t kDotNoiseStream = 2;

const char* tag(Modality m) { return m == Modality::xct ? "u1" : "u2"; }

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& s) {
    ensure_dir(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << s;
    if (!out) throw DataError("cannot write " + p.string());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvMatrix as_csv(std::size_t rows, std::size_t cols, const std::vector<double>& v, std::vector<std::string> comments) {
    CsvMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = v;
    m.comments = std::move(comments);
    return m;
}

Sinogram read_sinogram(const fs::path& p, const ScanGeometry& scan) {
    CsvMatrix m = read_csv_matrix(p);
    if (m.rows != static_cast<std::size_t>(scan.n_views) || m.cols != static_cast<std::size_t>(scan.n_rays))
        throw DataError(p.string() + ": expected " + std::to_string(scan.n_views) + " x " +
                        std::to_string(scan.n_rays) + " sinogram");
    Sinogram s(scan);
    s.values = std::move(m.values);
    return s;
}

BoundaryData read_boundary(const fs::path& p, const OpticsGeometry& o) {
    CsvMatrix m = read_csv_matrix(p);
    if (m.rows != static_cast<std::size_t>(o.n_sources) || m.cols != static_cast<std::size_t>(o.n_detectors))
        throw DataError(p.string() + ": expected " + std::to_string(o.n_sources) + " x " +
                        std::to_string(o.n_detectors) + " boundary data");
    BoundaryData b(o.n_sources, o.n_detectors);
    b.values = std::move(m.values);
    return b;
}

json ssim_json(const SsimReport& r) {
    return json{{"ssim", r.value}, {"L", r.L}, {"C1", r.c1}, {"C2", r.c2}, {"pixels", r.pixels}};
}

void write_profile(const fs::path& p, const std::vector<ProfilePoint>& prof, double x) {
    std::string s = "# x_mm=" + fmt(x) + "\ny_mm,value\n";
    for (const auto& q : prof) s += fmt(q.y) + "," + fmt(q.value) + "\n";
    write_text(p, s);
}

void write_pair(const fs::path& dir, const char* name, const ScalarField& f, DisplayWindow w) {
    write_field_csv(dir / (std::string(name) + ".csv"), f);
    write_field_pgm(dir / (std::string(name) + ".pgm"), f, w);
}

std::optional<ScalarField> maybe_truth(const OutputLayout& out, Modality m, const GridGeometry& g) {
    const fs::path p = out.truth(m);
    if (!fs::exists(p)) return std::nullopt;
    return read_field_csv(p, g);
}

double profile_column(const RunConfig& cfg) {
    for (const auto& s : cfg.phantom.shapes)
        if (s.name == "small") return s.cx;
    return 0.0;
}

}  // namespace

const char* to_string(ReconMode m) {
    switch (m) {
        case ReconMode::smir_xct: return "smir-xct";
        case ReconMode::smir_dot: return "smir-dot";
        case ReconMode::jbmir: return "jbmir";
    }
    return "?";
}

ReconMode parse_mode(const std::string& s) {
    if (s == "smir-xct") return ReconMode::smir_xct;
    if (s == "smir-dot") return ReconMode::smir_dot;
    if (s == "jbmir") return ReconMode::jbmir;
    throw ConfigError("unknown reconstruction mode '" + s + "' (expected smir-xct, smir-dot or jbmir)");
}

fs::path OutputLayout::truth(Modality m) const { return root / "truth" / (std::string(tag(m)) + ".csv"); }

fs::path OutputLayout::data(Modality m, bool clean) const {
    const std::string base = m == Modality::xct ? "g1" : "g2";
    return root / "data" / (base + (clean ? "_clean.csv" : ".csv"));
}

void echo_config(const RunConfig& cfg) {
    std::ostringstream s;
    write_config(s, cfg);
    write_text(OutputLayout{cfg.out_dir}.config_echo(), s.str());
}

void cmd_phantom(const RunConfig& cfg) {
    const OutputLayout out{cfg.out_dir};
    ensure_dir(out.root / "truth");
    const ScalarField u1 = rasterize(cfg.phantom, cfg.grid, Modality::xct, cfg.mu_a_floor);
    const ScalarField u2 = rasterize(cfg.phantom, cfg.grid, Modality::dot, cfg.mu_a_floor);
    write_pair(out.root / "truth", "u1", u1, kXctWindow);
    write_pair(out.root / "truth", "u2", u2, kDotWindow);
}

void cmd_simulate(const RunConfig& cfg) {
    const OutputLayout out{cfg.out_dir};
    ensure_dir(out.root / "data");
    const ScalarField u1 = rasterize(cfg.phantom, cfg.grid, Modality::xct, cfg.mu_a_floor);
    const ScalarField u2 = rasterize(cfg.phantom, cfg.grid, Modality::dot, cfg.mu_a_floor);

    const Sinogram g1 = radon_forward(u1, cfg.scan);
    const Sinogram n1 = add_noise(g1, cfg.eta1, derive_seed(cfg.seed, kXctNoiseStream));
    const BoundaryData g2 = dot_forward(u2, cfg.optics, cfg.diffusion_model()).data;
    const BoundaryData n2 = add_noise(g2, cfg.eta2, derive_seed(cfg.seed, kDotNoiseStream));

    const std::string phantom = "phantom=" + cfg.phantom_name;
    const std::string seed = "seed=" + std::to_string(cfg.seed);
    const auto nv = static_cast<std::size_t>(cfg.scan.n_views), nr = static_cast<std::size_t>(cfg.scan.n_rays);
    const auto ns = static_cast<std::size_t>(cfg.optics.n_sources), nd = static_cast<std::size_t>(cfg.optics.n_detectors);
    const std::string optodes = "first_source_angle_deg=" + fmt(cfg.optics.first_source_angle) +
                                " detector_offset_deg=" + fmt(180.0 / cfg.optics.n_sources) +
                                " source_sigma=" + fmt(cfg.optics.source_width) +
                                " detector_sigma=" + fmt(cfg.optics.detector_width) + " D=" + fmt(cfg.diffusion);
    write_csv_matrix(out.data(Modality::xct, true),
                     as_csv(nv, nr, g1.values, {"xct sinogram, views x rays", phantom, "eta=0", seed}));
    write_csv_matrix(out.data(Modality::xct, false),
                     as_csv(nv, nr, n1.values, {"xct sinogram, views x rays", phantom, "eta=" + fmt(cfg.eta1), seed}));
    write_csv_matrix(out.data(Modality::dot, true),
                     as_csv(ns, nd, g2.values, {"dot exitance, sources x detectors", phantom, optodes, "eta=0", seed}));
    write_csv_matrix(out.data(Modality::dot, false),
                     as_csv(ns, nd, n2.values,
                            {"dot exitance, sources x detectors", phantom, optodes, "eta=" + fmt(cfg.eta2), seed}));
}

json cmd_reconstruct(const RunConfig& cfg, ReconMode mode) {
    const OutputLayout out{cfg.out_dir};
    const ReconstructionSetup setup = cfg.setup();
    const fs::path dir = out.recon_dir(mode);
    ensure_dir(dir);
    ensure_dir(out.root / "logs");

    const auto t1 = maybe_truth(out, Modality::xct, cfg.grid);
    const auto t2 = maybe_truth(out, Modality::dot, cfg.grid);
    TruthMonitor monitor{t1 ? &*t1 : nullptr, t2 ? &*t2 : nullptr, cfg.ssim_params()};

    json summary{{"mode", to_string(mode)}, {"phantom", cfg.phantom_name}, {"seed", cfg.seed}};
    RunLog log;
    std::vector<std::pair<Modality, const ScalarField*>> finals;
    JbmirResult joint;
    SmirResult single;

    switch (mode) {
        case ReconMode::smir_xct: {
            const Sinogram g1 = read_sinogram(out.data(Modality::xct, false), cfg.scan);
            single = smir_xct(setup, g1, cfg.smir_xct, &monitor);
            write_pair(dir, "u1", single.u, kXctWindow);
            write_pair(dir, "v1", single.v, kEdgeWindow);
            finals.emplace_back(Modality::xct, &single.u);
            log = std::move(single.log);
            break;
        }
        case ReconMode::smir_dot: {
            const BoundaryData g2 = read_boundary(out.data(Modality::dot, false), cfg.optics);
            single = smir_dot(setup, g2, cfg.smir_dot, &monitor);
            write_pair(dir, "u2", single.u, kDotWindow);
            write_pair(dir, "v2", single.v, kEdgeWindow);
            finals.emplace_back(Modality::dot, &single.u);
            log = std::move(single.log);
            break;
        }
        case ReconMode::jbmir: {
            const Sinogram g1 = read_sinogram(out.data(Modality::xct, false), cfg.scan);
            const BoundaryData g2 = read_boundary(out.data(Modality::dot, false), cfg.optics);
            joint = jbmir(setup, g1, g2, cfg.jbmir, &monitor);
            write_pair(dir, "u1", joint.state.u1, kXctWindow);
            write_pair(dir, "v1", joint.state.v1, kEdgeWindow);
            write_pair(dir, "u2", joint.state.u2, kDotWindow);
            write_pair(dir, "v2", joint.state.v2, kEdgeWindow);
            finals.emplace_back(Modality::xct, &joint.state.u1);
            finals.emplace_back(Modality::dot, &joint.state.u2);
            log = std::move(joint.log);
            break;
        }
    }

    {
        std::ofstream lf(out.log(mode), std::ios::binary);
        log.write_jsonl(lf);
        if (!lf) throw DataError("cannot write " + out.log(mode).string());
    }
    if (!log.records.empty()) summary["final_terms"] = json::parse(log.records.back().terms.to_json());
    std::size_t accepted = 0, stalled = 0;
    for (const auto& r : log.records) {
        if (r.status == StepStatus::accepted) ++accepted;
        if (r.status == StepStatus::stalled) ++stalled;
    }
    summary["steps"] = {{"accepted", accepted}, {"stalled", stalled}, {"records", log.records.size()}};

    for (const auto& [m, u] : finals) {
        const auto& truth = m == Modality::xct ? t1 : t2;
        if (truth) summary["ssim"][tag(m)] = ssim_json(ssim_report(*u, *truth, cfg.ssim_params()));
    }
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

json cmd_evaluate(const fs::path& rec, const fs::path& truth, const RunConfig& cfg, std::optional<double> profile_x,
                  const fs::path& profile_dir) {
    const ScalarField r = read_field_csv(rec, cfg.grid);
    const ScalarField t = read_field_csv(truth, cfg.grid);
    const SsimReport s = ssim_report(r, t, cfg.ssim_params());
    json report = ssim_json(s);
    report["reconstruction"] = rec.string();
    report["truth"] = truth.string();
    report["domain"] = cfg.ssim_domain == SsimDomain::disk ? "disk" : "full";
    if (profile_x) {
        const auto pr = line_profile(r, *profile_x);
        const auto pt = line_profile(t, *profile_x);
        const fs::path d = profile_dir.empty() ? rec.parent_path() : profile_dir;
        const fs::path fr = d / (rec.stem().string() + "_profile.csv");
        const fs::path ft = d / (rec.stem().string() + "_truth_profile.csv");
        write_profile(fr, pr, *profile_x);
        write_profile(ft, pt, *profile_x);
        report["profile"] = {{"x_mm", *profile_x}, {"length", pr.size()}, {"file", fr.string()},
                             {"truth_file", ft.string()}};
    }
    return report;
}

json cmd_run_all(const RunConfig& cfg, bool reuse_data) {
    const OutputLayout out{cfg.out_dir};
    echo_config(cfg);
    cmd_phantom(cfg);
    const bool have_data = fs::exists(out.data(Modality::xct, false)) && fs::exists(out.data(Modality::dot, false)) &&
                           fs::exists(out.data(Modality::xct, true)) && fs::exists(out.data(Modality::dot, true));
    if (!(reuse_data && have_data)) cmd_simulate(cfg);

    json report{{"phantom", cfg.phantom_name}, {"seed", cfg.seed}, {"eta1", cfg.eta1}, {"eta2", cfg.eta2}};
    for (ReconMode m : {ReconMode::smir_xct, ReconMode::smir_dot, ReconMode::jbmir}) cmd_reconstruct(cfg, m);

    const double x = profile_column(cfg);
    const auto eval = [&](ReconMode m, Modality mod) {
        const fs::path rec = out.recon_dir(m) / (std::string(tag(mod)) + ".csv");
        return cmd_evaluate(rec, out.truth(mod), cfg, x, out.recon_dir(m));
    };
    const json sx = eval(ReconMode::smir_xct, Modality::xct);
    const json sd = eval(ReconMode::smir_dot, Modality::dot);
    const json jx = eval(ReconMode::jbmir, Modality::xct);
    const json jd = eval(ReconMode::jbmir, Modality::dot);
    report["xct"] = {{"smir", sx}, {"jbmir", jx},
                     {"improvement", jx["ssim"].get<double>() - sx["ssim"].get<double>()}};
    report["dot"] = {{"smir", sd}, {"jbmir", jd},
                     {"improvement", jd["ssim"].get<double>() - sd["ssim"].get<double>()}};
    write_text(out.report(), report.dump(2) + "\n");
    return report;
}

}  // namespace jbmir
