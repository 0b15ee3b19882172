#include "jbmir/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "jbmir/errors.hpp"

namespace jbmir {

namespace pt = boost::property_tree;

RegParams RunConfig::default_jbmir() {
    RegParams p;
    p[0] = {8.8e3, 1.9e-3, 9.8, 1e-4};
    p[1] = {1e5, 6e-5, 5.0, 1e-4};
    return p;
}

ReconstructionSetup RunConfig::setup() const {
    ReconstructionSetup s;
    s.grid = grid;
    s.scan = scan;
    s.optics = optics;
    s.diffusion = diffusion_model();
    s.xct_weight = xct_weight;
    s.dot_weight = dot_weight;
    s.linesearch = linesearch;
    s.schedule = schedule;
    return s;
}

SsimParams RunConfig::ssim_params() const {
    SsimParams p;
    p.domain = ssim_domain;
    return p;
}

void RunConfig::validate() const {
    grid.validate();
    scan.validate();
    optics.validate();
    if (!(diffusion > 0.0)) throw ConfigError("optics.diffusion must be positive");
    if (!(mu_a_floor > 0.0)) throw ConfigError("optics.mu_a_floor must be positive");
    if (!(xct_weight > 0.0) || !(dot_weight > 0.0)) throw ConfigError("fidelity weights must be positive");
    if (!(eta1 >= 0.0) || !(eta2 >= 0.0)) throw ConfigError("noise levels must be >= 0");
    phantom.validate(grid.disk_radius);
    jbmir.validate();
    for (const ModalityParams* m : {&smir_xct, &smir_dot})
        if (!(m->alpha > 0.0) || !(m->beta > 0.0) || !(m->eps > 0.0))
            throw ConfigError("single-modality alpha, beta and eps must be positive");
    linesearch.validate();
    schedule.validate();
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& s) {
    Int v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
}

struct Key {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
};

Key real(double RunConfig::*f) {
    return {[f](const RunConfig& c) { return fmt(c.*f); },
            [f](RunConfig& c, const std::string& k, const std::string& v) { c.*f = to_double(k, v); }};
}

template <class S, class T>
Key sub(S RunConfig::*s, T S::*f) {
    if constexpr (std::is_same_v<T, double>) {
        return {[s, f](const RunConfig& c) { return fmt(c.*s.*f); },
                [s, f](RunConfig& c, const std::string& k, const std::string& v) { c.*s.*f = to_double(k, v); }};
    } else {
        return {[s, f](const RunConfig& c) { return std::to_string(c.*s.*f); },
                [s, f](RunConfig& c, const std::string& k, const std::string& v) { c.*s.*f = to_int<T>(k, v); }};
    }
}

Key reg(int slot, double ModalityParams::*f) {
    return {[slot, f](const RunConfig& c) { return fmt(c.jbmir[slot].*f); },
            [slot, f](RunConfig& c, const std::string& k, const std::string& v) {
                c.jbmir[slot].*f = to_double(k, v);
            }};
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

std::string shape_line(const ShapeSpec& s) {
    return std::string(s.kind == ShapeKind::circle ? "circle" : "ellipse") + " " + fmt(s.cx) + " " + fmt(s.cy) +
           " " + fmt(s.semi_a) + " " + fmt(s.semi_b) + " " + fmt(s.rotation) + " " + opt(s.xct) + " " +
           opt(s.dot);
}

ShapeSpec parse_shape(const std::string& key, const std::string& name, const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() != 8)
        throw ConfigError(key + ": expected 'circle|ellipse cx cy a b rotation xct dot' ('-' for absent)");
    ShapeSpec s;
    s.name = name;
    if (tok[0] == "circle") s.kind = ShapeKind::circle;
    else if (tok[0] == "ellipse") s.kind = ShapeKind::ellipse;
    else throw ConfigError(key + ": unknown shape kind '" + tok[0] + "'");
    s.cx = to_double(key, tok[1]);
    s.cy = to_double(key, tok[2]);
    s.semi_a = to_double(key, tok[3]);
    s.semi_b = to_double(key, tok[4]);
    s.rotation = to_double(key, tok[5]);
    if (tok[6] != "-") s.xct = to_double(key, tok[6]);
    if (tok[7] != "-") s.dot = to_double(key, tok[7]);
    return s;
}

using Table = std::vector<std::pair<std::string, Key>>;

const std::map<std::string, Table>& table() {
    static const std::map<std::string, Table> t = [] {
        std::map<std::string, Table> m;
        m["grid"] = {{"nx", sub(&RunConfig::grid, &GridGeometry::nx)},
                     {"ny", sub(&RunConfig::grid, &GridGeometry::ny)},
                     {"h", sub(&RunConfig::grid, &GridGeometry::h)},
                     {"center_x", sub(&RunConfig::grid, &GridGeometry::center_x)},
                     {"center_y", sub(&RunConfig::grid, &GridGeometry::center_y)},
                     {"disk_radius", sub(&RunConfig::grid, &GridGeometry::disk_radius)}};
        m["scan"] = {{"n_views", sub(&RunConfig::scan, &ScanGeometry::n_views)},
                     {"n_rays", sub(&RunConfig::scan, &ScanGeometry::n_rays)},
                     {"ray_spacing", sub(&RunConfig::scan, &ScanGeometry::ray_spacing)},
                     {"sample_step", sub(&RunConfig::scan, &ScanGeometry::sample_step)},
                     {"fidelity_weight", real(&RunConfig::xct_weight)}};
        m["optics"] = {{"n_sources", sub(&RunConfig::optics, &OpticsGeometry::n_sources)},
                       {"n_detectors", sub(&RunConfig::optics, &OpticsGeometry::n_detectors)},
                       {"source_width", sub(&RunConfig::optics, &OpticsGeometry::source_width)},
                       {"source_amplitude", sub(&RunConfig::optics, &OpticsGeometry::source_amplitude)},
                       {"detector_width", sub(&RunConfig::optics, &OpticsGeometry::detector_width)},
                       {"first_source_angle", sub(&RunConfig::optics, &OpticsGeometry::first_source_angle)},
                       {"diffusion", real(&RunConfig::diffusion)},
                       {"mu_a_floor", real(&RunConfig::mu_a_floor)},
                       {"fidelity_weight", real(&RunConfig::dot_weight)}};
        m["phantom"] = {{"xct_background", sub(&RunConfig::phantom, &PhantomPair::xct_background)},
                        {"dot_background", sub(&RunConfig::phantom, &PhantomPair::dot_background)}};
        m["noise"] = {{"eta1", real(&RunConfig::eta1)},
                      {"eta2", real(&RunConfig::eta2)},
                      {"seed",
                       {[](const RunConfig& c) { return std::to_string(c.seed); },
                        [](RunConfig& c, const std::string& k, const std::string& v) {
                            c.seed = to_int<std::uint64_t>(k, v);
                        }}}};
        m["params.jbmir"] = {{"alpha1", reg(0, &ModalityParams::alpha)}, {"beta1", reg(0, &ModalityParams::beta)},
                             {"gamma1", reg(0, &ModalityParams::gamma)}, {"eps1", reg(0, &ModalityParams::eps)},
                             {"alpha2", reg(1, &ModalityParams::alpha)}, {"beta2", reg(1, &ModalityParams::beta)},
                             {"gamma2", reg(1, &ModalityParams::gamma)}, {"eps2", reg(1, &ModalityParams::eps)},
                             {"gamma_cap",
                              {[](const RunConfig& c) { return fmt(c.jbmir.gamma_cap); },
                               [](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.jbmir.gamma_cap = to_double(k, v);
                               }}}};
        m["params.smir_xct"] = {{"alpha", sub(&RunConfig::smir_xct, &ModalityParams::alpha)},
                                {"beta", sub(&RunConfig::smir_xct, &ModalityParams::beta)},
                                {"eps", sub(&RunConfig::smir_xct, &ModalityParams::eps)}};
        m["params.smir_dot"] = {{"alpha", sub(&RunConfig::smir_dot, &ModalityParams::alpha)},
                                {"beta", sub(&RunConfig::smir_dot, &ModalityParams::beta)},
                                {"eps", sub(&RunConfig::smir_dot, &ModalityParams::eps)}};
        m["linesearch"] = {{"c", sub(&RunConfig::linesearch, &LineSearchParams::c)},
                           {"rho", sub(&RunConfig::linesearch, &LineSearchParams::rho)},
                           {"t0", sub(&RunConfig::linesearch, &LineSearchParams::t0)},
                           {"max_backtracks", sub(&RunConfig::linesearch, &LineSearchParams::max_backtracks)}};
        m["schedule"] = {{"outer", sub(&RunConfig::schedule, &ScheduleParams::outer)},
                         {"inner", sub(&RunConfig::schedule, &ScheduleParams::inner)},
                         {"dot_warm_start", sub(&RunConfig::schedule, &ScheduleParams::dot_warm_start)},
                         {"dot_edge_init", sub(&RunConfig::schedule, &ScheduleParams::dot_edge_init)}};
        m["output"] = {{"dir",
                        {[](const RunConfig& c) { return c.out_dir.string(); },
                         [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }}},
                       {"ssim_domain",
                        {[](const RunConfig& c) {
                             return std::string(c.ssim_domain == SsimDomain::disk ? "disk" : "full");
                         },
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                             if (v == "disk") c.ssim_domain = SsimDomain::disk;
                             else if (v == "full") c.ssim_domain = SsimDomain::full;
                             else throw ConfigError(k + ": expected disk or full");
                         }}}};
        return m;
    }();
    return t;
}

const std::string kShapePrefix = "shape_";

void set_phantom_name(RunConfig& c, const std::string& name) {
    const double xb = c.phantom.xct_background, db = c.phantom.dot_background;
    c.phantom = builtin_phantom(name);
    c.phantom.xct_background = xb;
    c.phantom.dot_background = db;
    c.phantom_name = name;
}

void set_key(RunConfig& c, const std::string& section, const std::string& key, const std::string& value) {
    const std::string full = section + "/" + key;
    if (section == "phantom" && key == "name") {
        set_phantom_name(c, value);
        return;
    }
    if (section == "phantom" && key.rfind(kShapePrefix, 0) == 0) {
        if (!c.inline_shapes) {
            c.phantom.shapes.clear();
            c.inline_shapes = true;
        }
        c.phantom.shapes.push_back(parse_shape(full, key.substr(kShapePrefix.size()), value));
        return;
    }
    const auto sec = table().find(section);
    if (sec == table().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [name, k] : sec->second)
        if (name == key) {
            k.set(c, full, value);
            return;
        }
    throw ConfigError("unknown config key " + full);
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& origin) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    RunConfig c;
    // The phantom name replaces the shape list, so it is applied before any inline shape.
    for (const auto& [section, keys] : tree) {
        if (keys.empty() && !keys.data().empty()) throw ConfigError(origin + ": key '" + section + "' outside a section");
        if (section == "phantom")
            if (auto n = keys.get_optional<std::string>("name")) set_key(c, section, "name", *n);
    }
    for (const auto& [section, keys] : tree)
        for (const auto& [key, value] : keys) {
            if (section == "phantom" && key == "name") continue;
            set_key(c, section, key, value.data());
        }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto slash = assignment.find('/');
    const auto eq = assignment.find('=');
    if (slash == std::string::npos || eq == std::string::npos || eq < slash)
        throw ConfigError("override '" + assignment + "' is not of the form section/key=value");
    set_key(cfg, assignment.substr(0, slash), assignment.substr(slash + 1, eq - slash - 1),
            assignment.substr(eq + 1));
}

void write_config(std::ostream& out, const RunConfig& cfg) {
    static const char* const order[] = {"grid",         "scan",           "optics",          "phantom",
                                        "noise",        "params.jbmir",   "params.smir_xct", "params.smir_dot",
                                        "linesearch",   "schedule",       "output"};
    bool first = true;
    for (const char* section : order) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        if (std::string(section) == "phantom") {
            out << "name = " << cfg.phantom_name << '\n';
        }
        for (const auto& [key, k] : table().at(section)) out << key << " = " << k.get(cfg) << '\n';
        if (std::string(section) == "phantom")
            for (const auto& s : cfg.phantom.shapes) out << kShapePrefix << s.name << " = " << shape_line(s) << '\n';
    }
}

RunConfig example_config(int example) {
    RunConfig c;
    switch (example) {
        case 1: break;
        case 2:
            set_phantom_name(c, "phantom2");
            c.jbmir[1].beta = 7e-5;
            break;
        case 3: set_phantom_name(c, "phantom3"); break;
        default: throw ConfigError("unknown example " + std::to_string(example));
    }
    return c;
}

}  // namespace jbmir
