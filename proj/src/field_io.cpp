#include "jbmir/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jbmir/errors.hpp"

namespace jbmir {
namespace {

std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view token, const std::filesystem::path& path, std::size_t line) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
        token.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
        throw DataError(path.string() + ":" + std::to_string(line) + ": bad numeric value '" +
                        std::string(token) + "'");
    return v;
}

}  // namespace

void write_csv_matrix(const std::filesystem::path& path, const CsvMatrix& m) {
    if (m.values.size() != m.rows * m.cols) throw DataError("write_csv_matrix: shape/value count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    for (const auto& c : m.comments) out << "# " << c << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out << ',';
            out << format_double(m.values[r * m.cols + c]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

CsvMatrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file: " + path.string());
    CsvMatrix m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            m.comments.push_back(std::move(c));
            continue;
        }
        std::size_t count = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            m.values.push_back(parse_double(rest.substr(0, comma), path, lineno));
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (m.rows == 0) m.cols = count;
        else if (count != m.cols)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(m.cols) +
                            " columns, found " + std::to_string(count));
        ++m.rows;
    }
    return m;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
    CsvMatrix m;
    m.rows = static_cast<std::size_t>(f.geometry().ny);
    m.cols = static_cast<std::size_t>(f.geometry().nx);
    m.values = f.values();
    write_csv_matrix(path, m);
}

ScalarField read_field_csv(const std::filesystem::path& path, const GridGeometry& g) {
    CsvMatrix m = read_csv_matrix(path);
    if (m.rows != static_cast<std::size_t>(g.ny) || m.cols != static_cast<std::size_t>(g.nx))
        throw DataError(path.string() + ": field is " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                        ", grid expects " + std::to_string(g.ny) + "x" + std::to_string(g.nx));
    return ScalarField(g, std::move(m.values));
}

void write_field_pgm(const std::filesystem::path& path, const ScalarField& f, DisplayWindow w) {
    if (!(w.hi > w.lo)) throw DataError("display window must satisfy hi > lo");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    const auto& g = f.geometry();
    out << "P5\n# window " << format_double(w.lo) << ' ' << format_double(w.hi) << '\n'
        << g.nx << ' ' << g.ny << "\n65535\n";
    std::vector<unsigned char> bytes;
    bytes.reserve(2 * f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        double t = (f[k] - w.lo) / (w.hi - w.lo);
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        const auto level = static_cast<unsigned>(std::lround(t * 65535.0));
        bytes.push_back(static_cast<unsigned char>(level >> 8));
        bytes.push_back(static_cast<unsigned char>(level & 0xffu));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace jbmir
