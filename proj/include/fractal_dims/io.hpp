#ifndef FRACTAL_DIMS_IO_HPP
#define FRACTAL_DIMS_IO_HPP

// CSV (RFC 4180), SVG and binary grid output. All writes go through a temp file + rename.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "zeta.hpp"

namespace fractal_dims::io {

namespace fs = std::filesystem;

inline void atomic_write(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// shortest text that round-trips is not needed; %.17g is exact and stable
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
        if (header_.empty()) throw DomainError("csv: header required");
    }

    void row(const std::vector<double>& vals) {
        std::vector<std::string> r;
        for (double v : vals) r.push_back(format_double(v));
        row_text(std::move(r));
    }
    void row_text(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw DomainError("csv: row width differs from header");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += csv_field(cells[i]);
            }
            out += "\r\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

    void write(const fs::path& p) const { atomic_write(p, str()); }
    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Row-major little-endian float64 grid plus a JSON sidecar {nx, ny, bbox, h}.
inline void write_grid(const fs::path& bin, const std::vector<double>& values, int nx, int ny, double xmin, double ymin, double h) {
    if (values.size() != std::size_t(nx) * std::size_t(ny)) throw DomainError("write_grid: size mismatch");
    std::string bytes(values.size() * 8, '\0');
    for (std::size_t k = 0; k < values.size(); ++k) {
        auto u = std::bit_cast<std::uint64_t>(values[k]);
        for (int b = 0; b < 8; ++b) bytes[8 * k + b] = char((u >> (8 * b)) & 0xff);
    }
    atomic_write(bin, bytes);
    nlohmann::json hdr{{"nx", nx},
                       {"ny", ny},
                       {"h", h},
                       {"bbox", {xmin, ymin, xmin + nx * h, ymin + ny * h}},
                       {"dtype", "float64"},
                       {"endian", "little"},
                       {"order", "row-major"}};
    fs::path js = bin;
    js.replace_extension(".json");
    atomic_write(js, hdr.dump(2) + "\n");
}

inline std::vector<double> read_grid(const fs::path& bin) {
    const std::string bytes = read_file(bin);
    if (bytes.size() % 8) throw Error("read_grid: truncated file");
    std::vector<double> v(bytes.size() / 8);
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t(std::uint8_t(bytes[8 * k + b])) << (8 * b);
        v[k] = std::bit_cast<double>(u);
    }
    return v;
}

// ---------------------------------------------------------------------------------------------
// SVG: plain paths, y axis flipped so the picture matches the math orientation.

class Svg {
public:
    Svg(BBox world, double width_px = 800, double margin = 20) : w_(world), px_(width_px), m_(margin) {
        if (!(w_.width() > 0 && w_.height() > 0)) throw DomainError("svg: empty bounding box");
        sc_ = (px_ - 2 * m_) / w_.width();
        py_ = w_.height() * sc_ + 2 * m_;
    }

    void polyline(const std::vector<Vec2>& pts, bool closed, const std::string& stroke = "black", double stroke_px = 1.0,
                  const std::string& fill = "none") {
        if (pts.empty()) return;
        std::string d;
        d.reserve(pts.size() * 24);
        char buf[64];
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%c%.3f %.3f", i ? 'L' : 'M', X(pts[i].x), Y(pts[i].y));
            d += buf;
        }
        if (closed) d += 'Z';
        body_ += "<path d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(stroke_px) +
                 "\"/>\n";
    }

    void dot(Vec2 p, double r_px, const std::string& fill = "black") {
        body_ += "<circle cx=\"" + fmt(X(p.x)) + "\" cy=\"" + fmt(Y(p.y)) + "\" r=\"" + fmt(r_px) + "\" fill=\"" + fill + "\"/>\n";
    }

    void line(Vec2 a, Vec2 b, const std::string& stroke = "#999", double stroke_px = 0.5) { polyline({a, b}, false, stroke, stroke_px); }

    void text(Vec2 p, const std::string& s, double size_px = 12) {
        std::string e;
        for (char c : s) {
            if (c == '<') e += "&lt;";
            else if (c == '>') e += "&gt;";
            else if (c == '&') e += "&amp;";
            else e += c;
        }
        body_ += "<text x=\"" + fmt(X(p.x)) + "\" y=\"" + fmt(Y(p.y)) + "\" font-size=\"" + fmt(size_px) +
                 "\" font-family=\"monospace\">" + e + "</text>\n";
    }

    std::string str() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(px_) + "\" height=\"" + fmt(py_) + "\" viewBox=\"0 0 " +
               fmt(px_) + " " + fmt(py_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
    }

    void write(const fs::path& p) const { atomic_write(p, str()); }

private:
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }
    double X(double x) const { return m_ + (x - w_.xmin) * sc_; }
    double Y(double y) const { return py_ - m_ - (y - w_.ymin) * sc_; }

    BBox w_;
    double px_, m_, sc_, py_;
    std::string body_;
};

// Scatter of poles in the (Re, Im) plane with the window outlined.
inline Svg pole_plot(const ComplexDimensionSet& set) {
    const auto& w = set.window;
    double x0 = w.re_min, x1 = w.re_max, y = w.im_max;
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y > 0)) y = 1;
    const double pad = 0.1 * (x1 - x0);
    // the plot is tall: scale Re up so it stays readable
    const double stretch = std::max(1.0, 0.25 * 2 * y / (x1 - x0 + 2 * pad));
    BBox b{(x0 - pad) * stretch, -1.05 * y, (x1 + pad) * stretch, 1.05 * y};
    Svg svg(b, 500);
    svg.polyline({{x0 * stretch, -y}, {x1 * stretch, -y}, {x1 * stretch, y}, {x0 * stretch, y}}, true, "#bbb", 0.5);
    svg.line({(x0 - pad) * stretch, 0}, {(x1 + pad) * stretch, 0});
    for (const auto& p : set.poles) svg.dot({p.omega.real() * stretch, p.omega.imag()}, 2.5, p.multiplicity > 1 ? "red" : "black");
    return svg;
}

}  // namespace fractal_dims::io

#endif  // FRACTAL_DIMS_IO_HPP
