// io.hpp
// File formats: binary field snapshots with a one-line ASCII header, CSV
// export, 8-bit PGM quick-look images with a scaling sidecar, and the energy
// trace writer.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwc/grid.hpp"

static_assert(std::endian::native == std::endian::little,
              "field snapshots are little-endian; big-endian hosts are unsupported");

namespace kwc {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "FIELD v1 <dim> <shape...> <spacing...>\n" followed by binary64 values,
// little-endian, row-major.
inline void write_field(const std::string& path, const Field& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field: cannot open " + path);
    std::ostringstream header;
    header << "FIELD v1 " << f.grid.dim();
    for (int a = 0; a < f.grid.dim(); ++a) header << " " << f.grid.extent(a);
    for (int a = 0; a < f.grid.dim(); ++a) header << " " << format_double(f.grid.spacing(a));
    header << "\n";
    out << header.str();
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_field: write failed on " + path);
}

inline Field read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_field: missing header in " + path);
    std::istringstream hs(line);
    std::string magic, version;
    int dim = 0;
    hs >> magic >> version >> dim;
    if (magic != "FIELD" || version != "v1" || dim < 1 || dim > 2)
        throw std::runtime_error("read_field: bad header in " + path);
    std::array<int, 2> shape{1, 1};
    std::array<double, 2> spacing{1.0, 1.0};
    for (int a = 0; a < dim; ++a) hs >> shape[a];
    for (int a = 0; a < dim; ++a) hs >> spacing[a];
    if (!hs) throw std::runtime_error("read_field: truncated header in " + path);
    Grid g(dim, shape, spacing);
    Field f(g);
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
        throw std::runtime_error("read_field: truncated payload in " + path);
    if (!all_finite(f)) throw std::runtime_error("read_field: non-finite values in " + path);
    return f;
}

inline void write_field_csv(const std::string& path, const Field& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    out << "index,value\n";
    for (int i = 0; i < f.size(); ++i) out << i << "," << format_double(f[i]) << "\n";
}

// P5 8-bit min-max scaled; the mapping is recorded in a sidecar text file.
inline void write_pgm(const std::string& path, const Field& f) {
    int h = f.grid.dim() == 2 ? f.grid.extent(0) : 1;
    int w = f.grid.dim() == 2 ? f.grid.extent(1) : f.grid.extent(0);
    double lo = field_min(f), hi = field_max(f);
    double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(w));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double v = f[r * w + c];
            row[static_cast<size_t>(c)] = static_cast<unsigned char>(
                std::min(255.0, std::max(0.0, (v - lo) * scale + 0.5)));
        }
        out.write(reinterpret_cast<const char*>(row.data()), w);
    }

    std::ofstream side(path + ".scale.txt");
    side << "min " << format_double(lo) << "\nmax " << format_double(hi)
         << "\nmapping value -> round((value - min) * 255 / (max - min))\n";
}

// Fixed-column energy trace.
class TraceWriter {
public:
    explicit TraceWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("trace: cannot open " + path);
        out_ << "step,time,dirichlet_v,gamma,g,weighted_tv,theta_dirichlet,total,coupling,"
                "lyapunov,v_inc,theta_inc,slack\n";
    }

    void row(int step, double time, const std::array<double, 11>& cols) {
        out_ << step << "," << format_double(time);
        for (double c : cols) out_ << "," << format_double(c);
        out_ << "\n";
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

}  // namespace kwc
