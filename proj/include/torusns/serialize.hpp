#ifndef TORUSNS_SERIALIZE_HPP
#define TORUSNS_SERIALIZE_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "torusns/field.hpp"

namespace torusns {

/// IO failures carry the offending path.
struct io_error : error {
    explicit io_error(const std::string& msg) : error(msg) {}
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; i++) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; i++) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace detail

/// Self-describing binary field container ("TNFB"): version, dim,
/// per-axis resolution, component count, then row-major little-endian
/// 64-bit floats, one block per component.
inline void write_field_container(const std::string& path,
                                  const TorusGrid& grid,
                                  const std::vector<const ScalarField*>& comps) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("cannot open for writing: " + path);
    os.write("TNFB", 4);
    detail::put_u32(os, 1u);
    detail::put_u32(os, static_cast<std::uint32_t>(grid.dim()));
    detail::put_u32(os, static_cast<std::uint32_t>(grid.resolution()));
    detail::put_u32(os, static_cast<std::uint32_t>(comps.size()));
    for (const ScalarField* f : comps)
        for (double v : f->values()) detail::put_f64(os, v);
    if (!os) throw io_error("write failed: " + path);
}

inline void write_field(const std::string& path, const ScalarField& f) {
    write_field_container(path, f.grid(), {&f});
}

inline void write_field(const std::string& path, const VectorField& u) {
    std::vector<const ScalarField*> c;
    for (int d = 0; d < u.dim(); d++) c.push_back(&u[d]);
    write_field_container(path, u.grid(), c);
}

inline std::vector<ScalarField> read_field_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TNFB", 4) != 0)
        throw io_error("bad magic in field container: " + path);
    const std::uint32_t version = detail::get_u32(is);
    if (version != 1u) throw io_error("unsupported container version: " + path);
    const int dim = static_cast<int>(detail::get_u32(is));
    const int res = static_cast<int>(detail::get_u32(is));
    const int ncomp = static_cast<int>(detail::get_u32(is));
    TorusGrid grid(dim, res);
    std::vector<ScalarField> out;
    for (int c = 0; c < ncomp; c++) {
        std::vector<double> v(grid.size());
        for (auto& x : v) x = detail::get_f64(is);
        if (!is) throw io_error("truncated field container: " + path);
        out.emplace_back(grid, std::move(v));
    }
    return out;
}

/// Shortest-round-trip decimal formatting shared by every CSV/JSON
/// emitter, so identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Minimal CSV writer: a header plus rows of doubles.
inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw io_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); i++)
        os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); i++)
            os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
    if (!os) throw io_error("write failed: " + path);
}

}  // namespace torusns

#endif
