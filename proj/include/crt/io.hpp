#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crt/errors.hpp"
#include "crt/field.hpp"
#include "crt/lattice.hpp"

namespace crt::io {

inline constexpr char kFieldMagic[8] = {'C', 'R', 'T', 'F', 'L', 'D', '0', '1'};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

}  // namespace detail

/// Field file layout: 8-byte magic "CRTFLD01", a little-endian u64 byte count,
/// that many bytes of UTF-8 JSON {origin, spacing, dims, upper_half}, then the
/// voxel values as little-endian IEEE-754 doubles, x1 fastest.
inline std::string encode_field(const ScalarField3& f) {
    const GridSpec& g = f.grid();
    nlohmann::json header = {
        {"origin", {g.origin.x, g.origin.y, g.origin.z}},
        {"spacing", {g.spacing.x, g.spacing.y, g.spacing.z}},
        {"dims", {g.dims[0], g.dims[1], g.dims[2]}},
        {"upper_half", f.upper_half()},
    };
    const std::string text = header.dump();
    std::string out(kFieldMagic, 8);
    detail::put_u64(out, text.size());
    out += text;
    out.reserve(out.size() + 8 * f.values().size());
    for (double v : f.values()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

inline ScalarField3 decode_field(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kFieldMagic, 8) != 0)
        throw IoError("field: bad magic");
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t header_len = detail::get_u64(raw + 8);
    if (header_len > bytes.size() - 16) throw IoError("field: truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("field: malformed header: ") + e.what());
    }
    GridSpec g;
    bool upper_half = false;
    try {
        for (int a = 0; a < 3; ++a) {
            g.origin[a] = header.at("origin").at(a).get<double>();
            g.spacing[a] = header.at("spacing").at(a).get<double>();
            const auto d = header.at("dims").at(a).get<std::int64_t>();
            if (d < 1) throw IoError("field: dims must be >= 1");
            g.dims[a] = static_cast<std::size_t>(d);
        }
        upper_half = header.at("upper_half").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("field: malformed header: ") + e.what());
    }
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw IoError(std::string("field: ") + e.what());
    }
    const std::uint64_t body = bytes.size() - 16 - header_len;
    const std::uint64_t count = g.size();
    if (count > body / 8 || body != count * 8) {
        throw IoError("field: body holds " + std::to_string(body / 8) + " values, header expects " +
                      std::to_string(count));
    }
    std::vector<double> values(count);
    const unsigned char* p = raw + 16 + header_len;
    for (std::uint64_t n = 0; n < count; ++n) values[n] = std::bit_cast<double>(detail::get_u64(p + 8 * n));
    ScalarField3 f(g, std::move(values));
    f.set_upper_half(upper_half);
    return f;
}

inline void write_field(const std::string& path, const ScalarField3& f) {
    detail::write_file(path, encode_field(f));
}

inline ScalarField3 read_field(const std::string& path) { return decode_field(detail::read_file(path)); }

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string encode_sinogram(const ConeLattice& lat) {
    std::string out = "u,beta,s,value\n";
    const auto& sp = lat.spec();
    for (std::size_t iu = 0; iu < sp.u_nodes.size(); ++iu)
        for (std::size_t ib = 0; ib < sp.beta_nodes.size(); ++ib)
            for (std::size_t is = 0; is < sp.s_nodes.size(); ++is) {
                out += fmt17(sp.u_nodes[iu]);
                out += ',';
                out += fmt17(sp.beta_nodes[ib]);
                out += ',';
                out += fmt17(sp.s_nodes[is]);
                out += ',';
                out += fmt17(lat.at(iu, ib, is));
                out += '\n';
            }
    return out;
}

/// Parses `u,beta,s,value` rows. The rows must cover a full tensor lattice;
/// their order is free.
inline ConeLattice decode_sinogram(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("sinogram: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,beta,s,value") throw IoError("sinogram: expected header u,beta,s,value");
    std::vector<std::array<double, 4>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 4> r{};
        std::size_t pos = 0;
        for (int c = 0; c < 4; ++c) {
            const std::size_t end = c < 3 ? line.find(',', pos) : line.size();
            if (end == std::string::npos) throw IoError("sinogram: line " + std::to_string(lineno) + ": too few columns");
            const std::string cell = line.substr(pos, end - pos);
            char* stop = nullptr;
            r[c] = std::strtod(cell.c_str(), &stop);
            if (cell.empty() || *stop != '\0')
                throw IoError("sinogram: line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            pos = end + 1;
        }
        rows.push_back(r);
    }
    auto unique_sorted = [&](int c) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    LatticeSpec spec{unique_sorted(0), unique_sorted(1), unique_sorted(2)};
    if (spec.size() != rows.size() || rows.empty())
        throw IoError("sinogram: rows do not form a full (u, beta, s) lattice");
    ConeLattice lat;
    try {
        lat = ConeLattice(spec);
    } catch (const ConfigError& e) {
        throw IoError(std::string("sinogram: ") + e.what());
    }
    std::vector<char> seen(rows.size(), 0);
    auto find = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };
    for (const auto& r : rows) {
        const std::size_t n = lat.index(find(spec.u_nodes, r[0]), find(spec.beta_nodes, r[1]), find(spec.s_nodes, r[2]));
        if (seen[n]) throw IoError("sinogram: duplicate lattice point");
        seen[n] = 1;
        lat.data()[n] = r[3];
    }
    return lat;
}

inline void write_sinogram(const std::string& path, const ConeLattice& lat) {
    detail::write_file(path, encode_sinogram(lat));
}

inline ConeLattice read_sinogram(const std::string& path) { return decode_sinogram(detail::read_file(path)); }

}  // namespace crt::io
