#pragma once

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "field.hpp"

namespace asymptolab {

/// Lower-case hex SHA-256 of a byte string.
inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw MissingData("sha256: digest failed");
    }
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingData("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw MissingData("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw MissingData("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Row-major 8-byte little-endian reals.
inline std::string encode_field(const Field& f) {
    std::string out(f.size() * 8, '\0');
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(f[i]);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(out.data() + 8 * i, &bits, 8);
    }
    return out;
}

inline Field decode_field(const GridSpec& g, std::string_view bytes) {
    if (bytes.size() != g.size() * 8) throw MissingData("decode_field: byte count does not match the grid");
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + 8 * i, 8);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        v[i] = std::bit_cast<double>(bits);
    }
    return Field(g, std::move(v));
}

inline nlohmann::json grid_json(const GridSpec& g) {
    return {{"dim", g.dim()}, {"half_width", g.half_width()}, {"points_per_axis", g.points_per_axis()}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    return GridSpec(j.at("dim").get<int>(), j.at("half_width").get<double>(), j.at("points_per_axis").get<std::size_t>());
}

/// Writes `<stem>.bin` and `<stem>.json` (grid, time, config hash, checksum).
/// Returns the two file names.
inline std::vector<std::string> export_field(const std::filesystem::path& dir, const std::string& stem, const Field& f,
                                             double t, const std::string& config_hash) {
    const auto bytes = encode_field(f);
    write_atomic(dir / (stem + ".bin"), bytes);
    nlohmann::json meta{{"grid", grid_json(f.grid())},
                        {"time", t},
                        {"config_hash", config_hash},
                        {"encoding", "float64-le row-major"},
                        {"sha256", sha256_hex(bytes)}};
    write_atomic(dir / (stem + ".json"), meta.dump(2) + "\n");
    return {stem + ".bin", stem + ".json"};
}

inline Field import_field(const std::filesystem::path& dir, const std::string& stem, double* t = nullptr) {
    const auto meta = nlohmann::json::parse(read_file(dir / (stem + ".json")));
    const auto bytes = read_file(dir / (stem + ".bin"));
    if (sha256_hex(bytes) != meta.at("sha256").get<std::string>()) {
        throw MissingData("import_field: checksum mismatch for " + stem);
    }
    if (t) *t = meta.at("time").get<double>();
    return decode_field(grid_from_json(meta.at("grid")), bytes);
}

}  // namespace asymptolab
