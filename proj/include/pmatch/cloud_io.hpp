#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/format.hpp"
#include "pmatch/point_cloud.hpp"

namespace pmatch {

enum class CloudFormat { XyzText, Binary };

inline CloudFormat cloud_format_from_string(const std::string& s) {
    if (s == "xyz" || s == "text" || s == "xyz-text") return CloudFormat::XyzText;
    if (s == "binary" || s == "bin") return CloudFormat::Binary;
    throw std::invalid_argument("unknown cloud format: " + s);
}

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void write_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline std::uint32_t read_u32(std::istream& is, std::size_t& offset, const std::string& what) {
    char b[4];
    if (!is.read(b, 4))
        throw std::runtime_error("parse error: truncated " + what + " at byte offset " +
                                 std::to_string(offset));
    offset += 4;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is, std::size_t& offset, const std::string& what) {
    char b[8];
    if (!is.read(b, 8))
        throw std::runtime_error("parse error: truncated " + what + " at byte offset " +
                                 std::to_string(offset));
    offset += 8;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

} // namespace detail

inline constexpr char kCloudMagic[4] = {'P', 'M', 'P', 'C'};
inline constexpr std::uint32_t kCloudVersion = 1;

inline void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_cloud: cannot open " + path);
    if (format == CloudFormat::XyzText) {
        os << "# " << cloud.size() << " points\n";
        for (const Vec3& p : cloud.points) {
            os << format_double_17(p.x) << ' ' << format_double_17(p.y) << ' '
               << format_double_17(p.z) << '\n';
        }
    } else {
        os.write(kCloudMagic, 4);
        detail::write_u32(os, kCloudVersion);
        detail::write_u32(os, static_cast<std::uint32_t>(cloud.size()));
        for (const Vec3& p : cloud.points) {
            detail::write_f64(os, p.x);
            detail::write_f64(os, p.y);
            detail::write_f64(os, p.z);
        }
    }
    if (!os) throw std::runtime_error("save_cloud: write failed for " + path);
}

inline PointCloud load_cloud(const std::string& path, CloudFormat format) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_cloud: cannot open " + path);
    PointCloud cloud;
    if (format == CloudFormat::XyzText) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            double x, y, z;
            if (!(ls >> x)) continue;  // blank or comment-only line
            if (!(ls >> y >> z)) {
                throw std::runtime_error("parse error: " + path + " line " + std::to_string(line_no) +
                                         ": expected three coordinates");
            }
            double extra;
            if (ls >> extra) {
                throw std::runtime_error("parse error: " + path + " line " + std::to_string(line_no) +
                                         ": more than three coordinates");
            }
            cloud.points.push_back({x, y, z});
        }
    } else {
        std::size_t offset = 0;
        char magic[4];
        if (!is.read(magic, 4) || std::memcmp(magic, kCloudMagic, 4) != 0)
            throw std::runtime_error("parse error: " + path + ": bad magic at byte offset 0");
        offset = 4;
        const std::uint32_t version = detail::read_u32(is, offset, path);
        if (version != kCloudVersion)
            throw std::runtime_error("parse error: " + path + ": unsupported version " +
                                     std::to_string(version));
        const std::uint32_t count = detail::read_u32(is, offset, path);
        cloud.points.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const double x = detail::read_f64(is, offset, path);
            const double y = detail::read_f64(is, offset, path);
            const double z = detail::read_f64(is, offset, path);
            cloud.points.push_back({x, y, z});
        }
    }
    return cloud;
}

} // namespace pmatch
