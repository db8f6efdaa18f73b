#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/tensor.hpp"

namespace genint {

// MNIST IDX ingestion. Big-endian: images carry magic 0x00000803 followed by
// u32 count/rows/cols and unsigned bytes; labels carry magic 0x00000801,
// u32 count, bytes.

namespace idx_detail {

inline uint32_t read_u32_be(const std::vector<unsigned char>& buf, size_t off, const std::string& what) {
    if (off + 4 > buf.size()) throw FormatError("idx: truncated while reading " + what);
    return (static_cast<uint32_t>(buf[off]) << 24) | (static_cast<uint32_t>(buf[off + 1]) << 16) |
           (static_cast<uint32_t>(buf[off + 2]) << 8) | static_cast<uint32_t>(buf[off + 3]);
}

inline std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("idx: cannot open '" + path + "'");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string hex(uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

}  // namespace idx_detail

// Parses an image file from memory: shape [n, rows, cols, 1], values byte/255.
inline Tensor parse_idx_images(const std::vector<unsigned char>& buf) {
    using namespace idx_detail;
    uint32_t magic = read_u32_be(buf, 0, "magic");
    if (magic != 0x00000803u)
        throw FormatError("idx: expected image magic 0x00000803, found " + hex(magic));
    int64_t n = read_u32_be(buf, 4, "count");
    int64_t rows = read_u32_be(buf, 8, "rows");
    int64_t cols = read_u32_be(buf, 12, "cols");
    size_t need = 16 + static_cast<size_t>(n) * rows * cols;
    if (buf.size() < need)
        throw FormatError("idx: payload has " + std::to_string(buf.size() - 16) + " bytes, header promises " +
                          std::to_string(need - 16));
    Tensor out(Shape{n, rows, cols, 1});
    for (int64_t i = 0; i < n * rows * cols; ++i)
        out[i] = static_cast<float>(buf[16 + static_cast<size_t>(i)]) / 255.0f;
    return out;
}

inline std::vector<int> parse_idx_labels(const std::vector<unsigned char>& buf) {
    using namespace idx_detail;
    uint32_t magic = read_u32_be(buf, 0, "magic");
    if (magic != 0x00000801u)
        throw FormatError("idx: expected label magic 0x00000801, found " + hex(magic));
    int64_t n = read_u32_be(buf, 4, "count");
    if (buf.size() < 8 + static_cast<size_t>(n))
        throw FormatError("idx: label payload truncated: " + std::to_string(buf.size() - 8) + " of " +
                          std::to_string(n) + " bytes");
    std::vector<int> labels(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = buf[8 + static_cast<size_t>(i)];
    return labels;
}

inline Tensor load_idx_images(const std::string& path) { return parse_idx_images(idx_detail::slurp(path)); }

inline std::vector<int> load_idx_labels(const std::string& path) { return parse_idx_labels(idx_detail::slurp(path)); }

}  // namespace genint
