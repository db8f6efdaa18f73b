#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/tensor.hpp"

namespace genint {

// GINT tensor file: ASCII magic "GINT", u32 little-endian version = 1,
// u8 dtype (0 = 32-bit real), u8 ndim, ndim x u32 little-endian dims, then
// the raw little-endian float payload, row-major. Round trips are bit-exact.

static_assert(std::endian::native == std::endian::little, "GINT writer assumes a little-endian host");
static_assert(sizeof(float) == 4, "GINT assumes 32-bit floats");

namespace gint_detail {
constexpr char kMagic[4] = {'G', 'I', 'N', 'T'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
constexpr int64_t kMaxElements = int64_t{1} << 33;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::vector<unsigned char>& buf, size_t& off, const char* what) {
    if (off + sizeof(T) > buf.size()) throw FormatError(std::string("gint: truncated while reading ") + what);
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}
}  // namespace gint_detail

inline std::string encode_tensor(const Tensor& t) {
    using namespace gint_detail;
    if (t.ndim() > 255) throw FormatError("gint: rank exceeds format limit");
    std::string out;
    out.append(kMagic, 4);
    put(out, kVersion);
    put(out, kDtypeF32);
    put(out, static_cast<uint8_t>(t.ndim()));
    for (size_t i = 0; i < t.ndim(); ++i) {
        if (t.dim(i) > UINT32_MAX) throw FormatError("gint: dimension overflows u32");
        put(out, static_cast<uint32_t>(t.dim(i)));
    }
    out.append(reinterpret_cast<const char*>(t.data()), static_cast<size_t>(t.numel()) * 4);
    return out;
}

inline Tensor decode_tensor(const std::vector<unsigned char>& buf) {
    using namespace gint_detail;
    size_t off = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("gint: bad magic (expected \"GINT\")");
    off = 4;
    uint32_t version = take<uint32_t>(buf, off, "version");
    if (version != kVersion) throw FormatError("gint: unsupported version " + std::to_string(version));
    uint8_t dtype = take<uint8_t>(buf, off, "dtype");
    if (dtype != kDtypeF32) throw FormatError("gint: unsupported dtype code " + std::to_string(dtype));
    uint8_t ndim = take<uint8_t>(buf, off, "ndim");
    Shape shape(ndim);
    int64_t numel = 1;
    for (int i = 0; i < ndim; ++i) {
        shape[static_cast<size_t>(i)] = take<uint32_t>(buf, off, "dim");
        numel *= shape[static_cast<size_t>(i)];
        if (numel > kMaxElements) throw FormatError("gint: dimension product overflows sanity bound");
    }
    if (buf.size() - off != static_cast<size_t>(numel) * 4)
        throw FormatError("gint: payload is " + std::to_string(buf.size() - off) + " bytes, shape " +
                          shape_str(shape) + " needs " + std::to_string(numel * 4));
    std::vector<float> data(static_cast<size_t>(numel));
    std::memcpy(data.data(), buf.data() + off, static_cast<size_t>(numel) * 4);
    return Tensor(std::move(shape), std::move(data));
}

inline void write_tensor_file(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("gint: cannot open '" + path + "' for writing");
    std::string bytes = encode_tensor(t);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("gint: short write to '" + path + "'");
}

inline Tensor read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("gint: cannot open '" + path + "'");
    std::vector<unsigned char> buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_tensor(buf);
}

}  // namespace genint
