#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "genint/dataset.hpp"
#include "genint/tensor_io.hpp"

namespace genint {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// FNV-1a 64-bit over raw bytes; the content checksum used for stage
// idempotency and artifact provenance.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline uint64_t file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checksum: cannot open '" + path.string() + "'");
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    return h;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Dataset bundle: a directory holding images.gint, labels.gint, optional
// nuisance.gint, and meta.json.
inline void save_dataset(const fs::path& dir, const LabeledImageSet& set, Json extra_meta = Json::object()) {
    fs::create_directories(dir);
    write_tensor_file((dir / "images.gint").string(), set.images);
    Tensor labels(Shape{set.size()});
    for (int64_t i = 0; i < set.size(); ++i) labels[i] = static_cast<float>(set.labels[static_cast<size_t>(i)]);
    write_tensor_file((dir / "labels.gint").string(), labels);
    if (set.nuisance) write_tensor_file((dir / "nuisance.gint").string(), *set.nuisance);
    Json meta = std::move(extra_meta);
    meta["count"] = set.size();
    meta["num_classes"] = set.num_classes;
    meta["palette"] = set.palette_id;
    meta["has_nuisance"] = set.nuisance.has_value();
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline LabeledImageSet load_dataset(const fs::path& dir) {
    LabeledImageSet set;
    set.images = read_tensor_file((dir / "images.gint").string());
    Tensor labels = read_tensor_file((dir / "labels.gint").string());
    set.labels.resize(static_cast<size_t>(labels.numel()));
    for (int64_t i = 0; i < labels.numel(); ++i) set.labels[static_cast<size_t>(i)] = static_cast<int>(labels[i]);
    if (fs::exists(dir / "nuisance.gint")) set.nuisance = read_tensor_file((dir / "nuisance.gint").string());
    Json meta = Json::parse(read_text_file(dir / "meta.json"));
    set.num_classes = meta.value("num_classes", 10);
    set.palette_id = meta.value("palette", std::string{});
    set.validate();
    return set;
}

}  // namespace genint
