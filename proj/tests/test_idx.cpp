#include <doctest.h>

#include "genint/idx.hpp"

using namespace genint;

namespace {
std::vector<unsigned char> be32(uint32_t v) {
    return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}
void append(std::vector<unsigned char>& buf, const std::vector<unsigned char>& bytes) {
    buf.insert(buf.end(), bytes.begin(), bytes.end());
}
}  // namespace

TEST_CASE("image fixture parses and scales to [0,1]") {
    std::vector<unsigned char> buf;
    append(buf, be32(0x00000803));
    append(buf, be32(1));  // count
    append(buf, be32(2));  // rows
    append(buf, be32(2));  // cols
    append(buf, {0, 255, 128, 64});
    Tensor t = parse_idx_images(buf);
    CHECK(t.shape() == Shape{1, 2, 2, 1});
    CHECK(t[0] == doctest::Approx(0.0f));
    CHECK(t[1] == doctest::Approx(1.0f));
    CHECK(t[2] == doctest::Approx(128.0f / 255.0f));
    CHECK(t[3] == doctest::Approx(64.0f / 255.0f));
}

TEST_CASE("label fixture parses") {
    std::vector<unsigned char> buf;
    append(buf, be32(0x00000801));
    append(buf, be32(3));
    append(buf, {7, 0, 9});
    auto labels = parse_idx_labels(buf);
    CHECK(labels == std::vector<int>{7, 0, 9});
}

TEST_CASE("wrong magic names the magic found") {
    std::vector<unsigned char> buf;
    append(buf, be32(0x00000999));
    append(buf, be32(1));
    try {
        parse_idx_images(buf);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("0x00000999") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_idx_labels(buf), FormatError);
}

TEST_CASE("truncated payload reports a length error") {
    std::vector<unsigned char> buf;
    append(buf, be32(0x00000803));
    append(buf, be32(2));
    append(buf, be32(2));
    append(buf, be32(2));
    append(buf, {1, 2, 3});  // 8 bytes promised
    CHECK_THROWS_AS(parse_idx_images(buf), FormatError);
}

TEST_CASE("file round trip through disk") {
    std::vector<unsigned char> buf;
    append(buf, be32(0x00000801));
    append(buf, be32(2));
    append(buf, {3, 4});
    std::string path = "idx_fixture_labels.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    auto labels = load_idx_labels(path);
    CHECK(labels == std::vector<int>{3, 4});
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_idx_labels("does_not_exist.idx"), IoError);
}
