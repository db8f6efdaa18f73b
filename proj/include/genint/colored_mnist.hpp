#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "genint/dataset.hpp"
#include "genint/palette.hpp"
#include "genint/rng.hpp"
#include "genint/tensor.hpp"

namespace genint {

enum class ColorMode {
    train_confounded,
    test_confounded,
    test_causal,
};

inline std::string to_string(ColorMode m) {
    switch (m) {
        case ColorMode::train_confounded: return "train_confounded";
        case ColorMode::test_confounded: return "test_confounded";
        case ColorMode::test_causal: return "test_causal";
    }
    return "?";
}

namespace colored_detail {

// Renders one grayscale digit over a background color: every output pixel is
// the convex mix p * white + (1 - p) * bg, so p=1 stays white and p=0 is the
// background exactly.
inline void mix_over_background(const float* gray, int64_t hw, const Rgb& bg, float* out_rgb) {
    for (int64_t p = 0; p < hw; ++p) {
        float g = gray[p];
        out_rgb[3 * p + 0] = g + (1.0f - g) * bg.r;
        out_rgb[3 * p + 1] = g + (1.0f - g) * bg.g;
        out_rgb[3 * p + 2] = g + (1.0f - g) * bg.b;
    }
}

}  // namespace colored_detail

// Internal worker shared by the standard modes and the IRM environment
// builder: `color_noise` is the probability that a confounded sample draws a
// uniform palette color instead of one of its class's two assigned colors.
inline LabeledImageSet colorize(const LabeledImageSet& gray, const ColorPalette& palette, ColorMode mode,
                                uint64_t seed, double color_noise = 0.0, bool unseen_hues = false) {
    if (gray.channels() != 1)
        throw DimensionError("colorize: expected single-channel input, got " + std::to_string(gray.channels()) +
                             " channels");
    const int64_t n = gray.size(), h = gray.height(), w = gray.width(), hw = h * w;
    LabeledImageSet out;
    out.images = Tensor(Shape{n, h, w, 3});
    out.labels = gray.labels;
    out.num_classes = gray.num_classes;
    out.palette_id = palette.id();
    Tensor nuisance(Shape{n, static_cast<int64_t>(ColorPalette::kNumColors)});
    for (int64_t i = 0; i < n; ++i) {
        Rng rng = derive_rng(seed, static_cast<uint64_t>(i));
        int digit = gray.labels[static_cast<size_t>(i)];
        Rgb bg{};
        int color_index;
        if (mode == ColorMode::test_causal && unseen_hues) {
            double hue = rng.uniform(0.0, 360.0);
            bg = hsv_to_rgb(hue, 0.8, 0.9);
            color_index = static_cast<int>(hue / 18.0) % ColorPalette::kNumColors;
        } else if (mode == ColorMode::test_causal) {
            color_index = static_cast<int>(rng.uniform_int(ColorPalette::kNumColors));
            bg = palette.color(color_index);
        } else {
            if (color_noise > 0.0 && rng.uniform() < color_noise) {
                color_index = static_cast<int>(rng.uniform_int(ColorPalette::kNumColors));
            } else {
                auto [c0, c1] = palette.assigned(digit);
                color_index = rng.uniform_int(2) == 0 ? c0 : c1;
            }
            bg = palette.color(color_index);
        }
        nuisance[i * ColorPalette::kNumColors + color_index] = 1.0f;
        colored_detail::mix_over_background(gray.images.data() + i * hw, hw, bg, out.images.data() + i * hw * 3);
    }
    out.nuisance = std::move(nuisance);
    return out;
}

// Colors a grayscale digit set per the benchmark construction: in confounded
// modes the background is one of the class's two assigned colors; in the
// causal mode it is uniform over the full palette, independent of the label.
inline LabeledImageSet synth_colored_mnist(const LabeledImageSet& gray, const ColorPalette& palette, ColorMode mode,
                                           uint64_t seed, bool unseen_hues = false) {
    return colorize(gray, palette, mode, seed, 0.0, unseen_hues);
}

inline int nuisance_color_index(const LabeledImageSet& set, int64_t i) {
    const Tensor& nz = *set.nuisance;
    const int64_t d = nz.dim(1);
    for (int64_t j = 0; j < d; ++j)
        if (nz[i * d + j] > 0.5f) return static_cast<int>(j);
    return -1;
}

// ---- built-in grayscale digit source ---------------------------------------
//
// A deterministic stand-in for the MNIST files when none are on disk: a 5x7
// pixel font rendered at 28x28 with per-sample rotation, scale, shear,
// translation and stroke-intensity jitter. Bilinear sampling of the glyph
// grid produces anti-aliased strokes.

namespace digit_font {
inline const std::array<std::array<const char*, 7>, 10>& rows() {
    static const std::array<std::array<const char*, 7>, 10> kRows = {{
        {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},
        {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},
        {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},
        {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},
        {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},
        {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},
        {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},
        {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},
        {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},
        {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},
    }};
    return kRows;
}

// Continuous glyph field via bilinear interpolation over the 5x7 grid;
// coordinates outside the glyph are background.
inline double sample(int digit, double u, double v) {
    const auto& glyph = rows()[static_cast<size_t>(digit)];
    if (u < -0.5 || v < -0.5 || u > 4.5 || v > 6.5) return 0.0;
    auto cell = [&](int cu, int cv) -> double {
        if (cu < 0 || cu > 4 || cv < 0 || cv > 6) return 0.0;
        return glyph[static_cast<size_t>(cv)][cu] == '1' ? 1.0 : 0.0;
    };
    int u0 = static_cast<int>(std::floor(u)), v0 = static_cast<int>(std::floor(v));
    double fu = u - u0, fv = v - v0;
    return cell(u0, v0) * (1 - fu) * (1 - fv) + cell(u0 + 1, v0) * fu * (1 - fv) + cell(u0, v0 + 1) * (1 - fu) * fv +
           cell(u0 + 1, v0 + 1) * fu * fv;
}
}  // namespace digit_font

// n samples, labels cycling 0..9, deterministic in seed.
inline LabeledImageSet make_synthetic_digits(int64_t n, uint64_t seed) {
    const int64_t size = 28;
    LabeledImageSet out;
    out.images = Tensor(Shape{n, size, size, 1});
    out.labels.resize(static_cast<size_t>(n));
    out.num_classes = 10;
    for (int64_t i = 0; i < n; ++i) {
        Rng rng = derive_rng(seed ^ 0x5d1917ULL, static_cast<uint64_t>(i));
        int digit = static_cast<int>(i % 10);
        out.labels[static_cast<size_t>(i)] = digit;
        double rot = rng.uniform(-0.35, 0.35);
        double shear = rng.uniform(-0.30, 0.30);
        double sx = rng.uniform(2.2, 3.6);   // pixels per glyph cell, x
        double sy = rng.uniform(1.9, 3.1);   // pixels per glyph cell, y
        double tx = rng.uniform(-3.5, 3.5);  // center offset
        double ty = rng.uniform(-3.0, 3.0);
        double intensity = rng.uniform(0.65, 1.0);
        double cr = std::cos(rot), sr = std::sin(rot);
        float* img = out.images.data() + i * size * size;
        for (int64_t py = 0; py < size; ++py) {
            for (int64_t px = 0; px < size; ++px) {
                // Map output pixel back into glyph coordinates.
                double dx = static_cast<double>(px) - (size / 2.0 + tx);
                double dy = static_cast<double>(py) - (size / 2.0 + ty);
                double rx = cr * dx + sr * dy;
                double ry = -sr * dx + cr * dy;
                rx -= shear * ry;
                double u = rx / sx + 2.0;  // glyph center (2, 3)
                double v = ry / sy + 3.0;
                double p = digit_font::sample(digit, u, v) * intensity;
                img[py * size + px] = static_cast<float>(std::min(1.0, std::max(0.0, p)));
            }
        }
    }
    return out;
}

}  // namespace genint
