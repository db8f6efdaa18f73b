#pragma once

#include <array>
#include <cmath>
#include <string>

#include "genint/errors.hpp"

namespace genint {

struct Rgb {
    float r, g, b;
};

inline Rgb hsv_to_rgb(double h_deg, double s, double v) {
    double h = std::fmod(std::fmod(h_deg, 360.0) + 360.0, 360.0) / 60.0;
    int sector = static_cast<int>(h) % 6;
    double f = h - std::floor(h);
    double p = v * (1.0 - s);
    double q = v * (1.0 - s * f);
    double t = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    return Rgb{static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

// 20 background colors: hues every 18 degrees at S=0.8, V=0.9. Digit class i
// owns the complementary pair (i, i+10), 180 degrees apart, so the within-
// class color swing is large. That swing is what makes color a dominant
// factor of the generator's latent space, where the principal directions can
// steer it; adjacent-hue pairs leave the color bit almost invisible to PCA.
class ColorPalette {
public:
    static constexpr int kNumColors = 20;

    ColorPalette() {
        for (int i = 0; i < kNumColors; ++i) colors_[static_cast<size_t>(i)] = hsv_to_rgb(18.0 * i, 0.8, 0.9);
        validate();
    }

    const Rgb& color(int index) const {
        if (index < 0 || index >= kNumColors) throw IndexError("palette: color index " + std::to_string(index));
        return colors_[static_cast<size_t>(index)];
    }

    // The two colors assigned to a digit class.
    std::pair<int, int> assigned(int digit) const {
        if (digit < 0 || digit >= 10) throw IndexError("palette: digit " + std::to_string(digit));
        return {digit, digit + 10};
    }

    int owner_class(int color_index) const {
        if (color_index < 0 || color_index >= kNumColors)
            throw IndexError("palette: color index " + std::to_string(color_index));
        return color_index % 10;
    }

    std::string id() const { return "hsv20-s0.8-v0.9-complementary"; }

    void validate() const {
        for (int i = 0; i < kNumColors; ++i) {
            for (int j = i + 1; j < kNumColors; ++j) {
                const Rgb& a = colors_[static_cast<size_t>(i)];
                const Rgb& b = colors_[static_cast<size_t>(j)];
                double d = std::sqrt(std::pow(a.r - b.r, 2) + std::pow(a.g - b.g, 2) + std::pow(a.b - b.b, 2));
                if (d <= 0.05)
                    throw ValidationError("palette: colors " + std::to_string(i) + " and " + std::to_string(j) +
                                          " too close (" + std::to_string(d) + ")");
            }
        }
    }

private:
    std::array<Rgb, kNumColors> colors_;
};

}  // namespace genint
