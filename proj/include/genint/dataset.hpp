#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/tensor.hpp"

namespace genint {

// Images with class labels and (optionally) the nuisance annotation that
// produced them: a one-hot background-color index for synthesized splits, or
// the intervention scale vector for generated splits.
struct LabeledImageSet {
    Tensor images;               // [n, H, W, C], values in [0, 1]
    std::vector<int> labels;     // [n], in [0, num_classes)
    std::optional<Tensor> nuisance;  // [n, d_z]
    std::string palette_id;
    int num_classes = 10;

    int64_t size() const { return images.ndim() == 0 ? 0 : images.dim(0); }
    int64_t height() const { return images.dim(1); }
    int64_t width() const { return images.dim(2); }
    int64_t channels() const { return images.dim(3); }
    int64_t pixels_per_image() const { return height() * width() * channels(); }

    void validate() const {
        if (images.ndim() != 4) throw DimensionError("dataset: images must be [n,H,W,C], got " + shape_str(images.shape()));
        const int64_t n = images.dim(0);
        if (static_cast<int64_t>(labels.size()) != n)
            throw ValidationError("dataset: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                                  " images");
        if (nuisance && nuisance->dim(0) != n)
            throw ValidationError("dataset: nuisance rows " + std::to_string(nuisance->dim(0)) + " != n " +
                                  std::to_string(n));
        for (int y : labels)
            if (y < 0 || y >= num_classes)
                throw ValidationError("dataset: label " + std::to_string(y) + " outside [0," +
                                      std::to_string(num_classes) + ")");
        for (float v : images.storage())
            if (!(v >= 0.0f && v <= 1.0f))
                throw ValidationError("dataset: image value " + std::to_string(v) + " outside [0,1]");
    }

    // Flattens images to [n, H*W*C] for the MLP-facing modules.
    Tensor flat_images() const { return images.reshaped(Shape{size(), pixels_per_image()}); }

    LabeledImageSet subset(const std::vector<int64_t>& idx) const {
        LabeledImageSet out;
        const int64_t p = pixels_per_image();
        out.images = Tensor(Shape{static_cast<int64_t>(idx.size()), height(), width(), channels()});
        out.labels.resize(idx.size());
        out.palette_id = palette_id;
        out.num_classes = num_classes;
        for (size_t i = 0; i < idx.size(); ++i) {
            const float* src = images.data() + idx[i] * p;
            float* dst = out.images.data() + static_cast<int64_t>(i) * p;
            for (int64_t j = 0; j < p; ++j) dst[j] = src[j];
            out.labels[i] = labels[static_cast<size_t>(idx[i])];
        }
        if (nuisance) {
            const int64_t d = nuisance->dim(1);
            Tensor nz(Shape{static_cast<int64_t>(idx.size()), d});
            for (size_t i = 0; i < idx.size(); ++i)
                for (int64_t j = 0; j < d; ++j) nz[static_cast<int64_t>(i) * d + j] = (*nuisance)[idx[i] * d + j];
            out.nuisance = std::move(nz);
        }
        return out;
    }
};

}  // namespace genint
