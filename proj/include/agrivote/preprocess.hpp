#pragma once

#include <array>
#include <cmath>

#include "agrivote/errors.hpp"
#include "agrivote/image.hpp"

namespace agrivote {

/// Resize target plus the per-channel standardization constants applied to
/// [0,1] pixels. Defaults are the ImageNet statistics.
struct PreprocessConfig {
    int target_height = 224;
    int target_width = 224;
    std::array<double, 3> channel_mean{0.485, 0.456, 0.406};
    std::array<double, 3> channel_std{0.229, 0.224, 0.225};

    void validate() const {
        require(target_height > 0 && target_width > 0, ErrorCode::InvalidArgument,
                "target size must be positive");
        for (double s : channel_std)
            require(s > 0.0, ErrorCode::InvalidArgument, "channel std must be positive");
    }
};

/// Bilinear resize with half-pixel centers (the common framework default).
inline Image resize_bilinear(const Image& src, int target_height, int target_width) {
    if (src.height == target_height && src.width == target_width) return src;
    Image dst = make_image(target_height, target_width, src.channels);
    const double scale_y = static_cast<double>(src.height) / target_height;
    const double scale_x = static_cast<double>(src.width) / target_width;
    for (int y = 0; y < target_height; ++y) {
        double sy = (y + 0.5) * scale_y - 0.5;
        sy = std::max(0.0, std::min(sy, static_cast<double>(src.height - 1)));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < target_width; ++x) {
            double sx = (x + 0.5) * scale_x - 0.5;
            sx = std::max(0.0, std::min(sx, static_cast<double>(src.width - 1)));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - x0;
            for (int c = 0; c < src.channels; ++c) {
                const double top = src.at(y0, x0, c) * (1.0 - fx) + src.at(y0, x1, c) * fx;
                const double bot = src.at(y1, x0, c) * (1.0 - fx) + src.at(y1, x1, c) * fx;
                dst.at(y, x, c) = static_cast<float>(top * (1.0 - fy) + bot * fy);
            }
        }
    }
    return dst;
}

/// Resize to the target, standardize per channel, emit channel-first layout.
inline Tensor3 preprocess(const Image& image, const PreprocessConfig& cfg = {}) {
    cfg.validate();
    if (image.channels != 3)
        raise(ErrorCode::BadImage,
              "expected 3-channel image, got " + std::to_string(image.channels));
    if (image.height <= 0 || image.width <= 0)
        raise(ErrorCode::BadImage, "empty image");

    const Image resized = resize_bilinear(image, cfg.target_height, cfg.target_width);
    Tensor3 out;
    out.channels = 3;
    out.height = cfg.target_height;
    out.width = cfg.target_width;
    out.data.resize(static_cast<std::size_t>(3) * out.height * out.width);
    for (int c = 0; c < 3; ++c) {
        const double mean = cfg.channel_mean[static_cast<std::size_t>(c)];
        const double inv_std = 1.0 / cfg.channel_std[static_cast<std::size_t>(c)];
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
                out.at(c, y, x) = static_cast<float>((resized.at(y, x, c) - mean) * inv_std);
    }
    return out;
}

/// Views a CHW tensor as an HWC image (used by the shape-idempotence checks).
inline Image tensor_as_image(const Tensor3& tensor) {
    Image img = make_image(tensor.height, tensor.width, tensor.channels);
    for (int c = 0; c < tensor.channels; ++c)
        for (int y = 0; y < tensor.height; ++y)
            for (int x = 0; x < tensor.width; ++x)
                img.at(y, x, c) = tensor.at(c, y, x);
    return img;
}

}  // namespace agrivote
