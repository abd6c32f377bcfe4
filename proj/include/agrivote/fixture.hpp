#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "agrivote/image.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

/// The 15 pepper/potato/tomato class directory names, in sorted order.
inline std::vector<std::string> plantvillage15_class_names() {
    return {
        "Pepper__bell___Bacterial_spot",
        "Pepper__bell___healthy",
        "Potato___Early_blight",
        "Potato___Late_blight",
        "Potato___healthy",
        "Tomato_Bacterial_spot",
        "Tomato_Early_blight",
        "Tomato_Late_blight",
        "Tomato_Leaf_Mold",
        "Tomato_Septoria_leaf_spot",
        "Tomato_Spider_mites_Two_spotted_spider_mite",
        "Tomato__Target_Spot",
        "Tomato__Tomato_YellowLeaf__Curl_Virus",
        "Tomato__Tomato_mosaic_virus",
        "Tomato_healthy",
    };
}

/// Class sizes of the same 15-class subset (20,638 images total), used by
/// tests that need a realistic listing without the images.
inline std::vector<std::size_t> plantvillage15_class_sizes() {
    return {997,  1478, 1000, 1000, 152,  2127, 1000, 1909,
            952,  1771, 1676, 1404, 3208, 373,  1591};
}

// ---------------------------------------------------------------------------
// Synthetic fixture: class-tinted noise images. Each class has a distinct
// base color; pixels add uniform noise, and each image adds a global color
// jitter that creates genuine boundary cases between neighboring tints.
// ---------------------------------------------------------------------------

struct FixtureSpec {
    std::filesystem::path out_dir;
    std::vector<std::string> class_names;  // empty -> plantvillage15 names
    int images_per_class = 30;
    int image_size = 64;
    std::uint64_t seed = 7;
    double pixel_noise = 0.25;   // per-pixel uniform noise amplitude
    double image_jitter = 0.10;  // per-image global color shift amplitude
};

namespace detail {

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

inline std::array<double, 3> class_tint(std::size_t class_index, std::size_t num_classes) {
    const double hue = static_cast<double>(class_index) / static_cast<double>(num_classes);
    const double value = 0.55 + 0.25 * ((class_index % 3) / 2.0);
    return hsv_to_rgb(hue, 0.65, value);
}

}  // namespace detail

inline Image make_fixture_image(std::size_t class_index, std::size_t num_classes,
                                std::size_t image_index, const FixtureSpec& spec) {
    const std::array<double, 3> tint = detail::class_tint(class_index, num_classes);
    Rng rng(mix_seed(mix_seed(spec.seed, class_index), image_index));
    std::array<double, 3> jitter{};
    for (double& j : jitter) j = rng.uniform(-spec.image_jitter, spec.image_jitter);

    Image img = make_image(spec.image_size, spec.image_size, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double noise = rng.uniform(-spec.pixel_noise, spec.pixel_noise);
                const double value = tint[static_cast<std::size_t>(c)] +
                                     jitter[static_cast<std::size_t>(c)] + noise;
                img.at(y, x, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
            }
    return img;
}

/// Writes `<out_dir>/<class_name>/img_####.ppm` for every class; returns the
/// class names used.
inline std::vector<std::string> generate_fixture(const FixtureSpec& spec) {
    std::vector<std::string> names =
        spec.class_names.empty() ? plantvillage15_class_names() : spec.class_names;
    require(!names.empty(), ErrorCode::InvalidArgument, "fixture needs class names");
    require(spec.images_per_class >= 1 && spec.image_size >= 4, ErrorCode::InvalidArgument,
            "fixture needs at least 1 image per class and size >= 4");

    for (std::size_t k = 0; k < names.size(); ++k) {
        const std::filesystem::path class_dir = spec.out_dir / names[k];
        std::filesystem::create_directories(class_dir);
        for (int i = 0; i < spec.images_per_class; ++i) {
            char file_name[32];
            std::snprintf(file_name, sizeof(file_name), "img_%04d.ppm", i);
            save_ppm(make_fixture_image(k, names.size(), static_cast<std::size_t>(i), spec),
                     class_dir / file_name);
        }
    }
    return names;
}

}  // namespace agrivote
