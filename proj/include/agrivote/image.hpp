#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

/// Decoded image, HWC layout, float values in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    float at(int y, int x, int c) const {
        return data[static_cast<std::size_t>((y * width + x) * channels + c)];
    }
    float& at(int y, int x, int c) {
        return data[static_cast<std::size_t>((y * width + x) * channels + c)];
    }
};

/// Model input, CHW layout.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    float at(int c, int y, int x) const {
        return data[static_cast<std::size_t>((c * height + y) * width + x)];
    }
    float& at(int c, int y, int x) {
        return data[static_cast<std::size_t>((c * height + y) * width + x)];
    }
};

inline Image make_image(int height, int width, int channels = 3, float fill = 0.0f) {
    Image img{height, width, channels, {}};
    img.data.assign(static_cast<std::size_t>(height) * width * channels, fill);
    return img;
}

// ---------------------------------------------------------------------------
// PPM (P6) codec. The fixture generator and dataset loader speak this format;
// it keeps the toolkit free of image-library dependencies.
// ---------------------------------------------------------------------------

inline std::string encode_ppm(const Image& img) {
    if (img.channels != 3) raise(ErrorCode::BadImage, "PPM encoder expects 3 channels");
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.data.size());
    for (float v : img.data) {
        const float clamped = std::clamp(v, 0.0f, 1.0f);
        out += static_cast<char>(static_cast<int>(clamped * 255.0f + 0.5f));
    }
    return out;
}

inline Image decode_ppm(std::string_view bytes, const std::string& context = "ppm") {
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) { ++pos; continue; }
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) raise(ErrorCode::ParseError, "truncated header in " + context);
        return std::string(bytes.substr(start, pos - start));
    };

    const std::string magic = next_token();
    if (magic != "P6") raise(ErrorCode::ParseError, "unsupported image magic '" + magic + "' in " + context);
    const int width = static_cast<int>(parse_int(next_token(), context));
    const int height = static_cast<int>(parse_int(next_token(), context));
    const int maxval = static_cast<int>(parse_int(next_token(), context));
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        raise(ErrorCode::ParseError, "bad PPM dimensions in " + context);
    ++pos;  // single whitespace after maxval

    const std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (pos > bytes.size() || bytes.size() - pos < need)
        raise(ErrorCode::ParseError, "truncated pixel data in " + context);

    Image img = make_image(height, width, 3);
    const float scale = 1.0f / static_cast<float>(maxval);
    for (std::size_t i = 0; i < need; ++i)
        img.data[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) * scale;
    return img;
}

inline void save_ppm(const Image& img, const std::filesystem::path& path) {
    write_file(path, encode_ppm(img));
}

inline Image load_ppm(const std::filesystem::path& path) {
    return decode_ppm(read_file(path), path.string());
}

}  // namespace agrivote
