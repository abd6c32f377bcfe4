#include <catch2/catch_amalgamated.hpp>

#include <agrivote/preprocess.hpp>

#include "helpers.hpp"

using namespace agrivote;

namespace {

Image constant_image(int h, int w, float r, float g, float b) {
    Image img = make_image(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    return img;
}

}  // namespace

TEST_CASE("image at the channel means maps to the zero tensor", "[preprocess]") {
    const Image img = constant_image(50, 80, 0.485f, 0.456f, 0.406f);
    const Tensor3 out = preprocess(img);
    REQUIRE(out.channels == 3);
    REQUIRE(out.height == 224);
    REQUIRE(out.width == 224);
    for (float v : out.data) CHECK(std::abs(v) < 1e-6f);
}

TEST_CASE("constant 1.0 in channel 0 standardizes to (1-mean)/std", "[preprocess]") {
    const Image img = constant_image(32, 32, 1.0f, 0.456f, 0.406f);
    const Tensor3 out = preprocess(img);
    // independent scalar computation of the same standardization
    const double expected = (1.0 - 0.485) / 0.229;
    CHECK(std::abs(expected - 2.2489) < 1e-4);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            CHECK(std::abs(out.at(0, y, x) - expected) < 1e-6);
}

TEST_CASE("output shape is 3x224x224 regardless of input size", "[preprocess]") {
    Rng rng(3);
    Image img = make_image(1000, 600, 3);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    const Tensor3 out = preprocess(img);
    CHECK(out.channels == 3);
    CHECK(out.height == 224);
    CHECK(out.width == 224);
}

TEST_CASE("non-3-channel input raises BadImage", "[preprocess]") {
    CHECK(throws_code([] { preprocess(make_image(10, 10, 1)); }, ErrorCode::BadImage));
    CHECK(throws_code([] { preprocess(make_image(10, 10, 4)); }, ErrorCode::BadImage));
}

TEST_CASE("preprocess keeps 224x224 when fed its own output shape", "[preprocess]") {
    Rng rng(11);
    Image img = make_image(64, 48, 3);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    const Tensor3 once = preprocess(img);
    const Tensor3 twice = preprocess(tensor_as_image(once));
    CHECK(twice.height == 224);
    CHECK(twice.width == 224);
}

TEST_CASE("same-size bilinear resize is the identity", "[preprocess]") {
    Rng rng(17);
    Image img = make_image(224, 224, 3);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    const Image resized = resize_bilinear(img, 224, 224);
    CHECK(resized.data == img.data);
}

TEST_CASE("bilinear resize preserves a constant image", "[preprocess]") {
    const Image img = constant_image(37, 61, 0.3f, 0.6f, 0.9f);
    const Image resized = resize_bilinear(img, 224, 224);
    for (int y = 0; y < 224; ++y)
        for (int x = 0; x < 224; ++x) {
            CHECK(std::abs(resized.at(y, x, 0) - 0.3f) < 1e-6f);
            CHECK(std::abs(resized.at(y, x, 2) - 0.9f) < 1e-6f);
        }
}

TEST_CASE("bilinear resize matches an external reference run", "[preprocess]") {
    // 4x6 -> 3x5 with half-pixel centers; expected values were computed with
    // an independent framework's bilinear resize and frozen here
    const double src[4][6] = {{1.0, 2.0, 4.0, 8.0, 16.0, 32.0},
                              {0.5, 1.5, 2.5, 3.5, 4.5, 5.5},
                              {9.0, 7.0, 5.0, 3.0, 1.0, -1.0},
                              {0.0, 0.25, 0.5, 0.75, 1.0, 1.25}};
    Image img = make_image(4, 6, 3);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(src[y][x]);

    const double expected[3][5] = {
        {1.0166666666666666, 2.4666666666666663, 5.5, 12.033333333333333, 26.233333333333324},
        {4.6999999999999993, 4.0999999999999996, 3.5, 2.8999999999999995, 2.3000000000000007},
        {1.4875000000000025, 1.3375000000000017, 1.1875000000000009, 1.0375000000000001,
         0.88749999999999951}};
    const Image out = resize_bilinear(img, 3, 5);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x)
            for (int c = 0; c < 3; ++c)
                CHECK(std::abs(out.at(y, x, c) - expected[y][x]) < 1e-5);  // float storage
}

TEST_CASE("normalization inverts back to the resized pixels", "[preprocess]") {
    Rng rng(23);
    Image img = make_image(100, 160, 3);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    const PreprocessConfig cfg;
    const Image resized = resize_bilinear(img, cfg.target_height, cfg.target_width);
    const Tensor3 out = preprocess(img, cfg);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                const double recovered =
                    out.at(c, y, x) * cfg.channel_std[static_cast<std::size_t>(c)] +
                    cfg.channel_mean[static_cast<std::size_t>(c)];
                CHECK(std::abs(recovered - resized.at(y, x, c)) < 1e-6);
            }
}

TEST_CASE("ppm codec round-trips pixel data", "[image]") {
    Rng rng(29);
    Image img = make_image(13, 17, 3);
    for (float& v : img.data) v = static_cast<float>(rng.below(256)) / 255.0f;
    const Image decoded = decode_ppm(encode_ppm(img));
    REQUIRE(decoded.height == 13);
    REQUIRE(decoded.width == 17);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(decoded.data[i] - img.data[i]) < 1e-6f);
}

TEST_CASE("ppm decoder rejects malformed input", "[image]") {
    CHECK(throws_code([] { decode_ppm("P5\n1 1\n255\nx"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { decode_ppm("P6\n4 4\n255\nshort"); }, ErrorCode::ParseError));
    // header ending exactly at EOF must not read out of bounds
    CHECK(throws_code([] { decode_ppm("P6\n1 1\n255"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { decode_ppm("P6\n0 4\n255\n"); }, ErrorCode::ParseError));
}
