#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/image.hpp"
#include "agrivote/probability.hpp"
#include "agrivote/util.hpp"

#include <json.hpp>

namespace agrivote {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Architectures. Each backbone maps a 3x224x224 tensor to a fixed-width
// feature vector; the widths below are the classifier input widths of the
// corresponding reference architectures.
// ---------------------------------------------------------------------------

enum class Arch { ResNet50 = 0, EfficientNetB0 = 1, DenseNet121 = 2 };

inline const char* arch_name(Arch arch) {
    switch (arch) {
        case Arch::ResNet50:       return "resnet50";
        case Arch::EfficientNetB0: return "efficientnetb0";
        case Arch::DenseNet121:    return "densenet121";
    }
    return "resnet50";
}

inline Arch arch_from_string(std::string_view text) {
    if (text == "resnet50") return Arch::ResNet50;
    if (text == "efficientnetb0") return Arch::EfficientNetB0;
    if (text == "densenet121") return Arch::DenseNet121;
    raise(ErrorCode::UnknownArch, "unknown architecture '" + std::string(text) + "'");
}

inline int feature_dim(Arch arch) {
    switch (arch) {
        case Arch::ResNet50:       return 2048;
        case Arch::EfficientNetB0: return 1280;
        case Arch::DenseNet121:    return 1024;
    }
    return 2048;
}

/// Pool grid used by the feature extractor; differs per arch so the three
/// backbones see the input at different granularities.
inline int pool_grid(Arch arch) {
    switch (arch) {
        case Arch::ResNet50:       return 16;
        case Arch::EfficientNetB0: return 8;
        case Arch::DenseNet121:    return 12;
    }
    return 16;
}

struct ModelSpec {
    Arch arch = Arch::ResNet50;
    int num_classes = 15;
    bool pretrained = true;

    void validate() const {
        require(num_classes >= 2, ErrorCode::InvalidArgument, "num_classes must be >= 2");
    }
};

// ---------------------------------------------------------------------------
// Weight provider boundary. Backbone weights are fetched, never trained and
// never stored in checkpoints; a checkpoint records the provider descriptor
// and the checksum of what it fetched.
// ---------------------------------------------------------------------------

struct BackboneWeights {
    Arch arch = Arch::ResNet50;
    int grid = 16;
    int input_size = 224;
    Eigen::MatrixXd projection;  // feature_dim x (3 * grid * grid)
    Eigen::VectorXd bias;        // feature_dim

    int pooled_dim() const { return 3 * grid * grid; }
};

inline std::string backbone_checksum(const BackboneWeights& weights) {
    std::uint64_t h = fnv1a64(arch_name(weights.arch), std::string_view(arch_name(weights.arch)).size());
    h = fnv1a64(&weights.grid, sizeof(weights.grid), h);
    h = fnv1a64(&weights.input_size, sizeof(weights.input_size), h);
    h = fnv1a64(weights.projection.data(),
                sizeof(double) * static_cast<std::size_t>(weights.projection.size()), h);
    h = fnv1a64(weights.bias.data(),
                sizeof(double) * static_cast<std::size_t>(weights.bias.size()), h);
    return hex64(h);
}

class WeightProvider {
public:
    virtual ~WeightProvider() = default;
    virtual BackboneWeights fetch(Arch arch) const = 0;
    /// Stable string from which the provider can be reconstructed, e.g.
    /// "random:42" or "file:/path/to/dir".
    virtual std::string descriptor() const = 0;
};

/// Deterministic seeded backbone for offline use: pooled random projection
/// with a tanh nonlinearity. Same seed, same weights, same checksum.
class RandomBackboneProvider final : public WeightProvider {
public:
    explicit RandomBackboneProvider(std::uint64_t seed = 42) : seed_(seed) {}

    BackboneWeights fetch(Arch arch) const override {
        BackboneWeights weights;
        weights.arch = arch;
        weights.grid = pool_grid(arch);
        weights.input_size = 224;
        const int dim = feature_dim(arch);
        const int pooled = weights.pooled_dim();
        Rng rng(mix_seed(seed_, static_cast<std::uint64_t>(arch) + 101));
        const double scale = 1.0 / std::sqrt(static_cast<double>(pooled));
        weights.projection.resize(dim, pooled);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < pooled; ++c) weights.projection(r, c) = scale * rng.normal();
        weights.bias.resize(dim);
        for (int r = 0; r < dim; ++r) weights.bias(r) = 0.1 * rng.normal();
        return weights;
    }

    std::string descriptor() const override { return "random:" + std::to_string(seed_); }

private:
    std::uint64_t seed_;
};

// Binary backbone container: magic line, arch line, dims line, then raw
// little-endian doubles (projection row-major, then bias).
inline void export_backbone(const BackboneWeights& weights, const std::filesystem::path& path) {
    std::string out = "AGRIVOTE-BACKBONE-V1\n";
    out += std::string(arch_name(weights.arch)) + "\n";
    out += std::to_string(weights.grid) + " " + std::to_string(weights.input_size) + " " +
           std::to_string(weights.projection.rows()) + "\n";
    const auto append_doubles = [&out](const double* data, std::size_t count) {
        out.append(reinterpret_cast<const char*>(data), count * sizeof(double));
    };
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major =
        weights.projection;
    append_doubles(row_major.data(), static_cast<std::size_t>(row_major.size()));
    append_doubles(weights.bias.data(), static_cast<std::size_t>(weights.bias.size()));
    write_file(path, out);
}

inline BackboneWeights import_backbone(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    const auto next_line = [&]() -> std::string {
        const auto nl = bytes.find('\n', pos);
        if (nl == std::string::npos) raise(ErrorCode::ParseError, "truncated backbone file " + path.string());
        std::string line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    if (next_line() != "AGRIVOTE-BACKBONE-V1")
        raise(ErrorCode::ParseError, "bad backbone magic in " + path.string());
    BackboneWeights weights;
    weights.arch = arch_from_string(next_line());
    const auto dims = split_string(next_line(), ' ');
    require(dims.size() == 3, ErrorCode::ParseError, "bad backbone dims in " + path.string());
    weights.grid = static_cast<int>(parse_int(dims[0], "backbone grid"));
    weights.input_size = static_cast<int>(parse_int(dims[1], "backbone input size"));
    const int dim = static_cast<int>(parse_int(dims[2], "backbone feature dim"));
    require(weights.grid > 0 && dim > 0 && weights.input_size >= weights.grid,
            ErrorCode::ParseError, "bad backbone dims in " + path.string());

    const std::size_t pooled = static_cast<std::size_t>(weights.pooled_dim());
    const std::size_t need = (static_cast<std::size_t>(dim) * pooled + dim) * sizeof(double);
    require(bytes.size() - pos == need, ErrorCode::ParseError,
            "backbone payload size mismatch in " + path.string());

    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(dim, pooled);
    std::memcpy(row_major.data(), bytes.data() + pos, static_cast<std::size_t>(dim) * pooled * sizeof(double));
    pos += static_cast<std::size_t>(dim) * pooled * sizeof(double);
    weights.projection = row_major;
    weights.bias.resize(dim);
    std::memcpy(weights.bias.data(), bytes.data() + pos, static_cast<std::size_t>(dim) * sizeof(double));
    return weights;
}

/// Loads exported backbones from `<dir>/<arch>.backbone`. An empty dir falls
/// back to the AGRIVOTE_PROVIDER_CACHE environment variable.
class FileWeightProvider final : public WeightProvider {
public:
    explicit FileWeightProvider(std::string dir) : dir_(std::move(dir)) {
        if (dir_.empty()) {
            const char* env = std::getenv("AGRIVOTE_PROVIDER_CACHE");
            if (env != nullptr) dir_ = env;
        }
        if (dir_.empty())
            raise(ErrorCode::ProviderError,
                  "file provider needs a directory (argument or AGRIVOTE_PROVIDER_CACHE)");
    }

    BackboneWeights fetch(Arch arch) const override {
        const std::filesystem::path path =
            std::filesystem::path(dir_) / (std::string(arch_name(arch)) + ".backbone");
        if (!std::filesystem::exists(path))
            raise(ErrorCode::ProviderError, "backbone file not found: " + path.string());
        BackboneWeights weights = import_backbone(path);
        require(weights.arch == arch, ErrorCode::ProviderError,
                "backbone file " + path.string() + " holds a different architecture");
        return weights;
    }

    std::string descriptor() const override { return "file:" + dir_; }

private:
    std::string dir_;
};

inline std::unique_ptr<WeightProvider> make_provider(std::string_view descriptor) {
    const auto colon = descriptor.find(':');
    const std::string_view kind = descriptor.substr(0, colon);
    const std::string rest =
        colon == std::string_view::npos ? std::string() : std::string(descriptor.substr(colon + 1));
    if (kind == "random")
        return std::make_unique<RandomBackboneProvider>(
            rest.empty() ? 42ull : static_cast<std::uint64_t>(parse_int(rest, "provider seed")));
    if (kind == "file") return std::make_unique<FileWeightProvider>(rest);
    raise(ErrorCode::ProviderError, "unknown provider descriptor '" + std::string(descriptor) + "'");
}

// ---------------------------------------------------------------------------
// Adapted model: frozen backbone + trainable C-way linear head.
// ---------------------------------------------------------------------------

struct AdaptedModel {
    ModelSpec spec;
    BackboneWeights backbone;     // frozen; never mutated after build
    std::string checksum;         // checksum of the fetched backbone
    std::string provider;         // descriptor the backbone came from
    std::uint64_t head_seed = 42;
    Eigen::MatrixXd head_weight;  // C x feature_dim
    Eigen::VectorXd head_bias;    // C

    std::string tag() const { return arch_name(spec.arch); }
};

/// Head init: uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], the standard
/// linear-layer default, drawn deterministically from head_seed.
inline AdaptedModel build_model(const ModelSpec& spec, std::uint64_t head_seed,
                                const WeightProvider& provider) {
    spec.validate();
    AdaptedModel model;
    model.spec = spec;
    model.backbone = provider.fetch(spec.arch);
    model.checksum = backbone_checksum(model.backbone);
    model.provider = provider.descriptor();
    model.head_seed = head_seed;

    const int dim = static_cast<int>(model.backbone.projection.rows());
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    Rng rng(mix_seed(head_seed, 0xadaeu));
    model.head_weight.resize(spec.num_classes, dim);
    for (int r = 0; r < spec.num_classes; ++r)
        for (int c = 0; c < dim; ++c) model.head_weight(r, c) = rng.uniform(-bound, bound);
    model.head_bias.resize(spec.num_classes);
    for (int r = 0; r < spec.num_classes; ++r) model.head_bias(r) = rng.uniform(-bound, bound);
    return model;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace detail {

/// Adaptive average pooling to grid x grid per channel (floor/ceil window
/// boundaries, so any input size divides cleanly).
inline Eigen::VectorXd adaptive_pool(const Tensor3& input, int grid) {
    Eigen::VectorXd pooled(3 * grid * grid);
    Eigen::Index k = 0;
    for (int c = 0; c < 3; ++c) {
        for (int gy = 0; gy < grid; ++gy) {
            const int y0 = gy * input.height / grid;
            const int y1 = (gy + 1) * input.height / grid + ((gy + 1) * input.height % grid ? 1 : 0);
            for (int gx = 0; gx < grid; ++gx) {
                const int x0 = gx * input.width / grid;
                const int x1 = (gx + 1) * input.width / grid + ((gx + 1) * input.width % grid ? 1 : 0);
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) sum += input.at(c, y, x);
                pooled(k++) = sum / (static_cast<double>(y1 - y0) * (x1 - x0));
            }
        }
    }
    return pooled;
}

}  // namespace detail

inline void check_batch_shape(const AdaptedModel& model, const Tensor3& input) {
    if (input.channels != 3 || input.height != model.backbone.input_size ||
        input.width != model.backbone.input_size)
        raise(ErrorCode::BadBatch,
              "expected 3x" + std::to_string(model.backbone.input_size) + "x" +
                  std::to_string(model.backbone.input_size) + " input, got " +
                  std::to_string(input.channels) + "x" + std::to_string(input.height) + "x" +
                  std::to_string(input.width));
}

/// Frozen feature extraction: tanh(projection * pool(input) + bias).
inline Eigen::VectorXd features(const AdaptedModel& model, const Tensor3& input) {
    check_batch_shape(model, input);
    const Eigen::VectorXd pooled = detail::adaptive_pool(input, model.backbone.grid);
    Eigen::VectorXd out = model.backbone.projection * pooled + model.backbone.bias;
    return out.array().tanh().matrix();
}

inline Eigen::VectorXd head_logits(const AdaptedModel& model, const Eigen::VectorXd& feature_vec) {
    return model.head_weight * feature_vec + model.head_bias;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double max_logit = logits.maxCoeff();
    Eigen::VectorXd shifted = (logits.array() - max_logit).exp();
    return shifted / shifted.sum();
}

inline Eigen::VectorXd forward_single(const AdaptedModel& model, const Tensor3& input) {
    return softmax(head_logits(model, features(model, input)));
}

/// Batch forward; returns B x C probability rows.
inline Eigen::MatrixXd forward_probs(const AdaptedModel& model, const std::vector<Tensor3>& batch) {
    require(!batch.empty(), ErrorCode::BadBatch, "empty batch");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()), model.spec.num_classes);
    for (std::size_t i = 0; i < batch.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = forward_single(model, batch[i]).transpose();
    return out;
}

}  // namespace agrivote
