#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/image.hpp"
#include "agrivote/labels.hpp"
#include "agrivote/preprocess.hpp"
#include "agrivote/split.hpp"
#include "agrivote/trainer.hpp"

namespace agrivote {

struct DatasetListing {
    LabelRegistry registry;
    std::vector<std::pair<std::string, int>> files;  // (relative path, class id)
};

inline bool is_image_file(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    return ext == ".ppm" || ext == ".PPM";
}

/// Scans `root/<class_name>/<image>` and builds the registry from the
/// directory names. Paths come back sorted, with forward slashes.
inline DatasetListing scan_dataset(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        raise(ErrorCode::IoError, "dataset root not found: " + root.string());

    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    if (names.empty()) raise(ErrorCode::EmptyRegistry, "no class directories under " + root.string());

    DatasetListing listing;
    listing.registry = build_registry(names);
    for (const ClassLabel& label : listing.registry.classes) {
        std::vector<std::string> class_files;
        for (const auto& entry : std::filesystem::directory_iterator(root / label.name))
            if (entry.is_regular_file() && is_image_file(entry.path()))
                class_files.push_back(label.name + "/" + entry.path().filename().string());
        std::sort(class_files.begin(), class_files.end());
        for (std::string& path : class_files)
            listing.files.emplace_back(std::move(path), label.id);
    }
    std::sort(listing.files.begin(), listing.files.end());
    require(!listing.files.empty(), ErrorCode::EmptyClass, "no images under " + root.string());
    return listing;
}

inline Tensor3 load_preprocessed(const std::filesystem::path& root, const std::string& relative,
                                 const PreprocessConfig& cfg = {}) {
    return preprocess(load_ppm(root / relative), cfg);
}

/// Streams one split through several models' feature extractors, decoding and
/// resizing each image once. Returns one FeatureDataset per model, rows in
/// manifest (path-sorted) order.
inline std::vector<FeatureDataset> extract_split_features(
    const std::vector<AdaptedModel*>& models, const SplitManifest& manifest, Split split,
    const std::filesystem::path& root, const PreprocessConfig& cfg = {}) {
    const std::vector<ManifestEntry> entries = entries_for_split(manifest, split);
    require(!entries.empty(), ErrorCode::EmptySplit,
            std::string("manifest has no ") + split_name(split) + " entries");

    std::vector<FeatureDataset> datasets(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        datasets[m].features.resize(static_cast<Eigen::Index>(entries.size()),
                                    models[m]->backbone.projection.rows());
        datasets[m].labels.reserve(entries.size());
        datasets[m].image_ids.reserve(entries.size());
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Tensor3 tensor = load_preprocessed(root, entries[i].relative_path, cfg);
        for (std::size_t m = 0; m < models.size(); ++m) {
            datasets[m].features.row(static_cast<Eigen::Index>(i)) =
                features(*models[m], tensor).transpose();
            datasets[m].labels.push_back(entries[i].class_id);
            datasets[m].image_ids.push_back(entries[i].relative_path);
        }
    }
    return datasets;
}

inline FeatureDataset extract_split_features(AdaptedModel& model, const SplitManifest& manifest,
                                             Split split, const std::filesystem::path& root,
                                             const PreprocessConfig& cfg = {}) {
    std::vector<AdaptedModel*> models{&model};
    return std::move(extract_split_features(models, manifest, split, root, cfg)[0]);
}

/// Head probabilities for one feature dataset, assembled into a cache-ready
/// probability matrix.
inline ProbabilityMatrix probabilities_from_features(const AdaptedModel& model,
                                                     const FeatureDataset& data) {
    require(data.size() >= 1, ErrorCode::EmptySplit, "no rows to infer");
    ProbabilityMatrix matrix;
    matrix.model_tag = model.tag();
    matrix.image_ids = data.image_ids;
    matrix.values.resize(data.size(), model.spec.num_classes);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const Eigen::VectorXd logits =
            model.head_weight * data.features.row(i).transpose() + model.head_bias;
        matrix.values.row(i) = softmax(logits).transpose();
    }
    return matrix;
}

/// Truth labels aligned to a cache's image ids, resolved through the manifest.
inline std::vector<int> truth_for_image_ids(const SplitManifest& manifest,
                                            const std::vector<std::string>& image_ids) {
    std::map<std::string, int> by_path;
    for (const ManifestEntry& entry : manifest.entries) by_path[entry.relative_path] = entry.class_id;
    std::vector<int> truth;
    truth.reserve(image_ids.size());
    for (const std::string& id : image_ids) {
        const auto it = by_path.find(id);
        require(it != by_path.end(), ErrorCode::AlignmentError,
                "image id '" + id + "' not present in manifest");
        truth.push_back(it->second);
    }
    return truth;
}

}  // namespace agrivote
