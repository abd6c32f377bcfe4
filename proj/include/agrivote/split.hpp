#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

enum class Split { Train = 0, Val = 1, Test = 2 };

inline const char* split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val:   return "val";
        case Split::Test:  return "test";
    }
    return "train";
}

inline Split split_from_string(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "val") return Split::Val;
    if (text == "test") return Split::Test;
    raise(ErrorCode::ParseError, "unknown split '" + std::string(text) + "'");
}

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;

    void validate() const {
        require(train > 0.0 && val > 0.0 && test > 0.0, ErrorCode::BadRatios,
                "ratios must be positive");
        require(std::abs(train + val + test - 1.0) <= 1e-9, ErrorCode::BadRatios,
                "ratios must sum to 1");
    }

    bool operator==(const SplitRatios&) const = default;
};

struct ManifestEntry {
    std::string relative_path;
    int class_id = 0;
    Split split = Split::Train;

    bool operator==(const ManifestEntry&) const = default;
};

struct SplitManifest {
    std::vector<ManifestEntry> entries;  // sorted by relative_path
    std::uint64_t seed = 42;
    SplitRatios ratios;
    std::string registry_hash;

    bool operator==(const SplitManifest&) const = default;
};

namespace detail {

/// Apportions n into (train, val, test) by largest remainder: every count is
/// within 1 of its exact quota, which is what keeps per-class fractions
/// inside the 1/n stratification bound. Remainder ties break in train, val,
/// test order.
inline std::array<std::size_t, 3> apportion_counts(std::size_t n, const SplitRatios& ratios) {
    const std::array<double, 3> quota{ratios.train * n, ratios.val * n, ratios.test * n};
    std::array<std::size_t, 3> counts{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        counts[s] = static_cast<std::size_t>(std::floor(quota[s]));
        assigned += counts[s];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
    });
    for (std::size_t leftover = n - assigned, i = 0; leftover > 0; --leftover, ++i)
        ++counts[order[i % 3]];
    return counts;
}

}  // namespace detail

/// Stratified shuffle-then-cut split. Per class, paths are sorted, shuffled
/// with a stream seeded from (seed, class_id), and cut into train/val/test by
/// the apportioned counts. The result is a pure function of the file set,
/// ratios, and seed.
inline SplitManifest make_split(const std::vector<std::pair<std::string, int>>& file_list,
                                const SplitRatios& ratios, std::uint64_t seed,
                                const std::string& registry_hash = "",
                                int num_classes = -1) {
    ratios.validate();
    require(!file_list.empty(), ErrorCode::InvalidArgument, "file list is empty");

    int max_id = -1;
    for (const auto& [path, class_id] : file_list) {
        require(class_id >= 0, ErrorCode::UnknownClass, "negative class id for " + path);
        max_id = std::max(max_id, class_id);
    }
    const int C = num_classes < 0 ? max_id + 1 : num_classes;
    require(max_id < C, ErrorCode::UnknownClass, "class id exceeds num_classes");

    std::vector<std::vector<std::string>> by_class(static_cast<std::size_t>(C));
    for (const auto& [path, class_id] : file_list)
        by_class[static_cast<std::size_t>(class_id)].push_back(path);

    SplitManifest manifest;
    manifest.seed = seed;
    manifest.ratios = ratios;
    manifest.registry_hash = registry_hash;
    manifest.entries.reserve(file_list.size());

    for (int class_id = 0; class_id < C; ++class_id) {
        std::vector<std::string>& paths = by_class[static_cast<std::size_t>(class_id)];
        if (paths.empty())
            raise(ErrorCode::EmptyClass, "class " + std::to_string(class_id) + " has no files");
        std::sort(paths.begin(), paths.end());
        for (std::size_t i = 1; i < paths.size(); ++i)
            if (paths[i] == paths[i - 1])
                raise(ErrorCode::InvalidArgument, "duplicate path '" + paths[i] + "'");

        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(class_id)));
        deterministic_shuffle(paths, rng);

        const auto counts = detail::apportion_counts(paths.size(), ratios);
        if (counts[0] == 0)
            raise(ErrorCode::EmptyClass,
                  "class " + std::to_string(class_id) + " has no training images under these ratios");
        std::size_t index = 0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t k = 0; k < counts[static_cast<std::size_t>(s)]; ++k, ++index)
                manifest.entries.push_back({paths[index], class_id, static_cast<Split>(s)});
    }

    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return a.relative_path < b.relative_path;
              });
    for (std::size_t i = 1; i < manifest.entries.size(); ++i)
        if (manifest.entries[i].relative_path == manifest.entries[i - 1].relative_path)
            raise(ErrorCode::InvalidArgument,
                  "duplicate path '" + manifest.entries[i].relative_path + "' across classes");
    return manifest;
}

// ---------------------------------------------------------------------------
// Manifest file format (bit-exact):
//   # seed=<int> ratios=<t>,<v>,<s> registry=<hash>
//   <relative_path>,<class_id>,<train|val|test>     (sorted by path)
// ---------------------------------------------------------------------------

inline std::string serialize_manifest(const SplitManifest& manifest) {
    std::string out = "# seed=" + std::to_string(manifest.seed) +
                      " ratios=" + format_double(manifest.ratios.train) + "," +
                      format_double(manifest.ratios.val) + "," +
                      format_double(manifest.ratios.test) +
                      " registry=" + manifest.registry_hash + "\n";
    for (const ManifestEntry& entry : manifest.entries) {
        out += entry.relative_path;
        out += ',';
        out += std::to_string(entry.class_id);
        out += ',';
        out += split_name(entry.split);
        out += '\n';
    }
    return out;
}

inline SplitManifest parse_manifest(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(!lines.empty(), ErrorCode::ParseError, "manifest is empty");

    SplitManifest manifest;
    const std::string& header = lines[0];
    require(header.starts_with("# "), ErrorCode::ParseError, "manifest header missing");
    for (const std::string& field : split_string(header.substr(2), ' ')) {
        const auto eq = field.find('=');
        require(eq != std::string::npos, ErrorCode::ParseError, "bad header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "seed") {
            manifest.seed = static_cast<std::uint64_t>(parse_int(value, "manifest seed"));
        } else if (key == "ratios") {
            const auto parts = split_string(value, ',');
            require(parts.size() == 3, ErrorCode::ParseError, "ratios need 3 values");
            manifest.ratios.train = parse_double(parts[0], "manifest ratio");
            manifest.ratios.val = parse_double(parts[1], "manifest ratio");
            manifest.ratios.test = parse_double(parts[2], "manifest ratio");
        } else if (key == "registry") {
            manifest.registry_hash = value;
        } else {
            raise(ErrorCode::ParseError, "unknown manifest header key '" + key + "'");
        }
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        // Paths may not contain commas, so split from the right.
        const std::string& line = lines[i];
        const auto last = line.rfind(',');
        const auto second = last == std::string::npos ? std::string::npos : line.rfind(',', last - 1);
        require(second != std::string::npos, ErrorCode::ParseError,
                "manifest line '" + line + "' is not <path>,<class_id>,<split>");
        ManifestEntry entry;
        entry.relative_path = line.substr(0, second);
        entry.class_id = static_cast<int>(parse_int(
            std::string_view(line).substr(second + 1, last - second - 1), "manifest class id"));
        entry.split = split_from_string(std::string_view(line).substr(last + 1));
        manifest.entries.push_back(std::move(entry));
    }
    for (std::size_t i = 1; i < manifest.entries.size(); ++i) {
        require(manifest.entries[i - 1].relative_path < manifest.entries[i].relative_path,
                ErrorCode::ParseError, "manifest entries not sorted or not unique");
    }
    return manifest;
}

inline void save_manifest(const SplitManifest& manifest, const std::filesystem::path& path) {
    write_file(path, serialize_manifest(manifest));
}

inline SplitManifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_file(path));
}

inline std::vector<ManifestEntry> entries_for_split(const SplitManifest& manifest, Split split) {
    std::vector<ManifestEntry> out;
    for (const ManifestEntry& entry : manifest.entries)
        if (entry.split == split) out.push_back(entry);
    return out;
}

}  // namespace agrivote
