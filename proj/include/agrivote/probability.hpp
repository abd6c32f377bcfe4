#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

/// Per-image class probabilities for one model (or one ensemble). Rows align
/// with image_ids; every row is a distribution.
struct ProbabilityMatrix {
    Eigen::MatrixXd values;              // N x C
    std::vector<std::string> image_ids;  // size N
    std::string model_tag;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    void validate(double row_sum_tol = 1e-6) const {
        require(values.rows() >= 1, ErrorCode::InvalidArgument, "probability matrix has no rows");
        require(values.cols() >= 2, ErrorCode::InvalidArgument,
                "probability matrix needs at least 2 classes");
        require(image_ids.size() == static_cast<std::size_t>(values.rows()),
                ErrorCode::AlignmentError, "image_ids do not match row count");
        for (Eigen::Index r = 0; r < values.rows(); ++r) {
            double sum = 0.0;
            for (Eigen::Index c = 0; c < values.cols(); ++c) {
                const double v = values(r, c);
                require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                        "negative or non-finite probability at row " + std::to_string(r));
                sum += v;
            }
            require(std::abs(sum - 1.0) <= row_sum_tol, ErrorCode::InvalidArgument,
                    "row " + std::to_string(r) + " sums to " + format_double(sum));
        }
    }
};

/// Reorders rows so image_ids are sorted ascending (the cache-file order).
inline ProbabilityMatrix sorted_by_image_id(const ProbabilityMatrix& matrix) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(matrix.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return matrix.image_ids[static_cast<std::size_t>(a)] <
               matrix.image_ids[static_cast<std::size_t>(b)];
    });
    ProbabilityMatrix out;
    out.model_tag = matrix.model_tag;
    out.values.resize(matrix.rows(), matrix.cols());
    out.image_ids.resize(matrix.image_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = matrix.values.row(order[i]);
        out.image_ids[i] = matrix.image_ids[static_cast<std::size_t>(order[i])];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probability cache file (bit-exact round-trip):
//   # model=<tag> classes=<C> registry=<hash>
//   <image_id>,<p0>,...,<pC-1>     (9 decimal digits, sorted by image_id)
// ---------------------------------------------------------------------------

struct ProbabilityCache {
    ProbabilityMatrix matrix;
    std::string registry_hash;
};

inline std::string serialize_cache(const ProbabilityMatrix& matrix,
                                   const std::string& registry_hash) {
    matrix.validate();
    const ProbabilityMatrix sorted = sorted_by_image_id(matrix);
    std::string out = "# model=" + sorted.model_tag +
                      " classes=" + std::to_string(sorted.cols()) +
                      " registry=" + registry_hash + "\n";
    for (Eigen::Index r = 0; r < sorted.rows(); ++r) {
        out += sorted.image_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < sorted.cols(); ++c) {
            out += ',';
            out += format_fixed(sorted.values(r, c), 9);
        }
        out += '\n';
    }
    return out;
}

inline ProbabilityCache parse_cache(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(lines.size() >= 2, ErrorCode::ParseError, "probability cache has no rows");
    require(lines[0].starts_with("# "), ErrorCode::ParseError, "cache header missing");

    ProbabilityCache cache;
    Eigen::Index num_classes = 0;
    for (const std::string& field : split_string(lines[0].substr(2), ' ')) {
        const auto eq = field.find('=');
        require(eq != std::string::npos, ErrorCode::ParseError, "bad cache header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "model") cache.matrix.model_tag = value;
        else if (key == "classes") num_classes = parse_int(value, "cache classes");
        else if (key == "registry") cache.registry_hash = value;
        else raise(ErrorCode::ParseError, "unknown cache header key '" + key + "'");
    }
    require(num_classes >= 2, ErrorCode::ParseError, "cache header lacks a valid class count");

    const Eigen::Index n = static_cast<Eigen::Index>(lines.size() - 1);
    cache.matrix.values.resize(n, num_classes);
    cache.matrix.image_ids.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::vector<std::string> fields = split_string(lines[static_cast<std::size_t>(r) + 1], ',');
        require(static_cast<Eigen::Index>(fields.size()) == num_classes + 1, ErrorCode::ParseError,
                "cache row has wrong column count: " + lines[static_cast<std::size_t>(r) + 1]);
        cache.matrix.image_ids[static_cast<std::size_t>(r)] = fields[0];
        for (Eigen::Index c = 0; c < num_classes; ++c)
            cache.matrix.values(r, c) = parse_double(fields[static_cast<std::size_t>(c) + 1], "cache probability");
    }
    for (std::size_t i = 1; i < cache.matrix.image_ids.size(); ++i)
        require(cache.matrix.image_ids[i - 1] < cache.matrix.image_ids[i], ErrorCode::ParseError,
                "cache rows not sorted by image_id or not unique");
    cache.matrix.validate();
    return cache;
}

inline void save_cache(const ProbabilityMatrix& matrix, const std::string& registry_hash,
                       const std::filesystem::path& path) {
    write_file(path, serialize_cache(matrix, registry_hash));
}

inline ProbabilityCache load_cache(const std::filesystem::path& path) {
    return parse_cache(read_file(path));
}

}  // namespace agrivote
