#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/probability.hpp"

namespace agrivote {

/// Nonnegative per-model weights, aligned positionally to the matrix list
/// they are applied to. soft_vote normalizes by the weight sum, so raw
/// validation accuracies are usable as-is.
struct EnsembleWeights {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    void validate() const {
        require(!values.empty(), ErrorCode::DegenerateWeights, "no weights given");
        double sum = 0.0;
        for (double w : values) {
            require(std::isfinite(w) && w >= 0.0, ErrorCode::DegenerateWeights,
                    "weights must be finite and nonnegative");
            sum += w;
        }
        require(sum > 0.0, ErrorCode::DegenerateWeights, "all weights are zero");
    }
};

// ---------------------------------------------------------------------------
// Weighting schemes
// ---------------------------------------------------------------------------

enum class SchemeKind { Equal, ValidationWeighted, Custom };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::Equal;
    std::vector<double> values;  // accuracies for ValidationWeighted, weights for Custom
    std::string name = "equal";
};

inline EnsembleWeights make_scheme_equal(std::size_t num_models) {
    require(num_models >= 1, ErrorCode::InvalidArgument, "equal scheme needs at least 1 model");
    return EnsembleWeights{std::vector<double>(num_models, 1.0)};
}

/// Weights are the validation accuracies themselves, in percent.
inline EnsembleWeights make_scheme_validation(const std::vector<double>& val_accuracies) {
    for (double acc : val_accuracies)
        require(std::isfinite(acc) && acc > 0.0 && acc <= 100.0, ErrorCode::BadAccuracy,
                "validation accuracy " + format_double(acc) + " outside (0, 100]");
    EnsembleWeights weights{val_accuracies};
    weights.validate();
    return weights;
}

inline EnsembleWeights make_scheme_custom(const std::vector<double>& weights) {
    EnsembleWeights out{weights};
    out.validate();
    return out;
}

inline EnsembleWeights make_scheme(const SchemeSpec& spec, std::size_t num_models) {
    switch (spec.kind) {
        case SchemeKind::Equal: return make_scheme_equal(num_models);
        case SchemeKind::ValidationWeighted: return make_scheme_validation(spec.values);
        case SchemeKind::Custom: return make_scheme_custom(spec.values);
    }
    raise(ErrorCode::InvalidArgument, "unknown scheme kind");
}

/// Parses the CLI scheme list, e.g.
/// "equal,valweighted:95.5,95.3,96.3,custom:0.5,0.5,2.0". A bare numeric
/// token continues the argument list of the preceding scheme.
inline std::vector<SchemeSpec> parse_scheme_list(std::string_view text) {
    std::vector<SchemeSpec> schemes;
    for (const std::string& token : split_string(text, ',')) {
        if (token.empty()) raise(ErrorCode::ParseError, "empty scheme token");
        const bool numeric = token.find_first_not_of("0123456789.+-eE") == std::string::npos;
        if (numeric) {
            require(!schemes.empty() && schemes.back().kind != SchemeKind::Equal,
                    ErrorCode::ParseError, "numeric token '" + token + "' without a scheme");
            schemes.back().values.push_back(parse_double(token, "scheme weight"));
            continue;
        }
        SchemeSpec spec;
        std::string head = token;
        const auto colon = token.find(':');
        if (colon != std::string::npos) {
            head = token.substr(0, colon);
            spec.values.push_back(parse_double(token.substr(colon + 1), "scheme weight"));
        }
        if (head == "equal") {
            spec.kind = SchemeKind::Equal;
            require(spec.values.empty(), ErrorCode::ParseError, "equal scheme takes no values");
        } else if (head == "valweighted") {
            spec.kind = SchemeKind::ValidationWeighted;
        } else if (head == "custom") {
            spec.kind = SchemeKind::Custom;
        } else {
            raise(ErrorCode::ParseError, "unknown scheme '" + head + "'");
        }
        spec.name = head;
        schemes.push_back(std::move(spec));
    }
    return schemes;
}

// ---------------------------------------------------------------------------
// Soft voting
// ---------------------------------------------------------------------------

namespace detail {

inline void check_aligned(std::span<const ProbabilityMatrix> matrices) {
    require(!matrices.empty(), ErrorCode::InvalidArgument, "no probability matrices given");
    const ProbabilityMatrix& first = matrices.front();
    for (const ProbabilityMatrix& m : matrices.subspan(1)) {
        require(m.cols() == first.cols(), ErrorCode::AlignmentError,
                "matrices disagree on class count");
        require(m.image_ids == first.image_ids, ErrorCode::AlignmentError,
                "matrices disagree on image ids or row order");
    }
}

}  // namespace detail

/// Weighted soft vote: out[r][c] = sum_i w_i * P_i[r][c] / sum_i w_i.
/// With equal weights this is the plain mean of the member probabilities.
inline ProbabilityMatrix soft_vote(std::span<const ProbabilityMatrix> matrices,
                                   const EnsembleWeights& weights) {
    detail::check_aligned(matrices);
    require(weights.size() == matrices.size(), ErrorCode::AlignmentError,
            "weight count does not match matrix count");
    weights.validate();

    const double weight_sum =
        std::accumulate(weights.values.begin(), weights.values.end(), 0.0);
    ProbabilityMatrix out;
    out.values = Eigen::MatrixXd::Zero(matrices.front().rows(), matrices.front().cols());
    out.image_ids = matrices.front().image_ids;
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        out.values += (weights.values[i] / weight_sum) * matrices[i].values;
        tags.push_back(matrices[i].model_tag);
    }
    out.model_tag = join_strings(tags, "+");
    return out;
}

inline ProbabilityMatrix soft_vote(const std::vector<ProbabilityMatrix>& matrices,
                                   const EnsembleWeights& weights) {
    return soft_vote(std::span<const ProbabilityMatrix>(matrices), weights);
}

/// Argmax per row; ties resolve to the lowest class index.
inline std::vector<int> predict(const ProbabilityMatrix& matrix) {
    std::vector<int> labels(static_cast<std::size_t>(matrix.rows()));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        int best = 0;
        double best_value = matrix.values(r, 0);
        for (Eigen::Index c = 1; c < matrix.cols(); ++c) {
            if (matrix.values(r, c) > best_value) {
                best_value = matrix.values(r, c);
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(r)] = best;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Subset ensembles
// ---------------------------------------------------------------------------

struct SubsetEnsemble {
    std::vector<std::string> member_tags;
    ProbabilityMatrix matrix;
};

/// Equal-weight vote over every k-subset. Members are ordered by tag first,
/// so subsets enumerate in lexicographic tag order.
inline std::vector<SubsetEnsemble> subset_ensembles(std::span<const ProbabilityMatrix> matrices,
                                                    std::size_t k) {
    detail::check_aligned(matrices);
    const std::size_t M = matrices.size();
    require(k >= 1 && k <= M, ErrorCode::BadSubsetSize,
            "subset size " + std::to_string(k) + " outside [1, " + std::to_string(M) + "]");

    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return matrices[a].model_tag < matrices[b].model_tag;
    });

    std::vector<SubsetEnsemble> out;
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
        std::vector<ProbabilityMatrix> members;
        SubsetEnsemble entry;
        for (std::size_t index : pick) {
            members.push_back(matrices[order[index]]);
            entry.member_tags.push_back(matrices[order[index]].model_tag);
        }
        entry.matrix = soft_vote(members, make_scheme_equal(k));
        out.push_back(std::move(entry));

        // next combination in lexicographic order
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == M - k + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

inline std::vector<SubsetEnsemble> subset_ensembles(const std::vector<ProbabilityMatrix>& matrices,
                                                    std::size_t k) {
    return subset_ensembles(std::span<const ProbabilityMatrix>(matrices), k);
}

}  // namespace agrivote
