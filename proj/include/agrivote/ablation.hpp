#pragma once

#include <span>
#include <string>
#include <vector>

#include "agrivote/ensemble.hpp"
#include "agrivote/errors.hpp"
#include "agrivote/metrics.hpp"
#include "agrivote/probability.hpp"

namespace agrivote {

struct GridRow {
    std::string config_name;
    std::vector<std::string> member_tags;
    std::vector<double> weights;
    double test_accuracy = 0.0;  // fraction in [0, 1]
    double gap_vs_full = 0.0;    // test_accuracy - reference full-ensemble accuracy
};

struct AblationGrid {
    std::vector<GridRow> rows;
    double full_accuracy = 0.0;  // the reference: full ensemble under the first scheme
};

struct NamedScheme {
    std::string name;
    EnsembleWeights weights;  // aligned to the cache order passed to run_grid
};

/// Evaluates every singleton, every 2-subset (equal weights), and the full
/// member set under each scheme, all from the same cached probabilities.
/// Row order: singletons (tag-sorted), pairs (lexicographic by tag), then
/// schemes in the given order. The gap column is relative to the full
/// ensemble under the FIRST scheme, which therefore has gap 0.
inline AblationGrid run_grid(std::span<const ProbabilityMatrix> caches,
                             const std::vector<int>& truth,
                             const std::vector<NamedScheme>& schemes) {
    require(caches.size() >= 2, ErrorCode::InvalidArgument, "need at least 2 caches");
    require(!schemes.empty(), ErrorCode::InvalidArgument, "need at least 1 weighting scheme");
    detail::check_aligned(caches);
    require(truth.size() == caches.front().image_ids.size(), ErrorCode::AlignmentError,
            "truth labels do not align with cache rows");

    const int C = static_cast<int>(caches.front().cols());
    const auto accuracy = [&](const ProbabilityMatrix& matrix) {
        return report(confusion(truth, predict(matrix), C)).overall_accuracy;
    };

    AblationGrid grid;
    for (const SubsetEnsemble& single : subset_ensembles(caches, 1)) {
        GridRow row;
        row.config_name = single.member_tags.front();
        row.member_tags = single.member_tags;
        row.weights = {1.0};
        row.test_accuracy = accuracy(single.matrix);
        grid.rows.push_back(std::move(row));
    }
    for (const SubsetEnsemble& pair : subset_ensembles(caches, 2)) {
        GridRow row;
        row.config_name = join_strings(pair.member_tags, "+");
        row.member_tags = pair.member_tags;
        row.weights = {1.0, 1.0};
        row.test_accuracy = accuracy(pair.matrix);
        grid.rows.push_back(std::move(row));
    }

    std::vector<std::string> all_tags;
    for (const ProbabilityMatrix& cache : caches) all_tags.push_back(cache.model_tag);
    for (const NamedScheme& scheme : schemes) {
        GridRow row;
        row.config_name = "full-" + scheme.name;
        row.member_tags = all_tags;
        row.weights = scheme.weights.values;
        row.test_accuracy = accuracy(soft_vote(caches, scheme.weights));
        grid.rows.push_back(std::move(row));
    }

    const std::size_t first_full = grid.rows.size() - schemes.size();
    grid.full_accuracy = grid.rows[first_full].test_accuracy;
    for (GridRow& row : grid.rows) row.gap_vs_full = row.test_accuracy - grid.full_accuracy;
    return grid;
}

inline AblationGrid run_grid(const std::vector<ProbabilityMatrix>& caches,
                             const std::vector<int>& truth,
                             const std::vector<NamedScheme>& schemes) {
    return run_grid(std::span<const ProbabilityMatrix>(caches), truth, schemes);
}

// ---------------------------------------------------------------------------
// Grid CSV. Accuracies and gaps print in percent at 2 decimals.
// ---------------------------------------------------------------------------

inline std::string grid_to_csv(const AblationGrid& grid) {
    std::string out = "config,members,weights,test_accuracy_pct,gap_vs_full_pct\n";
    for (const GridRow& row : grid.rows) {
        std::vector<std::string> weight_strs;
        for (double w : row.weights) weight_strs.push_back(format_double(w));
        out += row.config_name + "," + join_strings(row.member_tags, "+") + "," +
               join_strings(weight_strs, "|") + "," + format_fixed(row.test_accuracy * 100.0, 2) +
               "," + format_fixed(row.gap_vs_full * 100.0, 2) + "\n";
    }
    return out;
}

inline AblationGrid parse_grid_csv(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(!lines.empty() && lines[0] == "config,members,weights,test_accuracy_pct,gap_vs_full_pct",
            ErrorCode::ParseError, "grid CSV header missing");
    AblationGrid grid;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_string(lines[i], ',');
        require(fields.size() == 5, ErrorCode::ParseError, "bad grid CSV row: " + lines[i]);
        GridRow row;
        row.config_name = fields[0];
        row.member_tags = split_string(fields[1], '+');
        if (!fields[2].empty())
            for (const std::string& w : split_string(fields[2], '|'))
                row.weights.push_back(parse_double(w, "grid weights"));
        row.test_accuracy = parse_double(fields[3], "grid accuracy") / 100.0;
        row.gap_vs_full = parse_double(fields[4], "grid gap") / 100.0;
        grid.rows.push_back(std::move(row));
    }
    for (const GridRow& row : grid.rows) {
        if (row.config_name.starts_with("full-")) {
            grid.full_accuracy = row.test_accuracy;
            break;
        }
    }
    return grid;
}

}  // namespace agrivote
