#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "agrivote/ablation.hpp"
#include "agrivote/metrics.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

// SVG output keeps the figure emitters dependency-free and the tests able to
// inspect structure (cell counts, tick labels, bar counts) as plain text.

namespace detail {

inline std::string svg_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

/// White for zero, saturating to a deep blue at the matrix maximum.
inline std::string heat_color(long long count, long long max_count) {
    if (count <= 0 || max_count <= 0) return "#ffffff";
    const double t = static_cast<double>(count) / static_cast<double>(max_count);
    const int r = static_cast<int>(std::lround(255.0 - 205.0 * t));
    const int g = static_cast<int>(std::lround(255.0 - 155.0 * t));
    const int b = 255;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
}

}  // namespace detail

/// Confusion-matrix heatmap: one rect per cell, the count printed inside,
/// class names as axis tick labels.
inline std::string svg_confusion_heatmap(const ConfusionMatrix& cm,
                                         const std::vector<std::string>& names) {
    require(names.size() == static_cast<std::size_t>(cm.num_classes()), ErrorCode::AlignmentError,
            "class name count does not match confusion matrix");
    const int C = static_cast<int>(cm.num_classes());
    const int cell = 34;
    const int left = 300, top = 40, bottom = 300;
    const int width = left + C * cell + 40;
    const int height = top + C * cell + bottom;
    const long long max_count = cm.counts.maxCoeff();

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
        "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"16\">Ensemble confusion matrix (rows: true, columns: predicted)</text>\n";

    for (int r = 0; r < C; ++r) {
        for (int c = 0; c < C; ++c) {
            const long long count = cm.counts(r, c);
            const int x = left + c * cell;
            const int y = top + r * cell;
            svg += "<rect class=\"cell\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
                   "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
                   "\" fill=\"" + detail::heat_color(count, max_count) +
                   "\" stroke=\"#cccccc\"/>\n";
            const char* text_color = (max_count > 0 && count * 2 > max_count) ? "white" : "#333333";
            svg += "<text class=\"count\" x=\"" + std::to_string(x + cell / 2) + "\" y=\"" +
                   std::to_string(y + cell / 2 + 4) + "\" font-size=\"10\" fill=\"" + text_color +
                   "\" text-anchor=\"middle\">" + std::to_string(count) + "</text>\n";
        }
    }
    for (int r = 0; r < C; ++r) {
        svg += "<text class=\"ytick\" x=\"" + std::to_string(left - 6) + "\" y=\"" +
               std::to_string(top + r * cell + cell / 2 + 4) +
               "\" font-size=\"10\" text-anchor=\"end\">" + detail::svg_escape(names[static_cast<std::size_t>(r)]) +
               "</text>\n";
    }
    for (int c = 0; c < C; ++c) {
        const int x = left + c * cell + cell / 2;
        const int y = top + C * cell + 10;
        svg += "<text class=\"xtick\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
               "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-60 " +
               std::to_string(x) + " " + std::to_string(y) + ")\">" +
               detail::svg_escape(names[static_cast<std::size_t>(c)]) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// Accuracy bar chart over every grid row; the reference full ensemble is
/// drawn in a distinct color.
inline std::string svg_model_comparison(const AblationGrid& grid) {
    require(!grid.rows.empty(), ErrorCode::InvalidArgument, "grid has no rows");
    const int n = static_cast<int>(grid.rows.size());
    const int bar_width = 56, gap = 24;
    const int left = 70, top = 40, plot_height = 300, bottom = 170;
    const int width = left + n * (bar_width + gap) + 40;
    const int height = top + plot_height + bottom;

    double min_acc = 1.0;
    for (const GridRow& row : grid.rows) min_acc = std::min(min_acc, row.test_accuracy);
    const double axis_min = std::max(0.0, std::floor(min_acc * 50.0 - 1.0) / 50.0);
    const double axis_max = 1.0;
    const auto y_of = [&](double acc) {
        return top + plot_height -
               static_cast<int>(std::lround((acc - axis_min) / (axis_max - axis_min) * plot_height));
    };

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
        "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"16\">Test accuracy by configuration</text>\n";
    svg += "<line x1=\"" + std::to_string(left - 8) + "\" y1=\"" + std::to_string(top + plot_height) +
           "\" x2=\"" + std::to_string(width - 20) + "\" y2=\"" + std::to_string(top + plot_height) +
           "\" stroke=\"#444444\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double acc = axis_min + (axis_max - axis_min) * tick / 4.0;
        svg += "<text x=\"" + std::to_string(left - 12) + "\" y=\"" + std::to_string(y_of(acc) + 4) +
               "\" font-size=\"10\" text-anchor=\"end\">" + format_fixed(acc * 100.0, 1) +
               "%</text>\n";
    }

    int reference_index = -1;
    for (int i = 0; i < n; ++i) {
        if (grid.rows[static_cast<std::size_t>(i)].config_name.starts_with("full-")) {
            reference_index = i;
            break;
        }
    }
    for (int i = 0; i < n; ++i) {
        const GridRow& row = grid.rows[static_cast<std::size_t>(i)];
        const bool is_reference = (i == reference_index);
        const int x = left + i * (bar_width + gap);
        const int y = y_of(row.test_accuracy);
        svg += "<rect class=\"bar\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + std::to_string(bar_width) + "\" height=\"" +
               std::to_string(top + plot_height - y) + "\" fill=\"" +
               (is_reference ? "#d62728" : "#4878a8") + "\"/>\n";
        svg += "<text x=\"" + std::to_string(x + bar_width / 2) + "\" y=\"" + std::to_string(y - 6) +
               "\" font-size=\"10\" text-anchor=\"middle\">" +
               format_fixed(row.test_accuracy * 100.0, 2) + "%</text>\n";
        const int label_y = top + plot_height + 14;
        svg += "<text class=\"barlabel\" x=\"" + std::to_string(x + bar_width / 2) + "\" y=\"" +
               std::to_string(label_y) + "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-45 " +
               std::to_string(x + bar_width / 2) + " " + std::to_string(label_y) + ")\">" +
               detail::svg_escape(row.config_name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

struct FigurePaths {
    std::filesystem::path confusion_heatmap;
    std::filesystem::path model_comparison;
};

/// Emits both report figures into out_dir.
inline FigurePaths emit_figures(const MetricsReport& report, const AblationGrid& grid,
                                const std::vector<std::string>& class_names,
                                const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir))
        raise(ErrorCode::IoError, "cannot create figure directory " + out_dir.string());
    FigurePaths paths{out_dir / "confusion_matrix.svg", out_dir / "model_comparison.svg"};
    write_file(paths.confusion_heatmap, svg_confusion_heatmap(report.confusion, class_names));
    write_file(paths.model_comparison, svg_model_comparison(grid));
    return paths;
}

}  // namespace agrivote
