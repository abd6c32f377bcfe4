#include <catch2/catch_amalgamated.hpp>

#include <agrivote/figures.hpp>
#include <agrivote/fixture.hpp>

#include "helpers.hpp"

using namespace agrivote;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("heatmap renders CxC cells and C ticks per axis", "[figures]") {
    const LabelRegistry reg = build_registry(plantvillage15_class_names());
    std::vector<int> truth, pred;
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        truth.push_back(static_cast<int>(rng.below(15)));
        pred.push_back(rng.uniform() < 0.9 ? truth.back() : static_cast<int>(rng.below(15)));
    }
    const ConfusionMatrix cm = confusion(truth, pred, 15);
    const std::string svg = svg_confusion_heatmap(cm, class_names(reg));

    CHECK(count_occurrences(svg, "class=\"cell\"") == 225);
    CHECK(count_occurrences(svg, "class=\"xtick\"") == 15);
    CHECK(count_occurrences(svg, "class=\"ytick\"") == 15);
    CHECK(svg.find("Tomato_healthy") != std::string::npos);
}

TEST_CASE("all-diagonal confusion renders off-diagonal cells in the zero color", "[figures]") {
    std::vector<int> labels;
    for (int c = 0; c < 15; ++c)
        for (int i = 0; i < 5; ++i) labels.push_back(c);
    const ConfusionMatrix cm = confusion(labels, labels, 15);
    const LabelRegistry reg = build_registry(plantvillage15_class_names());
    const std::string svg = svg_confusion_heatmap(cm, class_names(reg));
    // 225 cells, 15 on the diagonal, the remaining 210 at the zero color
    CHECK(count_occurrences(svg, "fill=\"#ffffff\"") == 210);
}

TEST_CASE("bar chart draws one bar per grid row", "[figures]") {
    AblationGrid grid;
    const std::vector<std::string> configs{"densenet121",
                                           "efficientnetb0",
                                           "resnet50",
                                           "densenet121+efficientnetb0",
                                           "densenet121+resnet50",
                                           "efficientnetb0+resnet50",
                                           "full-equal",
                                           "full-valweighted"};
    for (std::size_t i = 0; i < configs.size(); ++i) {
        GridRow row;
        row.config_name = configs[i];
        row.test_accuracy = 0.95 + 0.005 * static_cast<double>(i);
        grid.rows.push_back(row);
    }
    grid.full_accuracy = grid.rows[6].test_accuracy;
    for (GridRow& row : grid.rows) row.gap_vs_full = row.test_accuracy - grid.full_accuracy;

    const std::string svg = svg_model_comparison(grid);
    CHECK(count_occurrences(svg, "class=\"bar\"") == 8);
    CHECK(count_occurrences(svg, "class=\"barlabel\"") == 8);
    // exactly one highlighted reference bar
    CHECK(count_occurrences(svg, "fill=\"#d62728\"") == 1);
}

TEST_CASE("emit_figures writes both files", "[figures]") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "agrivote_figures_test";
    std::filesystem::remove_all(dir);

    const LabelRegistry reg = build_registry({"Potato___a", "Tomato_b"});
    const MetricsReport rep = report(confusion({0, 1, 1}, {0, 1, 0}, 2));
    AblationGrid grid;
    GridRow row;
    row.config_name = "full-equal";
    row.test_accuracy = 2.0 / 3.0;
    grid.rows.push_back(row);
    grid.full_accuracy = row.test_accuracy;

    const FigurePaths paths = emit_figures(rep, grid, class_names(reg), dir);
    CHECK(std::filesystem::exists(paths.confusion_heatmap));
    CHECK(std::filesystem::exists(paths.model_comparison));
    CHECK(read_file(paths.confusion_heatmap).starts_with("<svg"));
    std::filesystem::remove_all(dir);
}
