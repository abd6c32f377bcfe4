#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/labels.hpp"
#include "agrivote/util.hpp"

#include <json.hpp>

namespace agrivote {

/// Row = true class, column = predicted class.
struct ConfusionMatrix {
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;

    Eigen::Index num_classes() const { return counts.rows(); }
    long long total() const { return counts.sum(); }
    long long correct() const { return counts.diagonal().sum(); }
};

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                                 int num_classes) {
    require(truth.size() == pred.size(), ErrorCode::LengthMismatch,
            "truth has " + std::to_string(truth.size()) + " entries, pred has " +
                std::to_string(pred.size()));
    require(num_classes >= 1, ErrorCode::InvalidArgument, "num_classes must be >= 1");

    ConfusionMatrix cm;
    cm.counts = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(num_classes,
                                                                               num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = pred[i];
        require(t >= 0 && t < num_classes, ErrorCode::UnknownClass,
                "true class " + std::to_string(t) + " out of range");
        require(p >= 0 && p < num_classes, ErrorCode::UnknownClass,
                "predicted class " + std::to_string(p) + " out of range");
        ++cm.counts(t, p);
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0;
};

struct AverageMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    AverageMetrics macro_avg;
    AverageMetrics weighted_avg;
    double overall_accuracy = 0.0;
    ConfusionMatrix confusion;
};

/// Zero denominators follow the dominant convention: a never-predicted class
/// has precision 0, an empty class has recall 0, and f1 is 0 when p + r = 0.
inline MetricsReport report(const ConfusionMatrix& cm) {
    const Eigen::Index C = cm.num_classes();
    MetricsReport rep;
    rep.confusion = cm;
    rep.per_class.resize(static_cast<std::size_t>(C));

    const long long total = cm.total();
    double weighted_p = 0.0, weighted_r = 0.0, weighted_f1 = 0.0;
    double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;

    for (Eigen::Index c = 0; c < C; ++c) {
        const long long tp = cm.counts(c, c);
        const long long row_sum = cm.counts.row(c).sum();
        const long long col_sum = cm.counts.col(c).sum();

        ClassMetrics& m = rep.per_class[static_cast<std::size_t>(c)];
        m.support = row_sum;
        m.precision = col_sum > 0 ? static_cast<double>(tp) / static_cast<double>(col_sum) : 0.0;
        m.recall = row_sum > 0 ? static_cast<double>(tp) / static_cast<double>(row_sum) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;

        macro_p += m.precision;
        macro_r += m.recall;
        macro_f1 += m.f1;
        weighted_p += m.precision * static_cast<double>(m.support);
        // recall_c * support_c == tp_c exactly, which keeps weighted recall
        // identical to accuracy (both are trace/total)
        weighted_r += static_cast<double>(tp);
        weighted_f1 += m.f1 * static_cast<double>(m.support);
    }

    rep.macro_avg = {macro_p / C, macro_r / C, macro_f1 / C};
    if (total > 0) {
        rep.weighted_avg = {weighted_p / total, weighted_r / total, weighted_f1 / total};
        rep.overall_accuracy = static_cast<double>(cm.correct()) / static_cast<double>(total);
    }
    return rep;
}

inline double accuracy_of(const std::vector<int>& truth, const std::vector<int>& pred,
                          int num_classes) {
    return report(confusion(truth, pred, num_classes)).overall_accuracy;
}

// ---------------------------------------------------------------------------
// Crop roll-up. A misprediction counts against the crop of the TRUE class,
// regardless of which crop the predicted class belongs to.
// ---------------------------------------------------------------------------

struct CropEntry {
    Crop crop = Crop::Other;
    int num_classes = 0;
    long long num_images = 0;
    long long num_correct = 0;
    std::optional<double> accuracy;  // empty when the crop has no images
};

struct CropReport {
    std::vector<CropEntry> per_crop;
    long long total_images = 0;
    long long total_correct = 0;
    double overall_accuracy = 0.0;
};

inline CropReport crop_report(const ConfusionMatrix& cm, const LabelRegistry& registry) {
    require(registry.num_classes() == static_cast<int>(cm.num_classes()), ErrorCode::AlignmentError,
            "registry covers " + std::to_string(registry.num_classes()) + " classes, confusion has " +
                std::to_string(cm.num_classes()));

    CropReport rep;
    for (const auto& [crop, class_ids] : registry.crop_index) {
        CropEntry entry;
        entry.crop = crop;
        entry.num_classes = static_cast<int>(class_ids.size());
        for (int id : class_ids) {
            entry.num_images += cm.counts.row(id).sum();
            entry.num_correct += cm.counts(id, id);
        }
        if (entry.num_images > 0)
            entry.accuracy = static_cast<double>(entry.num_correct) /
                             static_cast<double>(entry.num_images);
        rep.total_images += entry.num_images;
        rep.total_correct += entry.num_correct;
        rep.per_crop.push_back(entry);
    }
    if (rep.total_images > 0)
        rep.overall_accuracy = static_cast<double>(rep.total_correct) /
                               static_cast<double>(rep.total_images);
    return rep;
}

// ---------------------------------------------------------------------------
// Emission. Metrics print at 3 decimals in the CSV (mirroring the reporting
// convention); the JSON dump keeps full precision.
// ---------------------------------------------------------------------------

inline std::string report_to_csv(const MetricsReport& rep, const std::vector<std::string>& names) {
    require(names.size() == rep.per_class.size(), ErrorCode::AlignmentError,
            "class name count does not match report");
    std::string out = "class,precision,recall,f1_score,support\n";
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const ClassMetrics& m = rep.per_class[c];
        out += names[c] + "," + format_fixed(m.precision, 3) + "," + format_fixed(m.recall, 3) +
               "," + format_fixed(m.f1, 3) + "," + std::to_string(m.support) + "\n";
    }
    out += "macro_avg," + format_fixed(rep.macro_avg.precision, 3) + "," +
           format_fixed(rep.macro_avg.recall, 3) + "," + format_fixed(rep.macro_avg.f1, 3) + ",\n";
    out += "weighted_avg," + format_fixed(rep.weighted_avg.precision, 3) + "," +
           format_fixed(rep.weighted_avg.recall, 3) + "," + format_fixed(rep.weighted_avg.f1, 3) +
           ",\n";
    out += "accuracy," + format_fixed(rep.overall_accuracy, 3) + ",,,\n";
    return out;
}

/// Structural reader for the metrics CSV (values carry the printed rounding).
struct ParsedReportRow {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0;
};

inline std::vector<ParsedReportRow> parse_report_csv(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(!lines.empty() && lines[0] == "class,precision,recall,f1_score,support",
            ErrorCode::ParseError, "metrics CSV header missing");
    std::vector<ParsedReportRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_string(lines[i], ',');
        require(fields.size() == 5, ErrorCode::ParseError, "bad metrics CSV row: " + lines[i]);
        ParsedReportRow row;
        row.label = fields[0];
        if (row.label == "accuracy") {
            row.precision = parse_double(fields[1], "metrics csv");
            rows.push_back(row);
            continue;
        }
        row.precision = parse_double(fields[1], "metrics csv");
        row.recall = parse_double(fields[2], "metrics csv");
        row.f1 = parse_double(fields[3], "metrics csv");
        if (!fields[4].empty()) row.support = parse_int(fields[4], "metrics csv");
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json report_to_json(const MetricsReport& rep,
                                     const std::vector<std::string>& names) {
    require(names.size() == rep.per_class.size(), ErrorCode::AlignmentError,
            "class name count does not match report");
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const ClassMetrics& m = rep.per_class[c];
        per_class[names[c]] = {{"precision", m.precision},
                               {"recall", m.recall},
                               {"f1_score", m.f1},
                               {"support", m.support}};
    }
    nlohmann::json confusion = nlohmann::json::array();
    for (Eigen::Index r = 0; r < rep.confusion.num_classes(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < rep.confusion.num_classes(); ++c)
            row.push_back(rep.confusion.counts(r, c));
        confusion.push_back(row);
    }
    return nlohmann::json{
        {"per_class", per_class},
        {"macro_avg",
         {{"precision", rep.macro_avg.precision},
          {"recall", rep.macro_avg.recall},
          {"f1_score", rep.macro_avg.f1}}},
        {"weighted_avg",
         {{"precision", rep.weighted_avg.precision},
          {"recall", rep.weighted_avg.recall},
          {"f1_score", rep.weighted_avg.f1}}},
        {"overall_accuracy", rep.overall_accuracy},
        {"confusion_matrix", confusion},
    };
}

inline std::string confusion_to_csv(const ConfusionMatrix& cm,
                                    const std::vector<std::string>& names) {
    require(names.size() == static_cast<std::size_t>(cm.num_classes()), ErrorCode::AlignmentError,
            "class name count does not match confusion matrix");
    std::string out = "true\\pred";
    for (const std::string& name : names) out += "," + name;
    out += "\n";
    for (Eigen::Index r = 0; r < cm.num_classes(); ++r) {
        out += names[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cm.num_classes(); ++c)
            out += "," + std::to_string(cm.counts(r, c));
        out += "\n";
    }
    return out;
}

inline std::pair<ConfusionMatrix, std::vector<std::string>> parse_confusion_csv(
    std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(lines.size() >= 2, ErrorCode::ParseError, "confusion CSV too short");
    std::vector<std::string> names = split_string(lines[0], ',');
    require(!names.empty() && names[0] == "true\\pred", ErrorCode::ParseError,
            "confusion CSV header missing");
    names.erase(names.begin());
    const Eigen::Index C = static_cast<Eigen::Index>(names.size());
    require(static_cast<Eigen::Index>(lines.size()) == C + 1, ErrorCode::ParseError,
            "confusion CSV row count mismatch");

    ConfusionMatrix cm;
    cm.counts = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(C, C);
    for (Eigen::Index r = 0; r < C; ++r) {
        const auto fields = split_string(lines[static_cast<std::size_t>(r) + 1], ',');
        require(static_cast<Eigen::Index>(fields.size()) == C + 1, ErrorCode::ParseError,
                "bad confusion CSV row");
        require(fields[0] == names[static_cast<std::size_t>(r)], ErrorCode::ParseError,
                "confusion CSV row label mismatch");
        for (Eigen::Index c = 0; c < C; ++c)
            cm.counts(r, c) = parse_int(fields[static_cast<std::size_t>(c) + 1], "confusion count");
    }
    return {cm, names};
}

inline std::string crop_report_to_csv(const CropReport& rep) {
    std::string out = "crop,classes,test_images,accuracy_pct\n";
    for (const CropEntry& entry : rep.per_crop) {
        out += std::string(crop_name(entry.crop)) + "," + std::to_string(entry.num_classes) + "," +
               std::to_string(entry.num_images) + ",";
        out += entry.accuracy ? format_fixed(*entry.accuracy * 100.0, 2) : "undefined";
        out += "\n";
    }
    int total_classes = 0;
    for (const CropEntry& entry : rep.per_crop) total_classes += entry.num_classes;
    out += "overall," + std::to_string(total_classes) + "," + std::to_string(rep.total_images) +
           "," + format_fixed(rep.overall_accuracy * 100.0, 2) + "\n";
    return out;
}

}  // namespace agrivote
