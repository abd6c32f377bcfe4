// Minimal library walkthrough: three toy probability matrices, a weighted
// vote, predictions, and a metrics report.

#include <agrivote/ensemble.hpp>
#include <agrivote/metrics.hpp>

#include <cstdio>

using namespace agrivote;

int main() {
    ProbabilityMatrix a, b, c;
    a.model_tag = "model_a";
    a.image_ids = {"leaf_0", "leaf_1", "leaf_2"};
    a.values.resize(3, 2);
    a.values << 0.9, 0.1,
                0.4, 0.6,
                0.2, 0.8;
    b = a;
    b.model_tag = "model_b";
    b.values << 0.6, 0.4,
                0.7, 0.3,
                0.1, 0.9;
    c = a;
    c.model_tag = "model_c";
    c.values << 0.3, 0.7,
                0.8, 0.2,
                0.3, 0.7;

    const std::vector<ProbabilityMatrix> members{a, b, c};
    const ProbabilityMatrix vote = soft_vote(members, make_scheme_equal(3));
    const std::vector<int> predictions = predict(vote);

    std::printf("soft vote of %s:\n", vote.model_tag.c_str());
    for (Eigen::Index r = 0; r < vote.rows(); ++r)
        std::printf("  %s -> [%.3f, %.3f] -> class %d\n", vote.image_ids[r].c_str(),
                    vote.values(r, 0), vote.values(r, 1), predictions[r]);

    const std::vector<int> truth{0, 0, 1};
    const MetricsReport rep = report(confusion(truth, predictions, 2));
    std::printf("accuracy %.3f, macro F1 %.3f\n", rep.overall_accuracy, rep.macro_avg.f1);
    return 0;
}
