#include <catch2/catch_amalgamated.hpp>

#include <agrivote/ensemble.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

#include <algorithm>

using namespace agrivote;

namespace {

ProbabilityMatrix one_row(const std::vector<double>& probs, const std::string& tag) {
    ProbabilityMatrix m;
    m.model_tag = tag;
    m.image_ids = {"img_0"};
    m.values.resize(1, static_cast<Eigen::Index>(probs.size()));
    for (std::size_t c = 0; c < probs.size(); ++c)
        m.values(0, static_cast<Eigen::Index>(c)) = probs[c];
    return m;
}

std::vector<std::vector<std::vector<double>>> to_nested(
    const std::vector<ProbabilityMatrix>& matrices) {
    std::vector<std::vector<std::vector<double>>> out;
    for (const ProbabilityMatrix& m : matrices) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::vector<double> row;
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m.values(r, c));
            rows.push_back(std::move(row));
        }
        out.push_back(std::move(rows));
    }
    return out;
}

}  // namespace

TEST_CASE("soft vote of identical matrices is the matrix itself", "[ensemble]") {
    Rng rng(1);
    const ProbabilityMatrix m = random_prob_matrix(rng, 16, 5, "a");
    const std::vector<ProbabilityMatrix> members{m, m, m};
    const ProbabilityMatrix vote = soft_vote(members, make_scheme_equal(3));
    REQUIRE(vote.rows() == m.rows());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            CHECK(std::abs(vote.values(r, c) - m.values(r, c)) < 1e-12);
}

TEST_CASE("equal-weight vote matches hand arithmetic and the loop oracle", "[ensemble]") {
    const std::vector<ProbabilityMatrix> members{
        one_row({0.9, 0.1}, "a"), one_row({0.6, 0.4}, "b"), one_row({0.3, 0.7}, "c")};

    const auto expected = oracle::soft_vote(to_nested(members), {1.0, 1.0, 1.0});
    // frozen values, cross-computed: (0.9+0.6+0.3)/3 = 0.6
    CHECK(std::abs(expected[0][0] - 0.6) < 1e-12);
    CHECK(std::abs(expected[0][1] - 0.4) < 1e-12);

    const ProbabilityMatrix vote = soft_vote(members, make_scheme_equal(3));
    CHECK(std::abs(vote.values(0, 0) - expected[0][0]) < 1e-12);
    CHECK(std::abs(vote.values(0, 1) - expected[0][1]) < 1e-12);
}

TEST_CASE("weighted vote matches the loop oracle", "[ensemble]") {
    const std::vector<ProbabilityMatrix> members{
        one_row({0.9, 0.1}, "a"), one_row({0.6, 0.4}, "b"), one_row({0.3, 0.7}, "c")};
    const EnsembleWeights weights = make_scheme_custom({2.0, 0.5, 0.5});

    const auto expected = oracle::soft_vote(to_nested(members), weights.values);
    // frozen from the oracle: (2*0.9 + 0.5*0.6 + 0.5*0.3) / 3 = 2.25/3 = 0.75
    CHECK(std::abs(expected[0][0] - 0.75) < 1e-12);
    CHECK(std::abs(expected[0][1] - 0.25) < 1e-12);

    const ProbabilityMatrix vote = soft_vote(members, weights);
    CHECK(std::abs(vote.values(0, 0) - expected[0][0]) < 1e-12);
    CHECK(std::abs(vote.values(0, 1) - expected[0][1]) < 1e-12);
}

TEST_CASE("random votes agree with the loop oracle to 1e-12", "[ensemble]") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<ProbabilityMatrix> members;
        for (int i = 0; i < 3; ++i)
            members.push_back(random_prob_matrix(rng, 64, 15, "m" + std::to_string(i)));
        std::vector<double> weights{rng.uniform() + 0.01, rng.uniform() + 0.01,
                                    rng.uniform() + 0.01};
        const auto expected = oracle::soft_vote(to_nested(members), weights);
        const ProbabilityMatrix vote = soft_vote(members, make_scheme_custom(weights));
        for (Eigen::Index r = 0; r < vote.rows(); ++r) {
            double sum = 0.0;
            for (Eigen::Index c = 0; c < vote.cols(); ++c) {
                CHECK(std::abs(vote.values(r, c) -
                               expected[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) <
                      1e-12);
                sum += vote.values(r, c);
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }

        // the equal-weight vote is the plain per-cell arithmetic mean
        const ProbabilityMatrix equal_vote = soft_vote(members, make_scheme_equal(3));
        for (Eigen::Index r = 0; r < equal_vote.rows(); ++r)
            for (Eigen::Index c = 0; c < equal_vote.cols(); ++c) {
                const double mean = (members[0].values(r, c) + members[1].values(r, c) +
                                     members[2].values(r, c)) /
                                    3.0;
                CHECK(std::abs(equal_vote.values(r, c) - mean) < 1e-12);
            }
    }
}

TEST_CASE("weight rescaling changes nothing", "[ensemble]") {
    Rng rng(88);
    std::vector<ProbabilityMatrix> members;
    for (int i = 0; i < 3; ++i)
        members.push_back(random_prob_matrix(rng, 32, 15, "m" + std::to_string(i)));
    const std::vector<double> base{1.4, 0.3, 2.2};
    const ProbabilityMatrix reference = soft_vote(members, make_scheme_custom(base));
    const std::vector<int> reference_pred = predict(reference);

    for (double alpha : {0.01, 1.0, 100.0}) {
        std::vector<double> scaled;
        for (double w : base) scaled.push_back(alpha * w);
        const ProbabilityMatrix vote = soft_vote(members, make_scheme_custom(scaled));
        CHECK(predict(vote) == reference_pred);
        for (Eigen::Index r = 0; r < vote.rows(); ++r)
            for (Eigen::Index c = 0; c < vote.cols(); ++c)
                CHECK(std::abs(vote.values(r, c) - reference.values(r, c)) < 1e-12);
    }
}

TEST_CASE("vote output is convex per cell", "[ensemble]") {
    Rng rng(99);
    std::vector<ProbabilityMatrix> members;
    for (int i = 0; i < 4; ++i)
        members.push_back(random_prob_matrix(rng, 20, 7, "m" + std::to_string(i)));
    const ProbabilityMatrix vote =
        soft_vote(members, make_scheme_custom({0.1, 2.0, 0.7, 1.3}));
    for (Eigen::Index r = 0; r < vote.rows(); ++r)
        for (Eigen::Index c = 0; c < vote.cols(); ++c) {
            double lo = 1.0, hi = 0.0;
            for (const ProbabilityMatrix& m : members) {
                lo = std::min(lo, m.values(r, c));
                hi = std::max(hi, m.values(r, c));
            }
            CHECK(vote.values(r, c) >= lo - 1e-12);
            CHECK(vote.values(r, c) <= hi + 1e-12);
        }
}

TEST_CASE("vote is equivariant under joint permutation", "[ensemble]") {
    Rng rng(111);
    std::vector<ProbabilityMatrix> members;
    for (int i = 0; i < 3; ++i)
        members.push_back(random_prob_matrix(rng, 12, 6, "m" + std::to_string(i)));
    const std::vector<double> weights{0.5, 1.5, 3.0};
    const ProbabilityMatrix reference = soft_vote(members, make_scheme_custom(weights));

    const std::vector<ProbabilityMatrix> permuted{members[2], members[0], members[1]};
    const ProbabilityMatrix vote =
        soft_vote(permuted, make_scheme_custom({weights[2], weights[0], weights[1]}));
    for (Eigen::Index r = 0; r < vote.rows(); ++r)
        for (Eigen::Index c = 0; c < vote.cols(); ++c)
            CHECK(std::abs(vote.values(r, c) - reference.values(r, c)) < 1e-12);
}

TEST_CASE("predict uses argmax with low-index tie-break", "[ensemble]") {
    CHECK(predict(one_row({0.2, 0.5, 0.3}, "t")) == std::vector<int>{1});
    CHECK(predict(one_row({0.5, 0.5}, "t")) == std::vector<int>{0});
    const std::vector<double> uniform(15, 1.0 / 15.0);
    CHECK(predict(one_row(uniform, "t")) == std::vector<int>{0});
}

TEST_CASE("make_scheme produces the documented weight vectors", "[ensemble]") {
    CHECK(make_scheme_equal(3).values == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(make_scheme_validation({95.5, 95.3, 96.3}).values ==
          std::vector<double>{95.5, 95.3, 96.3});
    CHECK(make_scheme_custom({0.5, 0.5, 2.0}).values == std::vector<double>{0.5, 0.5, 2.0});
    CHECK(make_scheme_custom({2.0, 0.5, 0.5}).values == std::vector<double>{2.0, 0.5, 0.5});

    CHECK(throws_code([] { make_scheme_validation({95.0, 0.0}); }, ErrorCode::BadAccuracy));
    CHECK(throws_code([] { make_scheme_validation({-3.0}); }, ErrorCode::BadAccuracy));
    CHECK(throws_code([] { make_scheme_validation({101.0}); }, ErrorCode::BadAccuracy));
}

TEST_CASE("scheme list parser handles the CLI syntax", "[ensemble]") {
    const auto schemes = parse_scheme_list("equal,valweighted:95.5,95.3,96.3,custom:0.5,0.5,2.0");
    REQUIRE(schemes.size() == 3);
    CHECK(schemes[0].kind == SchemeKind::Equal);
    CHECK(schemes[1].kind == SchemeKind::ValidationWeighted);
    CHECK(schemes[1].values == std::vector<double>{95.5, 95.3, 96.3});
    CHECK(schemes[2].kind == SchemeKind::Custom);
    CHECK(schemes[2].values == std::vector<double>{0.5, 0.5, 2.0});

    CHECK(throws_code([] { parse_scheme_list("fancy:1,2"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { parse_scheme_list("0.5,0.5"); }, ErrorCode::ParseError));
}

TEST_CASE("soft_vote rejects degenerate input", "[ensemble]") {
    Rng rng(13);
    const ProbabilityMatrix a = random_prob_matrix(rng, 8, 4, "a");
    ProbabilityMatrix b = random_prob_matrix(rng, 8, 4, "b");

    // misaligned image ids
    std::swap(b.image_ids[0], b.image_ids[1]);
    const std::vector<ProbabilityMatrix> misaligned{a, b};
    CHECK(throws_code([&] { soft_vote(misaligned, make_scheme_equal(2)); },
                      ErrorCode::AlignmentError));

    const ProbabilityMatrix c = random_prob_matrix(rng, 8, 5, "c");
    const std::vector<ProbabilityMatrix> mismatched{a, c};
    CHECK(throws_code([&] { soft_vote(mismatched, make_scheme_equal(2)); },
                      ErrorCode::AlignmentError));

    const std::vector<ProbabilityMatrix> pair{a, random_prob_matrix(rng, 8, 4, "d")};
    CHECK(throws_code([&] { soft_vote(pair, make_scheme_equal(3)); }, ErrorCode::AlignmentError));
    CHECK(throws_code([&] { soft_vote(pair, EnsembleWeights{{0.0, 0.0}}); },
                      ErrorCode::DegenerateWeights));
    CHECK(throws_code([&] { soft_vote(pair, EnsembleWeights{{1.0, -0.5}}); },
                      ErrorCode::DegenerateWeights));
}

TEST_CASE("subset ensembles enumerate k-subsets in tag order", "[ensemble]") {
    Rng rng(55);
    // deliberately unsorted tags
    std::vector<ProbabilityMatrix> members{random_prob_matrix(rng, 10, 4, "resnet50"),
                                           random_prob_matrix(rng, 10, 4, "efficientnetb0"),
                                           random_prob_matrix(rng, 10, 4, "densenet121")};

    const auto pairs = subset_ensembles(members, 2);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].member_tags == std::vector<std::string>{"densenet121", "efficientnetb0"});
    CHECK(pairs[1].member_tags == std::vector<std::string>{"densenet121", "resnet50"});
    CHECK(pairs[2].member_tags == std::vector<std::string>{"efficientnetb0", "resnet50"});

    const auto full = subset_ensembles(members, 3);
    REQUIRE(full.size() == 1);
    const ProbabilityMatrix direct = soft_vote(members, make_scheme_equal(3));
    for (Eigen::Index r = 0; r < direct.rows(); ++r)
        for (Eigen::Index c = 0; c < direct.cols(); ++c)
            CHECK(std::abs(full[0].matrix.values(r, c) - direct.values(r, c)) < 1e-12);

    const auto singles = subset_ensembles(members, 1);
    REQUIRE(singles.size() == 3);
    // densenet121 sorts first; a singleton mean is the identity
    CHECK((singles[0].matrix.values - members[2].values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((singles[2].matrix.values - members[0].values).cwiseAbs().maxCoeff() == 0.0);

    CHECK(throws_code([&] { subset_ensembles(members, 0); }, ErrorCode::BadSubsetSize));
    CHECK(throws_code([&] { subset_ensembles(members, 4); }, ErrorCode::BadSubsetSize));
}
