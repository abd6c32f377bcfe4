#include <catch2/catch_amalgamated.hpp>

#include <agrivote/fixture.hpp>
#include <agrivote/labels.hpp>

#include "helpers.hpp"

#include <set>

using namespace agrivote;

TEST_CASE("build_registry assigns ids by sorted name", "[labels]") {
    const LabelRegistry reg = build_registry({"Potato___healthy", "Pepper__bell___healthy"});
    REQUIRE(reg.num_classes() == 2);
    CHECK(reg.classes[0].name == "Pepper__bell___healthy");
    CHECK(reg.classes[0].id == 0);
    CHECK(reg.classes[0].crop == Crop::Pepper);
    CHECK(reg.classes[1].name == "Potato___healthy");
    CHECK(reg.classes[1].id == 1);
    CHECK(reg.classes[1].crop == Crop::Potato);
    CHECK(reg.crop_index.at(Crop::Pepper) == std::vector<int>{0});
    CHECK(reg.crop_index.at(Crop::Potato) == std::vector<int>{1});
}

TEST_CASE("the 15 plantvillage classes bucket 2/3/10 by crop", "[labels]") {
    const LabelRegistry reg = build_registry(plantvillage15_class_names());
    REQUIRE(reg.num_classes() == 15);
    CHECK(reg.crop_index.at(Crop::Pepper).size() == 2);
    CHECK(reg.crop_index.at(Crop::Potato).size() == 3);
    CHECK(reg.crop_index.at(Crop::Tomato).size() == 10);
    CHECK(reg.crop_index.count(Crop::Other) == 0);
    // the canonical list is already sorted, so ids follow it directly
    CHECK(reg.classes[0].name == "Pepper__bell___Bacterial_spot");
    CHECK(reg.classes[14].name == "Tomato_healthy");
}

TEST_CASE("build_registry rejects bad inputs", "[labels]") {
    CHECK(throws_code([] { build_registry({"A", "A"}); }, ErrorCode::DuplicateClass));
    CHECK(throws_code([] { build_registry({}); }, ErrorCode::EmptyRegistry));
    CHECK(throws_code([] { build_registry({"OnlyOne"}); }, ErrorCode::EmptyRegistry));
    CHECK(throws_code([] { build_registry({"with,comma", "Fine"}); }, ErrorCode::InvalidArgument));
}

TEST_CASE("crop_of follows the name prefix", "[labels]") {
    const LabelRegistry reg = build_registry(plantvillage15_class_names());
    CHECK(crop_of(reg, class_id_of(reg, "Tomato_healthy")) == Crop::Tomato);
    CHECK(crop_of(reg, class_id_of(reg, "Potato___Early_blight")) == Crop::Potato);
    CHECK(throws_code([&] { crop_of(reg, reg.num_classes()); }, ErrorCode::UnknownClass));
    CHECK(throws_code([&] { crop_of(reg, -1); }, ErrorCode::UnknownClass));
}

TEST_CASE("unknown prefixes bucket into Other", "[labels]") {
    const LabelRegistry reg = build_registry({"Wheat_rust", "Tomato_healthy", "Zucchini_mold"});
    CHECK(reg.crop_index.at(Crop::Other).size() == 2);
    CHECK(reg.crop_index.at(Crop::Tomato).size() == 1);
}

TEST_CASE("crop buckets partition the id range", "[labels]") {
    Rng rng(99);
    const std::vector<std::string> prefixes{"Pepper", "Potato", "Tomato", "Maize", "Rice"};
    for (int trial = 0; trial < 50; ++trial) {
        std::set<std::string> names;
        const int count = 2 + static_cast<int>(rng.below(20));
        while (static_cast<int>(names.size()) < count) {
            std::string name = prefixes[rng.below(prefixes.size())] + "_";
            for (int i = 0; i < 6; ++i) name += static_cast<char>('a' + rng.below(26));
            names.insert(name);
        }
        const LabelRegistry reg =
            build_registry(std::vector<std::string>(names.begin(), names.end()));

        std::set<int> seen;
        for (const auto& [crop, ids] : reg.crop_index)
            for (int id : ids) {
                CHECK(seen.insert(id).second);  // pairwise disjoint
                CHECK(crop_of(reg, id) == crop);
            }
        CHECK(seen.size() == static_cast<std::size_t>(reg.num_classes()));  // full cover
    }
}

TEST_CASE("registry construction is order-independent", "[labels]") {
    std::vector<std::string> names = plantvillage15_class_names();
    const LabelRegistry reference = build_registry(names);
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        deterministic_shuffle(names, rng);
        const LabelRegistry reg = build_registry(names);
        CHECK(reg == reference);
        CHECK(serialize_registry(reg) == serialize_registry(reference));
    }
}

TEST_CASE("registry serializes to the documented byte layout", "[labels]") {
    const LabelRegistry reg = build_registry({"Potato___healthy", "Pepper__bell___healthy"});
    CHECK(serialize_registry(reg) ==
          "0,Pepper__bell___healthy,Pepper\n"
          "1,Potato___healthy,Potato\n");
    const LabelRegistry parsed = parse_registry(serialize_registry(reg));
    CHECK(parsed == reg);
    CHECK(registry_hash(parsed) == registry_hash(reg));

    const LabelRegistry other = build_registry({"Potato___healthy", "Tomato_healthy"});
    CHECK(registry_hash(other) != registry_hash(reg));
}

TEST_CASE("parse_registry validates structure", "[labels]") {
    CHECK(throws_code([] { parse_registry(""); }, ErrorCode::EmptyRegistry));
    CHECK(throws_code([] { parse_registry("0,Name\n"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { parse_registry("1,Potato___x,Potato\n"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { parse_registry("0,Potato___x,Tomato\n"); }, ErrorCode::ParseError));
    CHECK(throws_code([] { parse_registry("0,B_x,Other\n1,A_x,Other\n"); }, ErrorCode::ParseError));
}
