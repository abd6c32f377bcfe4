#include <catch2/catch_amalgamated.hpp>

#include <agrivote/util.hpp>

#include <set>

using namespace agrivote;

TEST_CASE("fnv1a64 matches the published reference values", "[util]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("content_hash is stable and content-sensitive", "[util]") {
    CHECK(content_hash("abc") == content_hash("abc"));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(content_hash("").size() == 16);
}

TEST_CASE("deterministic_shuffle is a pure function of the seed", "[util]") {
    std::vector<int> a(100), b(100);
    for (int i = 0; i < 100; ++i) a[i] = b[i] = i;
    Rng rng_a(1234), rng_b(1234);
    deterministic_shuffle(a, rng_a);
    deterministic_shuffle(b, rng_b);
    CHECK(a == b);

    std::vector<int> c(100);
    for (int i = 0; i < 100; ++i) c[i] = i;
    Rng rng_c(1235);
    deterministic_shuffle(c, rng_c);
    CHECK(a != c);

    std::set<int> seen(a.begin(), a.end());
    CHECK(seen.size() == 100);  // permutation, nothing lost
}

TEST_CASE("Rng draws stay in range", "[util]") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(7) < 7);
    }
    // normal() should produce a roughly centered spread
    double sum = 0.0;
    for (int i = 0; i < 4000; ++i) sum += rng.normal();
    CHECK(std::abs(sum / 4000.0) < 0.1);
}

TEST_CASE("mix_seed separates streams", "[util]") {
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 0) != mix_seed(43, 0));
    CHECK(mix_seed(42, 5) == mix_seed(42, 5));
}

TEST_CASE("format_double round-trips exactly", "[util]") {
    for (double v : {0.15, 0.7, 1.0 / 3.0, 2.2489082969432314, 1e-9, 12345.678}) {
        CHECK(parse_double(format_double(v), "test") == v);
    }
    CHECK(format_double(0.15) == "0.15");
    CHECK(format_fixed(0.9901030927835051, 2) == "0.99");
    CHECK(format_fixed(99.01030927835051, 2) == "99.01");
}

TEST_CASE("split and join strings", "[util]") {
    CHECK(split_string("a,b,c", ',') == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_string("a,,c", ',') == std::vector<std::string>{"a", "", "c"});
    CHECK(join_strings({"x", "y"}, "+") == "x+y");
    CHECK(split_lines("l1\nl2\n") == std::vector<std::string>{"l1", "l2"});
    CHECK(split_lines("l1\nl2") == std::vector<std::string>{"l1", "l2"});
}
