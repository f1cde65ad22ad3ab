#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "cvqa/error.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/serial_reference.hpp"
#include "test_support.hpp"

using namespace cvqa;

namespace {

std::vector<Detection> parse(const std::string& s) {
    std::istringstream in(s);
    return load_detections(in);
}

}  // namespace

TEST_CASE("the reference detection tuple loads field for field") {
    const auto d = parse(R"({"image_id":"i","label":"bánh xèo","confidence":0.92,"box":[0.1,0.2,0.6,0.8]})");
    REQUIRE(d.size() == 1);
    CHECK(d[0].label == "bánh xèo");
    CHECK(d[0].confidence == 0.92);
    CHECK(d[0].box == Box{0.1, 0.2, 0.6, 0.8});
}

TEST_CASE("empty stream gives no detections") { CHECK(parse("").empty()); }

TEST_CASE("box and confidence violations are reported with their index") {
    CHECK_THROWS_WITH_AS(parse(R"({"label":"x","confidence":0.5,"box":[0.6,0.2,0.1,0.8]})"),
                         doctest::Contains("x1 < x2 violated at index 0"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(R"({"label":"x","confidence":0.5,"box":[0.1,0.2,0.6,0.8]}
{"label":"y","confidence":0.5,"box":[0.1,0.9,0.6,0.8]})"),
                         doctest::Contains("y1 < y2 violated at index 1"), ValidationError);
    CHECK_THROWS_AS(parse(R"({"label":"x","confidence":1.3,"box":[0.1,0.2,0.6,0.8]})"), ValidationError);
    CHECK_THROWS_AS(parse(R"({"label":"x","confidence":0.3,"box":[0.1,0.2,0.6]})"), FormatError);
}

TEST_CASE("fixture groups detections by image") {
    const auto& f = cvqa::testing::sample_fixture();
    REQUIRE(f.find("banh_xeo_01") != nullptr);
    CHECK(f.find("banh_xeo_01")->front().label == "bánh xèo");
    REQUIRE(f.find("empty_01") != nullptr);
    CHECK(f.find("empty_01")->empty());
    CHECK(f.find("missing") == nullptr);
}

TEST_CASE("top_regions worked examples") {
    std::vector<Detection> d{{"a", 0.9, {0, 0, 0.1, 0.1}}, {"b", 0.5, {0, 0, 0.1, 0.1}}, {"c", 0.7, {0, 0, 0.1, 0.1}}};
    auto top = top_regions(d, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].label == "a");
    CHECK(top[1].label == "c");

    std::vector<Detection> tie{{"small", 0.8, {0, 0, 0.3, 0.4}}, {"big", 0.8, {0, 0, 0.5, 0.6}}};
    top = top_regions(tie, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].label == "big");

    std::vector<Detection> same{{"b", 0.8, {0, 0, 0.5, 0.5}}, {"a", 0.8, {0.5, 0.5, 1, 1}}};
    CHECK(top_regions(same, 2)[0].label == "a");
    CHECK(top_regions({}, 3).empty());
}

TEST_CASE("top_regions is a sub-multiset of its input") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> d;
        const int n = static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) d.push_back(cvqa::testing::random_detection(rng, std::string(1, 'a' + rng() % 3)));
        const auto k = rng() % 10;
        auto top = top_regions(d, k);
        CHECK(top.size() == std::min<std::size_t>(k, d.size()));
        auto pool = d;
        for (const auto& t : top) {
            auto it = std::find(pool.begin(), pool.end(), t);
            REQUIRE(it != pool.end());
            pool.erase(it);
        }
        for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].confidence >= top[i].confidence);
    }
}

TEST_CASE("attention worked examples") {
    std::vector<Detection> full{{"x", 0.7, {0, 0, 1, 1}}};
    auto m = attention_from_detections(full, 2, 2);
    for (double w : m.weights) CHECK(w == doctest::Approx(0.25));

    m = attention_from_detections({}, 4, 4);
    CHECK(m.weights.size() == 16);
    CHECK(std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w == 0.0; }));

    std::vector<Detection> left{{"x", 0.4, {0, 0, 0.5, 1}}};
    m = attention_from_detections(left, 1, 2);
    CHECK(m.at(0, 0) == doctest::Approx(1.0));
    CHECK(m.at(0, 1) == 0.0);
}

TEST_CASE("attention weights by confidence and overlap") {
    // Quarter-cell box in the top-left cell plus a full-image box: hand-computed cell masses.
    std::vector<Detection> d{{"a", 0.5, {0, 0, 0.25, 0.25}}, {"b", 0.5, {0, 0, 1, 1}}};
    const auto m = attention_from_detections(d, 2, 2);
    CHECK(m.at(0, 0) == doctest::Approx((0.5 + 0.125) / 1.0));
    CHECK(m.at(1, 1) == doctest::Approx(0.125));
}

TEST_CASE("attention normalizes and ignores input order") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> d;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) d.push_back(cvqa::testing::random_detection(rng, "x"));
        const int rows = 1 + static_cast<int>(rng() % 12);
        const int cols = 1 + static_cast<int>(rng() % 12);
        const auto m = attention_from_detections(d, rows, cols);
        CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w >= 0.0; }));

        auto shuffled = d;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto p = attention_from_detections(shuffled, rows, cols);
        for (std::size_t i = 0; i < m.weights.size(); ++i) CHECK(p.weights[i] == doctest::Approx(m.weights[i]).epsilon(1e-12));
    }
}

TEST_CASE("zero-confidence detections still spread equal mass") {
    std::vector<Detection> d{{"a", 0.0, {0, 0, 0.5, 1}}, {"b", 0.0, {0.5, 0, 1, 1}}};
    const auto m = attention_from_detections(d, 1, 2);
    CHECK(m.at(0, 0) == doctest::Approx(0.5));
    CHECK(m.at(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("parallel attention matches the serial reference exactly") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Detection> d;
        const int n = static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) d.push_back(cvqa::testing::random_detection(rng, "x"));
        const int side = 1 + static_cast<int>(rng() % 64);
        const auto a = attention_from_detections(d, side, side + 3);
        const auto b = serial::attention_from_detections(d, side, side + 3);
        CHECK(a.weights == b.weights);
    }
}
