#include <doctest.h>

#include <cmath>
#include <random>

#include "cvqa/error.hpp"
#include "cvqa/evalkit.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cvqa;
using namespace cvqa::evalkit;

namespace {

Tokens toks(const char* s) { return tokenize(s); }

std::vector<std::string> expand(const std::vector<std::vector<int>>& confusion, bool first) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < confusion.size(); ++i)
        for (std::size_t j = 0; j < confusion[i].size(); ++j)
            for (int k = 0; k < confusion[i][j]; ++k) out.push_back("c" + std::to_string(first ? i : j));
    return out;
}

}  // namespace

TEST_CASE("tokenize normalizes before splitting") {
    CHECK(tokenize("  Bánh   XÈO ") == Tokens{"bánh", "xèo"});
}

TEST_CASE("bleu worked examples") {
    const auto same = toks("a b c d e");
    CHECK(bleu4(same, std::vector<Tokens>{same}).value == 1.0);

    const auto c = toks("a b c d e");
    const std::vector<Tokens> r{toks("a b c d f")};
    CHECK(bleu4(c, r).value == doctest::Approx(oracle::bleu4(c, r)).epsilon(1e-12));
    // hand check: p1=4/5, p2=3/4, p3=2/3, p4=1/2, no brevity penalty
    CHECK(bleu4(c, r).value == doctest::Approx(std::pow(0.8 * 0.75 * (2.0 / 3.0) * 0.5, 0.25)));

    const auto shorter = toks("a b");
    const std::vector<Tokens> long_ref{toks("a b c d e f g h")};
    const auto s = bleu4(shorter, long_ref);
    CHECK(s.value == doctest::Approx(oracle::bleu4(shorter, long_ref)).epsilon(1e-12));
    // p1 = p2 = 1, p3 = p4 smoothed to 1/1
    CHECK(s.value == doctest::Approx(std::exp(1.0 - 8.0 / 2.0)));
}

TEST_CASE("bleu degenerate inputs are flagged") {
    CHECK(bleu4({}, std::vector<Tokens>{toks("a")}).degenerate);
    CHECK(bleu4({}, std::vector<Tokens>{toks("a")}).value == 0.0);
    CHECK(bleu4(toks("a"), std::vector<Tokens>{}).degenerate);
    CHECK(bleu4(toks("a"), std::vector<Tokens>{Tokens{}}).degenerate);
    CHECK_FALSE(bleu4(toks("a"), std::vector<Tokens>{toks("b")}).degenerate);
}

TEST_CASE("bleu clips against the best reference and picks the closest length") {
    const auto c = toks("the the the the");
    const std::vector<Tokens> refs{toks("the cat"), toks("the the x y z")};
    CHECK(bleu4(c, refs).value == doctest::Approx(oracle::bleu4(c, refs)).epsilon(1e-12));
}

TEST_CASE("rouge worked examples") {
    CHECK(rouge_l(toks("a b c"), toks("a b c")) == 1.0);
    CHECK(rouge_l(toks("a b c"), toks("a x c")) == doctest::Approx(2.0 / 3.0));
    CHECK(rouge_l(toks("a b"), toks("c d")) == 0.0);
    CHECK(rouge_l({}, toks("a")) == 0.0);
}

TEST_CASE("meteor worked examples") {
    const auto five = toks("a b c d e");
    CHECK(meteor_lite(five, five) == doctest::Approx(1.0 - 0.5 * std::pow(1.0 / 5.0, 3)));
    CHECK(meteor_lite(five, five) == doctest::Approx(0.996));
    CHECK(meteor_lite(toks("a b"), toks("c d")) == 0.0);
    // two matches, two chunks: F = 1, penalty 0.5
    CHECK(meteor_lite(toks("a b"), toks("b a")) == doctest::Approx(0.5));
    CHECK(meteor_lite({}, five) == 0.0);
}

TEST_CASE("cultural accuracy") {
    const std::vector<std::string> gold{"banh_xeo"};
    CHECK(cultural_accuracy(std::string("banh_xeo"), gold) == 1.0);
    CHECK(cultural_accuracy(std::nullopt, gold) == 0.0);
    const std::vector<std::string> two{"banh_xeo", "banh_mi"};
    CHECK(cultural_accuracy(std::string("pho_bo"), two) == 0.0);
}

TEST_CASE("explanation quality composite") {
    explain::Explanation e;
    e.identification = "x";
    e.cultural_context = "y";
    e.evidence = {{0, {}, std::string("a"), 0.5}, {1, {}, std::nullopt, 0.5}};
    explain::ConsistencyReport r;
    r.checks = {{explain::CheckId::entity_grounded, "", true, ""},
                {explain::CheckId::region_grounded, "", false, ""},
                {explain::CheckId::claim_supported, "", true, ""},
                {explain::CheckId::section_complete, "", true, ""}};
    CHECK(explanation_quality(e, r) == doctest::Approx(0.725));

    e.evidence[1].entity_id = "b";
    r.checks[1].pass = true;
    CHECK(explanation_quality(e, r) == doctest::Approx(1.0));

    explain::Explanation bad;
    bad.uncertain = true;
    for (auto& c : r.checks) c.pass = false;
    CHECK(explanation_quality(bad, r) == 0.0);
}

TEST_CASE("kappa worked examples") {
    const std::vector<std::vector<int>> m1{{20, 5}, {10, 15}};
    CHECK(cohen_kappa(expand(m1, true), expand(m1, false)) == doctest::Approx(0.4).epsilon(1e-12));
    const std::vector<std::vector<int>> m2{{0, 5}, {5, 0}};
    CHECK(cohen_kappa(expand(m2, true), expand(m2, false)) == doctest::Approx(-1.0));
    const std::vector<std::string> same{"a", "b", "c", "a"};
    CHECK(cohen_kappa(same, same) == 1.0);
    const std::vector<std::string> one{"a", "a"};
    CHECK(cohen_kappa(one, one) == 1.0);
    const std::vector<std::string> shorter{"a"};
    CHECK_THROWS_AS(cohen_kappa(same, shorter), ValidationError);
    CHECK_THROWS_AS(cohen_kappa({}, {}), ValidationError);
}

TEST_CASE("metrics agree with brute-force oracles on random pairs") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        const auto c = cvqa::testing::random_tokens(rng, 10, 5);
        std::vector<Tokens> refs;
        for (auto n = 1 + rng() % 3; n > 0; --n) refs.push_back(cvqa::testing::random_tokens(rng, 10, 5));
        CHECK(std::abs(bleu4(c, refs).value - oracle::bleu4(c, refs)) <= 1e-9);
        CHECK(std::abs(rouge_l(c, refs[0]) - oracle::rouge_l(c, refs[0])) <= 1e-9);
    }
}

TEST_CASE("metric bounds and monotonicity") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 300; ++i) {
        const auto a = cvqa::testing::random_tokens(rng, 12, 6);
        const auto b = cvqa::testing::random_tokens(rng, 12, 6);
        const std::vector<Tokens> refs{b};
        for (double v : {bleu4(a, refs).value, rouge_l(a, b), meteor_lite(a, b)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        if (a.size() >= 4) {
            auto corrupted = a;
            corrupted[rng() % a.size()] = "zz";
            CHECK(bleu4(a, std::vector<Tokens>{a}).value >= bleu4(corrupted, std::vector<Tokens>{a}).value);
        }
        std::vector<std::string> la, lb;
        for (int k = 0; k < 1 + static_cast<int>(rng() % 20); ++k) {
            la.push_back(std::string(1, 'a' + rng() % 3));
            lb.push_back(std::string(1, 'a' + rng() % 3));
        }
        const double kappa = cohen_kappa(la, lb);
        CHECK(kappa >= -1.0);
        CHECK(kappa <= 1.0);
    }
}

TEST_CASE("report aggregation and formats") {
    std::vector<MetricRow> rows{{"a", 0.2, 0.4, 0.6, 1.0, 0.8, ""}, {"b", 0.4, 0.2, 0.0, 0.0, 0.6, ""},
                                {"c", 0, 0, 0, 0, 0, "boom"}};
    const auto report = make_report(rows, AblationConfig::no_kb);
    CHECK(report.n == 3);
    CHECK(report.failures == 1);
    CHECK(report.aggregate.bleu4 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(report.aggregate.cultural_accuracy == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto jsonl = report_to_jsonl(report);
    const auto lines = read_json_lines(jsonl);
    REQUIRE(lines.size() == 4);
    CHECK(lines[2].value["error"] == "boom");
    CHECK(lines[3].value["kind"] == "summary");
    CHECK(lines[3].value["config"] == "no_kb");

    const std::vector<MetricReport> reports{report};
    const auto table = report_table(reports);
    CHECK(table.rfind("Method/config | BLEU-4 | Cultural Accuracy | Explanation Quality", 0) == 0);
    CHECK(table.find("no_kb") != std::string::npos);
    CHECK(table.find("0.200") != std::string::npos);

    CHECK(parse_ablation_config("no_visual") == AblationConfig::no_visual);
    CHECK_FALSE(parse_ablation_config("bogus"));
}
