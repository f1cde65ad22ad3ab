#include <doctest.h>

#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cvqa/cli.hpp"
#include "cvqa/error.hpp"
#include "cvqa/pipeline.hpp"
#include "cvqa/serial_reference.hpp"
#include "test_support.hpp"

using namespace cvqa;
using cvqa::testing::kData;

namespace {

PipelineConfig default_config() {
    PipelineConfig c;
    c.kb_path = kData + "/starter_kb.jsonl";
    c.detections_path = kData + "/fixtures/detections.jsonl";
    return c;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<EvalItem> sample_items() {
    const auto m = dataset::load_manifest_file(kData + "/manifests/sample.jsonl");
    return eval_items(m.records);
}

}  // namespace

TEST_CASE("bánh xèo question end to end") {
    const Pipeline p(default_config());
    const auto r = p.answer("banh_xeo_01", "Đây là món gì?");
    CHECK(r.explanation.answer.find(p.kb().get("banh_xeo").description) != std::string::npos);
    CHECK(r.explanation.identification.find("bánh xèo") != std::string::npos);
    CHECK(r.report.overall());
    CHECK(r.predicted_entity == std::optional<std::string>("banh_xeo"));
    CHECK(r.generation.source == progen::GenerationSource::fallback);
    CHECK(answer_to_jsonl(r) == answer_to_jsonl(p.answer("banh_xeo_01", "Đây là món gì?")));
}

TEST_CASE("structured output parses with the repo's own loaders") {
    const Pipeline p(default_config());
    const auto lines = read_json_lines(answer_to_jsonl(p.answer("banh_xeo_01", "Đây là món gì?")));
    REQUIRE(lines.size() >= 4);
    CHECK(lines.front().value["kind"] == "question");
    CHECK(lines.back().value["kind"] == "consistency");
    CHECK(dsl::parse_program(lines[1].value["text"].get<std::string>()).steps.size() == 5);
}

TEST_CASE("config validation") {
    auto c = default_config();
    c.detector_url = "http://127.0.0.1:1";
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = default_config();
    c.threshold = 1.5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = default_config();
    c.detections_path.clear();
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("unknown image is a not-found error") {
    const Pipeline p(default_config());
    CHECK_THROWS_AS(p.answer("no_such_image", "Đây là món gì?"), NotFoundError);
}

TEST_CASE("ablation configurations on the sample suite") {
    const Pipeline p(default_config());
    const auto items = sample_items();
    const auto full = run_ablation(p, items, evalkit::AblationConfig::full);
    const auto no_kb = run_ablation(p, items, evalkit::AblationConfig::no_kb);
    const auto no_visual = run_ablation(p, items, evalkit::AblationConfig::no_visual);
    const auto no_program = run_ablation(p, items, evalkit::AblationConfig::no_program);
    CHECK(full.failures == 0);
    CHECK(full.aggregate.cultural_accuracy == 1.0);
    CHECK(no_kb.aggregate.cultural_accuracy == 0.0);
    CHECK(full.aggregate.explanation_quality >= no_visual.aggregate.explanation_quality);
    CHECK(no_visual.aggregate.explanation_quality >= no_kb.aggregate.explanation_quality);
    CHECK(no_program.n == full.n);
    for (const auto* report : {&full, &no_kb, &no_visual, &no_program}) {
        const auto again = evalkit::aggregate(report->per_item);
        CHECK(again.bleu4 == doctest::Approx(report->aggregate.bleu4).epsilon(1e-12));
        for (const auto& row : report->per_item) {
            for (double v : {row.bleu4, row.rouge_l, row.meteor_lite, row.cultural_accuracy, row.explanation_quality}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("item failures are recorded, not thrown") {
    const Pipeline p(default_config());
    const std::vector<EvalItem> items{{"ghost#0", "ghost", "Đây là gì?", "x", {"banh_xeo"}}};
    const auto report = run_ablation(p, items, evalkit::AblationConfig::full);
    CHECK(report.failures == 1);
    CHECK(report.per_item[0].error.find("ghost") != std::string::npos);
}

TEST_CASE("parallel scoring equals the serial reference for any thread count") {
    const Pipeline p(default_config());
    const auto items = sample_items();
    const auto serial = evalkit::report_to_jsonl(serial::run_ablation(p, items, evalkit::AblationConfig::full));
    for (int threads : {1, 2, 4, 7}) {
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
        CHECK(evalkit::report_to_jsonl(run_ablation(p, items, evalkit::AblationConfig::full)) == serial);
    }
}

TEST_CASE("cli exit codes") {
    CHECK(cli({"answer", "banh_xeo_01", "Đây là món gì?"}).code == kExitOk);
    const auto missing = cli({"answer", "nope", "Đây là món gì?", "--format", "json-lines"});
    CHECK(missing.code == kExitNotFound);
    CHECK(missing.out.empty());
    const auto usage = cli({"answer"});
    CHECK(usage.code == kExitUsage);
    CHECK(usage.err.find("Usage") != std::string::npos);
    CHECK(cli({"answer", "banh_xeo_01", "q", "--format", "xml"}).code == kExitUsage);
    CHECK(cli({"--kb", "/nonexistent/kb.jsonl", "kb", "lookup", "phở"}).code == kExitIo);
    CHECK(cli({"dataset", "validate", kData + "/starter_kb.jsonl"}).code == kExitData);
    CHECK(cli({"answer", "banh_xeo_01", "q", "--detector-url", "http://127.0.0.1:9", "--detections",
               kData + "/fixtures/detections.jsonl"})
              .code == kExitData);
    CHECK(cli({"answer", "banh_xeo_01", "q", "--detector-url", "http://127.0.0.1:9"}).code == kExitDetector);
    CHECK(cli({"answer", "banh_xeo_01", "q", "--generator", "remote", "--generator-url", "http://127.0.0.1:9",
               "--no-fallback"})
              .code == kExitGenerator);
    CHECK(cli({"answer", "banh_xeo_01", "q", "--generator", "remote", "--generator-url", "http://127.0.0.1:9"}).code ==
          kExitOk);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("cli kb lookup and dataset stats") {
    const auto r = cli({"kb", "lookup", "banh xeo", "--format", "json-lines"});
    CHECK(r.code == kExitOk);
    const auto lines = read_json_lines(r.out);
    REQUIRE(!lines.empty());
    CHECK(lines[0].value["entity_id"] == "banh_xeo");
    CHECK(lines[0].value["score"] == 1.0);

    const auto s = cli({"dataset", "stats", kData + "/manifests/category_counts.jsonl"});
    CHECK(s.code == kExitOk);
    CHECK(s.out.find("10.3%") != std::string::npos);
}

TEST_CASE("cli ablate and eval") {
    const auto r = cli({"ablate", "--config", "no_kb", "--format", "json-lines"});
    CHECK(r.code == kExitOk);
    const auto lines = read_json_lines(r.out);
    CHECK(lines.back().value["aggregate"]["cultural_accuracy"] == 0.0);

    const auto a = cli({"eval", "--format", "json-lines", "--threads", "1"});
    const auto b = cli({"eval", "--format", "json-lines", "--threads", "3"});
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);

    const auto sampled = cli({"eval", "--sample", "5", "--seed", "3", "--format", "json-lines"});
    CHECK(read_json_lines(sampled.out).size() == 6);
    CHECK(sampled.out == cli({"eval", "--sample", "5", "--seed", "3", "--format", "json-lines"}).out);
}

TEST_CASE("cli explain writes an overlay") {
    const auto r = cli({"explain", "banh_xeo_01", "Đây là món gì?", "--format", "json-lines", "--width", "1000",
                        "--height", "500"});
    CHECK(r.code == kExitOk);
    const auto lines = read_json_lines(r.out);
    CHECK(lines.back().value["kind"] == "overlay");
    CHECK(lines.back().value["svg"].get<std::string>().find("<rect x=\"100\" y=\"100\"") != std::string::npos);
}
