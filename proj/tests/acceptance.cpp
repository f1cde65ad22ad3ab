// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any fails.
// Arguments: paths of the unit-test executables, timed together with this run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cvqa/cli.hpp"
#include "cvqa/dataset.hpp"
#include "cvqa/dsl.hpp"
#include "cvqa/evalkit.hpp"
#include "cvqa/explain.hpp"
#include "cvqa/pipeline.hpp"
#include "cvqa/progen.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cvqa;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::pair<int, std::string> cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str()};
}

std::vector<std::string> expand(const std::vector<std::vector<int>>& m, bool rows) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j)
            for (int k = 0; k < m[i][j]; ++k) out.push_back(std::to_string(rows ? i : j));
    return out;
}

void metric_oracles() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto c = testing::random_tokens(rng, 10, 5);
        const auto r = testing::random_tokens(rng, 10, 5);
        const std::vector<evalkit::Tokens> refs{r};
        worst = std::max(worst, std::abs(evalkit::bleu4(c, refs).value - oracle::bleu4(c, refs)));
        worst = std::max(worst, std::abs(evalkit::rouge_l(c, r) - oracle::rouge_l(c, r)));
    }
    const double t = seconds_since(start);
    report("metric-oracle-equivalence", worst <= 1e-9 && t < 5.0,
           fmt("100 pairs, max |diff| = %.3g, %.3f s (limits 1e-9, 5 s)", worst, t));
}

void metric_identities() {
    const evalkit::Tokens same{"một", "hai", "ba", "bốn", "năm"};
    const std::vector<evalkit::Tokens> refs{same};
    const double b = evalkit::bleu4(same, refs).value;
    const double r = evalkit::rouge_l(same, same);
    const double m = evalkit::meteor_lite(same, evalkit::Tokens{"x", "y", "z"});
    report("metric-identities", b == 1.0 && r == 1.0 && m == 0.0,
           fmt("bleu4(identical) = %.17g, rouge_l(identical) = %.17g, meteor_lite(disjoint) = %.17g", b, r, m));
}

void kappa() {
    const std::vector<std::vector<int>> m1{{20, 5}, {10, 15}}, m2{{0, 5}, {5, 0}}, m3{{7, 0, 0}, {0, 4, 0}, {0, 0, 9}};
    const double k1 = evalkit::cohen_kappa(expand(m1, true), expand(m1, false));
    const double k2 = evalkit::cohen_kappa(expand(m2, true), expand(m2, false));
    const double k3 = evalkit::cohen_kappa(expand(m3, true), expand(m3, false));
    report("cohen-kappa", std::abs(k1 - 0.4) <= 1e-9 && k2 == -1.0 && k3 == 1.0,
           fmt("[[20,5],[10,15]] = %.12f, [[0,5],[5,0]] = %.3f, perfect = %.3f", k1, k2, k3));
}

void category_statistics() {
    const auto [code, out] = cli({"dataset", "stats", testing::kData + "/manifests/category_counts.jsonl"});
    const std::vector<std::pair<std::string, std::string>> rows{
        {"Cuisine", "2,934"},          {"Architecture", "2,991"},        {"Traditional Clothing", "2,478"},
        {"Cultural Festivals", "2,393"}, {"Daily Life Practices", "2,336"}, {"Traditional Sports", "2,307"},
        {"Transportation", "2,279"},   {"Handicrafts", "2,250"},         {"Miscellaneous Categories", "12,516"}};
    const std::vector<std::string> printed{"10.3%", "10.5%", "8.7%", "8.4%", "8.2%", "8.1%", "8.0%", "7.9%", "43.9%"};
    int matched = 0;
    std::istringstream lines(out);
    std::string line;
    while (std::getline(lines, line)) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (line.rfind(rows[i].first + " ", 0) != 0) continue;
            if (line.find("| " + rows[i].second + " ") != std::string::npos &&
                line.find("| " + printed[i] + " ") != std::string::npos)
                ++matched;
        }
    }
    const bool mean = out.find("Questions per image: 3.2\n") != std::string::npos;
    report("category-statistics", code == 0 && matched == 9 && mean,
           std::to_string(matched) + "/9 rows match the printed percentages, questions/image 3.2: " +
               (mean ? "yes" : "no"));
}

std::string hallucination(std::mt19937_64& rng) {
    static const char* subjects[] = {"Người sao Hỏa", "Vua Lê Lợi", "Các phi hành gia", "Robot", "Người Eskimo"};
    static const char* verbs[] = {"đã phát minh ra nó", "mang nó lên mặt trăng", "ăn nó bằng đũa vàng",
                                  "cấm nó vào năm 2050", "làm nó từ băng Bắc Cực"};
    static const char* tails[] = {".", " vào thế kỷ mười.", " trong lễ hội mùa đông.", " tại Paris."};
    return std::string(subjects[rng() % 5]) + " " + verbs[rng() % 5] + tails[rng() % 4];
}

void constructive_consistency() {
    const auto& kb = testing::starter_kb();
    const auto& fixture = testing::sample_fixture();
    const auto images = fixture.image_ids();
    std::mt19937_64 rng(4242);
    int passed = 0, grounded = 0;
    std::vector<std::pair<dsl::ExecutionTrace, std::vector<Detection>>> resolved;
    static const char* questions[] = {"Đây là món gì?", "So sánh các biến thể vùng miền", "Ý nghĩa của nó là gì?",
                                      "Hãy mô tả lịch sử", "Đây là gì?"};
    for (int i = 0; i < 200; ++i) {
        const auto& dets = *fixture.find(images[rng() % images.size()]);
        dsl::Program program;
        if (i % 2 == 0) {
            program = testing::random_program(rng);
        } else {
            std::vector<std::string> labels;
            for (const auto& d : dets) labels.push_back(d.label);
            program = progen::fallback_generate(questions[rng() % 5], labels, &kb);
        }
        const auto trace = dsl::execute_program(program, dsl::ExecutionContext{dets, kb, "", {}});
        const auto e = explain::synthesize_explanation(trace, kb, dets, "");
        if (explain::check_consistency(e, dets, kb, trace).overall()) ++passed;
        if (!e.uncertain) {
            ++grounded;
            resolved.emplace_back(trace, dets);
        }
    }

    int flipped = 0, trials = 0;
    for (; trials < 100 && !resolved.empty(); ++trials) {
        const auto& [trace, dets] = resolved[rng() % resolved.size()];
        auto e = explain::synthesize_explanation(trace, kb, dets, "");
        auto sentences = explain::split_sentences(e.cultural_context);
        const auto at = rng() % (sentences.size() + 1);
        sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(at), hallucination(rng));
        std::string joined;
        for (const auto& s : sentences) joined += (joined.empty() ? "" : " ") + s;
        if (rng() % 2) e.cultural_context = joined;
        else e.elaboration += (e.elaboration.empty() ? "" : " ") + hallucination(rng);
        if (!explain::check_consistency(e, dets, kb, trace).passed(explain::CheckId::claim_supported)) ++flipped;
    }
    report("constructive-consistency", passed == 200 && flipped == 100 && trials == 100,
           std::to_string(passed) + "/200 triples consistent (" + std::to_string(grounded) + " resolved), " +
               std::to_string(flipped) + "/" + std::to_string(trials) + " hallucinations caught");
}

void dsl_round_trip() {
    std::mt19937_64 rng(777);
    int ok = 0;
    for (int i = 0; i < 500; ++i) {
        const auto p = testing::random_program(rng);
        if (dsl::typecheck_program(p).empty() && dsl::parse_program(dsl::format_program(p)) == p) ++ok;
    }
    int exemplars_ok = 0;
    const auto& ex = progen::bundled_exemplars();
    for (const auto& e : ex) {
        try {
            if (dsl::typecheck_program(dsl::parse_program(e.program)).empty()) ++exemplars_ok;
        } catch (const std::exception&) {
        }
    }
    report("dsl-round-trip", ok == 500 && ex.size() == 16 && exemplars_ok == 16,
           std::to_string(ok) + "/500 programs round-trip, " + std::to_string(exemplars_ok) + "/" +
               std::to_string(ex.size()) + " exemplars parse and typecheck");
}

void determinism() {
    std::vector<std::string> outs;
    for (int i = 0; i < 3; ++i)
        outs.push_back(cli({"answer", "banh_xeo_01", "Đây là món gì?", "--format", "json-lines"}).second);
    const bool answer_same = !outs[0].empty() && outs[0] == outs[1] && outs[1] == outs[2];

    std::vector<std::string> evals;
    for (const char* threads : {"1", "2", "4", "8"})
        evals.push_back(cli({"eval", "--format", "json-lines", "--threads", threads}).second);
    bool eval_same = !evals[0].empty();
    for (const auto& e : evals) eval_same = eval_same && e == evals[0];
#ifdef _OPENMP
    omp_set_num_threads(omp_get_num_procs());
#endif
    report("end-to-end-determinism", answer_same && eval_same,
           std::string("answer x3 identical: ") + (answer_same ? "yes" : "no") +
               ", eval identical at 1/2/4/8 threads: " + (eval_same ? "yes" : "no"));
}

void ablation_direction() {
    PipelineConfig config;
    config.kb_path = testing::kData + "/starter_kb.jsonl";
    config.detections_path = testing::kData + "/fixtures/detections.jsonl";
    const Pipeline pipeline(config);
    const auto manifest = dataset::load_manifest_file(testing::kData + "/manifests/sample.jsonl");
    const auto items = eval_items(manifest.records);
    const auto full = run_ablation(pipeline, items, evalkit::AblationConfig::full).aggregate;
    const auto no_kb = run_ablation(pipeline, items, evalkit::AblationConfig::no_kb).aggregate;
    const auto no_visual = run_ablation(pipeline, items, evalkit::AblationConfig::no_visual).aggregate;
    const bool pass = full.cultural_accuracy > no_kb.cultural_accuracy &&
                      full.explanation_quality >= no_visual.explanation_quality &&
                      no_visual.explanation_quality >= no_kb.explanation_quality;
    report("ablation-direction", pass,
           fmt("accuracy full %.3f > no_kb %.3f; ", full.cultural_accuracy, no_kb.cultural_accuracy) +
               fmt("quality full %.3f >= no_visual %.3f >= no_kb %.3f", full.explanation_quality,
                   no_visual.explanation_quality, no_kb.explanation_quality));
}

void suite_runtime(const std::vector<std::string>& binaries, Clock::time_point start) {
    int failed = 0;
    for (const auto& b : binaries) {
        const std::string cmd = "\"" + b + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) ++failed;
    }
    const double t = seconds_since(start);
    report("suite-runtime", failed == 0 && t < 60.0,
           fmt("%.0f unit binaries + acceptance in %.2f s, %.0f failed (limit 60 s)",
               static_cast<double>(binaries.size()), t, failed));
}

}  // namespace

int main(int argc, char** argv) {
    const auto start = Clock::now();
    const std::vector<std::pair<const char*, std::function<void()>>> checks{
        {"metric-oracle-equivalence", metric_oracles},
        {"metric-identities", metric_identities},
        {"cohen-kappa", kappa},
        {"category-statistics", category_statistics},
        {"constructive-consistency", constructive_consistency},
        {"dsl-round-trip", dsl_round_trip},
        {"end-to-end-determinism", determinism},
        {"ablation-direction", ablation_direction}};
    for (const auto& [name, check] : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(name, false, std::string("threw: ") + e.what());
        }
    }
    suite_runtime(std::vector<std::string>(argv + 1, argv + argc), start);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
