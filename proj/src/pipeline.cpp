#include "cvqa/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "cvqa/error.hpp"

namespace cvqa {

namespace {

KnowledgeBase load_kb_or_empty(const std::string& path) {
    if (path.empty()) return KnowledgeBase{};
    return KnowledgeBase::load_file(path);
}

std::optional<DetectionFixture> load_fixture(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return DetectionFixture::load_file(path);
}

std::vector<progen::Exemplar> load_exemplar_bundle(const std::string& path) {
    if (path.empty()) return progen::bundled_exemplars();
    std::ifstream in(path);
    if (!in) throw IoError("exemplar file", path);
    return progen::load_exemplars(in);
}

std::shared_ptr<progen::GeneratorBackend> make_backend(const PipelineConfig& c) {
    if (c.generator == GeneratorKind::fallback) return nullptr;
    return std::make_shared<progen::RemoteGenerator>(c.generator_url, c.generator_api_key);
}

// Largest region first: the fallback treats the first label as the primary one.
std::vector<std::string> labels_by_area(std::span<const Detection> detections) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].box.area() > detections[b].box.area();
    });
    std::vector<std::string> labels;
    for (auto i : order) labels.push_back(detections[i].label);
    return labels;
}

// The no_program variant: the most confident label is linked directly and its
// description becomes the answer.
dsl::ExecutionTrace direct_trace(std::span<const Detection> detections, const KnowledgeBase& kb, double threshold,
                                 const Templates& templates) {
    dsl::ExecutionTrace trace;
    dsl::TraceRecord record;
    record.step = 0;
    record.var = "entity";
    record.func = "lookup_entity";
    const auto ranked = rank_regions(detections);
    if (ranked.empty()) {
        record.unresolved = true;
    } else {
        const auto& label = detections[ranked.front()].label;
        record.inputs.push_back(label);
        auto matches = kb.match(label, MatchOptions{threshold});
        if (matches.empty()) {
            record.unresolved = true;
        } else {
            const auto& entity = kb.get(matches.front().entity_id);
            record.entities.push_back(entity.id);
            record.regions.push_back(ranked.front());
            record.output = entity.id;
            record.fragments.push_back({entity.description, entity.id, "description"});
        }
    }
    trace.answer.fragments = record.fragments;
    trace.answer.uncertain = record.unresolved;
    trace.answer.text = record.unresolved ? templates.uncertain_answer : record.fragments.front().text;
    trace.records.push_back(std::move(record));
    return trace;
}

}  // namespace

void PipelineConfig::validate() const {
    if (detections_path.empty() == detector_url.empty())
        throw ValidationError("exactly one detection source is required (--detections or --detector-url)");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
    if (generator == GeneratorKind::remote && generator_url.empty())
        throw ValidationError("the remote generator needs --generator-url");
}

Pipeline::Pipeline(PipelineConfig config)
    : Pipeline(config, load_kb_or_empty(config.kb_path), load_fixture(config.detections_path),
               load_exemplar_bundle(config.exemplars_path), make_backend(config)) {}

Pipeline::Pipeline(PipelineConfig config, KnowledgeBase kb, std::optional<DetectionFixture> fixture,
                   std::vector<progen::Exemplar> exemplars, std::shared_ptr<progen::GeneratorBackend> backend)
    : config_(std::move(config)),
      kb_(std::move(kb)),
      fixture_(std::move(fixture)),
      exemplars_(std::move(exemplars)),
      backend_(std::move(backend)) {
    config_.validate();
}

std::vector<Detection> Pipeline::detections_for(const std::string& image_id) const {
    if (fixture_) {
        const auto* found = fixture_->find(image_id);
        if (found == nullptr) throw NotFoundError("image_id in detection fixtures", image_id);
        return *found;
    }
    return fetch_detections(image_id, config_.detector_url);
}

AnswerResult Pipeline::answer(const std::string& image_id, const std::string& question) const {
    return answer(image_id, question, config_.ablation);
}

AnswerResult Pipeline::answer(const std::string& image_id, const std::string& question,
                              evalkit::AblationConfig ablation) const {
    using evalkit::AblationConfig;
    AnswerResult result;
    result.image_id = image_id;
    result.question = question;
    result.detections = detections_for(image_id);

    const KnowledgeBase& kb = ablation == AblationConfig::no_kb ? empty_kb_ : kb_;
    const auto& templates = Templates::bundled();

    if (ablation == AblationConfig::no_program) {
        result.trace = direct_trace(result.detections, kb, config_.threshold, templates);
    } else {
        const auto labels = labels_by_area(result.detections);
        progen::GenerationOptions options;
        options.allow_fallback = config_.allow_fallback;
        result.generation = progen::generate_program(question, labels, backend_.get(), options, exemplars_, &kb);
        dsl::ExecutionConfig exec;
        exec.match_threshold = config_.threshold;
        dsl::ExecutionContext ctx{result.detections, kb, question, exec, templates};
        result.trace = dsl::execute_program(result.generation.program, ctx);
    }

    explain::ExplainOptions options;
    options.evidence_k = config_.k;
    options.include_evidence = ablation != AblationConfig::no_visual;
    result.explanation =
        explain::synthesize_explanation(result.trace, kb, result.detections, question, options, templates);
    result.report = explain::check_consistency(result.explanation, result.detections, kb, result.trace, templates);
    result.predicted_entity = explain::subject_entity(result.trace, kb);
    return result;
}

std::string answer_to_jsonl(const AnswerResult& r) {
    std::string out;
    Json detections = Json::array();
    for (const auto& d : r.detections) detections.push_back(to_json(d));
    out += dump_line(Json{{"kind", "question"},
                          {"image_id", r.image_id},
                          {"question", r.question},
                          {"detections", detections}}) +
           "\n";
    if (!r.generation.program.steps.empty()) {
        out += dump_line(Json{{"kind", "program"},
                              {"source", std::string(progen::to_string(r.generation.source))},
                              {"attempts", r.generation.attempts},
                              {"text", dsl::format_program(r.generation.program)}}) +
               "\n";
    }
    out += dsl::serialize_trace(r.trace);
    out += dump_line(explain::to_json(r.explanation)) + "\n";
    out += dump_line(explain::to_json(r.report)) + "\n";
    return out;
}

std::string answer_to_text(const AnswerResult& r) {
    std::string out;
    out += "Question: " + r.question + "\n";
    out += "Answer: " + r.explanation.answer + "\n";
    if (r.explanation.uncertain) out += "(uncertain)\n";
    if (!r.generation.program.steps.empty()) {
        out += "\nProgram (" + std::string(progen::to_string(r.generation.source)) + "):\n";
        out += dsl::format_program(r.generation.program);
    }
    out += "\nIdentification: " + r.explanation.identification + "\n";
    if (!r.explanation.cultural_context.empty()) out += "Cultural context: " + r.explanation.cultural_context + "\n";
    if (!r.explanation.elaboration.empty()) out += "Elaboration: " + r.explanation.elaboration + "\n";
    if (!r.explanation.evidence.empty()) {
        out += "\nEvidence:\n";
        for (const auto& item : r.explanation.evidence) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "  [%zu] %s conf=%.2f saliency=%.3f", item.region,
                          item.detection.label.c_str(), item.detection.confidence, item.saliency);
            out += buf;
            if (item.entity_id) out += " -> " + *item.entity_id;
            out += "\n";
        }
    }
    out += "\nConsistency: " + std::string(r.report.overall() ? "pass" : "FAIL") + "\n";
    for (const auto& c : r.report.checks) {
        out += "  " + std::string(c.pass ? "ok   " : "fail ") + std::string(explain::to_string(c.id));
        if (!c.target.empty()) out += " " + c.target;
        if (!c.note.empty()) out += ": " + c.note;
        out += "\n";
    }
    return out;
}

std::vector<EvalItem> eval_items(std::span<const dataset::DatasetRecord> records) {
    std::vector<EvalItem> items;
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.questions.size(); ++i) {
            const auto& q = r.questions[i];
            items.push_back({r.image_id + "#" + std::to_string(i), r.image_id, q.question, q.answer, q.gold_entities});
        }
    }
    return items;
}

evalkit::MetricRow score_item(const Pipeline& pipeline, const EvalItem& item, evalkit::AblationConfig config) {
    evalkit::MetricRow row;
    row.item_id = item.item_id;
    try {
        const auto result = pipeline.answer(item.image_id, item.question, config);
        const auto candidate = evalkit::tokenize(result.explanation.answer);
        const std::vector<evalkit::Tokens> refs{evalkit::tokenize(item.reference)};
        row.bleu4 = evalkit::bleu4(candidate, refs).value;
        row.rouge_l = evalkit::rouge_l(candidate, refs.front());
        row.meteor_lite = evalkit::meteor_lite(candidate, refs.front());
        row.cultural_accuracy = evalkit::cultural_accuracy(result.predicted_entity, item.gold_entities);
        row.explanation_quality = evalkit::explanation_quality(result.explanation, result.report);
    } catch (const std::exception& e) {
        row = evalkit::MetricRow{};
        row.item_id = item.item_id;
        row.error = e.what();
    }
    return row;
}

evalkit::MetricReport run_ablation(const Pipeline& pipeline, std::span<const EvalItem> items,
                                   evalkit::AblationConfig config) {
    std::vector<evalkit::MetricRow> rows(items.size());
    const auto n = static_cast<long long>(items.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)] = score_item(pipeline, items[static_cast<std::size_t>(i)], config);
    }
    return evalkit::make_report(std::move(rows), config);
}

}  // namespace cvqa
