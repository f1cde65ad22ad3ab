#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqa/dataset.hpp"
#include "cvqa/dsl.hpp"
#include "cvqa/evalkit.hpp"
#include "cvqa/explain.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/progen.hpp"

namespace cvqa {

enum class GeneratorKind { fallback, remote };
enum class OutputFormat { human, json_lines };

struct PipelineConfig {
    std::string kb_path;          // empty: no knowledge base file (an empty store)
    std::string detections_path;  // exactly one of detections_path / detector_url
    std::string detector_url;
    GeneratorKind generator = GeneratorKind::fallback;
    std::string generator_url;
    std::string generator_api_key;
    std::string exemplars_path;  // empty: bundled exemplars
    double threshold = 0.75;
    std::size_t k = 3;
    evalkit::AblationConfig ablation = evalkit::AblationConfig::full;
    OutputFormat format = OutputFormat::human;
    bool allow_fallback = true;

    /// Throws ValidationError when the detection source is not unique or the threshold is out of range.
    void validate() const;
};

struct AnswerResult {
    std::string image_id;
    std::string question;
    std::vector<Detection> detections;
    progen::GenerationOutcome generation;
    dsl::ExecutionTrace trace;
    explain::Explanation explanation;
    explain::ConsistencyReport report;
    std::optional<std::string> predicted_entity;
};

/// Loaded resources for one configuration. Answering is const and may run
/// concurrently for distinct items.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    Pipeline(PipelineConfig config, KnowledgeBase kb, std::optional<DetectionFixture> fixture,
             std::vector<progen::Exemplar> exemplars, std::shared_ptr<progen::GeneratorBackend> backend);

    const PipelineConfig& config() const { return config_; }
    const KnowledgeBase& kb() const { return kb_; }

    /// Throws NotFoundError when the fixture lacks `image_id`.
    std::vector<Detection> detections_for(const std::string& image_id) const;

    AnswerResult answer(const std::string& image_id, const std::string& question) const;
    AnswerResult answer(const std::string& image_id, const std::string& question,
                        evalkit::AblationConfig ablation) const;

private:
    PipelineConfig config_;
    KnowledgeBase kb_;
    KnowledgeBase empty_kb_;
    std::optional<DetectionFixture> fixture_;
    std::vector<progen::Exemplar> exemplars_;
    std::shared_ptr<progen::GeneratorBackend> backend_;
};

/// Structured output: question, program, trace steps, answer, explanation, consistency.
std::string answer_to_jsonl(const AnswerResult& result);
std::string answer_to_text(const AnswerResult& result);

struct EvalItem {
    std::string item_id;  // "<image_id>#<question index>"
    std::string image_id;
    std::string question;
    std::string reference;
    std::vector<std::string> gold_entities;
};

std::vector<EvalItem> eval_items(std::span<const dataset::DatasetRecord> records);

/// Scores one item. Pipeline errors are caught and recorded on the row.
evalkit::MetricRow score_item(const Pipeline& pipeline, const EvalItem& item, evalkit::AblationConfig config);

/// Scores every item under `config` (in parallel when OpenMP is available) and
/// aggregates in item order.
evalkit::MetricReport run_ablation(const Pipeline& pipeline, std::span<const EvalItem> items,
                                   evalkit::AblationConfig config);

}  // namespace cvqa
