#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvqa/explain.hpp"
#include "cvqa/jsonl.hpp"

namespace cvqa::evalkit {

using Tokens = std::vector<std::string>;

/// Whitespace tokens of the normalized (case-folded, diacritics kept) text.
Tokens tokenize(std::string_view text);

struct BleuScore {
    double value = 0.0;
    bool degenerate = false;  // empty candidate or no non-empty reference
};

/// BLEU-4: geometric mean of clipped 1..4-gram precisions times the brevity penalty.
/// For n >= 2 a zero match count is smoothed to (0+1)/(total+1).
BleuScore bleu4(const Tokens& candidate, std::span<const Tokens> references);

/// LCS-based F-measure; beta = 1 gives the symmetric F1.
double rouge_l(const Tokens& candidate, const Tokens& reference, double beta = 1.0);

/// METEOR restricted to exact unigram matches (no stemming or synonyms).
double meteor_lite(const Tokens& candidate, const Tokens& reference);

/// 1 when the prediction is one of the gold entities, else 0.
double cultural_accuracy(const std::optional<std::string>& predicted, std::span<const std::string> gold);

struct QualityWeights {
    double consistency = 0.5;
    double linked_evidence = 0.3;
    double complete = 0.2;
};

/// Weighted sum of the passing-check fraction, the linked-evidence fraction and
/// section completeness (uncertain explanations count as incomplete), clamped to [0,1].
double explanation_quality(const explain::Explanation& e, const explain::ConsistencyReport& report,
                           const QualityWeights& weights = {});

/// Cohen's kappa; 1.0 when chance agreement is total and the labels agree everywhere.
/// Throws ValidationError on length mismatch or empty input.
double cohen_kappa(std::span<const std::string> labels_a, std::span<const std::string> labels_b);

enum class AblationConfig { full, no_kb, no_visual, no_program };

std::string_view to_string(AblationConfig c);
std::optional<AblationConfig> parse_ablation_config(std::string_view name);

struct MetricRow {
    std::string item_id;
    double bleu4 = 0.0;
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    double cultural_accuracy = 0.0;
    double explanation_quality = 0.0;
    std::string error;  // non-empty when the item failed; scores are then 0

    bool operator==(const MetricRow&) const = default;
};

struct MetricAggregate {
    double bleu4 = 0.0;
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    double cultural_accuracy = 0.0;
    double explanation_quality = 0.0;

    bool operator==(const MetricAggregate&) const = default;
};

struct MetricReport {
    std::vector<MetricRow> per_item;
    MetricAggregate aggregate;
    AblationConfig config = AblationConfig::full;
    std::size_t n = 0;
    std::size_t failures = 0;
};

/// Column means over the rows, summed in row order.
MetricAggregate aggregate(std::span<const MetricRow> rows);
MetricReport make_report(std::vector<MetricRow> rows, AblationConfig config);

/// One JSON line per item followed by a summary line.
std::string report_to_jsonl(const MetricReport& report);
/// Aligned table with the columns Method/config, BLEU-4, Cultural Accuracy, Explanation Quality.
std::string report_table(std::span<const MetricReport> reports);

}  // namespace cvqa::evalkit
