#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvqa/dsl.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/templates.hpp"

namespace cvqa::explain {

struct EvidenceItem {
    std::size_t region = 0;  // index into the detection list
    Detection detection;
    std::optional<std::string> entity_id;
    double saliency = 0.0;

    bool operator==(const EvidenceItem&) const = default;
};

struct Explanation {
    std::string answer;
    std::string identification;
    std::string cultural_context;
    std::string elaboration;
    std::vector<EvidenceItem> evidence;
    bool uncertain = false;

    bool operator==(const Explanation&) const = default;
};

enum class CheckId { entity_grounded, region_grounded, claim_supported, section_complete };

std::string_view to_string(CheckId id);

struct Check {
    CheckId id;
    std::string target;
    bool pass = true;
    std::string note;
};

struct ConsistencyReport {
    std::vector<Check> checks;

    bool overall() const;
    bool passed(CheckId id) const;
};

struct ExplainOptions {
    std::size_t evidence_k = 3;
    bool include_evidence = true;
};

/// The entity an explanation is about: the first identify_* result linked to a
/// region, else the first such lookup_entity result.
std::optional<std::string> subject_entity(const dsl::ExecutionTrace& trace, const KnowledgeBase& kb);

/// Builds the identification / cultural-context / elaboration sections from the
/// trace and the knowledge base. Evidence is the top-k regions plus every region
/// linked to an entity the text talks about.
Explanation synthesize_explanation(const dsl::ExecutionTrace& trace, const KnowledgeBase& kb,
                                   std::span<const Detection> detections, std::string_view question,
                                   const ExplainOptions& options = {},
                                   const Templates& templates = Templates::bundled());

/// Verifies that evidence entities exist and were touched, that every entity named
/// in the text is linked to a detected region, that every context sentence comes
/// from a knowledge-base field of a touched entity, and that sections are present.
ConsistencyReport check_consistency(const Explanation& e, std::span<const Detection> detections,
                                    const KnowledgeBase& kb, const dsl::ExecutionTrace& trace,
                                    const Templates& templates = Templates::bundled());

/// Splits text after '.', '!' or '?' followed by whitespace, and at newlines.
std::vector<std::string> split_sentences(std::string_view text);

/// SVG 1.1 document with one rect and one label per evidence item.
std::string render_overlay_svg(const Explanation& e, int width_px, int height_px);

Json to_json(const Explanation& e);
Json to_json(const ConsistencyReport& report);

}  // namespace cvqa::explain
