#include "cvqa/explain.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cvqa/text.hpp"

namespace cvqa::explain {

namespace {

bool is_linking_step(std::string_view func) { return func.starts_with("identify_") || func == "lookup_entity"; }

bool ends_sentence(std::string_view s) {
    return !s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?');
}

std::string join_sentences(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out.push_back(' ');
        out += p;
        if (!ends_sentence(p)) out.push_back('.');
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Words of normalized text, split on spaces and ASCII punctuation.
std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text::normalize_text(text, false)) {
        const auto u = static_cast<unsigned char>(c);
        const bool separator = u < 0x80 && !std::isalnum(u);
        if (separator) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

bool contains_words(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Entity -> regions it was linked to, in first-seen order, from identify_*/lookup_entity steps.
std::map<std::string, std::vector<std::size_t>> entity_links(const dsl::ExecutionTrace& trace) {
    std::map<std::string, std::vector<std::size_t>> links;
    for (const auto& r : trace.records) {
        if (!is_linking_step(r.func)) continue;
        for (const auto& id : r.entities) {
            auto& regions = links[id];
            for (auto region : r.regions) {
                if (std::find(regions.begin(), regions.end(), region) == regions.end()) regions.push_back(region);
            }
        }
    }
    return links;
}

std::set<std::string> touched_entities(const dsl::ExecutionTrace& trace) {
    std::set<std::string> ids;
    for (const auto& r : trace.records) ids.insert(r.entities.begin(), r.entities.end());
    return ids;
}

}  // namespace

std::string_view to_string(CheckId id) {
    switch (id) {
        case CheckId::entity_grounded: return "entity_grounded";
        case CheckId::region_grounded: return "region_grounded";
        case CheckId::claim_supported: return "claim_supported";
        case CheckId::section_complete: return "section_complete";
    }
    return "?";
}

bool ConsistencyReport::overall() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool ConsistencyReport::passed(CheckId id) const {
    return std::all_of(checks.begin(), checks.end(), [&](const Check& c) { return c.id != id || c.pass; });
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            if (auto t = trim(current); !t.empty()) out.push_back(std::move(t));
            current.clear();
            continue;
        }
        current.push_back(c);
        const bool boundary = (c == '.' || c == '!' || c == '?') &&
                              (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\t' ||
                               text[i + 1] == '\n' || text[i + 1] == '\r');
        if (boundary) {
            if (auto t = trim(current); !t.empty()) out.push_back(std::move(t));
            current.clear();
        }
    }
    if (auto t = trim(current); !t.empty()) out.push_back(std::move(t));
    return out;
}

std::optional<std::string> subject_entity(const dsl::ExecutionTrace& trace, const KnowledgeBase& kb) {
    const auto links = entity_links(trace);
    auto grounded = [&](const std::string& id) {
        auto it = links.find(id);
        return it != links.end() && !it->second.empty() && kb.find(id) != nullptr;
    };
    // First region-identified entity, else the first looked-up entity seen in the image.
    for (const bool identify_only : {true, false}) {
        for (const auto& r : trace.records) {
            if (!is_linking_step(r.func) || r.entities.empty()) continue;
            if (identify_only && !r.func.starts_with("identify_")) continue;
            if (grounded(r.entities.front())) return r.entities.front();
        }
    }
    return std::nullopt;
}

Explanation synthesize_explanation(const dsl::ExecutionTrace& trace, const KnowledgeBase& kb,
                                   std::span<const Detection> detections, std::string_view /*question*/,
                                   const ExplainOptions& options, const Templates& templates) {
    Explanation e;
    e.answer = trace.answer.text;

    const auto links = entity_links(trace);
    auto grounded = [&](const std::string& id) {
        auto it = links.find(id);
        return it != links.end() && !it->second.empty() && kb.find(id) != nullptr;
    };

    const auto subject = subject_entity(trace, kb);
    e.uncertain = trace.answer.uncertain || !subject;
    std::vector<std::string> named;  // entities whose names the sections may carry
    if (e.uncertain) {
        e.identification = templates.uncertain_identification;
    } else {
        const auto& entity = kb.get(*subject);
        const auto& label = detections[links.at(*subject).front()].label;
        e.identification = render_template(templates.identification, {{"label", label}, {"name", entity.canonical_name}});
        e.cultural_context = join_sentences({entity.description, entity.ceremonial_function});
        named.push_back(*subject);

        std::vector<std::string> elaboration;
        for (const auto& r : trace.records) {
            if (r.func != "compare_regional_variations" && r.func != "describe_history") continue;
            if (r.entities.empty() || !grounded(r.entities.front())) continue;
            for (const auto& f : r.fragments) {
                if (std::find(elaboration.begin(), elaboration.end(), f.text) == elaboration.end())
                    elaboration.push_back(f.text);
            }
            if (std::find(named.begin(), named.end(), r.entities.front()) == named.end())
                named.push_back(r.entities.front());
        }
        e.elaboration = join_sentences(elaboration);
    }

    if (!options.include_evidence) return e;

    std::vector<std::size_t> regions = top_region_indices(detections, options.evidence_k);
    for (const auto& id : named) {
        for (auto region : links.at(id)) {
            if (std::find(regions.begin(), regions.end(), region) == regions.end()) regions.push_back(region);
        }
    }
    double total = 0.0;
    for (auto region : regions) total += detections[region].confidence;
    for (auto region : regions) {
        EvidenceItem item;
        item.region = region;
        item.detection = detections[region];
        for (const auto& r : trace.records) {
            if (item.entity_id || !is_linking_step(r.func) || r.entities.empty()) continue;
            if (std::find(r.regions.begin(), r.regions.end(), region) != r.regions.end()) item.entity_id = r.entities.front();
        }
        item.saliency = total > 0.0 ? detections[region].confidence / total : 1.0 / static_cast<double>(regions.size());
        e.evidence.push_back(std::move(item));
    }
    return e;
}

ConsistencyReport check_consistency(const Explanation& e, std::span<const Detection> detections,
                                    const KnowledgeBase& kb, const dsl::ExecutionTrace& trace,
                                    const Templates& templates) {
    ConsistencyReport report;
    const auto touched = touched_entities(trace);

    {
        Check c{CheckId::entity_grounded, "evidence", true, ""};
        for (const auto& item : e.evidence) {
            if (!item.entity_id) continue;
            const auto& id = *item.entity_id;
            if (kb.find(id) == nullptr) {
                c.pass = false;
                c.note += "entity \"" + id + "\" is not in the knowledge base; ";
            } else if (!touched.contains(id)) {
                c.pass = false;
                c.note += "entity \"" + id + "\" was not touched by the program; ";
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        Check c{CheckId::region_grounded, "sections", true, ""};
        const auto section_words = words(e.identification + "\n" + e.cultural_context + "\n" + e.elaboration);
        auto linked = [&](const std::string& id) {
            return std::any_of(e.evidence.begin(), e.evidence.end(), [&](const EvidenceItem& item) {
                return item.entity_id == id && item.region < detections.size() &&
                       detections[item.region] == item.detection;
            });
        };
        for (const auto& entity : kb.entities()) {
            if (!contains_words(section_words, words(entity.canonical_name))) continue;
            auto candidates = match_entity(entity.canonical_name, kb, 1.0);
            const bool ok = std::any_of(candidates.begin(), candidates.end(),
                                        [&](const MatchCandidate& m) { return linked(m.entity_id); });
            if (!ok) {
                c.pass = false;
                c.note += "\"" + entity.canonical_name + "\" has no linked detected region; ";
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        Check c{CheckId::claim_supported, "cultural_context+elaboration", true, ""};
        std::vector<std::string> corpus;
        for (const auto& id : touched) {
            const auto* entity = kb.find(id);
            if (entity == nullptr) continue;
            for (const auto* field : {&entity->description, &entity->historical_context, &entity->ceremonial_function}) {
                if (!field->empty()) corpus.push_back(*field);
            }
            for (const auto& v : entity->regional_variants) {
                corpus.push_back(render_template(templates.regional_variant, {{"region", v.region}, {"note", v.note}}));
            }
        }
        for (const auto* section : {&e.cultural_context, &e.elaboration}) {
            for (const auto& sentence : split_sentences(*section)) {
                std::string claim = sentence;
                while (ends_sentence(claim)) claim.pop_back();
                claim = trim(claim);
                const bool supported =
                    !claim.empty() && std::any_of(corpus.begin(), corpus.end(), [&](const std::string& source) {
                        return source.find(claim) != std::string::npos;
                    });
                if (!supported) {
                    c.pass = false;
                    c.note += "unsupported sentence: \"" + sentence + "\"; ";
                }
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        Check c{CheckId::section_complete, "sections", true, ""};
        if (!e.uncertain) {
            if (trim(e.identification).empty()) {
                c.pass = false;
                c.note += "identification is empty; ";
            }
            if (trim(e.cultural_context).empty()) {
                c.pass = false;
                c.note += "cultural_context is empty; ";
            }
        }
        report.checks.push_back(std::move(c));
    }

    for (auto& c : report.checks) {
        if (c.note.size() >= 2) c.note.resize(c.note.size() - 2);
    }
    return report;
}

Json to_json(const Explanation& e) {
    Json evidence = Json::array();
    for (const auto& item : e.evidence) {
        evidence.push_back(Json{{"region", item.region},
                                {"detection", to_json(item.detection)},
                                {"entity_id", item.entity_id ? Json(*item.entity_id) : Json(nullptr)},
                                {"saliency", item.saliency}});
    }
    return Json{{"kind", "explanation"},
                {"answer", e.answer},
                {"uncertain", e.uncertain},
                {"sections",
                 Json{{"identification", e.identification},
                      {"cultural_context", e.cultural_context},
                      {"elaboration", e.elaboration}}},
                {"evidence", evidence}};
}

Json to_json(const ConsistencyReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        checks.push_back(Json{{"check_id", std::string(to_string(c.id))},
                              {"target", c.target},
                              {"pass", c.pass},
                              {"note", c.note}});
    }
    return Json{{"kind", "consistency"}, {"overall", report.overall()}, {"checks", checks}};
}

}  // namespace cvqa::explain
