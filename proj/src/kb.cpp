#include "cvqa/kb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cvqa/error.hpp"
#include "cvqa/text.hpp"

namespace cvqa {

std::string_view to_string(MatchMethod m) { return m == MatchMethod::exact ? "exact" : "fuzzy"; }

double fuzzy_similarity(std::string_view folded_a, std::string_view folded_b, double edit_weight,
                        double token_weight) {
    const auto a = text::decode_utf8(folded_a);
    const auto b = text::decode_utf8(folded_b);
    const std::size_t longest = std::max(a.size(), b.size());
    const double edit_sim =
        longest == 0 ? 1.0 : 1.0 - static_cast<double>(text::edit_distance(a, b)) / static_cast<double>(longest);

    const auto ta = text::split_tokens(folded_a);
    const auto tb = text::split_tokens(folded_b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    std::size_t common = 0;
    for (const auto& t : sa) common += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - common;
    const double jaccard = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);

    return std::clamp(edit_weight * edit_sim + token_weight * jaccard, 0.0, 1.0);
}

CulturalEntity entity_from_json(const Json& record, std::size_t line) {
    CulturalEntity e;
    e.id = require_string(record, "id", line);
    if (e.id.empty()) throw FormatError("field \"id\" must be non-empty", line);
    e.canonical_name = require_string(record, "canonical_name", line);
    if (text::normalize_text(e.canonical_name, false).empty())
        throw FormatError("field \"canonical_name\" must be non-empty", line);
    e.aliases = string_list(record, "aliases", line, false);
    const auto category = require_string(record, "category", line);
    auto parsed = parse_category(category);
    if (!parsed) {
        throw ValidationError("line " + std::to_string(line) + ": unknown category \"" + category +
                              "\" for entity \"" + e.id + "\"");
    }
    e.category = *parsed;
    e.description = require_string(record, "description", line);
    e.historical_context = optional_string(record, "historical_context", line);
    e.ceremonial_function = optional_string(record, "ceremonial_function", line);
    if (auto it = record.find("regional_variants"); it != record.end() && !it->is_null()) {
        if (!it->is_array()) throw FormatError("field \"regional_variants\" must be a list", line);
        for (const auto& v : *it) {
            if (!v.is_object()) throw FormatError("regional variant must be an object", line);
            e.regional_variants.push_back({require_string(v, "region", line), require_string(v, "note", line)});
        }
    }
    e.source = optional_string(record, "source", line);
    return e;
}

Json to_json(const CulturalEntity& e) {
    Json variants = Json::array();
    for (const auto& v : e.regional_variants) variants.push_back(Json{{"region", v.region}, {"note", v.note}});
    return Json{{"id", e.id},
                {"canonical_name", e.canonical_name},
                {"aliases", e.aliases},
                {"category", std::string(to_string(e.category))},
                {"description", e.description},
                {"historical_context", e.historical_context},
                {"ceremonial_function", e.ceremonial_function},
                {"regional_variants", variants},
                {"source", e.source}};
}

Json to_json(const MatchCandidate& c) {
    return Json{{"entity_id", c.entity_id},
                {"score", c.score},
                {"matched_alias", c.matched_alias},
                {"method", std::string(to_string(c.method))}};
}

void KnowledgeBase::index_entity(std::size_t idx) {
    const auto& e = entities_[idx];
    std::vector<std::string> names{e.canonical_name};
    names.insert(names.end(), e.aliases.begin(), e.aliases.end());
    std::set<std::string> seen;
    for (const auto& name : names) {
        auto normalized = text::normalize_text(name, false);
        if (normalized.empty() || !seen.insert(normalized).second) continue;
        const std::size_t entry = aliases_.size();
        aliases_.push_back({idx, name, text::normalize_text(name, true)});
        exact_index_[normalized].push_back(entry);
        folded_index_[aliases_.back().folded].push_back(entry);
    }
}

KnowledgeBase KnowledgeBase::from_entities(std::vector<CulturalEntity> entities) {
    KnowledgeBase kb;
    kb.entities_ = std::move(entities);
    for (std::size_t i = 0; i < kb.entities_.size(); ++i) {
        const auto& e = kb.entities_[i];
        if (e.id.empty()) throw ValidationError("entity id must be non-empty");
        if (!kb.by_id_.emplace(e.id, i).second) throw ValidationError("duplicate entity id \"" + e.id + "\"");
        kb.index_entity(i);
    }
    return kb;
}

KnowledgeBase KnowledgeBase::load(std::istream& in) {
    std::vector<CulturalEntity> entities;
    std::unordered_map<std::string, std::size_t> first_line;
    for (const auto& rec : read_json_lines(in)) {
        auto e = entity_from_json(rec.value, rec.line);
        auto [it, inserted] = first_line.emplace(e.id, rec.line);
        if (!inserted) {
            throw ValidationError("line " + std::to_string(rec.line) + ": duplicate entity id \"" + e.id +
                                  "\" (first defined on line " + std::to_string(it->second) + ")");
        }
        entities.push_back(std::move(e));
    }
    return from_entities(std::move(entities));
}

KnowledgeBase KnowledgeBase::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("knowledge base file", path.string());
    return load(in);
}

const CulturalEntity* KnowledgeBase::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &entities_[it->second];
}

const CulturalEntity& KnowledgeBase::get(std::string_view id) const {
    if (const auto* e = find(id)) return *e;
    throw NotFoundError("entity", std::string(id));
}

std::vector<MatchCandidate> KnowledgeBase::match(std::string_view mention, const MatchOptions& options) const {
    const auto normalized = text::normalize_text(mention, false);
    if (normalized.empty() || entities_.empty()) return {};
    const auto folded = text::normalize_text(mention, true);

    auto allowed = [&](std::size_t idx) {
        return options.categories.empty() ||
               std::find(options.categories.begin(), options.categories.end(), entities_[idx].category) !=
                   options.categories.end();
    };

    // Best candidate per entity; exact hits win over any fuzzy score.
    std::vector<MatchCandidate> best(entities_.size());
    std::vector<bool> present(entities_.size(), false);
    auto offer = [&](const AliasEntry& entry, double score, MatchMethod method) {
        auto& slot = best[entry.entity];
        if (!present[entry.entity] || score > slot.score) {
            slot = {entities_[entry.entity].id, score, entry.alias, method};
            present[entry.entity] = true;
        }
    };

    for (const auto* index : {&exact_index_, &folded_index_}) {
        const auto& key = index == &exact_index_ ? normalized : folded;
        if (auto it = index->find(key); it != index->end()) {
            for (auto entry : it->second) {
                if (allowed(aliases_[entry].entity) && !present[aliases_[entry].entity])
                    offer(aliases_[entry], 1.0, MatchMethod::exact);
            }
        }
    }
    for (const auto& entry : aliases_) {
        if (!allowed(entry.entity)) continue;
        if (present[entry.entity] && best[entry.entity].method == MatchMethod::exact) continue;
        double score = fuzzy_similarity(folded, entry.folded, options.edit_weight, options.token_weight);
        // Distinct folded strings always differ by at least one edit, so fuzzy scores stay below 1.
        score = std::min(score, std::nextafter(1.0, 0.0));
        offer(entry, score, MatchMethod::fuzzy);
    }

    std::vector<MatchCandidate> out;
    for (std::size_t i = 0; i < best.size(); ++i) {
        if (present[i] && best[i].score >= options.threshold) out.push_back(std::move(best[i]));
    }
    std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity_id < b.entity_id;
    });
    return out;
}

KnowledgeBase load_kb(std::istream& in) { return KnowledgeBase::load(in); }

std::vector<MatchCandidate> match_entity(std::string_view mention, const KnowledgeBase& kb, double threshold) {
    MatchOptions options;
    options.threshold = threshold;
    return kb.match(mention, options);
}

const CulturalEntity& get_entity(std::string_view id, const KnowledgeBase& kb) { return kb.get(id); }

}  // namespace cvqa
