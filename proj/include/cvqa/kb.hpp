#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cvqa/category.hpp"
#include "cvqa/jsonl.hpp"

namespace cvqa {

struct RegionalVariant {
    std::string region;
    std::string note;

    bool operator==(const RegionalVariant&) const = default;
};

struct CulturalEntity {
    std::string id;
    std::string canonical_name;
    std::vector<std::string> aliases;
    Category category = Category::miscellaneous;
    std::string description;
    std::string historical_context;
    std::string ceremonial_function;
    std::vector<RegionalVariant> regional_variants;
    std::string source;

    bool operator==(const CulturalEntity&) const = default;
};

enum class MatchMethod { exact, fuzzy };

std::string_view to_string(MatchMethod m);

struct MatchCandidate {
    std::string entity_id;
    double score = 0.0;
    std::string matched_alias;
    MatchMethod method = MatchMethod::fuzzy;

    bool operator==(const MatchCandidate&) const = default;
};

/// Matching configuration. An empty `categories` list accepts every category.
struct MatchOptions {
    double threshold = 0.75;
    double edit_weight = 0.6;
    double token_weight = 0.4;
    std::vector<Category> categories;
};

/// Lexical similarity of two diacritic-folded strings: weighted sum of
/// (1 - normalized edit distance) and token-set Jaccard. Symmetric, in [0,1].
double fuzzy_similarity(std::string_view folded_a, std::string_view folded_b, double edit_weight = 0.6,
                        double token_weight = 0.4);

/// Immutable, indexed store of cultural entities. Default-constructed stores are empty.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Reads line-delimited JSON records. Malformed records, duplicate ids and
    /// unknown categories are fatal.
    static KnowledgeBase load(std::istream& in);
    static KnowledgeBase load_file(const std::filesystem::path& path);
    static KnowledgeBase from_entities(std::vector<CulturalEntity> entities);

    /// Throws NotFoundError; ids are case-sensitive.
    const CulturalEntity& get(std::string_view id) const;
    const CulturalEntity* find(std::string_view id) const;

    /// Candidates at or above the threshold, best first (ties by entity id).
    std::vector<MatchCandidate> match(std::string_view mention, const MatchOptions& options = {}) const;

    std::span<const CulturalEntity> entities() const { return entities_; }
    std::size_t size() const { return entities_.size(); }
    bool empty() const { return entities_.empty(); }

private:
    struct AliasEntry {
        std::size_t entity;
        std::string alias;
        std::string folded;
    };

    void index_entity(std::size_t idx);

    std::vector<CulturalEntity> entities_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::vector<std::size_t>> exact_index_;   // normalized alias -> alias entries
    std::unordered_map<std::string, std::vector<std::size_t>> folded_index_;  // folded alias -> alias entries
    std::vector<AliasEntry> aliases_;
};

KnowledgeBase load_kb(std::istream& in);
std::vector<MatchCandidate> match_entity(std::string_view mention, const KnowledgeBase& kb, double threshold = 0.75);
const CulturalEntity& get_entity(std::string_view id, const KnowledgeBase& kb);

Json to_json(const CulturalEntity& entity);
CulturalEntity entity_from_json(const Json& record, std::size_t line);
Json to_json(const MatchCandidate& candidate);

}  // namespace cvqa
