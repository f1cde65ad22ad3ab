#pragma once

#include <array>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "cvqa/category.hpp"
#include "cvqa/jsonl.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/progen.hpp"

namespace cvqa::dataset {

struct QuestionRecord {
    std::string question;
    std::string answer;
    progen::QuestionType qtype = progen::QuestionType::identification;
    std::vector<std::string> gold_entities;

    bool operator==(const QuestionRecord&) const = default;
};

struct DatasetRecord {
    std::string image_id;
    std::string image_ref;
    Category category = Category::miscellaneous;
    std::string complexity;  // optional metadata
    std::vector<QuestionRecord> questions;

    bool operator==(const DatasetRecord&) const = default;
};

struct ManifestLoad {
    std::vector<DatasetRecord> records;
    std::vector<std::string> warnings;
};

/// Duplicate image ids, unknown categories and empty question lists are fatal.
/// Gold entities missing from `kb` (when given) produce warnings.
ManifestLoad load_manifest(std::istream& in, const KnowledgeBase* kb = nullptr);
ManifestLoad load_manifest_file(const std::string& path, const KnowledgeBase* kb = nullptr);

Json to_json(const DatasetRecord& record);
std::string serialize_manifest(std::span<const DatasetRecord> records);

/// Aggregate-only manifest: per-category sample counts plus declared corpus totals.
struct CountsManifest {
    std::array<long long, kCategoryCount> counts{};
    std::array<std::string, kCategoryCount> complexity{};
    long long total_images = 0;
    long long total_questions = 0;
    long long question_tokens = 0;
    long long answer_tokens = 0;
};

/// Records are {"kind":"totals", images, questions, question_tokens, answer_tokens}
/// or {"kind":"category", category, count, complexity}.
CountsManifest load_counts_manifest(std::istream& in);

/// True when the stream's first record carries a "kind" field.
bool is_counts_manifest(std::istream& in);

struct CategoryRow {
    std::string name;
    long long count = 0;
    int percent_tenths = 0;  // percentage times ten, rounded
    std::string complexity;
};

struct DatasetStats {
    std::vector<CategoryRow> categories;  // all twelve, in category order
    std::vector<CategoryRow> table_rows;  // eight named categories plus the grouped remainder
    long long total_images = 0;
    long long total_questions = 0;
    long long category_sum = 0;
    double mean_questions_per_image = 0.0;
    double mean_question_length = 0.0;
    double mean_answer_length = 0.0;
    std::vector<std::string> warnings;
};

/// Categories reported together as "Miscellaneous Categories" in the composition table.
std::span<const Category> grouped_categories();
inline constexpr std::string_view kGroupedRowName = "Miscellaneous Categories";

/// Throws ValidationError on an empty record list.
DatasetStats compute_stats(std::span<const DatasetRecord> records);
DatasetStats compute_stats(const CountsManifest& counts);

std::string format_percent(int tenths);
std::string format_stats_table(const DatasetStats& stats);
Json to_json(const DatasetStats& stats);

}  // namespace cvqa::dataset
